#pragma once

#include <functional>
#include <span>

#include "dqa/kernels.hpp"

namespace dqa {

struct SolverOptions {
  /// Stop when ||b - Ax|| <= tolerance * ||b||.
  double tolerance = 1e-6;
  /// 0 selects the default cap, 10 * sqrt(unknowns) + 1000.
  int max_iterations = 0;
  kernels::Exec exec = kernels::Exec::parallel;
};

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

int default_iteration_cap(std::size_t unknowns);

using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

// Jacobi-preconditioned conjugate gradients for a symmetric positive (semi)definite
// operator. x holds the initial guess on entry. Entries whose diagonal is zero are
// treated as fixed: their preconditioner weight is 1 and the operator is expected
// to return 0 there. Throws Errc::no_convergence when the iteration cap is hit.
SolveStats solve_pcg(const LinearOperator& apply, std::span<const double> diagonal,
                     std::span<const double> b, std::span<double> x, std::size_t unknowns,
                     const SolverOptions& options);

}  // namespace dqa
