#include "dqa/solver.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "dqa/error.hpp"

namespace dqa {

int default_iteration_cap(std::size_t unknowns) {
  return static_cast<int>(10.0 * std::sqrt(static_cast<double>(unknowns))) + 1000;
}

SolveStats solve_pcg(const LinearOperator& apply, std::span<const double> diagonal,
                     std::span<const double> b, std::span<double> x, std::size_t unknowns,
                     const SolverOptions& options) {
  using kernels::dot;
  const std::size_t n = b.size();
  const auto exec = options.exec;
  const int cap = options.max_iterations > 0 ? options.max_iterations
                                             : default_iteration_cap(unknowns);

  std::vector<double> inv_diag(n);
  for (std::size_t i = 0; i < n; ++i) {
    inv_diag[i] = diagonal[i] > 0.0 ? 1.0 / diagonal[i] : 1.0;
  }

  const double b_norm = std::sqrt(dot(b, b, exec));
  SolveStats stats;
  if (b_norm == 0.0) {
    // zero right-hand side: the unique minimiser is 0
    std::fill(x.begin(), x.end(), 0.0);
    return stats;
  }

  std::vector<double> r(n), z(n), p(n), q(n);
  apply(x, q);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];

  double r_norm = std::sqrt(dot(r, r, exec));
  stats.relative_residual = r_norm / b_norm;
  if (stats.relative_residual <= options.tolerance) return stats;

  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = dot(r, z, exec);

  for (int it = 1; it <= cap; ++it) {
    apply(p, q);
    const double pq = dot(p, q, exec);
    if (!(pq > 0.0)) {
      // search direction lies in the null space; the current iterate is the best we get
      stats.iterations = it;
      break;
    }
    const double alpha = rz / pq;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    r_norm = std::sqrt(dot(r, r, exec));
    stats.iterations = it;
    stats.relative_residual = r_norm / b_norm;
    if (stats.relative_residual <= options.tolerance) return stats;

    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_next = dot(r, z, exec);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }

  if (stats.relative_residual > options.tolerance) {
    throw Error(Errc::no_convergence,
                "conjugate gradients stopped after " + std::to_string(stats.iterations) +
                    " iterations at relative residual " + std::to_string(stats.relative_residual));
  }
  return stats;
}

}  // namespace dqa
