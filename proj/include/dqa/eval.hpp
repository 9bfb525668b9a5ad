#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dqa/probe.hpp"

namespace dqa::eval {

struct MatchPair {
  std::size_t gt = 0;
  std::size_t pred = 0;
  double distance = 0.0;
};

struct MatchSet {
  std::vector<MatchPair> pairs;
  std::vector<std::size_t> unmatched_gt;
  std::size_t n_gt = 0;
};

/// Nearest prediction (by centroid) for every ground truth; ties go to the lower index.
MatchSet match(std::span<const GateCandidate> gts, std::span<const GateCandidate> preds);

/// Percent of ground truths whose match lies strictly closer than n.
double sensitivity(const MatchSet& matches, double n);

/// Mean absolute angle difference over pairs closer than n.
double mean_angle_error(std::span<const GateCandidate> gts, std::span<const GateCandidate> preds,
                        const MatchSet& matches, double n, bool fold = false);

struct EvalCurve {
  std::vector<double> n_values;
  std::vector<double> sensitivity;
  std::vector<std::optional<double>> mean_angle_err;  ///< empty where no pair qualifies
};

EvalCurve sweep(std::span<const GateCandidate> gts, std::span<const GateCandidate> preds,
                std::span<const double> n_range, bool fold = false);

/// Rows of x_center,y_center,angle_deg,score; each becomes a zero-size box at the centre.
std::vector<GateCandidate> read_csv(const std::string& text);
std::string write_csv(const EvalCurve& curve);

}  // namespace dqa::eval
