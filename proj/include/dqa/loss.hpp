#pragma once

// Multi-task detection loss: log-loss classification, smooth-L1 box regression and
// an extra smooth-L1 term regressing the vessel angle of each positive ROI.

#include <array>
#include <vector>

namespace dqa::loss {

struct RoiPrediction {
  double p = 0.5;                   ///< predicted object probability
  std::array<double, 4> t{};        ///< box parameters, opaque to the loss
  double a = 0.0;                   ///< predicted angle (caller's units)
};

struct RoiTruth {
  int p_star = 0;                   ///< 1 for a positive ROI, 0 otherwise
  std::array<double, 4> t_star{};
  double a_star = 0.0;
};

struct RoiBatch {
  std::vector<RoiPrediction> predictions;
  std::vector<RoiTruth> truths;
};

struct LossConfig {
  double lambda = 1.0;
  double mu = 10.0;
  double n_cls = 1.0;
  double n_reg = 1.0;
};

struct LossGradient {
  std::vector<double> d_p;
  std::vector<std::array<double, 4>> d_t;
  std::vector<double> d_a;
};

double smooth_l1(double x);
double smooth_l1(const std::array<double, 4>& x);
double smooth_l1_derivative(double x);

/// -[p* ln p + (1 - p*) ln(1 - p)]; throws Errc::domain outside the admissible range.
double cls_loss(double p, int p_star);

void validate(const RoiBatch& batch, const LossConfig& cfg);

double faster_rcnn_loss(const RoiBatch& batch, const LossConfig& cfg);
/// mu / n_reg * sum p*_i smooth_l1(a_i - a*_i)
double angle_loss(const RoiBatch& batch, const LossConfig& cfg);
double total_loss(const RoiBatch& batch, const LossConfig& cfg);

// Analytic partial derivatives of total_loss. Throws Errc::kink when a residual of a
// positive ROI sits on the smooth-L1 break point |x| = 1 (within 1e-9).
LossGradient total_loss_gradient(const RoiBatch& batch, const LossConfig& cfg);

}  // namespace dqa::loss
