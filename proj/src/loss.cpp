#include "dqa/loss.hpp"

#include <cmath>
#include <string>

#include "dqa/error.hpp"

namespace dqa::loss {

double smooth_l1(double x) {
  const double ax = std::abs(x);
  return ax < 1.0 ? 0.5 * x * x : ax - 0.5;
}

double smooth_l1(const std::array<double, 4>& x) {
  double s = 0.0;
  for (double v : x) s += smooth_l1(v);
  return s;
}

double smooth_l1_derivative(double x) {
  if (std::abs(x) < 1.0) return x;
  return x > 0.0 ? 1.0 : -1.0;
}

double cls_loss(double p, int p_star) {
  if (p_star != 0 && p_star != 1) throw Error(Errc::domain, "p* must be 0 or 1");
  if (!(p >= 0.0 && p <= 1.0)) throw Error(Errc::domain, "probability outside [0, 1]");
  if (p_star == 1) {
    if (p <= 0.0) throw Error(Errc::domain, "log(0) for a positive ROI");
    return -std::log(p);
  }
  if (p >= 1.0) throw Error(Errc::domain, "log(0) for a negative ROI");
  return -std::log1p(-p);
}

void validate(const RoiBatch& batch, const LossConfig& cfg) {
  if (batch.predictions.size() != batch.truths.size()) {
    throw Error(Errc::dimension_mismatch, "predictions and truths differ in length");
  }
  if (!(cfg.n_cls >= 1.0) || !(cfg.n_reg >= 1.0)) {
    throw Error(Errc::invalid_argument, "n_cls and n_reg must be >= 1");
  }
  if (!(cfg.lambda >= 0.0) || !(cfg.mu >= 0.0)) {
    throw Error(Errc::invalid_argument, "lambda and mu must be >= 0");
  }
}

namespace {

std::array<double, 4> residual(const RoiPrediction& p, const RoiTruth& t) {
  return {p.t[0] - t.t_star[0], p.t[1] - t.t_star[1], p.t[2] - t.t_star[2],
          p.t[3] - t.t_star[3]};
}

}  // namespace

double faster_rcnn_loss(const RoiBatch& batch, const LossConfig& cfg) {
  validate(batch, cfg);
  double cls = 0.0, reg = 0.0;
  for (std::size_t i = 0; i < batch.predictions.size(); ++i) {
    const auto& pred = batch.predictions[i];
    const auto& truth = batch.truths[i];
    cls += cls_loss(pred.p, truth.p_star);
    if (truth.p_star == 1) reg += smooth_l1(residual(pred, truth));
  }
  return cls / cfg.n_cls + cfg.lambda * (reg / cfg.n_reg);
}

double angle_loss(const RoiBatch& batch, const LossConfig& cfg) {
  validate(batch, cfg);
  double sum = 0.0;
  for (std::size_t i = 0; i < batch.predictions.size(); ++i) {
    if (batch.truths[i].p_star == 1) {
      sum += smooth_l1(batch.predictions[i].a - batch.truths[i].a_star);
    }
  }
  return cfg.mu * (sum / cfg.n_reg);
}

double total_loss(const RoiBatch& batch, const LossConfig& cfg) {
  return faster_rcnn_loss(batch, cfg) + angle_loss(batch, cfg);
}

LossGradient total_loss_gradient(const RoiBatch& batch, const LossConfig& cfg) {
  validate(batch, cfg);
  const std::size_t n = batch.predictions.size();
  LossGradient g;
  g.d_p.resize(n);
  g.d_t.resize(n);
  g.d_a.resize(n);
  auto check_kink = [](double x, std::size_t i) {
    if (std::abs(std::abs(x) - 1.0) <= 1e-9) {
      throw Error(Errc::kink, "residual of ROI " + std::to_string(i) + " is on |x| = 1");
    }
  };
  for (std::size_t i = 0; i < n; ++i) {
    const auto& pred = batch.predictions[i];
    const auto& truth = batch.truths[i];
    cls_loss(pred.p, truth.p_star);  // domain check
    g.d_p[i] = truth.p_star == 1 ? -1.0 / (pred.p * cfg.n_cls)
                                 : 1.0 / ((1.0 - pred.p) * cfg.n_cls);
    g.d_t[i] = {0.0, 0.0, 0.0, 0.0};
    g.d_a[i] = 0.0;
    if (truth.p_star != 1) continue;
    const auto r = residual(pred, truth);
    for (std::size_t k = 0; k < 4; ++k) {
      check_kink(r[k], i);
      g.d_t[i][k] = cfg.lambda / cfg.n_reg * smooth_l1_derivative(r[k]);
    }
    const double da = pred.a - truth.a_star;
    check_kink(da, i);
    g.d_a[i] = cfg.mu / cfg.n_reg * smooth_l1_derivative(da);
  }
  return g;
}

}  // namespace dqa::loss
