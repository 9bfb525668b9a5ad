#include "dqa/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "dqa/error.hpp"

namespace dqa::eval {

MatchSet match(std::span<const GateCandidate> gts, std::span<const GateCandidate> preds) {
  MatchSet out;
  out.n_gt = gts.size();
  for (std::size_t g = 0; g < gts.size(); ++g) {
    if (preds.empty()) {
      out.unmatched_gt.push_back(g);
      continue;
    }
    const Point c = gts[g].box.centroid();
    std::size_t best = 0;
    double best_d = 0.0;
    for (std::size_t p = 0; p < preds.size(); ++p) {
      const Point q = preds[p].box.centroid();
      const double d = std::hypot(q.x - c.x, q.y - c.y);
      if (p == 0 || d < best_d) {
        best = p;
        best_d = d;
      }
    }
    out.pairs.push_back({g, best, best_d});
  }
  return out;
}

double sensitivity(const MatchSet& matches, double n) {
  if (!(n > 0.0)) throw Error(Errc::invalid_argument, "threshold n must be positive");
  if (matches.n_gt == 0) throw Error(Errc::no_ground_truth, "no ground-truth boxes");
  std::size_t hit = 0;
  for (const auto& p : matches.pairs) {
    if (p.distance < n) ++hit;
  }
  return 100.0 * static_cast<double>(hit) / static_cast<double>(matches.n_gt);
}

double mean_angle_error(std::span<const GateCandidate> gts, std::span<const GateCandidate> preds,
                        const MatchSet& matches, double n, bool fold) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& p : matches.pairs) {
    if (!(p.distance < n)) continue;
    if (p.gt >= gts.size() || p.pred >= preds.size()) {
      throw Error(Errc::invalid_argument, "match set does not belong to these boxes");
    }
    double d = std::abs(gts[p.gt].vessel_angle_deg - preds[p.pred].vessel_angle_deg);
    if (fold) {
      d = std::fmod(d, 180.0);
      d = std::min(d, 180.0 - d);
    }
    sum += d;
    ++count;
  }
  if (count == 0) throw Error(Errc::no_matches, "no pair lies within the threshold");
  return sum / static_cast<double>(count);
}

EvalCurve sweep(std::span<const GateCandidate> gts, std::span<const GateCandidate> preds,
                std::span<const double> n_range, bool fold) {
  for (std::size_t i = 0; i < n_range.size(); ++i) {
    if (!(n_range[i] > 0.0) || (i > 0 && !(n_range[i] > n_range[i - 1]))) {
      throw Error(Errc::invalid_argument, "n range must be positive and ascending");
    }
  }
  const MatchSet m = match(gts, preds);
  EvalCurve curve;
  for (double n : n_range) {
    curve.n_values.push_back(n);
    curve.sensitivity.push_back(sensitivity(m, n));
    try {
      curve.mean_angle_err.emplace_back(mean_angle_error(gts, preds, m, n, fold));
    } catch (const Error& e) {
      if (e.code() != Errc::no_matches) throw;
      curve.mean_angle_err.emplace_back(std::nullopt);
    }
  }
  return curve;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw Error(Errc::invalid_argument,
              "line " + std::to_string(line_no) + ": '" + s + "' is not a number");
}

}  // namespace

std::vector<GateCandidate> read_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  std::vector<GateCandidate> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto cells = split(line);
    if (!header) {
      const std::vector<std::string> want{"x_center", "y_center", "angle_deg", "score"};
      if (cells != want) {
        throw Error(Errc::invalid_argument,
                    "expected header x_center,y_center,angle_deg,score, got '" + line + "'");
      }
      header = true;
      continue;
    }
    if (cells.size() != 4) {
      throw Error(Errc::invalid_argument,
                  "line " + std::to_string(line_no) + ": expected 4 fields");
    }
    GateCandidate g;
    const double x = to_double(cells[0], line_no);
    const double y = to_double(cells[1], line_no);
    g.box = {x, y, x, y};
    g.vessel_angle_deg = to_double(cells[2], line_no);
    g.score = to_double(cells[3], line_no);
    out.push_back(g);
  }
  if (!header) throw Error(Errc::invalid_argument, "CSV has no header");
  return out;
}

std::string write_csv(const EvalCurve& curve) {
  std::string out = "n,sensitivity_pct,mean_angle_err_deg\n";
  char buf[128];
  for (std::size_t i = 0; i < curve.n_values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,", curve.n_values[i], curve.sensitivity[i]);
    out += buf;
    if (curve.mean_angle_err[i]) {
      std::snprintf(buf, sizeof buf, "%.6f", *curve.mean_angle_err[i]);
      out += buf;
    } else {
      out += "NA";
    }
    out += '\n';
  }
  return out;
}

}  // namespace dqa::eval
