#include "dqa/config.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

#include "dqa/error.hpp"
#include "json.hpp"

namespace dqa {

using nlohmann::json;

std::vector<double> EvalOptions::n_range() const {
  std::vector<double> out;
  for (int i = 0;; ++i) {
    const double n = n_min + i * n_step;
    if (n > n_max + 1e-9 * std::max(1.0, std::abs(n_max))) break;
    out.push_back(n);
  }
  return out;
}

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw Error(Errc::config, key + ": " + why);
}

struct Field {
  std::function<void(RunConfig&, const json&)> assign;
  std::function<json(const RunConfig&)> read;
};

using Registry = std::map<std::string, Field>;

template <typename Get>
Field real(Get get, double lo, double hi, bool lo_open = false, bool hi_open = false) {
  return {[=](RunConfig& c, const json& v) {
            if (!v.is_number()) bad("", "expected a number");
            const double x = v.get<double>();
            const bool ok = std::isfinite(x) && (lo_open ? x > lo : x >= lo) &&
                            (hi_open ? x < hi : x <= hi);
            if (!ok) {
              std::ostringstream msg;
              msg << x << " outside " << (lo_open ? "(" : "[") << lo << ", " << hi
                  << (hi_open ? ")" : "]");
              bad("", msg.str());
            }
            get(c) = x;
          },
          [=](const RunConfig& c) { return json(get(const_cast<RunConfig&>(c))); }};
}

template <typename Get>
Field integer(Get get, long lo, long hi) {
  return {[=](RunConfig& c, const json& v) {
            if (!v.is_number_integer()) bad("", "expected an integer");
            const long x = v.get<long>();
            if (x < lo || x > hi) {
              bad("", std::to_string(x) + " outside [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "]");
            }
            get(c) = static_cast<std::remove_reference_t<decltype(get(c))>>(x);
          },
          [=](const RunConfig& c) { return json(get(const_cast<RunConfig&>(c))); }};
}

template <typename Get>
Field boolean(Get get) {
  return {[=](RunConfig& c, const json& v) {
            if (!v.is_boolean()) bad("", "expected true or false");
            get(c) = v.get<bool>();
          },
          [=](const RunConfig& c) { return json(get(const_cast<RunConfig&>(c))); }};
}

template <typename Get>
Field triple(Get get) {
  return {[=](RunConfig& c, const json& v) {
            if (!v.is_array() || v.size() != 3) bad("", "expected [r, g, b]");
            std::array<std::uint8_t, 3> out{};
            for (int i = 0; i < 3; ++i) {
              if (!v[i].is_number_integer() || v[i].get<int>() < 0 || v[i].get<int>() > 255) {
                bad("", "channel values must be integers in [0, 255]");
              }
              out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v[i].get<int>());
            }
            get(c) = out;
          },
          [=](const RunConfig& c) {
            const auto& v = get(const_cast<RunConfig&>(c));
            return json::array({v[0], v[1], v[2]});
          }};
}

const Registry& registry() {
  static const Registry reg = [] {
    Registry r;
    constexpr double inf = 1e300;
    // vision-primitives
    r["vision-primitives.threshold.green_lo"] = triple([](RunConfig& c) -> std::array<std::uint8_t, 3>& { return c.probe.green.lo; });
    r["vision-primitives.threshold.green_hi"] = triple([](RunConfig& c) -> std::array<std::uint8_t, 3>& { return c.probe.green.hi; });
    r["vision-primitives.watershed.marker_erosion_px"] =
        integer([](RunConfig& c) -> int& { return c.probe.watershed.marker_erosion_px; }, 1, 64);
    r["vision-primitives.watershed.min_marker_px"] =
        integer([](RunConfig& c) -> int& { return c.probe.watershed.min_marker_px; }, 1, 1 << 30);
    r["vision-primitives.hough.theta_step_deg"] =
        real([](RunConfig& c) -> double& { return c.probe.hough.theta_step_deg; }, 0, 45, true);
    r["vision-primitives.hough.rho_res"] =
        real([](RunConfig& c) -> double& { return c.probe.hough.rho_res; }, 0, 100, true);
    r["vision-primitives.hough.nms_rho_px"] =
        real([](RunConfig& c) -> double& { return c.probe.hough.nms_rho_px; }, 0, inf);
    r["vision-primitives.hough.nms_theta_deg"] =
        real([](RunConfig& c) -> double& { return c.probe.hough.nms_theta_deg; }, 0, 90);
    r["vision-primitives.circle.suppression_px"] =
        real([](RunConfig& c) -> double& { return c.probe.arc_suppression_px; }, 0, inf);
    // probe-geometry
    r["probe-geometry.min_votes"] =
        integer([](RunConfig& c) -> int& { return c.probe.min_votes; }, 0, 1000000);
    r["probe-geometry.min_votes_run_fraction"] =
        real([](RunConfig& c) -> double& { return c.probe.min_votes_run_fraction; }, 0, 1, true);
    r["probe-geometry.parallel_reject_deg"] =
        real([](RunConfig& c) -> double& { return c.probe.parallel_reject_deg; }, 0, 90, false, true);
    r["probe-geometry.refine_band_px"] =
        real([](RunConfig& c) -> double& { return c.probe.refine_band_px; }, 0, inf, true);
    r["probe-geometry.arc_min_votes"] =
        integer([](RunConfig& c) -> int& { return c.probe.arc_min_votes; }, 1, 1000000);
    r["probe-geometry.arc_min_radius_px"] =
        real([](RunConfig& c) -> double& { return c.probe.arc_min_radius_px; }, 0, inf);
    r["probe-geometry.isuog_max_angle_deg"] =
        real([](RunConfig& c) -> double& { return c.probe.isuog_max_angle_deg; }, 0, 90, true);
    // spectrum-qa
    r["spectrum-qa.overlay_std_threshold"] =
        real([](RunConfig& c) -> double& { return c.spectrum.overlay_std_threshold; }, 0, 1);
    r["spectrum-qa.overlay_dilation_px"] =
        integer([](RunConfig& c) -> int& { return c.spectrum.overlay_dilation_px; }, 0, 64);
    r["spectrum-qa.beta"] = real([](RunConfig& c) -> double& { return c.spectrum.beta; }, 0, 1e6, true);
    r["spectrum-qa.envelope_sigma"] =
        real([](RunConfig& c) -> double& { return c.spectrum.envelope_sigma; }, 0, 1000);
    r["spectrum-qa.min_distance"] =
        integer([](RunConfig& c) -> int& { return c.spectrum.min_distance; }, 1, 100000);
    r["spectrum-qa.seeds.top_rows_fraction"] =
        real([](RunConfig& c) -> double& { return c.spectrum.seeds.top_rows_fraction; }, 0, 1);
    r["spectrum-qa.seeds.top_bg_max"] =
        real([](RunConfig& c) -> double& { return c.spectrum.seeds.top_bg_max; }, 0, 1);
    r["spectrum-qa.seeds.border_bg_max"] =
        real([](RunConfig& c) -> double& { return c.spectrum.seeds.border_bg_max; }, 0, 1);
    r["spectrum-qa.seeds.fg_min"] =
        real([](RunConfig& c) -> double& { return c.spectrum.seeds.fg_min; }, 0, 1);
    r["spectrum-qa.axis.ridge_min"] =
        real([](RunConfig& c) -> double& { return c.spectrum.axis.ridge_min; }, 0, 1, true);
    r["spectrum-qa.axis.ridge_offset"] =
        integer([](RunConfig& c) -> int& { return c.spectrum.axis.ridge_offset; }, 1, 64);
    r["spectrum-qa.axis.theta_window_deg"] =
        real([](RunConfig& c) -> double& { return c.spectrum.axis.theta_window_deg; }, 0, 45);
    r["spectrum-qa.axis.theta_step_deg"] =
        real([](RunConfig& c) -> double& { return c.spectrum.axis.theta_step_deg; }, 0, 10, true);
    r["spectrum-qa.axis.min_votes_fraction"] =
        real([](RunConfig& c) -> double& { return c.spectrum.axis.min_votes_fraction; }, 0, 1, true);
    r["spectrum-qa.rules.clarity_good"] =
        real([](RunConfig& c) -> double& { return c.spectrum.rules.clarity_good; }, 0, 1);
    r["spectrum-qa.rules.clarity_poor"] =
        real([](RunConfig& c) -> double& { return c.spectrum.rules.clarity_poor; }, 0, 1);
    r["spectrum-qa.rules.range_pct"] =
        real([](RunConfig& c) -> double& { return c.spectrum.rules.range_pct; }, 0, 100);
    r["spectrum-qa.rules.sweep_min"] =
        integer([](RunConfig& c) -> int& { return c.spectrum.rules.sweep_min; }, 0, 1000);
    r["spectrum-qa.rules.sweep_max"] =
        integer([](RunConfig& c) -> int& { return c.spectrum.rules.sweep_max; }, 0, 1000);
    r["spectrum-qa.rules.clarity_run"] =
        integer([](RunConfig& c) -> int& { return c.spectrum.rules.clarity_run; }, 1, 1000);
    r["spectrum-qa.mean_mode"] = {
        [](RunConfig& c, const json& v) {
          if (v == "foreground") c.spectrum.mean_mode = spectrum::MeanMode::foreground;
          else if (v == "columns") c.spectrum.mean_mode = spectrum::MeanMode::columns;
          else bad("", "expected \"foreground\" or \"columns\"");
        },
        [](const RunConfig& c) {
          return json(c.spectrum.mean_mode == spectrum::MeanMode::foreground ? "foreground"
                                                                             : "columns");
        }};
    // solver
    r["solver.tolerance"] =
        real([](RunConfig& c) -> double& { return c.spectrum.solver.tolerance; }, 0, 1, true, true);
    r["solver.max_iterations"] =
        integer([](RunConfig& c) -> int& { return c.spectrum.solver.max_iterations; }, 0, 100000000);
    // eval-harness
    r["eval-harness.n_min"] = real([](RunConfig& c) -> double& { return c.eval.n_min; }, 0, inf, true);
    r["eval-harness.n_max"] = real([](RunConfig& c) -> double& { return c.eval.n_max; }, 0, inf, true);
    r["eval-harness.n_step"] = real([](RunConfig& c) -> double& { return c.eval.n_step; }, 0, inf, true);
    r["eval-harness.fold"] = boolean([](RunConfig& c) -> bool& { return c.eval.fold; });
    // cli
    r["cli.jobs"] = integer([](RunConfig& c) -> int& { return c.jobs; }, 0, 1024);
    r["cli.overlay"] = boolean([](RunConfig& c) -> bool& { return c.overlay; });
    return r;
  }();
  return reg;
}

void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, json>>& out) {
  if (!j.is_object()) {
    out.emplace_back(prefix, j);
    return;
  }
  for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
}

void check_consistency(const RunConfig& c) {
  if (c.spectrum.rules.clarity_poor > c.spectrum.rules.clarity_good) {
    bad("spectrum-qa.rules", "clarity_poor must not exceed clarity_good");
  }
  if (c.spectrum.rules.sweep_min > c.spectrum.rules.sweep_max) {
    bad("spectrum-qa.rules", "sweep_min must not exceed sweep_max");
  }
  if (c.eval.n_min > c.eval.n_max) bad("eval-harness", "n_min must not exceed n_max");
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& json_value) {
  const auto& reg = registry();
  const auto it = reg.find(key);
  if (it == reg.end()) bad(key, "unknown configuration key");
  json v = json::parse(json_value, nullptr, false);
  if (v.is_discarded()) v = json_value;
  try {
    it->second.assign(*this, v);
  } catch (const Error& e) {
    bad(key, std::string(e.what()).substr(2));
  }
  check_consistency(*this);
}

void RunConfig::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(Errc::config, "override '" + assignment + "' is not key=value");
  }
  set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

void RunConfig::load_json(const std::string& text) {
  const json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(Errc::config, "configuration is not a JSON object");
  }
  std::vector<std::pair<std::string, json>> entries;
  flatten(doc, "", entries);
  const auto& reg = registry();
  for (const auto& [key, value] : entries) {
    const auto it = reg.find(key);
    if (it == reg.end()) bad(key, "unknown configuration key");
    try {
      it->second.assign(*this, value);
    } catch (const Error& e) {
      bad(key, std::string(e.what()).substr(2));
    }
  }
  check_consistency(*this);
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::config, "cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  load_json(ss.str());
}

int RunConfig::workers() const {
  if (jobs > 0) return jobs;
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& [k, v] : registry()) out.push_back(k);
  return out;
}

std::string describe(const RunConfig& config) {
  std::string out;
  for (const auto& [k, f] : registry()) out += k + " = " + f.read(config).dump() + "\n";
  return out;
}

}  // namespace dqa
