#include "dqa/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dqa/draw.hpp"
#include "dqa/error.hpp"
#include "dqa/vision.hpp"
#include "json.hpp"

namespace dqa::synth {

using nlohmann::json;

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double mag = std::sqrt(-2.0 * std::log(u1));
  spare_ = mag * std::sin(2.0 * kPi * u2);
  has_spare_ = true;
  return mag * std::cos(2.0 * kPi * u2);
}

namespace {

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::invalid_spec, what);
}

PolarLine line_through(Point p, double dir) {
  double theta = std::fmod(dir + kPi / 2.0, kPi);
  if (theta < 0.0) theta += kPi;
  return {p.x * std::cos(theta) + p.y * std::sin(theta), theta, 0};
}

}  // namespace

std::pair<RasterImage, WedgeTruth> gen_wedge(const WedgeSpec& spec) {
  require(spec.half_angle_deg > 0.0 && spec.half_angle_deg < 90.0,
          "half_angle_deg must lie in (0, 90)");
  require(spec.inner_radius >= 0.0 && spec.inner_radius < spec.outer_radius,
          "radii must satisfy 0 <= inner < outer");
  require(spec.width > 0 && spec.height > 0, "image size must be positive");
  require(spec.noise >= 0.0 && spec.noise <= 1.0, "noise must lie in [0, 1]");
  require(spec.edge_thickness > 0.0, "edge_thickness must be positive");
  require(spec.speckle >= 0.0 && spec.speckle <= 255.0, "speckle must lie in [0, 255]");

  Rng rng(spec.seed);
  RasterImage img(spec.width, spec.height, 3, 0);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const auto v = static_cast<std::uint8_t>(std::floor(rng.uniform() * spec.speckle));
      img.set_rgb(x, y, {v, v, v});
    }
  }

  const double a = deg2rad(spec.half_angle_deg);
  const double dirs[2] = {kPi / 2.0 + a, kPi / 2.0 - a};
  WedgeTruth truth;
  truth.half_angle_deg = spec.half_angle_deg;
  truth.probe.apex = spec.apex;
  for (double d : dirs) {
    const Point u{std::cos(d), std::sin(d)};
    const Point p0{spec.apex.x + spec.inner_radius * u.x, spec.apex.y + spec.inner_radius * u.y};
    const Point p1{spec.apex.x + spec.outer_radius * u.x, spec.apex.y + spec.outer_radius * u.y};
    draw::segment(img, p0, p1, spec.edge_thickness, draw::kGreen);
    truth.probe.edge_lines.push_back(line_through(spec.apex, d));
  }
  if (spec.arcs) {
    for (double r : {spec.inner_radius, spec.outer_radius}) {
      if (r <= 0.0) continue;
      draw::arc(img, spec.apex, r, dirs[1], dirs[0], spec.edge_thickness, draw::kGreen);
      truth.probe.arcs.push_back({spec.apex, r, 0});
    }
  }
  truth.probe.verified = !truth.probe.arcs.empty();

  std::size_t drawn = 0;
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) drawn += img.rgb(x, y) == draw::kGreen;
  }
  if (drawn == 0) throw Error(Errc::off_canvas, "wedge lies entirely outside the image");

  if (spec.noise > 0.0) {
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        if (rng.uniform() < spec.noise) img.set_rgb(x, y, draw::kGreen);
      }
    }
  }
  return {std::move(img), std::move(truth)};
}

RasterImage gen_linear_box(int width, int height, Box box, double thickness) {
  require(width > 0 && height > 0, "image size must be positive");
  RasterImage img(width, height, 3, 0);
  draw::box(img, box.x0, box.y0, box.x1, box.y1, thickness, draw::kGreen);
  return img;
}

int spectrum_width(const SpectrumSpec& spec) { return (spec.n_waveforms + 1) * spec.period; }

namespace {

double cycle_height(const SpectrumSpec& spec, int k) {
  if (spec.n_waveforms == 0) return 0.0;
  return spec.peak_heights[static_cast<std::size_t>(std::clamp(k, 0, spec.n_waveforms - 1))];
}

double valley_level(const SpectrumSpec& spec, int k) {
  return spec.diastolic_fraction * std::min(cycle_height(spec, k - 1), cycle_height(spec, k));
}

void validate(const SpectrumSpec& spec) {
  const auto n = static_cast<std::size_t>(std::max(0, spec.n_waveforms));
  require(spec.n_waveforms >= 0, "n_waveforms must be >= 0");
  require(spec.period >= 2, "period must be >= 2");
  require(spec.peak_heights.size() == n, "peak_heights needs one entry per waveform");
  require(spec.intensity.size() == n, "intensity needs one entry per waveform");
  const int height = spec.height > 0 ? spec.height : spec.axis_row + 40;
  require(spec.axis_row >= 1 && spec.axis_row < height, "axis_row must lie inside the image");
  require(spec.noise_sigma >= 0.0, "noise_sigma must be >= 0");
  require(spec.rise_fraction > 0.0 && spec.rise_fraction < 1.0, "rise_fraction must lie in (0, 1)");
  require(spec.diastolic_fraction >= 0.0 && spec.diastolic_fraction < 1.0,
          "diastolic_fraction must lie in [0, 1)");
  require(spec.wall_gap >= 0 && spec.wall_gap < spec.axis_row, "wall_gap out of range");
  for (double i : spec.intensity) require(i >= 0.0 && i <= 1.0, "intensity must lie in [0, 1]");
  for (double h : spec.peak_heights) require(h > spec.wall_gap, "peak height must exceed wall_gap");
  for (double h : spec.peak_heights) {
    if (h > spec.axis_row) {
      throw Error(Errc::clipped, "peak height " + std::to_string(h) + " exceeds axis row " +
                                     std::to_string(spec.axis_row));
    }
  }
}

}  // namespace

double spectrum_velocity(const SpectrumSpec& spec, double x) {
  if (spec.n_waveforms == 0) return 0.0;
  const double u = (x - spec.period / 2.0) / spec.period;
  const int k = static_cast<int>(std::floor(u));
  const double f = u - k;
  const double r = spec.rise_fraction;
  const double h = cycle_height(spec, k);
  if (f < r) {
    const double d = valley_level(spec, k);
    const double s = std::sin(kPi * f / (2.0 * r));
    return d + (h - d) * s * s;
  }
  const double d = valley_level(spec, k + 1);
  const double c = std::cos(kPi * (f - r) / (2.0 * (1.0 - r)));
  return d + (h - d) * c * c;
}

std::pair<RasterImage, SpectrumTruth> gen_spectrum(const SpectrumSpec& spec,
                                                   const spectrum::QaRules& rules) {
  validate(spec);
  const int w = spectrum_width(spec);
  const int h = spec.height > 0 ? spec.height : spec.axis_row + 40;
  const int n = spec.n_waveforms;

  SpectrumTruth t;
  t.axis_row = spec.axis_row;
  for (int k = 0; k <= n; ++k) t.valley_cols.push_back(spec.period / 2.0 + k * spec.period);
  std::vector<spectrum::Waveform> wfs;
  for (int k = 0; k < n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    t.peak_cols.push_back(t.valley_cols[i] + spec.rise_fraction * spec.period);
    t.heights.push_back(spec.peak_heights[i]);
    t.height_pct.push_back(100.0 * spec.peak_heights[i] / spec.axis_row);
    t.intensity.push_back(spec.intensity[i]);
    t.clarity.push_back(
        spectrum::classify_clarity(spec.intensity[i], rules.clarity_good, rules.clarity_poor));
    spectrum::Waveform wf;
    wf.start_col = static_cast<int>(t.valley_cols[i]);
    wf.end_col = static_cast<int>(t.valley_cols[i + 1]);
    wf.clarity = t.clarity.back();
    wf.height_pct = t.height_pct.back();
    wfs.push_back(wf);
  }
  const auto verdict = spectrum::make_verdict(std::move(wfs), rules);
  t.sweep_pass = verdict.sweep_pass;
  t.range_pass = verdict.range_pass;
  t.clarity_pass = verdict.clarity_pass;

  t.velocity.resize(static_cast<std::size_t>(w));
  std::vector<double> lobe_level(static_cast<std::size_t>(w), 0.0);
  for (int x = 0; x < w; ++x) {
    t.velocity[static_cast<std::size_t>(x)] = spectrum_velocity(spec, x);
    if (n > 0) {
      const int k = static_cast<int>(std::floor((x - spec.period / 2.0) / spec.period));
      lobe_level[static_cast<std::size_t>(x)] =
          spec.intensity[static_cast<std::size_t>(std::clamp(k, 0, n - 1))];
    }
  }

  Rng rng(spec.seed);
  RasterImage img(w, h, 3, 0);
  const int lobe_bottom = spec.axis_row - spec.wall_gap - 1;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double v = t.velocity[static_cast<std::size_t>(x)];
      double level = spec.background;
      if (y == spec.axis_row) {
        level = spec.axis_intensity;
      } else if (y <= lobe_bottom && y >= spec.axis_row - v) {
        level = lobe_level[static_cast<std::size_t>(x)];
      }
      const std::uint8_t b = to_byte(level + spec.noise_sigma * rng.normal());
      img.set_rgb(x, y, {b, b, b});
    }
  }
  for (const auto& line : spec.overlay_lines) {
    draw::segment(img, line.a, line.b, line.thickness, line.color);
  }
  return {std::move(img), std::move(t)};
}

DetectionScene gen_detection_scene(int n_gt, double jitter_radius, double angle_noise,
                                   std::uint64_t seed) {
  require(n_gt >= 1, "n_gt must be >= 1");
  require(jitter_radius >= 0.0 && std::isfinite(jitter_radius), "jitter_radius must be >= 0");
  require(angle_noise >= 0.0 && angle_noise <= 90.0, "angle_noise must lie in [0, 90]");
  Rng rng(seed);
  const double spacing = std::max(60.0, 4.0 * jitter_radius + 20.0);
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_gt))));
  DetectionScene scene;
  for (int i = 0; i < n_gt; ++i) {
    const double cx = spacing / 2.0 + (i % cols) * spacing + rng.uniform(-spacing / 8, spacing / 8);
    const double cy = spacing / 2.0 + (i / cols) * spacing + rng.uniform(-spacing / 8, spacing / 8);
    const double hw = 10.0 + std::floor(rng.uniform() * 20.0);
    const double hh = 10.0 + std::floor(rng.uniform() * 20.0);
    GateCandidate gt;
    gt.box = {cx - hw, cy - hh, cx + hw, cy + hh};
    gt.vessel_angle_deg = rng.uniform(angle_noise, 180.0 - angle_noise);
    gt.score = 1.0;
    gt.label = "gate";

    const Point c = gt.box.centroid();
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    double rho = jitter_radius;
    Point p{};
    for (;;) {
      p = {c.x + rho * std::cos(phi), c.y + rho * std::sin(phi)};
      if (std::hypot(p.x - c.x, p.y - c.y) >= jitter_radius) break;
      rho = std::nextafter(rho, std::numeric_limits<double>::infinity());
    }
    GateCandidate pred;
    pred.box = {p.x, p.y, p.x, p.y};
    pred.vessel_angle_deg = gt.vessel_angle_deg + rng.uniform(-angle_noise, angle_noise);
    pred.score = rng.uniform(0.5, 1.0);
    pred.label = "gate";
    scene.gts.push_back(gt);
    scene.preds.push_back(pred);
  }
  return scene;
}

namespace {

json point_json(Point p) { return json::array({p.x, p.y}); }

Point point_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw Error(Errc::invalid_spec, "points are [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys) {
  for (const auto& [k, v] : j.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* s) { return k == s; })) {
      throw Error(Errc::invalid_spec, "unknown spec key '" + k + "'");
    }
  }
}

template <typename F>
auto guarded(const std::string& text, F&& f) {
  try {
    return f(json::parse(text));
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_spec, std::string("malformed spec: ") + e.what());
  }
}

}  // namespace

std::string to_json(const WedgeSpec& s) {
  json j{{"kind", "wedge"},
         {"apex", point_json(s.apex)},
         {"half_angle_deg", s.half_angle_deg},
         {"inner_radius", s.inner_radius},
         {"outer_radius", s.outer_radius},
         {"width", s.width},
         {"height", s.height},
         {"noise", s.noise},
         {"edge_thickness", s.edge_thickness},
         {"arcs", s.arcs},
         {"speckle", s.speckle},
         {"seed", s.seed}};
  return j.dump(2);
}

std::string to_json(const SpectrumSpec& s) {
  json overlays = json::array();
  for (const auto& o : s.overlay_lines) {
    overlays.push_back({{"a", point_json(o.a)},
                        {"b", point_json(o.b)},
                        {"color", json::array({o.color.r, o.color.g, o.color.b})},
                        {"thickness", o.thickness}});
  }
  json j{{"kind", "spectrum"},
         {"n_waveforms", s.n_waveforms},
         {"period", s.period},
         {"peak_heights", s.peak_heights},
         {"axis_row", s.axis_row},
         {"intensity", s.intensity},
         {"noise_sigma", s.noise_sigma},
         {"overlay_lines", overlays},
         {"seed", s.seed},
         {"height", s.height},
         {"diastolic_fraction", s.diastolic_fraction},
         {"rise_fraction", s.rise_fraction},
         {"wall_gap", s.wall_gap},
         {"background", s.background},
         {"axis_intensity", s.axis_intensity}};
  return j.dump(2);
}

WedgeSpec wedge_from_json(const std::string& text) {
  return guarded(text, [](const json& j) {
    reject_unknown(j, {"kind", "name", "apex", "half_angle_deg", "inner_radius", "outer_radius",
                       "width", "height", "noise", "edge_thickness", "arcs", "speckle", "seed"});
    WedgeSpec s;
    if (j.contains("apex")) s.apex = point_from(j.at("apex"));
    read_field(j, "half_angle_deg", s.half_angle_deg);
    read_field(j, "inner_radius", s.inner_radius);
    read_field(j, "outer_radius", s.outer_radius);
    read_field(j, "width", s.width);
    read_field(j, "height", s.height);
    read_field(j, "noise", s.noise);
    read_field(j, "edge_thickness", s.edge_thickness);
    read_field(j, "arcs", s.arcs);
    read_field(j, "speckle", s.speckle);
    read_field(j, "seed", s.seed);
    return s;
  });
}

SpectrumSpec spectrum_from_json(const std::string& text) {
  return guarded(text, [](const json& j) {
    reject_unknown(j, {"kind", "name", "n_waveforms", "period", "peak_heights", "axis_row",
                       "intensity", "noise_sigma", "overlay_lines", "seed", "height",
                       "diastolic_fraction", "rise_fraction", "wall_gap", "background",
                       "axis_intensity"});
    SpectrumSpec s;
    read_field(j, "n_waveforms", s.n_waveforms);
    read_field(j, "period", s.period);
    read_field(j, "peak_heights", s.peak_heights);
    read_field(j, "axis_row", s.axis_row);
    read_field(j, "intensity", s.intensity);
    read_field(j, "noise_sigma", s.noise_sigma);
    read_field(j, "seed", s.seed);
    read_field(j, "height", s.height);
    read_field(j, "diastolic_fraction", s.diastolic_fraction);
    read_field(j, "rise_fraction", s.rise_fraction);
    read_field(j, "wall_gap", s.wall_gap);
    read_field(j, "background", s.background);
    read_field(j, "axis_intensity", s.axis_intensity);
    if (j.contains("overlay_lines")) {
      for (const auto& o : j.at("overlay_lines")) {
        OverlayLine line;
        line.a = point_from(o.at("a"));
        line.b = point_from(o.at("b"));
        if (o.contains("color")) {
          const auto& c = o.at("color");
          line.color = {c.at(0).get<std::uint8_t>(), c.at(1).get<std::uint8_t>(),
                        c.at(2).get<std::uint8_t>()};
        }
        read_field(o, "thickness", line.thickness);
        s.overlay_lines.push_back(line);
      }
    }
    return s;
  });
}

}  // namespace dqa::synth
