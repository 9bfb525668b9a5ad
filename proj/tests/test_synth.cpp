#include "doctest.h"

#include <cmath>

#include "dqa/error.hpp"
#include "dqa/eval.hpp"
#include "dqa/synth.hpp"
#include "dqa/vision.hpp"

using namespace dqa;
using namespace dqa::synth;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::invalid_argument;
}

}  // namespace

TEST_CASE("rng is reproducible and well behaved") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  // first output of the standard 64-bit Mersenne Twister with its default seed
  Rng std_seed(5489u);
  CHECK(std_seed.next_u64() == 14514284786278117030ull);
  Rng r(1);
  double sum = 0, sq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double z = r.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sq / n - 1.0) < 0.02);
}

TEST_CASE("gen_wedge") {
  WedgeSpec spec;
  spec.edge_thickness = 1.0;
  spec.arcs = false;
  const auto [img, truth] = gen_wedge(spec);
  CHECK(truth.probe.apex == Point{256, -80});
  REQUIRE(truth.probe.edge_lines.size() == 2);
  const auto mask = threshold_rgb(img);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask(x, y)) continue;
      double best = 1e9;
      for (const auto& l : truth.probe.edge_lines) best = std::min(best, std::abs(l.distance({double(x), double(y)})));
      CHECK(best <= 0.5);
    }
  }
  for (const auto& l : truth.probe.edge_lines) CHECK(std::abs(l.distance(truth.probe.apex)) < 1e-9);

  SUBCASE("same spec, same bytes") {
    WedgeSpec noisy;
    noisy.noise = 0.01;
    noisy.seed = 77;
    CHECK(gen_wedge(noisy).first == gen_wedge(noisy).first);
    noisy.seed = 78;
    WedgeSpec other = noisy;
    other.seed = 77;
    CHECK_FALSE(gen_wedge(noisy).first == gen_wedge(other).first);
  }
  SUBCASE("invalid specs") {
    WedgeSpec s;
    s.half_angle_deg = 0;
    CHECK(code_of([&] { gen_wedge(s); }) == Errc::invalid_spec);
    s = {};
    s.inner_radius = 500;
    CHECK(code_of([&] { gen_wedge(s); }) == Errc::invalid_spec);
    s = {};
    s.apex = {5000, 5000};
    CHECK(code_of([&] { gen_wedge(s); }) == Errc::off_canvas);
  }
}

TEST_CASE("gen_spectrum") {
  SpectrumSpec s;
  s.n_waveforms = 4;
  s.peak_heights = {150, 160, 140, 170};
  s.intensity = {0.8, 0.5, 0.3, 0.7};
  const auto [img, t] = gen_spectrum(s);
  CHECK(img.width() == 5 * s.period);
  CHECK(img.height() == s.axis_row + 40);
  CHECK(t.peak_cols.size() == 4);
  CHECK(t.valley_cols.size() == 5);
  CHECK(t.heights.size() == 4);
  CHECK(t.clarity.size() == 4);
  CHECK(t.clarity[0] == spectrum::Clarity::good);
  CHECK(t.clarity[1] == spectrum::Clarity::moderate);
  CHECK(t.clarity[2] == spectrum::Clarity::poor);
  CHECK(t.height_pct[3] == doctest::Approx(85.0));
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(spectrum_velocity(s, t.peak_cols[k]) == doctest::Approx(s.peak_heights[k]));
  }
  // the analytic curve is continuous across valleys
  for (double v : t.valley_cols) {
    CHECK(spectrum_velocity(s, v - 1e-7) == doctest::Approx(spectrum_velocity(s, v)).epsilon(1e-6));
  }
  // axis row and lobe intensity are rendered exactly without noise
  CHECK(img.rgb(10, s.axis_row) == Rgb{230, 230, 230});
  const int px = static_cast<int>(t.peak_cols[0]);
  CHECK(img.rgb(px, s.axis_row - 20) == Rgb{204, 204, 204});

  SUBCASE("reproducible from the seed") {
    SpectrumSpec n = s;
    n.noise_sigma = 0.02;
    CHECK(gen_spectrum(n).first == gen_spectrum(n).first);
  }
  SUBCASE("errors") {
    SpectrumSpec c = s;
    c.peak_heights[1] = s.axis_row + 1.0;
    CHECK(code_of([&] { gen_spectrum(c); }) == Errc::clipped);
    SpectrumSpec w = s;
    w.intensity.pop_back();
    CHECK(code_of([&] { gen_spectrum(w); }) == Errc::invalid_spec);
  }
  SUBCASE("json round trip") {
    SpectrumSpec o = s;
    o.overlay_lines.push_back({{1, 2}, {300, 4}, {255, 0, 255}, 2.5});
    const auto back = spectrum_from_json(to_json(o));
    CHECK(to_json(back) == to_json(o));
    CHECK(code_of([] { spectrum_from_json(R"({"bogus": 1})"); }) == Errc::invalid_spec);
    WedgeSpec ws;
    ws.noise = 0.25;
    CHECK(to_json(wedge_from_json(to_json(ws))) == to_json(ws));
  }
}

TEST_CASE("gen_detection_scene") {
  SUBCASE("no jitter, no noise") {
    const auto s = gen_detection_scene(25, 0.0, 0.0, 1);
    const std::vector<double> ns{1, 5, 20};
    const auto c = eval::sweep(s.gts, s.preds, ns);
    for (std::size_t i = 0; i < ns.size(); ++i) {
      CHECK(c.sensitivity[i] == 100.0);
      CHECK(*c.mean_angle_err[i] == 0.0);
    }
  }
  SUBCASE("jitter 7") {
    const auto s = gen_detection_scene(30, 7.0, 0.0, 2);
    const auto m = eval::match(s.gts, s.preds);
    CHECK(eval::sensitivity(m, 5) == 0.0);
    CHECK(eval::sensitivity(m, 7) == 0.0);
    CHECK(eval::sensitivity(m, 8) == 100.0);
    CHECK(eval::sensitivity(m, 10) == 100.0);
  }
  SUBCASE("angle noise bounds the error") {
    double total = 0;
    const int seeds = 200;
    for (int seed = 1; seed <= seeds; ++seed) {
      const auto s = gen_detection_scene(10, 0.0, 6.0, static_cast<std::uint64_t>(seed));
      const double e = eval::mean_angle_error(s.gts, s.preds, eval::match(s.gts, s.preds), 1.0);
      CHECK(e >= 0.0);
      CHECK(e <= 6.0);
      total += e;
    }
    CHECK(std::abs(total / seeds - 3.0) < 0.2);
  }
  CHECK(code_of([] { gen_detection_scene(0, 1, 1, 1); }) == Errc::invalid_spec);
}
