#include "doctest.h"

#include <cmath>

#include "dqa/error.hpp"
#include "dqa/spectrum.hpp"
#include "dqa/synth.hpp"
#include "dqa/vision.hpp"

using namespace dqa;
using namespace dqa::spectrum;

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

synth::SpectrumSpec five_lobes() {
  synth::SpectrumSpec s;
  s.n_waveforms = 5;
  s.peak_heights = {170, 165, 160, 168, 162};
  s.intensity = {0.8, 0.8, 0.8, 0.8, 0.8};
  s.noise_sigma = 0.01;
  s.seed = 4;
  return s;
}

}  // namespace

TEST_CASE("detect_overlays") {
  RasterImage img(12, 12, 3, 90);
  CHECK(count_foreground(detect_overlays(img)) == 0);
  img.set_rgb(6, 6, {255, 255, 0});
  const auto m = detect_overlays(img);
  CHECK(m(6, 6) == 1);
  CHECK(m(8, 6) == 1);  // dilated by two pixels
  CHECK(m(9, 6) == 0);
  CHECK(detect_overlays(img, 12.0 / 255.0, 0)(8, 6) == 0);
  CHECK(code_of([] { detect_overlays(RasterImage(3, 3, 1)); }) == Errc::channel_mismatch);
}

TEST_CASE("to_gray uses 601 luma") {
  RasterImage img(2, 1, 3, 0);
  img.set_rgb(0, 0, {255, 255, 255});
  img.set_rgb(1, 0, {255, 0, 0});
  const auto g = to_gray(img);
  CHECK(g(0, 0) == doctest::Approx(1.0));
  CHECK(g(1, 0) == doctest::Approx(0.299));
}

TEST_CASE("inpaint_biharmonic") {
  SUBCASE("constants are restored") {
    GrayImage g(40, 30, 0.5);
    BinaryMask hole(40, 30, 0);
    for (int y = 5; y < 25; ++y)
      for (int x = 8; x < 20; ++x) hole(x, y) = 1;
    for (int y = 0; y < 30; ++y) hole(39, y) = 1;  // touching the border too
    GrayImage corrupted = g;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (hole[i]) corrupted[i] = 0.0;
    const auto out = inpaint_biharmonic(corrupted, hole);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(out[i] - 0.5) <= 1e-6);
  }

  SUBCASE("a linear ramp is restored and known pixels are untouched") {
    const int w = 80, h = 60;
    GrayImage g(w, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) g(x, y) = static_cast<double>(x) / w;
    BinaryMask hole(w, h, 0);
    for (int y = h / 2 - 10; y < h / 2 + 10; ++y)
      for (int x = w / 2 - 10; x < w / 2 + 10; ++x) hole(x, y) = 1;
    GrayImage corrupted = g;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (hole[i]) corrupted[i] = 1.0;
    const auto out = inpaint_biharmonic(corrupted, hole);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (hole[i]) CHECK(std::abs(out[i] - g[i]) <= 1e-3);
      else CHECK(out[i] == corrupted[i]);
    }
  }

  SUBCASE("interior solution satisfies the 13-point stencil") {
    const int w = 50, h = 50;
    GrayImage g(w, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) g(x, y) = std::sin(0.2 * x) * std::cos(0.15 * y);
    BinaryMask hole(w, h, 0);
    for (int y = 20; y < 30; ++y)
      for (int x = 18; x < 32; ++x) hole(x, y) = 1;
    SolverOptions opt;
    opt.tolerance = 1e-12;
    const auto u = inpaint_biharmonic(g, hole, opt);
    double worst = 0.0;
    for (int y = 20; y < 30; ++y) {
      for (int x = 18; x < 32; ++x) {
        const double s = 20 * u(x, y) - 8 * (u(x - 1, y) + u(x + 1, y) + u(x, y - 1) + u(x, y + 1)) +
                         2 * (u(x - 1, y - 1) + u(x + 1, y - 1) + u(x - 1, y + 1) + u(x + 1, y + 1)) +
                         (u(x - 2, y) + u(x + 2, y) + u(x, y - 2) + u(x, y + 2));
        worst = std::max(worst, std::abs(s));
      }
    }
    CHECK(worst <= 1e-8);
  }

  SUBCASE("serial and parallel solves agree bit for bit") {
    GrayImage g(64, 48);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::fmod(0.37 * static_cast<double>(i), 1.0);
    BinaryMask hole(64, 48, 0);
    for (int y = 10; y < 40; ++y) hole(30, y) = hole(31, y) = 1;
    SolverOptions s, p;
    s.exec = kernels::Exec::serial;
    CHECK(inpaint_biharmonic(g, hole, s) == inpaint_biharmonic(g, hole, p));
  }

  SUBCASE("a hole covering everything has no boundary") {
    CHECK(code_of([] { inpaint_biharmonic(GrayImage(5, 5), BinaryMask(5, 5, 1)); }) ==
          Errc::no_boundary);
  }
}

TEST_CASE("random walker segmentation") {
  SUBCASE("two flat halves split exactly") {
    GrayImage g(40, 20);
    for (int y = 0; y < 20; ++y)
      for (int x = 0; x < 40; ++x) g(x, y) = x < 20 ? 0.9 : 0.1;
    Seeds s{BinaryMask(40, 20, 0), BinaryMask(40, 20, 0)};
    s.fg(5, 10) = 1;
    s.bg(34, 10) = 1;
    const auto m = segment_spectrum(g, 130.0, s);
    for (int y = 0; y < 20; ++y)
      for (int x = 0; x < 40; ++x) CHECK(m(x, y) == (x < 20 ? 1 : 0));
  }

  SUBCASE("all pixels seeded foreground") {
    GrayImage g(6, 4, 0.3);
    Seeds s{BinaryMask(6, 4, 1), BinaryMask(6, 4, 0)};
    CHECK(count_foreground(segment_spectrum(g, 130.0, s)) == 24);
  }

  SUBCASE("uniform image splits along the bisector of the seeds") {
    const int n = 31;
    GrayImage g(n, n, 0.5);
    Seeds s{BinaryMask(n, n, 0), BinaryMask(n, n, 0)};
    s.fg(0, 0) = 1;
    s.bg(n - 1, n - 1) = 1;
    SolverOptions opt;
    opt.tolerance = 1e-10;
    const auto m = segment_spectrum(g, 130.0, s, opt);
    for (int y = 0; y < n; ++y) {
      for (int x = 0; x < n; ++x) {
        const int side = x + y - (n - 1);  // 0 on the bisector
        if (side <= -1) CHECK(m(x, y) == 1);
        if (side >= 1) CHECK(m(x, y) == 0);
      }
    }
  }

  SUBCASE("class probabilities are in range and sum to one") {
    const auto [img, truth] = synth::gen_spectrum(five_lobes());
    const auto g = to_gray(img);
    const auto r = random_walker(g, make_seeds(g, truth.axis_row), 130.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(r.p_fg[i] >= 0.0);
      CHECK(r.p_fg[i] <= 1.0);
      CHECK(std::abs(r.p_fg[i] + r.p_bg[i] - 1.0) <= 1e-5);
    }
  }

  SUBCASE("background probability agrees with a solve using swapped seeds") {
    const int w = 40, h = 30;
    GrayImage g(w, h);
    synth::Rng rng(3);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) g(x, y) = 0.4 + 0.2 * rng.uniform() + (x < w / 2 ? 0.2 : 0.0);
    }
    Seeds s{BinaryMask(w, h, 0), BinaryMask(w, h, 0)};
    for (int y = 0; y < h; ++y) {
      s.fg(0, y) = 1;
      s.bg(w - 1, y) = 1;
    }
    SolverOptions opt;
    opt.tolerance = 1e-10;
    const auto r = random_walker(g, s, 130.0, opt);
    const auto swapped = random_walker_probability(g, Seeds{s.bg, s.fg}, 130.0, opt);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(r.p_bg[i] == doctest::Approx(swapped[i]).epsilon(1e-6));
  }

  SUBCASE("an empty seed class is an error") {
    GrayImage g(10, 10, 0.5);
    Seeds s{BinaryMask(10, 10, 0), BinaryMask(10, 10, 0)};
    s.fg(1, 1) = 1;
    CHECK(code_of([&] { segment_spectrum(g, 130.0, s); }) == Errc::no_seeds);
  }
}

TEST_CASE("detect_x_axis") {
  SUBCASE("baseline of a synthetic spectrum") {
    auto spec = five_lobes();
    spec.axis_row = 400;
    spec.peak_heights = {300, 310, 320, 290, 330};
    const auto [img, truth] = synth::gen_spectrum(spec);
    CHECK(std::abs(detect_x_axis(to_gray(img)) - 400) <= 1);
  }
  SUBCASE("blank image") {
    CHECK(code_of([] { detect_x_axis(GrayImage(100, 60, 0.0)); }) == Errc::axis_not_found);
  }
  SUBCASE("a long bright line beats a short faint one") {
    GrayImage g(300, 500, 0.02);
    for (int x = 0; x < 300; ++x) g(x, 400) = 0.9;
    for (int x = 100; x < 200; ++x) g(x, 100) = 0.4;
    CHECK(detect_x_axis(g) == 400);
  }
}

TEST_CASE("clean_with_axis") {
  BinaryMask m(20, 20, 0);
  for (int y = 2; y < 10; ++y)
    for (int x = 3; x < 12; ++x) m(x, y) = 1;
  m(6, 5) = m(7, 5) = m(6, 6) = 0;  // interior hole
  for (int y = 15; y < 18; ++y) m(4, y) = 1;  // blob below the axis
  for (int y = 0; y < 3; ++y) m(15, y) = 0;   // border-touching background stays
  const auto c = clean_with_axis(m, 12);
  CHECK(c(6, 5) == 1);
  CHECK(c(6, 6) == 1);
  CHECK(c(4, 16) == 0);
  CHECK(c(15, 0) == 0);
  for (int y = 13; y < 20; ++y)
    for (int x = 0; x < 20; ++x) CHECK(c(x, y) == 0);
  const auto passable = [&] {
    BinaryMask b(20, 20);
    for (std::size_t i = 0; i < c.size(); ++i) b[i] = c[i] ? 0 : 1;
    return b;
  }();
  const auto reach = reach_from_border(passable);
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x < 20; ++x)
      if (passable(x, y)) CHECK(reach(x, y) == 1);
  CHECK_THROWS_AS(clean_with_axis(m, 20), Error);
}

TEST_CASE("extract_envelope") {
  BinaryMask m(3, 500, 0);
  for (int y = 100; y <= 200; ++y) m(0, y) = 1;
  const auto e = extract_envelope(m, 400);
  CHECK(e.top_y[0] == 100);
  CHECK(e.velocity[0] == 300);
  CHECK(e.velocity[1] == 0);
  CHECK(e.top_y[1] == 400);

  SUBCASE("synthetic spectrum envelope tracks the generator curve") {
    const auto [img, truth] = synth::gen_spectrum(five_lobes());
    const auto a = analyze(img);
    double se = 0.0;
    for (std::size_t x = 0; x < truth.velocity.size(); ++x) {
      const double d = a.envelope.velocity[x] - truth.velocity[x];
      se += d * d;
    }
    CHECK(std::sqrt(se / truth.velocity.size()) <= 1.0);
  }
}

TEST_CASE("detect_peaks_valleys") {
  SUBCASE("sine envelope") {
    std::vector<double> v(600);
    for (int x = 0; x < 600; ++x) v[x] = 50 + 40 * std::sin(2 * kPi * x / 200.0);
    const auto e = detect_peaks_valleys(v, 8.0, 70);
    REQUIRE(e.peaks.size() == 3);
    REQUIRE(e.valleys.size() == 3);
    const int pk[3] = {50, 250, 450}, vl[3] = {150, 350, 550};
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(e.peaks[i] - pk[i]) <= 2);
      CHECK(std::abs(e.valleys[i] - vl[i]) <= 2);
    }
  }
  SUBCASE("constant") {
    const auto e = detect_peaks_valleys(std::vector<double>(300, 7.0), 8.0, 70);
    CHECK(e.peaks.empty());
    CHECK(e.valleys.empty());
  }
  SUBCASE("two close peaks keep the taller") {
    std::vector<double> v(300, 0.0);
    for (int x = 0; x < 300; ++x) {
      v[x] = 30 * std::exp(-std::pow((x - 120) / 6.0, 2)) + 50 * std::exp(-std::pow((x - 160) / 6.0, 2));
    }
    const auto e = detect_peaks_valleys(v, 1.0, 70);
    REQUIRE(e.peaks.size() == 1);
    CHECK(std::abs(e.peaks[0] - 160) <= 1);
  }
  SUBCASE("distance and alternation on random envelopes") {
    synth::Rng rng(17);
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<double> v(800);
      double s = 50;
      for (auto& x : v) x = (s += rng.normal() * 3);
      const auto e = detect_peaks_valleys(v, 4.0, 40);
      for (std::size_t i = 1; i < e.peaks.size(); ++i) CHECK(e.peaks[i] - e.peaks[i - 1] >= 40);
      for (std::size_t i = 1; i < e.valleys.size(); ++i) CHECK(e.valleys[i] - e.valleys[i - 1] >= 40);
      std::vector<std::pair<int, bool>> all;
      for (int p : e.peaks) all.emplace_back(p, true);
      for (int q : e.valleys) all.emplace_back(q, false);
      std::sort(all.begin(), all.end());
      for (std::size_t i = 1; i < all.size(); ++i) CHECK(all[i].second != all[i - 1].second);
      const auto wf = identify_waveforms(e.peaks, e.valleys);
      CHECK(wf.size() <= std::min(e.peaks.size(), e.valleys.empty() ? 0 : e.valleys.size() - 1));
      for (std::size_t i = 1; i < wf.size(); ++i) CHECK(wf[i].start >= wf[i - 1].end);
    }
  }
}

TEST_CASE("identify_waveforms") {
  const std::vector<int> v{150, 350, 550}, p{250, 450};
  const auto w = identify_waveforms(p, v);
  REQUIRE(w.size() == 2);
  CHECK(w[0] == WaveformSpan{150, 250, 350});
  CHECK(w[1] == WaveformSpan{350, 450, 550});
  CHECK(identify_waveforms(std::vector<int>{10}, std::vector<int>{}).empty());
  CHECK(identify_waveforms(std::vector<int>{200, 400}, std::vector<int>{0, 600}).empty());
}

TEST_CASE("clarity and scoring") {
  CHECK(classify_clarity(0.70) == Clarity::good);
  CHECK(classify_clarity(0.45) == Clarity::moderate);
  CHECK(classify_clarity(0.30) == Clarity::poor);
  CHECK(classify_clarity(0.56) == Clarity::moderate);
  CHECK(classify_clarity(0.36) == Clarity::moderate);
  Clarity prev = Clarity::poor;
  for (double m = 0.0; m <= 1.0; m += 0.01) {
    const Clarity c = classify_clarity(m);
    CHECK(static_cast<int>(c) <= static_cast<int>(prev));
    prev = c;
  }

  GrayImage g(10, 500, 0.7);
  BinaryMask m(10, 500, 0);
  for (int y = 80; y < 400; ++y)
    for (int x = 0; x < 10; ++x) m(x, y) = 1;
  const auto env = extract_envelope(m, 400);
  const auto wf = score_waveform(g, m, env, {1, 5, 8});
  CHECK(wf.height_pct == doctest::Approx(80.0));
  CHECK(wf.clarity == Clarity::good);
  CHECK(wf.mean_intensity == doctest::Approx(0.7));
  CHECK(code_of([&] { score_waveform(g, BinaryMask(10, 500, 0), env, {1, 5, 8}); }) ==
        Errc::empty_waveform);
}

TEST_CASE("verdict rules") {
  auto wf = [](int s, int e, Clarity c, double h) {
    Waveform w;
    w.start_col = s;
    w.end_col = e;
    w.clarity = c;
    w.height_pct = h;
    return w;
  };
  auto v = make_verdict({wf(0, 1, Clarity::good, 80), wf(1, 2, Clarity::poor, 80),
                         wf(2, 3, Clarity::moderate, 60), wf(3, 4, Clarity::good, 60)});
  CHECK(v.sweep_pass);
  CHECK(v.range_pass);
  CHECK_FALSE(v.clarity_pass);
  v = make_verdict({wf(0, 1, Clarity::good, 70), wf(1, 2, Clarity::moderate, 75),
                    wf(2, 3, Clarity::moderate, 60)});
  CHECK(v.clarity_pass);
  CHECK_FALSE(v.range_pass);
  // a gap between waveforms breaks the run
  v = make_verdict({wf(0, 1, Clarity::good, 80), wf(1, 2, Clarity::good, 80),
                    wf(5, 6, Clarity::good, 80)});
  CHECK_FALSE(v.clarity_pass);
  v = make_verdict({wf(0, 1, Clarity::good, 80), wf(1, 2, Clarity::good, 80)});
  CHECK_FALSE(v.sweep_pass);
}

TEST_CASE("assess end to end") {
  SUBCASE("five bright waveforms pass everything") {
    auto spec = five_lobes();
    spec.peak_heights = {170, 165, 160, 168, 162};  // max 85 %
    const auto v = assess(synth::gen_spectrum(spec).first);
    CHECK(v.n_waveforms == 5);
    CHECK(v.clarity_pass);
    CHECK(v.sweep_pass);
    CHECK(v.range_pass);
  }
  SUBCASE("two waveforms fail the sweep rule") {
    auto spec = five_lobes();
    spec.n_waveforms = 2;
    spec.peak_heights = {170, 160};
    spec.intensity = {0.8, 0.8};
    const auto v = assess(synth::gen_spectrum(spec).first);
    CHECK(v.n_waveforms == 2);
    CHECK_FALSE(v.sweep_pass);
  }
  SUBCASE("low waveforms fail the range rule") {
    auto spec = five_lobes();
    spec.peak_heights = {140, 130, 135, 120, 138};  // at most 70 %
    const auto v = assess(synth::gen_spectrum(spec).first);
    CHECK(v.n_waveforms == 5);
    CHECK_FALSE(v.range_pass);
  }
  SUBCASE("overlays are removed before segmentation") {
    auto spec = five_lobes();
    spec.overlay_lines = {{{10, 12}, {880, 18}, {255, 255, 0}, 2.0},
                          {{300, 205}, {600, 205}, {0, 200, 255}, 2.0}};
    const auto a = analyze(synth::gen_spectrum(spec).first);
    CHECK(count_foreground(a.overlays) > 0);
    CHECK(a.verdict.n_waveforms == 5);
    CHECK(a.axis_y == spec.axis_row);
  }
  SUBCASE("deterministic") {
    const auto img = synth::gen_spectrum(five_lobes()).first;
    const auto a = analyze(img);
    const auto b = analyze(img);
    CHECK(a.mask == b.mask);
    CHECK(a.envelope.velocity == b.envelope.velocity);
  }
}
