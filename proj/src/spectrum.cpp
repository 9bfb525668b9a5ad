#include "dqa/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dqa/error.hpp"
#include "dqa/vision.hpp"

namespace dqa::spectrum {

using kernels::Exec;

std::string_view to_string(Clarity c) noexcept {
  switch (c) {
    case Clarity::good: return "good";
    case Clarity::moderate: return "moderate";
    case Clarity::poor: return "poor";
  }
  return "poor";
}

BinaryMask detect_overlays(const RasterImage& raster, double std_threshold, int dilation_px) {
  if (raster.channels() != 3) {
    throw Error(Errc::channel_mismatch, "overlay detection needs a 3-channel image");
  }
  BinaryMask mask(raster.width(), raster.height(), 0);
  for (int y = 0; y < raster.height(); ++y) {
    for (int x = 0; x < raster.width(); ++x) {
      const Rgb px = raster.rgb(x, y);
      const double r = px.r / 255.0, g = px.g / 255.0, b = px.b / 255.0;
      const double mean = (r + g + b) / 3.0;
      const double var = ((r - mean) * (r - mean) + (g - mean) * (g - mean) +
                          (b - mean) * (b - mean)) / 3.0;
      mask(x, y) = std::sqrt(var) > std_threshold ? 1 : 0;
    }
  }
  return dilate(mask, dilation_px);
}

GrayImage to_gray(const RasterImage& raster) {
  GrayImage gray(raster.width(), raster.height());
  for (int y = 0; y < raster.height(); ++y) {
    for (int x = 0; x < raster.width(); ++x) {
      if (raster.channels() == 1) {
        gray(x, y) = raster.at(x, y) / 255.0;
        continue;
      }
      const Rgb px = raster.rgb(x, y);
      gray(x, y) = (0.299 * px.r + 0.587 * px.g + 0.114 * px.b) / 255.0;
    }
  }
  return gray;
}

GrayImage inpaint_biharmonic(const GrayImage& gray, const BinaryMask& hole,
                             const SolverOptions& solver) {
  if (!gray.same_shape(hole)) {
    throw Error(Errc::dimension_mismatch, "inpainting hole and image differ in size");
  }
  const std::size_t holes = count_foreground(hole);
  GrayImage out = gray;
  if (holes == 0) return out;
  if (holes == hole.size()) throw Error(Errc::no_boundary, "hole covers the whole image");

  int bx0 = hole.width(), by0 = hole.height(), bx1 = -1, by1 = -1;
  for (int y = 0; y < hole.height(); ++y) {
    for (int x = 0; x < hole.width(); ++x) {
      if (!hole(x, y)) continue;
      bx0 = std::min(bx0, x);
      by0 = std::min(by0, y);
      bx1 = std::max(bx1, x);
      by1 = std::max(by1, y);
    }
  }
  // the squared Laplacian at a hole pixel reaches two pixels out; one more keeps the
  // window edge (where neighbours are dropped) out of every stencil that matters
  constexpr int kMargin = 3;
  kernels::Window win;
  win.full_width = hole.width();
  win.full_height = hole.height();
  win.x0 = std::max(0, bx0 - kMargin);
  win.y0 = std::max(0, by0 - kMargin);
  win.width = std::min(hole.width() - 1, bx1 + kMargin) - win.x0 + 1;
  win.height = std::min(hole.height() - 1, by1 + kMargin) - win.y0 + 1;

  const std::size_t n = win.size();
  std::vector<std::uint8_t> in_hole(n);
  std::vector<double> known(n), diag(n, 0.0);
  double ring_sum = 0.0;
  std::size_t ring_n = 0;
  for (int ly = 0; ly < win.height; ++ly) {
    for (int lx = 0; lx < win.width; ++lx) {
      const std::size_t i = static_cast<std::size_t>(ly) * win.width + lx;
      const int gx = win.x0 + lx, gy = win.y0 + ly;
      in_hole[i] = hole(gx, gy);
      known[i] = in_hole[i] ? 0.0 : gray(gx, gy);
      if (in_hole[i]) {
        const double d = win.degree(lx, ly);
        diag[i] = d * d + d;
      } else {
        const bool touches = (gx > 0 && hole(gx - 1, gy)) ||
                             (gx + 1 < hole.width() && hole(gx + 1, gy)) ||
                             (gy > 0 && hole(gx, gy - 1)) ||
                             (gy + 1 < hole.height() && hole(gx, gy + 1));
        if (touches) {
          ring_sum += gray(gx, gy);
          ++ring_n;
        }
      }
    }
  }

  const Exec exec = solver.exec;
  std::vector<double> tmp(n), rhs(n);
  kernels::neumann_laplacian_apply(win, known, tmp, exec);
  kernels::neumann_laplacian_apply(win, tmp, rhs, exec);
  for (std::size_t i = 0; i < n; ++i) rhs[i] = in_hole[i] ? -rhs[i] : 0.0;

  auto apply = [&](std::span<const double> x, std::span<double> y) {
    kernels::neumann_laplacian_apply(win, x, tmp, exec);
    kernels::neumann_laplacian_apply(win, tmp, y, exec);
    for (std::size_t i = 0; i < n; ++i) {
      if (!in_hole[i]) y[i] = 0.0;
    }
  };

  std::vector<double> x(n, 0.0);
  const double start = ring_n > 0 ? ring_sum / static_cast<double>(ring_n) : 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (in_hole[i]) x[i] = start;
  }
  solve_pcg(apply, diag, rhs, x, holes, solver);

  for (int ly = 0; ly < win.height; ++ly) {
    for (int lx = 0; lx < win.width; ++lx) {
      const std::size_t i = static_cast<std::size_t>(ly) * win.width + lx;
      if (in_hole[i]) out(win.x0 + lx, win.y0 + ly) = x[i];
    }
  }
  return out;
}

Seeds make_seeds(const GrayImage& gray, int axis_y, const SeedPolicy& policy) {
  const int w = gray.width(), h = gray.height();
  Seeds s{BinaryMask(w, h, 0), BinaryMask(w, h, 0)};
  const int top_rows = static_cast<int>(std::ceil(policy.top_rows_fraction * h));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double g = gray(x, y);
      const bool border = x == 0 || y == 0 || x == w - 1 || y == h - 1;
      if (y < axis_y && g > policy.fg_min) {
        s.fg(x, y) = 1;
      } else if ((y < top_rows && g < policy.top_bg_max) || (border && g < policy.border_bg_max)) {
        s.bg(x, y) = 1;
      }
    }
  }
  return s;
}

kernels::GridGraph build_grid_graph(const GrayImage& gray, double beta) {
  kernels::GridGraph g;
  g.width = gray.width();
  g.height = gray.height();
  g.right.assign(gray.size(), 0.0);
  g.down.assign(gray.size(), 0.0);
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      const std::size_t i = gray.index(x, y);
      if (x + 1 < g.width) {
        const double d = gray[i] - gray[i + 1];
        g.right[i] = std::exp(-beta * d * d);
      }
      if (y + 1 < g.height) {
        const double d = gray[i] - gray[i + static_cast<std::size_t>(g.width)];
        g.down[i] = std::exp(-beta * d * d);
      }
    }
  }
  g.finalize_degree();
  return g;
}

namespace {

GrayImage solve_fg(const GrayImage& gray, const kernels::GridGraph& graph, const Seeds& seeds,
                   const SolverOptions& solver, SolveStats* stats) {
  const std::size_t n = gray.size();
  const int w = gray.width();
  std::vector<std::uint8_t> fixed(n);
  std::vector<double> value(n, 0.0);
  std::size_t unknowns = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool is_fg = seeds.fg[i] != 0;
    const bool is_bg = !is_fg && seeds.bg[i] != 0;
    fixed[i] = is_fg || is_bg;
    if (is_fg) value[i] = 1.0;
    if (!fixed[i]) ++unknowns;
  }

  GrayImage prob(gray.width(), gray.height(), 0.0);
  if (unknowns == 0) {
    for (std::size_t i = 0; i < n; ++i) prob[i] = value[i];
    return prob;
  }

  // b_i = sum over seeded neighbours of w_ij * m_j
  std::vector<double> rhs(n, 0.0), diag(n, 0.0);
  for (int y = 0; y < gray.height(); ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = gray.index(x, y);
      if (fixed[i]) continue;
      diag[i] = graph.degree[i];
      double b = 0.0;
      if (x + 1 < w && fixed[i + 1]) b += graph.right[i] * value[i + 1];
      if (x > 0 && fixed[i - 1]) b += graph.right[i - 1] * value[i - 1];
      if (y + 1 < gray.height() && fixed[i + w]) b += graph.down[i] * value[i + w];
      if (y > 0 && fixed[i - w]) b += graph.down[i - w] * value[i - w];
      rhs[i] = b;
    }
  }
  auto apply = [&](std::span<const double> x, std::span<double> y) {
    kernels::graph_laplacian_apply(graph, x, y, solver.exec);
    for (std::size_t i = 0; i < n; ++i) {
      if (fixed[i]) y[i] = 0.0;
    }
  };
  std::vector<double> x(n, 0.0);
  const SolveStats st = solve_pcg(apply, diag, rhs, x, unknowns, solver);
  if (stats) *stats = st;
  for (std::size_t i = 0; i < n; ++i) {
    prob[i] = fixed[i] ? value[i] : std::clamp(x[i], 0.0, 1.0);
  }
  return prob;
}

void check_seeds(const GrayImage& gray, const Seeds& seeds) {
  if (!gray.same_shape(seeds.fg) || !gray.same_shape(seeds.bg)) {
    throw Error(Errc::dimension_mismatch, "seed masks and image differ in size");
  }
  std::size_t fg = 0, bg = 0, free = 0;
  for (std::size_t i = 0; i < gray.size(); ++i) {
    if (seeds.fg[i]) ++fg;
    else if (seeds.bg[i]) ++bg;
    else ++free;
  }
  if (free == 0 && (fg > 0 || bg > 0)) return;
  if (fg == 0 || bg == 0) {
    throw Error(Errc::no_seeds, std::string("seed policy produced no ") +
                                    (fg == 0 ? "foreground" : "background") + " seeds");
  }
}

}  // namespace

GrayImage random_walker_probability(const GrayImage& gray, const Seeds& seeds, double beta,
                                    const SolverOptions& solver, SolveStats* stats) {
  check_seeds(gray, seeds);
  const auto graph = build_grid_graph(gray, beta);
  return solve_fg(gray, graph, seeds, solver, stats);
}

RandomWalkerResult random_walker(const GrayImage& gray, const Seeds& seeds, double beta,
                                 const SolverOptions& solver) {
  check_seeds(gray, seeds);
  const auto graph = build_grid_graph(gray, beta);
  RandomWalkerResult r;
  r.p_fg = solve_fg(gray, graph, seeds, solver, &r.stats);
  // two labels: the background system is the complement of the foreground one
  r.p_bg = GrayImage(gray.width(), gray.height(), 0.0);
  for (std::size_t i = 0; i < r.p_fg.size(); ++i) r.p_bg[i] = 1.0 - r.p_fg[i];
  return r;
}

BinaryMask segment_spectrum(const GrayImage& gray, double beta, const Seeds& seeds,
                            const SolverOptions& solver) {
  const GrayImage p = random_walker_probability(gray, seeds, beta, solver);
  BinaryMask mask(gray.width(), gray.height(), 0);
  for (std::size_t i = 0; i < p.size(); ++i) mask[i] = p[i] > 0.5 ? 1 : 0;
  return mask;
}

BinaryMask segment_spectrum(const GrayImage& gray, double beta, int axis_y,
                            const SeedPolicy& policy, const SolverOptions& solver) {
  return segment_spectrum(gray, beta, make_seeds(gray, axis_y, policy), solver);
}

BinaryMask horizontal_ridges(const GrayImage& gray, const AxisOptions& options) {
  const int w = gray.width(), h = gray.height();
  const int k = std::max(1, options.ridge_offset);
  BinaryMask mask(w, h, 0);
  for (int y = 0; y < h; ++y) {
    const bool has_above = y - k >= 0;
    const bool has_below = y + k < h;
    if (!has_above && !has_below) continue;
    for (int x = 0; x < w; ++x) {
      double around = -1.0;
      if (has_above) around = std::max(around, gray(x, y - k));
      if (has_below) around = std::max(around, gray(x, y + k));
      mask(x, y) = gray(x, y) - around >= options.ridge_min ? 1 : 0;
    }
  }
  return mask;
}

int detect_x_axis(const GrayImage& gray, const AxisOptions& options, Exec exec) {
  const BinaryMask ridges = horizontal_ridges(gray, options);
  HoughLineOptions hopt;
  hopt.theta_min_deg = 90.0 - options.theta_window_deg;
  hopt.theta_max_deg = 90.0 + options.theta_window_deg + options.theta_step_deg / 2.0;
  hopt.theta_step_deg = options.theta_step_deg;
  hopt.exec = exec;
  const int floor_votes =
      std::max(1, static_cast<int>(std::ceil(options.min_votes_fraction * gray.width())));
  const auto lines = hough_lines(ridges, floor_votes, hopt);
  if (lines.empty()) throw Error(Errc::axis_not_found, "no horizontal line reaches the vote floor");
  const auto& best = lines.front();
  const double xc = (gray.width() - 1) / 2.0;
  const double y = (best.rho - xc * std::cos(best.theta)) / std::sin(best.theta);
  return std::clamp(static_cast<int>(std::lround(y)), 0, gray.height() - 1);
}

BinaryMask clean_with_axis(const BinaryMask& mask, int axis_y) {
  if (axis_y < 0 || axis_y >= mask.height()) {
    throw Error(Errc::invalid_argument, "axis row outside the image");
  }
  BinaryMask out = mask;
  for (int y = axis_y + 1; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) out(x, y) = 0;
  }
  BinaryMask background(out.width(), out.height());
  for (std::size_t i = 0; i < out.size(); ++i) background[i] = out[i] ? 0 : 1;
  const BinaryMask outside = reach_from_border(background);
  for (int y = 0; y < axis_y; ++y) {
    for (int x = 0; x < out.width(); ++x) {
      if (background(x, y) && !outside(x, y)) out(x, y) = 1;
    }
  }
  return out;
}

Envelope extract_envelope(const BinaryMask& mask, int axis_y) {
  if (axis_y < 0 || axis_y >= mask.height()) {
    throw Error(Errc::invalid_argument, "axis row outside the image");
  }
  Envelope env;
  env.axis_y = axis_y;
  env.top_y.assign(static_cast<std::size_t>(mask.width()), static_cast<double>(axis_y));
  env.velocity.assign(static_cast<std::size_t>(mask.width()), 0.0);
  for (int x = 0; x < mask.width(); ++x) {
    for (int y = 0; y <= axis_y; ++y) {
      if (mask(x, y)) {
        env.top_y[static_cast<std::size_t>(x)] = y;
        break;
      }
    }
    env.velocity[static_cast<std::size_t>(x)] = axis_y - env.top_y[static_cast<std::size_t>(x)];
  }
  return env;
}

namespace {

// Interior local maxima; a flat top counts once, at its middle sample.
std::vector<int> local_maxima(std::span<const double> s) {
  std::vector<int> out;
  const int n = static_cast<int>(s.size());
  int i = 1;
  while (i < n - 1) {
    if (s[i - 1] < s[i]) {
      int j = i;
      while (j + 1 < n - 1 && s[j + 1] == s[i]) ++j;
      if (s[j + 1] < s[i]) {
        out.push_back((i + j) / 2);
        i = j + 1;
        continue;
      }
      i = j + 1;
      continue;
    }
    ++i;
  }
  return out;
}

// More extreme first (sign = +1 for peaks, -1 for valleys), ties to the left.
std::vector<int> enforce_distance(std::vector<int> idx, std::span<const double> s, double sign,
                                  int min_distance) {
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    const double va = sign * s[a], vb = sign * s[b];
    if (va != vb) return va > vb;
    return a < b;
  });
  std::vector<int> kept;
  for (int i : idx) {
    const bool clash = std::any_of(kept.begin(), kept.end(),
                                   [&](int k) { return std::abs(k - i) < min_distance; });
    if (!clash) kept.push_back(i);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

}  // namespace

Extrema detect_peaks_valleys(std::span<const double> velocity, double sigma, int min_distance) {
  if (min_distance < 1) throw Error(Errc::invalid_argument, "min_distance must be >= 1");
  const auto s = gaussian_smooth_1d(velocity, sigma);
  std::vector<double> neg(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) neg[i] = -s[i];

  const auto peaks = enforce_distance(local_maxima(s), s, 1.0, min_distance);
  const auto valleys = enforce_distance(local_maxima(neg), s, -1.0, min_distance);

  // merge and force strict alternation: of two same-kind neighbours keep the more extreme
  struct Ext {
    int col;
    bool peak;
  };
  std::vector<Ext> merged;
  for (int p : peaks) merged.push_back({p, true});
  for (int v : valleys) merged.push_back({v, false});
  std::sort(merged.begin(), merged.end(), [](const Ext& a, const Ext& b) { return a.col < b.col; });
  std::vector<Ext> alt;
  for (const auto& e : merged) {
    if (!alt.empty() && alt.back().peak == e.peak) {
      const double cur = s[static_cast<std::size_t>(alt.back().col)];
      const double cand = s[static_cast<std::size_t>(e.col)];
      const bool better = e.peak ? cand > cur : cand < cur;
      if (better) alt.back() = e;
      continue;
    }
    alt.push_back(e);
  }
  Extrema out;
  for (const auto& e : alt) (e.peak ? out.peaks : out.valleys).push_back(e.col);
  return out;
}

std::vector<WaveformSpan> identify_waveforms(std::span<const int> peaks,
                                             std::span<const int> valleys) {
  std::vector<WaveformSpan> out;
  for (std::size_t k = 0; k + 1 < valleys.size(); ++k) {
    const int lo = valleys[k], hi = valleys[k + 1];
    int count = 0, which = 0;
    for (int p : peaks) {
      if (p > lo && p < hi) {
        ++count;
        which = p;
      }
    }
    if (count == 1) out.push_back({lo, which, hi});
  }
  return out;
}

Clarity classify_clarity(double mean_intensity, double good, double poor) {
  if (mean_intensity > good) return Clarity::good;
  if (mean_intensity < poor) return Clarity::poor;
  return Clarity::moderate;
}

Waveform score_waveform(const GrayImage& gray, const BinaryMask& mask, const Envelope& env,
                        const WaveformSpan& span, const QaRules& rules, MeanMode mode) {
  if (!gray.same_shape(mask)) throw Error(Errc::dimension_mismatch, "gray and mask differ");
  if (env.axis_y <= 0) throw Error(Errc::invalid_argument, "axis row must be below the panel top");
  const int c0 = std::max(0, span.start);
  const int c1 = std::min(gray.width() - 1, span.end);
  double sum = 0.0;
  std::size_t count = 0;
  for (int x = c0; x <= c1; ++x) {
    if (mode == MeanMode::foreground) {
      for (int y = 0; y < gray.height(); ++y) {
        if (!mask(x, y)) continue;
        sum += gray(x, y);
        ++count;
      }
    } else {
      const int top = static_cast<int>(env.top_y[static_cast<std::size_t>(x)]);
      for (int y = top; y < env.axis_y; ++y) {
        sum += gray(x, y);
        ++count;
      }
    }
  }
  if (count == 0) {
    throw Error(Errc::empty_waveform, "waveform " + std::to_string(span.start) + ".." +
                                          std::to_string(span.end) + " has no pixels");
  }
  Waveform wf;
  wf.start_col = span.start;
  wf.peak_col = span.peak;
  wf.end_col = span.end;
  wf.mean_intensity = sum / static_cast<double>(count);
  wf.clarity = classify_clarity(wf.mean_intensity, rules.clarity_good, rules.clarity_poor);
  wf.height_pct = 100.0 * env.velocity[static_cast<std::size_t>(span.peak)] / env.axis_y;
  return wf;
}

QaVerdict make_verdict(std::vector<Waveform> waveforms, const QaRules& rules) {
  QaVerdict v;
  v.n_waveforms = static_cast<int>(waveforms.size());
  v.sweep_pass = v.n_waveforms >= rules.sweep_min && v.n_waveforms <= rules.sweep_max;
  v.range_pass = std::any_of(waveforms.begin(), waveforms.end(),
                             [&](const Waveform& w) { return w.height_pct > rules.range_pct; });
  // consecutive = sharing a valley with the previous waveform
  int run = 0, best = 0;
  for (std::size_t i = 0; i < waveforms.size(); ++i) {
    const bool ok = waveforms[i].clarity != Clarity::poor;
    const bool joined = i > 0 && waveforms[i - 1].end_col == waveforms[i].start_col;
    if (!ok) run = 0;
    else run = (joined && run > 0) ? run + 1 : 1;
    best = std::max(best, run);
  }
  v.clarity_pass = best >= rules.clarity_run;
  v.waveforms = std::move(waveforms);
  return v;
}

Analysis analyze(const RasterImage& raster, const SpectrumConfig& config) {
  Analysis a;
  GrayImage gray = to_gray(raster);
  if (raster.channels() == 3) {
    a.overlays = detect_overlays(raster, config.overlay_std_threshold, config.overlay_dilation_px);
    gray = inpaint_biharmonic(gray, a.overlays, config.solver);
  } else {
    a.overlays = BinaryMask(raster.width(), raster.height(), 0);
  }
  a.gray = std::move(gray);
  a.axis_y = detect_x_axis(a.gray, config.axis, config.solver.exec);
  const Seeds seeds = make_seeds(a.gray, a.axis_y, config.seeds);
  a.mask = clean_with_axis(segment_spectrum(a.gray, config.beta, seeds, config.solver), a.axis_y);
  a.envelope = extract_envelope(a.mask, a.axis_y);
  a.extrema = detect_peaks_valleys(a.envelope, config.envelope_sigma, config.min_distance);
  std::vector<Waveform> waveforms;
  for (const auto& span : identify_waveforms(a.extrema.peaks, a.extrema.valleys)) {
    waveforms.push_back(
        score_waveform(a.gray, a.mask, a.envelope, span, config.rules, config.mean_mode));
  }
  a.verdict = make_verdict(std::move(waveforms), config.rules);
  return a;
}

QaVerdict assess(const RasterImage& raster, const SpectrumConfig& config) {
  return analyze(raster, config).verdict;
}

}  // namespace dqa::spectrum
