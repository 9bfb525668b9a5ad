#include "dqa/vision.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <queue>
#include <tuple>

#include "dqa/error.hpp"

namespace dqa {

namespace {

struct Offset {
  int dx, dy;
};

std::vector<Offset> disk_offsets(int radius) {
  std::vector<Offset> out;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy <= radius * radius) out.push_back({dx, dy});
    }
  }
  return out;
}

BinaryMask erode_impl(const BinaryMask& mask, int radius, bool outside_is_foreground) {
  BinaryMask out(mask.width(), mask.height(), 0);
  if (radius <= 0) return mask;
  const auto offsets = disk_offsets(radius);
  const int w = mask.width();
  const int h = mask.height();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(x, y)) continue;
      bool keep = true;
      for (const auto& o : offsets) {
        const int nx = x + o.dx;
        const int ny = y + o.dy;
        const bool fg = mask.contains(nx, ny) ? mask(nx, ny) != 0 : outside_is_foreground;
        if (!fg) {
          keep = false;
          break;
        }
      }
      out(x, y) = keep ? 1 : 0;
    }
  }
  return out;
}

BinaryMask complement(const BinaryMask& mask) {
  BinaryMask out(mask.width(), mask.height());
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = mask[i] ? 0 : 1;
  return out;
}

bool any(const BinaryMask& mask) {
  return std::any_of(mask.data().begin(), mask.data().end(), [](std::uint8_t v) { return v; });
}

bool same_line(const PolarLine& a, const PolarLine& b, double rho_win, double theta_win) {
  const double dtheta = std::abs(a.theta - b.theta);
  if (dtheta <= theta_win && std::abs(a.rho - b.rho) <= rho_win) return true;
  // (rho, theta) and (-rho, theta - pi) describe the same line
  const double wrapped = kPi - dtheta;
  return wrapped <= theta_win && std::abs(a.rho + b.rho) <= rho_win;
}

}  // namespace

BinaryMask threshold_rgb(const RasterImage& img, const ChannelRule& rule) {
  if (img.channels() != 3) {
    throw Error(Errc::channel_mismatch, "threshold_rgb needs a 3-channel image");
  }
  BinaryMask mask(img.width(), img.height(), 0);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      mask(x, y) = rule.accepts(img.rgb(x, y)) ? 1 : 0;
    }
  }
  return mask;
}

BinaryMask erode(const BinaryMask& mask, int radius) { return erode_impl(mask, radius, false); }

BinaryMask dilate(const BinaryMask& mask, int radius) {
  if (radius <= 0) return mask;
  // dilation is the dual of erosion of the complement, with the outside as background
  return complement(erode_impl(complement(mask), radius, true));
}

GrayImage sobel_magnitude(const RasterImage& img, int channel) {
  const int w = img.width();
  const int h = img.height();
  GrayImage out(w, h, 0.0);
  auto px = [&](int x, int y) {
    x = std::clamp(x, 0, w - 1);
    y = std::clamp(y, 0, h - 1);
    return static_cast<double>(img.at(x, y, channel));
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = (px(x + 1, y - 1) + 2.0 * px(x + 1, y) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2.0 * px(x - 1, y) + px(x - 1, y + 1));
      const double gy = (px(x - 1, y + 1) + 2.0 * px(x, y + 1) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2.0 * px(x, y - 1) + px(x + 1, y - 1));
      out(x, y) = std::hypot(gx, gy);
    }
  }
  return out;
}

BinaryMask watershed_refine(const BinaryMask& mask, const RasterImage& guide,
                            const WatershedOptions& options) {
  if (!mask.same_shape(Plane<std::uint8_t>(guide.width(), guide.height()))) {
    throw Error(Errc::dimension_mismatch, "watershed mask and guide differ in size");
  }
  if (guide.channels() != 3) {
    throw Error(Errc::channel_mismatch, "watershed guide needs a 3-channel image");
  }
  const int radius = std::max(1, options.marker_erosion_px);

  // Erosion depth is chosen per 8-connected component. A component no erosion
  // survives is its own marker if it is large enough to be a thin outline rather
  // than speckle.
  std::vector<BinaryMask> eroded;
  for (int r = 1; r <= radius; ++r) eroded.push_back(erode(mask, r));
  BinaryMask fg_marker(mask.width(), mask.height(), 0);
  {
    std::vector<std::uint8_t> seen(mask.size(), 0);
    std::vector<std::size_t> comp, stack;
    const int w = mask.width();
    for (std::size_t start = 0; start < mask.size(); ++start) {
      if (!mask[start] || seen[start]) continue;
      comp.clear();
      stack.assign(1, start);
      seen[start] = 1;
      while (!stack.empty()) {
        const std::size_t i = stack.back();
        stack.pop_back();
        comp.push_back(i);
        const int x = static_cast<int>(i % static_cast<std::size_t>(w));
        const int y = static_cast<int>(i / static_cast<std::size_t>(w));
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (!mask.contains(x + dx, y + dy)) continue;
            const std::size_t j = mask.index(x + dx, y + dy);
            if (mask[j] && !seen[j]) {
              seen[j] = 1;
              stack.push_back(j);
            }
          }
        }
      }
      // deepest erosion that still keeps half of what the shallowest one keeps, so a
      // speck glued to a thin edge cannot become the component's only marker
      std::vector<std::size_t> kept(eroded.size(), 0);
      for (std::size_t r = 0; r < eroded.size(); ++r) {
        for (std::size_t i : comp) kept[r] += eroded[r][i] != 0;
      }
      int depth = 0;
      for (int r = radius; r >= 1; --r) {
        if (kept[0] > 0 && 2 * kept[static_cast<std::size_t>(r - 1)] >= kept[0]) {
          depth = r;
          break;
        }
      }
      if (depth >= 1) {
        const auto& e = eroded[static_cast<std::size_t>(depth - 1)];
        for (std::size_t i : comp) fg_marker[i] = e[i];
      } else if (comp.size() >= static_cast<std::size_t>(options.min_marker_px)) {
        for (std::size_t i : comp) fg_marker[i] = 1;
      }
    }
  }
  if (!any(fg_marker)) {
    throw Error(Errc::no_foreground, "no foreground marker survives erosion");
  }
  const BinaryMask bg_marker = erode_impl(complement(mask), radius, true);
  const GrayImage grad = sobel_magnitude(guide, 1);

  constexpr std::uint8_t kNone = 0, kFg = 1, kBg = 2;
  std::vector<std::uint8_t> label(mask.size(), kNone);

  // (level, age, index): lowest level first, FIFO among equal levels
  using Entry = std::tuple<double, std::uint64_t, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  std::uint64_t age = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (fg_marker[i]) label[i] = kFg;
    else if (bg_marker[i]) label[i] = kBg;
    if (label[i] != kNone) queue.emplace(grad[i], age++, i);
  }

  const int w = mask.width();
  const int h = mask.height();
  while (!queue.empty()) {
    const std::size_t i = std::get<2>(queue.top());
    queue.pop();
    const int x = static_cast<int>(i % static_cast<std::size_t>(w));
    const int y = static_cast<int>(i / static_cast<std::size_t>(w));
    const int nx[4] = {x - 1, x + 1, x, x};
    const int ny[4] = {y, y, y - 1, y + 1};
    for (int k = 0; k < 4; ++k) {
      if (nx[k] < 0 || ny[k] < 0 || nx[k] >= w || ny[k] >= h) continue;
      const std::size_t j = mask.index(nx[k], ny[k]);
      if (label[j] != kNone) continue;
      label[j] = label[i];
      queue.emplace(grad[j], age++, j);
    }
  }

  BinaryMask out(w, h, 0);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = label[i] == kFg ? 1 : 0;
  return out;
}

double PolarLine::distance(Point p) const noexcept {
  return p.x * std::cos(theta) + p.y * std::sin(theta) - rho;
}

std::vector<PolarLine> hough_lines(const BinaryMask& mask, int min_votes,
                                   const HoughLineOptions& options) {
  if (options.theta_step_deg <= 0.0 || options.rho_res <= 0.0) {
    throw Error(Errc::invalid_argument, "hough resolution must be positive");
  }
  const auto pts = kernels::foreground_pixels(mask);
  if (pts.empty()) return {};

  const int theta_bins = std::max(
      1, static_cast<int>(std::floor((options.theta_max_deg - options.theta_min_deg) /
                                         options.theta_step_deg +
                                     1e-9)));
  const double rho_max = std::ceil(std::hypot(mask.width(), mask.height()));
  const auto grid = kernels::HoughGrid::make(deg2rad(options.theta_min_deg),
                                             deg2rad(options.theta_step_deg), theta_bins,
                                             rho_max, options.rho_res);
  std::vector<std::uint32_t> acc(grid.cells(), 0);
  kernels::hough_vote(pts, grid, acc, options.exec);

  const int nr = grid.rho_bins;
  const auto floor_votes = static_cast<std::uint32_t>(std::max(1, min_votes));
  struct Cand {
    std::uint32_t votes;
    int k, r;
  };
  std::vector<Cand> cands;
  for (int k = 0; k < theta_bins; ++k) {
    for (int r = 0; r < nr; ++r) {
      const std::uint32_t v = acc[static_cast<std::size_t>(k) * nr + r];
      if (v < floor_votes) continue;
      bool is_max = true;
      for (int dk = -1; dk <= 1 && is_max; ++dk) {
        for (int dr = -1; dr <= 1; ++dr) {
          const int kk = k + dk;
          const int rr = r + dr;
          if ((dk == 0 && dr == 0) || kk < 0 || rr < 0 || kk >= theta_bins || rr >= nr) continue;
          if (acc[static_cast<std::size_t>(kk) * nr + rr] > v) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) cands.push_back({v, k, r});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.votes != b.votes) return a.votes > b.votes;
    if (a.k != b.k) return a.k < b.k;
    return a.r < b.r;
  });

  const double theta_win = deg2rad(options.nms_theta_deg);
  std::vector<PolarLine> lines;
  for (const auto& c : cands) {
    PolarLine line{grid.rho_of(c.r), grid.theta[c.k], static_cast<int>(c.votes)};
    const bool suppressed = std::any_of(lines.begin(), lines.end(), [&](const PolarLine& kept) {
      return same_line(kept, line, options.nms_rho_px, theta_win);
    });
    if (!suppressed) lines.push_back(line);
  }
  return lines;
}

std::vector<PolarLine> hough_lines(const BinaryMask& mask, int min_votes, int angle_bins,
                                   double rho_resolution) {
  if (angle_bins < 1) throw Error(Errc::invalid_argument, "angle_bins must be >= 1");
  HoughLineOptions opt;
  opt.theta_step_deg = 180.0 / angle_bins;
  opt.rho_res = rho_resolution;
  return hough_lines(mask, min_votes, opt);
}

int longest_run(const BinaryMask& mask) {
  int best = 0;
  for (int y = 0; y < mask.height(); ++y) {
    int run = 0;
    for (int x = 0; x < mask.width(); ++x) {
      run = mask(x, y) ? run + 1 : 0;
      best = std::max(best, run);
    }
  }
  for (int x = 0; x < mask.width(); ++x) {
    int run = 0;
    for (int y = 0; y < mask.height(); ++y) {
      run = mask(x, y) ? run + 1 : 0;
      best = std::max(best, run);
    }
  }
  return best;
}

int default_min_votes(const BinaryMask& mask, double fraction) {
  return std::max(1, static_cast<int>(std::lround(fraction * longest_run(mask))));
}

std::vector<CircleArc> hough_circles_fixed_center(const BinaryMask& mask, Point center,
                                                  double r_min, double r_max, int min_votes,
                                                  const CircleOptions& options) {
  const int lo = std::max(0, static_cast<int>(std::ceil(r_min)));
  const int hi = static_cast<int>(std::floor(r_max));
  if (hi < lo) throw Error(Errc::invalid_argument, "empty radius range");

  const auto pts = kernels::foreground_pixels(mask);
  if (pts.empty()) return {};
  const auto nbins = static_cast<std::size_t>(hi - lo + 1);
  std::vector<std::uint32_t> hist(nbins, 0);
  kernels::radius_histogram(pts, center, lo, hi, hist, options.exec);

  // support counts a three-pixel band so thick strokes are not split across bins
  auto band = [&](std::size_t i) {
    std::uint32_t s = hist[i];
    if (i > 0) s += hist[i - 1];
    if (i + 1 < nbins) s += hist[i + 1];
    return s;
  };
  std::vector<std::pair<std::uint32_t, std::size_t>> cands;
  for (std::size_t i = 0; i < nbins; ++i) {
    const std::uint32_t s = band(i);
    if (s == 0 || s < static_cast<std::uint32_t>(std::max(1, min_votes))) continue;
    const bool left_ok = i == 0 || band(i - 1) <= s;
    const bool right_ok = i + 1 == nbins || band(i + 1) <= s;
    if (left_ok && right_ok) cands.emplace_back(s, i);
  }
  std::sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });

  std::vector<CircleArc> arcs;
  for (const auto& [support, i] : cands) {
    double wsum = 0.0, rsum = 0.0;
    for (std::size_t j = (i > 0 ? i - 1 : 0); j <= std::min(i + 1, nbins - 1); ++j) {
      wsum += hist[j];
      rsum += hist[j] * static_cast<double>(lo + static_cast<int>(j));
    }
    const double radius = rsum / wsum;
    const bool suppressed = std::any_of(arcs.begin(), arcs.end(), [&](const CircleArc& a) {
      return std::abs(a.radius - radius) < options.suppression_px;
    });
    if (!suppressed && radius > 0.0) arcs.push_back({center, radius, static_cast<int>(support)});
  }
  return arcs;
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) return {1.0};
  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (auto& v : k) v /= sum;
  return k;
}

std::vector<double> gaussian_smooth_1d(std::span<const double> signal, double sigma) {
  if (sigma < 0.0) throw Error(Errc::invalid_argument, "sigma must be >= 0");
  const auto n = static_cast<long>(signal.size());
  if (n == 0) return {};
  if (sigma == 0.0) return {signal.begin(), signal.end()};
  const auto kernel = gaussian_kernel(sigma);
  const long radius = static_cast<long>(kernel.size() / 2);
  // half-sample symmetric reflection: ... c b a | a b c ... d | d c ...
  auto reflect = [n](long i) {
    const long period = 2 * n;
    long m = i % period;
    if (m < 0) m += period;
    return m < n ? m : period - 1 - m;
  };
  std::vector<double> out(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    double acc = 0.0;
    for (long k = -radius; k <= radius; ++k) {
      acc += kernel[static_cast<std::size_t>(k + radius)] *
             signal[static_cast<std::size_t>(reflect(i + k))];
    }
    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

BinaryMask reach_from_border(const BinaryMask& passable) {
  const int w = passable.width();
  const int h = passable.height();
  BinaryMask seen(w, h, 0);
  std::deque<std::pair<int, int>> q;
  auto push = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= w || y >= h) return;
    if (!passable(x, y) || seen(x, y)) return;
    seen(x, y) = 1;
    q.emplace_back(x, y);
  };
  for (int x = 0; x < w; ++x) {
    push(x, 0);
    push(x, h - 1);
  }
  for (int y = 0; y < h; ++y) {
    push(0, y);
    push(w - 1, y);
  }
  while (!q.empty()) {
    const auto [x, y] = q.front();
    q.pop_front();
    push(x - 1, y);
    push(x + 1, y);
    push(x, y - 1);
    push(x, y + 1);
  }
  return seen;
}

}  // namespace dqa
