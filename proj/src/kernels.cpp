#include "dqa/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include <omp.h>

namespace dqa::kernels {

std::vector<PixelCoord> foreground_pixels(const BinaryMask& mask) {
  std::vector<PixelCoord> pts;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask(x, y)) pts.push_back({x, y});
    }
  }
  return pts;
}

HoughGrid HoughGrid::make(double theta_min, double theta_step, int theta_bins, double rho_max,
                          double rho_res) {
  HoughGrid g;
  g.theta.resize(theta_bins);
  g.cos_t.resize(theta_bins);
  g.sin_t.resize(theta_bins);
  for (int k = 0; k < theta_bins; ++k) {
    g.theta[k] = theta_min + k * theta_step;
    g.cos_t[k] = std::cos(g.theta[k]);
    g.sin_t[k] = std::sin(g.theta[k]);
  }
  g.rho_max = rho_max;
  g.rho_res = rho_res;
  g.rho_bins = static_cast<int>(std::lround(2.0 * rho_max / rho_res)) + 1;
  return g;
}

int HoughGrid::rho_bin(double rho) const noexcept {
  return static_cast<int>(std::lround((rho + rho_max) / rho_res));
}

namespace {

inline void vote_theta_row(std::span<const PixelCoord> pts, const HoughGrid& grid, int k,
                           std::uint32_t* row) {
  const double c = grid.cos_t[k];
  const double s = grid.sin_t[k];
  for (const auto& p : pts) {
    const int bin = grid.rho_bin(p.x * c + p.y * s);
    if (bin >= 0 && bin < grid.rho_bins) ++row[bin];
  }
}

}  // namespace

void hough_vote_serial(std::span<const PixelCoord> pts, const HoughGrid& grid,
                       std::span<std::uint32_t> acc) {
  for (int k = 0; k < grid.theta_bins(); ++k) {
    vote_theta_row(pts, grid, k, acc.data() + static_cast<std::size_t>(k) * grid.rho_bins);
  }
}

void hough_vote_parallel(std::span<const PixelCoord> pts, const HoughGrid& grid,
                         std::span<std::uint32_t> acc) {
  // each theta row is owned by exactly one thread
  const int bins = grid.theta_bins();
#pragma omp parallel for schedule(static)
  for (int k = 0; k < bins; ++k) {
    vote_theta_row(pts, grid, k, acc.data() + static_cast<std::size_t>(k) * grid.rho_bins);
  }
}

void hough_vote(std::span<const PixelCoord> pts, const HoughGrid& grid,
                std::span<std::uint32_t> acc, Exec exec) {
  if (exec == Exec::parallel) {
    hough_vote_parallel(pts, grid, acc);
  } else {
    hough_vote_serial(pts, grid, acc);
  }
}

void radius_histogram_serial(std::span<const PixelCoord> pts, Point center, int r_min, int r_max,
                             std::span<std::uint32_t> hist) {
  for (const auto& p : pts) {
    const long r = std::lround(std::hypot(p.x - center.x, p.y - center.y));
    if (r >= r_min && r <= r_max) ++hist[static_cast<std::size_t>(r - r_min)];
  }
}

void radius_histogram_parallel(std::span<const PixelCoord> pts, Point center, int r_min,
                               int r_max, std::span<std::uint32_t> hist) {
  const std::size_t nbins = hist.size();
  const auto n = static_cast<std::ptrdiff_t>(pts.size());
#pragma omp parallel
  {
    std::vector<std::uint32_t> local(nbins, 0);
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto& p = pts[static_cast<std::size_t>(i)];
      const long r = std::lround(std::hypot(p.x - center.x, p.y - center.y));
      if (r >= r_min && r <= r_max) ++local[static_cast<std::size_t>(r - r_min)];
    }
    // integer counts: merge order does not matter
#pragma omp critical
    for (std::size_t b = 0; b < nbins; ++b) hist[b] += local[b];
  }
}

void radius_histogram(std::span<const PixelCoord> pts, Point center, int r_min, int r_max,
                      std::span<std::uint32_t> hist, Exec exec) {
  if (exec == Exec::parallel) {
    radius_histogram_parallel(pts, center, r_min, r_max, hist);
  } else {
    radius_histogram_serial(pts, center, r_min, r_max, hist);
  }
}

void GridGraph::finalize_degree() {
  degree.assign(static_cast<std::size_t>(width) * height, 0.0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * width + x;
      double d = right[i] + down[i];
      if (x > 0) d += right[i - 1];
      if (y > 0) d += down[i - static_cast<std::size_t>(width)];
      degree[i] = d;
    }
  }
}

namespace {

inline void laplacian_row(const GridGraph& g, std::span<const double> x, std::span<double> y,
                          int row) {
  const std::size_t w = static_cast<std::size_t>(g.width);
  const std::size_t base = static_cast<std::size_t>(row) * w;
  for (std::size_t c = 0; c < w; ++c) {
    const std::size_t i = base + c;
    double acc = g.degree[i] * x[i];
    if (c + 1 < w) acc -= g.right[i] * x[i + 1];
    if (c > 0) acc -= g.right[i - 1] * x[i - 1];
    if (row + 1 < g.height) acc -= g.down[i] * x[i + w];
    if (row > 0) acc -= g.down[i - w] * x[i - w];
    y[i] = acc;
  }
}

inline void neumann_row(const Window& win, std::span<const double> x, std::span<double> y,
                        int ly) {
  const std::size_t w = static_cast<std::size_t>(win.width);
  const std::size_t base = static_cast<std::size_t>(ly) * w;
  const int gy = win.y0 + ly;
  for (int lx = 0; lx < win.width; ++lx) {
    const std::size_t i = base + static_cast<std::size_t>(lx);
    const int gx = win.x0 + lx;
    int deg = 0;
    double nb = 0.0;
    if (gx > 0) {
      ++deg;
      if (lx > 0) nb += x[i - 1];
    }
    if (gx + 1 < win.full_width) {
      ++deg;
      if (lx + 1 < win.width) nb += x[i + 1];
    }
    if (gy > 0) {
      ++deg;
      if (ly > 0) nb += x[i - w];
    }
    if (gy + 1 < win.full_height) {
      ++deg;
      if (ly + 1 < win.height) nb += x[i + w];
    }
    y[i] = deg * x[i] - nb;
  }
}

inline double chunk_dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

void graph_laplacian_apply_serial(const GridGraph& g, std::span<const double> x,
                                  std::span<double> y) {
  for (int row = 0; row < g.height; ++row) laplacian_row(g, x, y, row);
}

void graph_laplacian_apply_parallel(const GridGraph& g, std::span<const double> x,
                                    std::span<double> y) {
  const int h = g.height;
#pragma omp parallel for schedule(static)
  for (int row = 0; row < h; ++row) laplacian_row(g, x, y, row);
}

void graph_laplacian_apply(const GridGraph& g, std::span<const double> x, std::span<double> y,
                           Exec exec) {
  if (exec == Exec::parallel) {
    graph_laplacian_apply_parallel(g, x, y);
  } else {
    graph_laplacian_apply_serial(g, x, y);
  }
}

int Window::degree(int lx, int ly) const noexcept {
  const int gx = x0 + lx;
  const int gy = y0 + ly;
  return (gx > 0) + (gx + 1 < full_width) + (gy > 0) + (gy + 1 < full_height);
}

void neumann_laplacian_apply_serial(const Window& w, std::span<const double> x,
                                    std::span<double> y) {
  for (int ly = 0; ly < w.height; ++ly) neumann_row(w, x, y, ly);
}

void neumann_laplacian_apply_parallel(const Window& w, std::span<const double> x,
                                      std::span<double> y) {
  const int h = w.height;
#pragma omp parallel for schedule(static)
  for (int ly = 0; ly < h; ++ly) neumann_row(w, x, y, ly);
}

void neumann_laplacian_apply(const Window& w, std::span<const double> x, std::span<double> y,
                             Exec exec) {
  if (exec == Exec::parallel) {
    neumann_laplacian_apply_parallel(w, x, y);
  } else {
    neumann_laplacian_apply_serial(w, x, y);
  }
}

double dot_serial(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  double total = 0.0;
  for (std::size_t start = 0; start < n; start += kReductionChunk) {
    const std::size_t len = std::min(kReductionChunk, n - start);
    total += chunk_dot(a.data() + start, b.data() + start, len);
  }
  return total;
}

double dot_parallel(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  const std::size_t chunks = (n + kReductionChunk - 1) / kReductionChunk;
  if (chunks < 2) return dot_serial(a, b);
  std::vector<double> partial(chunks);
  const auto nc = static_cast<std::ptrdiff_t>(chunks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < nc; ++c) {
    const std::size_t start = static_cast<std::size_t>(c) * kReductionChunk;
    const std::size_t len = std::min(kReductionChunk, n - start);
    partial[static_cast<std::size_t>(c)] = chunk_dot(a.data() + start, b.data() + start, len);
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

double dot(std::span<const double> a, std::span<const double> b, Exec exec) {
  return exec == Exec::parallel ? dot_parallel(a, b) : dot_serial(a, b);
}

}  // namespace dqa::kernels
