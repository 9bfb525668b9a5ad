#pragma once

// Data-parallel inner loops. Every kernel has a plain serial reference and an
// OpenMP version; the two produce bit-identical output for any thread count,
// which the unit tests check directly. Reductions use a fixed chunking so the
// summation order never depends on the team size.

#include <cstdint>
#include <span>
#include <vector>

#include "dqa/image.hpp"

namespace dqa::kernels {

enum class Exec { serial, parallel };

struct PixelCoord {
  int x = 0;
  int y = 0;
};

std::vector<PixelCoord> foreground_pixels(const BinaryMask& mask);

// Discretised (theta, rho) accumulator layout. theta_k = theta_min + k * theta_step,
// rho bin = round((rho + rho_max) / rho_res).
struct HoughGrid {
  std::vector<double> cos_t;
  std::vector<double> sin_t;
  std::vector<double> theta;
  double rho_max = 0.0;
  double rho_res = 1.0;
  int rho_bins = 0;

  static HoughGrid make(double theta_min, double theta_step, int theta_bins, double rho_max,
                        double rho_res);

  int theta_bins() const noexcept { return static_cast<int>(theta.size()); }
  int rho_bin(double rho) const noexcept;
  double rho_of(int bin) const noexcept { return bin * rho_res - rho_max; }
  std::size_t cells() const noexcept { return theta.size() * static_cast<std::size_t>(rho_bins); }
};

void hough_vote_serial(std::span<const PixelCoord> pts, const HoughGrid& grid,
                       std::span<std::uint32_t> acc);
void hough_vote_parallel(std::span<const PixelCoord> pts, const HoughGrid& grid,
                         std::span<std::uint32_t> acc);
void hough_vote(std::span<const PixelCoord> pts, const HoughGrid& grid,
                std::span<std::uint32_t> acc, Exec exec);

// hist[r - r_min] counts pixels whose distance from center rounds to r, r in [r_min, r_max].
void radius_histogram_serial(std::span<const PixelCoord> pts, Point center, int r_min, int r_max,
                             std::span<std::uint32_t> hist);
void radius_histogram_parallel(std::span<const PixelCoord> pts, Point center, int r_min,
                               int r_max, std::span<std::uint32_t> hist);
void radius_histogram(std::span<const PixelCoord> pts, Point center, int r_min, int r_max,
                      std::span<std::uint32_t> hist, Exec exec);

// 4-connected weighted grid graph. right[i] links pixel i to its +x neighbour,
// down[i] to its +y neighbour; entries with no such neighbour are 0.
struct GridGraph {
  int width = 0;
  int height = 0;
  std::vector<double> right;
  std::vector<double> down;
  std::vector<double> degree;

  void finalize_degree();
};

// y = (D - W) x
void graph_laplacian_apply_serial(const GridGraph& g, std::span<const double> x,
                                  std::span<double> y);
void graph_laplacian_apply_parallel(const GridGraph& g, std::span<const double> x,
                                    std::span<double> y);
void graph_laplacian_apply(const GridGraph& g, std::span<const double> x, std::span<double> y,
                           Exec exec);

// Rectangular window of a larger image. The unit-weight 4-neighbour Laplacian is
// evaluated with the full image's border (Neumann at the real edge); neighbours
// inside the image but outside the window count in the degree with value 0.
struct Window {
  int x0 = 0;
  int y0 = 0;
  int width = 0;
  int height = 0;
  int full_width = 0;
  int full_height = 0;

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  int degree(int lx, int ly) const noexcept;
};

void neumann_laplacian_apply_serial(const Window& w, std::span<const double> x,
                                    std::span<double> y);
void neumann_laplacian_apply_parallel(const Window& w, std::span<const double> x,
                                      std::span<double> y);
void neumann_laplacian_apply(const Window& w, std::span<const double> x, std::span<double> y,
                             Exec exec);

inline constexpr std::size_t kReductionChunk = 2048;

double dot_serial(std::span<const double> a, std::span<const double> b);
double dot_parallel(std::span<const double> a, std::span<const double> b);
double dot(std::span<const double> a, std::span<const double> b, Exec exec);

}  // namespace dqa::kernels
