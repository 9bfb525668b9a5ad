#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "dqa/image.hpp"
#include "dqa/kernels.hpp"

namespace dqa {

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

/// Inclusive per-channel bounds, channel order R, G, B.
struct ChannelRule {
  std::array<std::uint8_t, 3> lo{0, 180, 0};
  std::array<std::uint8_t, 3> hi{100, 255, 100};

  bool accepts(Rgb px) const noexcept {
    return px.r >= lo[0] && px.r <= hi[0] && px.g >= lo[1] && px.g <= hi[1] && px.b >= lo[2] &&
           px.b <= hi[2];
  }
};

BinaryMask threshold_rgb(const RasterImage& img, const ChannelRule& rule = {});

// Morphology with a Euclidean disk (dx^2 + dy^2 <= r^2). Pixels outside the image
// count as background for erosion.
BinaryMask erode(const BinaryMask& mask, int radius);
BinaryMask dilate(const BinaryMask& mask, int radius);

/// Sobel gradient magnitude of one channel, replicated borders.
GrayImage sobel_magnitude(const RasterImage& img, int channel);

struct WatershedOptions {
  int marker_erosion_px = 3;
  int min_marker_px = 40;  ///< smallest component kept as a marker when no erosion survives
};

// Marker-controlled watershed over the green-channel gradient of `guide`.
// Foreground markers come from each connected component of the mask, eroded by up to
// marker_erosion_px (less when a thin outline would vanish); background markers are
// the complement eroded by marker_erosion_px.
BinaryMask watershed_refine(const BinaryMask& mask, const RasterImage& guide,
                            const WatershedOptions& options = {});

struct PolarLine {
  double rho = 0.0;    ///< signed distance from the origin, pixels
  double theta = 0.0;  ///< normal direction, radians in [0, pi)
  int votes = 0;

  double distance(Point p) const noexcept;
};

struct HoughLineOptions {
  double theta_min_deg = 0.0;
  double theta_max_deg = 180.0;  ///< exclusive unless equal to theta_min
  double theta_step_deg = 1.0;
  double rho_res = 1.0;
  double nms_rho_px = 5.0;
  double nms_theta_deg = 5.0;
  kernels::Exec exec = kernels::Exec::parallel;
};

std::vector<PolarLine> hough_lines(const BinaryMask& mask, int min_votes,
                                   const HoughLineOptions& options);
std::vector<PolarLine> hough_lines(const BinaryMask& mask, int min_votes, int angle_bins,
                                   double rho_resolution);

/// Longest horizontal or vertical run of foreground pixels.
int longest_run(const BinaryMask& mask);
int default_min_votes(const BinaryMask& mask, double fraction = 0.3);

struct CircleArc {
  Point center;
  double radius = 0.0;
  int support = 0;
};

struct CircleOptions {
  double suppression_px = 5.0;
  kernels::Exec exec = kernels::Exec::parallel;
};

std::vector<CircleArc> hough_circles_fixed_center(const BinaryMask& mask, Point center,
                                                  double r_min, double r_max, int min_votes,
                                                  const CircleOptions& options = {});

std::vector<double> gaussian_kernel(double sigma);
std::vector<double> gaussian_smooth_1d(std::span<const double> signal, double sigma);

// 4-connected flood over `passable` starting from every passable border pixel.
BinaryMask reach_from_border(const BinaryMask& passable);

}  // namespace dqa
