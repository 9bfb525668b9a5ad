#include "dqa/draw.hpp"

#include <algorithm>
#include <cmath>

namespace dqa::draw {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

struct Bounds {
  int x0, y0, x1, y1;
};

Bounds clip(const RasterImage& img, double x0, double y0, double x1, double y1) {
  Bounds b;
  b.x0 = std::max(0, static_cast<int>(std::floor(x0)));
  b.y0 = std::max(0, static_cast<int>(std::floor(y0)));
  b.x1 = std::min(img.width() - 1, static_cast<int>(std::ceil(x1)));
  b.y1 = std::min(img.height() - 1, static_cast<int>(std::ceil(y1)));
  return b;
}

void put(RasterImage& img, int x, int y, Rgb c) {
  if (img.channels() == 3) {
    img.set_rgb(x, y, c);
  } else {
    img.at(x, y) = static_cast<std::uint8_t>((c.r + c.g + c.b) / 3);
  }
}

// Distance from p to segment ab and the projection parameter along it, in pixels.
void project(Point p, Point a, Point b, double& dist, double& along) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double qx = a.x + t * dx, qy = a.y + t * dy;
  dist = std::hypot(p.x - qx, p.y - qy);
  along = t * std::sqrt(len2);
}

void segment_impl(RasterImage& img, Point a, Point b, double thickness, Rgb color,
                  double dash) {
  const double half = thickness / 2.0;
  const auto r = clip(img, std::min(a.x, b.x) - half, std::min(a.y, b.y) - half,
                      std::max(a.x, b.x) + half, std::max(a.y, b.y) + half);
  for (int y = r.y0; y <= r.y1; ++y) {
    for (int x = r.x0; x <= r.x1; ++x) {
      double dist = 0.0, along = 0.0;
      project({static_cast<double>(x), static_cast<double>(y)}, a, b, dist, along);
      if (dist > half) continue;
      if (dash > 0.0 && static_cast<long>(std::floor(along / dash)) % 2 == 1) continue;
      put(img, x, y, color);
    }
  }
}

}  // namespace

void segment(RasterImage& img, Point a, Point b, double thickness, Rgb color) {
  segment_impl(img, a, b, thickness, color, 0.0);
}

void dotted_segment(RasterImage& img, Point a, Point b, double thickness, Rgb color,
                    double dash) {
  segment_impl(img, a, b, thickness, color, dash);
}

void arc(RasterImage& img, Point center, double radius, double theta0, double theta1,
         double thickness, Rgb color) {
  const double half = thickness / 2.0;
  const double reach = radius + half;
  const auto r = clip(img, center.x - reach, center.y - reach, center.x + reach,
                      center.y + reach);
  const double span = std::fmod(std::fmod(theta1 - theta0, kTwoPi) + kTwoPi, kTwoPi);
  for (int y = r.y0; y <= r.y1; ++y) {
    for (int x = r.x0; x <= r.x1; ++x) {
      const double dx = x - center.x, dy = y - center.y;
      if (std::abs(std::hypot(dx, dy) - radius) > half) continue;
      const double rel = std::fmod(std::fmod(std::atan2(dy, dx) - theta0, kTwoPi) + kTwoPi, kTwoPi);
      if (rel > span) continue;
      put(img, x, y, color);
    }
  }
}

void box(RasterImage& img, double x0, double y0, double x1, double y1, double thickness,
         Rgb color) {
  segment(img, {x0, y0}, {x1, y0}, thickness, color);
  segment(img, {x1, y0}, {x1, y1}, thickness, color);
  segment(img, {x1, y1}, {x0, y1}, thickness, color);
  segment(img, {x0, y1}, {x0, y0}, thickness, color);
}

}  // namespace dqa::draw
