#pragma once

#include "dqa/image.hpp"

namespace dqa::draw {

inline constexpr Rgb kRed{255, 0, 0};
inline constexpr Rgb kGreen{0, 255, 0};
inline constexpr Rgb kBlue{0, 0, 255};
inline constexpr Rgb kYellow{255, 255, 0};

// Crisp rasterisation: a pixel is painted when its centre (integer coordinates) lies
// within thickness / 2 of the shape. Nothing is anti-aliased.

void segment(RasterImage& img, Point a, Point b, double thickness, Rgb color);
/// Every other `dash` pixels along the segment are skipped.
void dotted_segment(RasterImage& img, Point a, Point b, double thickness, Rgb color,
                    double dash = 4.0);
/// Arc of the circle between two angles (radians, measured from +x with y down).
void arc(RasterImage& img, Point center, double radius, double theta0, double theta1,
         double thickness, Rgb color);
void box(RasterImage& img, double x0, double y0, double x1, double y1, double thickness,
         Rgb color);

}  // namespace dqa::draw
