#pragma once

#include <string>
#include <vector>

#include "dqa/image.hpp"
#include "dqa/vision.hpp"

namespace dqa {

struct Box {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

  /// Real-valued midpoint of the corners.
  Point centroid() const noexcept { return {(x0 + x1) / 2.0, (y0 + y1) / 2.0}; }
  bool contains(Point p) const noexcept {
    return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
  }
  static Box from_corners(Point a, Point b);
};

// A proposed or annotated Doppler gate. vessel_angle_deg describes an undirected
// line: degrees from +x with y pointing down, folded into [0, 180).
struct GateCandidate {
  Box box;
  double vessel_angle_deg = 0.0;
  double score = 1.0;
  std::string label;
};

struct ProbeLocation {
  Point apex;
  std::vector<PolarLine> edge_lines;
  bool verified = false;  ///< both arcs found about the apex
  std::vector<CircleArc> arcs;
};

struct InsonationResult {
  double angle_deg = 0.0;
  Point beam_vector;  ///< unit vector from the gate toward the apex
  bool passes_isuog = false;
};

struct ProbeConfig {
  ChannelRule green;
  WatershedOptions watershed;
  HoughLineOptions hough;
  int min_votes = 0;  ///< 0: derive from the mask as run_fraction * longest run
  double min_votes_run_fraction = 0.3;
  double parallel_reject_deg = 2.0;
  double refine_band_px = 2.5;
  int arc_min_votes = 60;
  double arc_min_radius_px = 10.0;
  double arc_suppression_px = 5.0;
  double isuog_max_angle_deg = 30.0;
};

/// Folds any angle in degrees into [0, 180).
double fold_line_angle(double deg);

ProbeLocation locate_probe(const RasterImage& img, const ProbeConfig& config = {});

/// Intersection of two lines via the cross product of their homogeneous forms.
Point intersect(const PolarLine& a, const PolarLine& b);

/// Total-least-squares fit of the foreground pixels within `band` of `line`.
PolarLine refine_line(const BinaryMask& mask, const PolarLine& line, double band);

Point beam_direction_at(const Point& apex, const Point& pixel);
inline Point beam_direction_at(const ProbeLocation& probe, const Point& pixel) {
  return beam_direction_at(probe.apex, pixel);
}

InsonationResult insonation_angle(const Point& apex, const GateCandidate& gate,
                                  double max_angle_deg = 30.0);
inline InsonationResult insonation_angle(const ProbeLocation& probe, const GateCandidate& gate,
                                         double max_angle_deg = 30.0) {
  return insonation_angle(probe.apex, gate, max_angle_deg);
}

/// Reads the rectangle/line pairs of a LabelMe document (JSON text).
std::vector<GateCandidate> read_annotations(const std::string& json_text);

}  // namespace dqa
