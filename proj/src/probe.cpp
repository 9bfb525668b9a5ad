#include "dqa/probe.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "json.hpp"

#include "dqa/error.hpp"

namespace dqa {

Box Box::from_corners(Point a, Point b) {
  return {std::min(a.x, b.x), std::min(a.y, b.y), std::max(a.x, b.x), std::max(a.y, b.y)};
}

double fold_line_angle(double deg) {
  double a = std::fmod(deg, 180.0);
  if (a < 0.0) a += 180.0;
  if (a >= 180.0) a = 0.0;
  return a;
}

Point intersect(const PolarLine& a, const PolarLine& b) {
  const double c1 = std::cos(a.theta), s1 = std::sin(a.theta);
  const double c2 = std::cos(b.theta), s2 = std::sin(b.theta);
  // (c, s, -rho) homogeneous lines; their cross product is the meeting point
  const double X = s1 * (-b.rho) - (-a.rho) * s2;
  const double Y = (-a.rho) * c2 - c1 * (-b.rho);
  const double Z = c1 * s2 - s1 * c2;
  if (std::abs(Z) < 1e-12) {
    throw Error(Errc::degenerate_intersection, "lines are parallel");
  }
  return {X / Z, Y / Z};
}

PolarLine refine_line(const BinaryMask& mask, const PolarLine& line, double band) {
  PolarLine current = line;
  for (int pass = 0; pass < 2; ++pass) {
    const double c = std::cos(current.theta), s = std::sin(current.theta);
    double n = 0.0, mx = 0.0, my = 0.0;
    for (int y = 0; y < mask.height(); ++y) {
      for (int x = 0; x < mask.width(); ++x) {
        if (!mask(x, y) || std::abs(x * c + y * s - current.rho) > band) continue;
        n += 1.0;
        mx += x;
        my += y;
      }
    }
    if (n < 2.0) return current;
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (int y = 0; y < mask.height(); ++y) {
      for (int x = 0; x < mask.width(); ++x) {
        if (!mask(x, y) || std::abs(x * c + y * s - current.rho) > band) continue;
        const double dx = x - mx, dy = y - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
      }
    }
    const double major = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    double theta = major + kPi / 2.0;
    theta = std::fmod(theta, kPi);
    if (theta < 0.0) theta += kPi;
    current = PolarLine{mx * std::cos(theta) + my * std::sin(theta), theta, current.votes};
  }
  return current;
}

ProbeLocation locate_probe(const RasterImage& img, const ProbeConfig& config) {
  if (img.channels() != 3) {
    throw Error(Errc::channel_mismatch, "locate_probe needs a 3-channel image");
  }
  const BinaryMask raw = threshold_rgb(img, config.green);
  if (count_foreground(raw) == 0) {
    throw Error(Errc::wedge_not_found, "no pixel matches the Doppler box colour");
  }
  BinaryMask mask;
  try {
    mask = watershed_refine(raw, img, config.watershed);
  } catch (const Error& e) {
    if (e.code() != Errc::no_foreground) throw;
    throw Error(Errc::wedge_not_found, "Doppler box mask vanished under refinement");
  }

  const int min_votes = config.min_votes > 0
                            ? config.min_votes
                            : default_min_votes(mask, config.min_votes_run_fraction);
  // A thick edge leaves secondary accumulator peaks just outside the suppression window,
  // so the second edge is searched for after removing the pixels of the first.
  const auto first = hough_lines(mask, min_votes, config.hough);
  if (first.empty()) throw Error(Errc::wedge_not_found, "found 0 radial lines, need 2");
  ProbeLocation probe;
  probe.edge_lines.push_back(refine_line(mask, first[0], config.refine_band_px));
  BinaryMask rest = mask;
  {
    const PolarLine& e = probe.edge_lines[0];
    const double c = std::cos(e.theta), s = std::sin(e.theta);
    for (int y = 0; y < rest.height(); ++y) {
      for (int x = 0; x < rest.width(); ++x) {
        if (std::abs(x * c + y * s - e.rho) <= config.refine_band_px) rest(x, y) = 0;
      }
    }
  }
  const auto second = hough_lines(rest, min_votes, config.hough);
  if (second.empty()) throw Error(Errc::wedge_not_found, "found 1 radial line, need 2");
  probe.edge_lines.push_back(refine_line(rest, second[0], config.refine_band_px));
  double dtheta = std::abs(probe.edge_lines[0].theta - probe.edge_lines[1].theta);
  dtheta = std::min(dtheta, kPi - dtheta);
  if (dtheta < deg2rad(config.parallel_reject_deg)) {
    throw Error(Errc::degenerate_intersection,
                "radial edges differ by " + std::to_string(rad2deg(dtheta)) + " degrees");
  }
  probe.apex = intersect(probe.edge_lines[0], probe.edge_lines[1]);

  double r_max = 0.0;
  for (const Point corner : {Point{0, 0}, Point{double(img.width() - 1), 0},
                             Point{0, double(img.height() - 1)},
                             Point{double(img.width() - 1), double(img.height() - 1)}}) {
    r_max = std::max(r_max, std::hypot(corner.x - probe.apex.x, corner.y - probe.apex.y));
  }
  if (r_max >= config.arc_min_radius_px) {
    CircleOptions copt;
    copt.exec = config.hough.exec;
    copt.suppression_px = config.arc_suppression_px;
    probe.arcs = hough_circles_fixed_center(mask, probe.apex, config.arc_min_radius_px, r_max,
                                            config.arc_min_votes, copt);
  }
  probe.verified = probe.arcs.size() >= 2;
  return probe;
}

Point beam_direction_at(const Point& apex, const Point& pixel) {
  const double dx = apex.x - pixel.x;
  const double dy = apex.y - pixel.y;
  const double n = std::hypot(dx, dy);
  if (n < 1e-9) throw Error(Errc::at_apex, "pixel coincides with the probe apex");
  return {dx / n, dy / n};
}

InsonationResult insonation_angle(const Point& apex, const GateCandidate& gate,
                                  double max_angle_deg) {
  InsonationResult out;
  out.beam_vector = beam_direction_at(apex, gate.box.centroid());
  const double a = deg2rad(gate.vessel_angle_deg);
  // the vessel is an undirected line, so the sign of the dot product carries no information;
  // atan2 keeps full precision near 0 where acos does not
  const double ca = std::cos(a), sa = std::sin(a);
  const double dot = std::abs(out.beam_vector.x * ca + out.beam_vector.y * sa);
  const double cross = std::abs(out.beam_vector.x * sa - out.beam_vector.y * ca);
  out.angle_deg = rad2deg(std::atan2(cross, dot));
  out.passes_isuog = out.angle_deg < max_angle_deg;
  return out;
}

std::vector<GateCandidate> read_annotations(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_argument, std::string("annotation document: ") + e.what());
  }
  if (!doc.is_object()) throw Error(Errc::invalid_argument, "annotation document is not an object");
  if (!doc.contains("shapes")) return {};

  struct Shape {
    Point a, b;
    std::string label;
  };
  std::vector<Shape> rects, lines;
  auto point_at = [](const nlohmann::json& pts, std::size_t i) {
    const auto& p = pts.at(i);
    return Point{p.at(0).get<double>(), p.at(1).get<double>()};
  };
  try {
    for (const auto& shape : doc.at("shapes")) {
      const auto type = shape.at("shape_type").get<std::string>();
      if (type != "rectangle" && type != "line") continue;
      const auto& pts = shape.at("points");
      if (pts.size() < 2) throw Error(Errc::invalid_argument, type + " needs two points");
      Shape s{point_at(pts, 0), point_at(pts, 1), shape.value("label", std::string{})};
      (type == "rectangle" ? rects : lines).push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_argument, std::string("annotation shape: ") + e.what());
  }

  std::vector<Box> boxes;
  for (const auto& r : rects) boxes.push_back(Box::from_corners(r.a, r.b));
  std::vector<int> owner(lines.size(), -1);
  std::vector<int> line_count(rects.size(), 0);
  std::string offenders;
  auto note = [&](const std::string& what) {
    offenders += offenders.empty() ? what : ", " + what;
  };

  for (std::size_t i = 0; i < lines.size(); ++i) {
    const Point mid{(lines[i].a.x + lines[i].b.x) / 2.0, (lines[i].a.y + lines[i].b.y) / 2.0};
    int hits = 0;
    for (std::size_t j = 0; j < boxes.size(); ++j) {
      if (!boxes[j].contains(mid)) continue;
      ++hits;
      owner[i] = static_cast<int>(j);
    }
    if (hits != 1) {
      note("line " + std::to_string(i) + (hits == 0 ? " outside every rectangle"
                                                    : " inside several rectangles"));
      owner[i] = -1;
    } else {
      ++line_count[static_cast<std::size_t>(owner[i])];
    }
  }
  for (std::size_t j = 0; j < rects.size(); ++j) {
    if (line_count[j] != 1) {
      note("rectangle " + std::to_string(j) + " has " + std::to_string(line_count[j]) +
           " lines");
    }
  }
  if (!offenders.empty()) throw Error(Errc::annotation_mismatch, offenders);

  std::vector<GateCandidate> out(rects.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto j = static_cast<std::size_t>(owner[i]);
    const double dx = lines[i].b.x - lines[i].a.x;
    const double dy = lines[i].b.y - lines[i].a.y;
    out[j].box = boxes[j];
    out[j].vessel_angle_deg = fold_line_angle(rad2deg(std::atan2(dy, dx)));
    out[j].score = 1.0;
    out[j].label = rects[j].label;
  }
  return out;
}

}  // namespace dqa
