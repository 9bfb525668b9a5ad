#include "doctest.h"

#include <cmath>

#include "dqa/error.hpp"
#include "dqa/probe.hpp"
#include "dqa/synth.hpp"

using namespace dqa;

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

GateCandidate gate_at(Point c, double angle) {
  GateCandidate g;
  g.box = {c.x - 5, c.y - 5, c.x + 5, c.y + 5};
  g.vessel_angle_deg = angle;
  return g;
}

}  // namespace

TEST_CASE("locate_probe on a synthetic wedge") {
  synth::WedgeSpec spec;  // apex (256,-80), half-angle 30, arcs 150/400
  const auto [img, truth] = synth::gen_wedge(spec);
  const auto p = locate_probe(img);
  CHECK(std::hypot(p.apex.x - 256, p.apex.y + 80) <= 3.0);
  CHECK(p.verified);
  REQUIRE(p.edge_lines.size() == 2);
  for (const auto& l : p.edge_lines) CHECK(std::abs(l.distance(p.apex)) <= 0.5);
  REQUIRE(p.arcs.size() >= 2);
  for (const auto& a : p.arcs) CHECK(a.support >= ProbeConfig{}.arc_min_votes);
}

TEST_CASE("locate_probe without arcs is unverified") {
  synth::WedgeSpec spec;
  spec.arcs = false;
  const auto p = locate_probe(synth::gen_wedge(spec).first);
  CHECK(std::hypot(p.apex.x - 256, p.apex.y + 80) <= 3.0);
  CHECK_FALSE(p.verified);
}

TEST_CASE("locate_probe failures") {
  CHECK(code_of([] { locate_probe(RasterImage(64, 64, 3, 30)); }) == Errc::wedge_not_found);
  const auto box = synth::gen_linear_box(512, 512, {100, 60, 400, 460});
  CHECK(code_of([&] { locate_probe(box); }) == Errc::degenerate_intersection);
  CHECK(code_of([] { locate_probe(RasterImage(8, 8, 1)); }) == Errc::channel_mismatch);
}

TEST_CASE("intersect uses homogeneous coordinates") {
  const PolarLine vertical{3.0, 0.0, 0};
  const PolarLine horizontal{7.0, kPi / 2.0, 0};
  const Point p = intersect(vertical, horizontal);
  CHECK(p.x == doctest::Approx(3.0));
  CHECK(p.y == doctest::Approx(7.0));
  CHECK(code_of([&] { intersect(vertical, PolarLine{9.0, 0.0, 0}); }) ==
        Errc::degenerate_intersection);
}

TEST_CASE("beam_direction_at") {
  const Point a = beam_direction_at(Point{0, 0}, Point{0, 5});
  CHECK(a.x == doctest::Approx(0.0));
  CHECK(a.y == doctest::Approx(-1.0));
  const Point b = beam_direction_at(Point{0, 0}, Point{3, 4});
  CHECK(b.x == doctest::Approx(-0.6));
  CHECK(b.y == doctest::Approx(-0.8));
  CHECK(code_of([] { beam_direction_at(Point{1, 1}, Point{1, 1}); }) == Errc::at_apex);

  synth::Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    const Point u = beam_direction_at(Point{rng.uniform(-500, 500), rng.uniform(-500, 500)},
                                      Point{rng.uniform(-500, 500), rng.uniform(-500, 500)});
    CHECK(std::abs(std::hypot(u.x, u.y) - 1.0) <= 1e-12);
  }
}

TEST_CASE("insonation_angle examples") {
  auto r = insonation_angle(Point{50, 0}, gate_at({50, 100}, 90));
  CHECK(r.angle_deg == doctest::Approx(0.0));
  CHECK(r.passes_isuog);
  r = insonation_angle(Point{0, 0}, gate_at({100, 100}, 135));
  CHECK(r.angle_deg == doctest::Approx(90.0));
  CHECK_FALSE(r.passes_isuog);
  r = insonation_angle(Point{0, 0}, gate_at({100, 100}, 45));
  CHECK(r.angle_deg == doctest::Approx(0.0));
  CHECK(r.passes_isuog);

  // an angle equal to the limit fails the strict rule
  const GateCandidate g = gate_at({0, 100}, 60);
  const double at = insonation_angle(Point{0, 0}, g).angle_deg;
  CHECK(at == doctest::Approx(30.0));
  CHECK_FALSE(insonation_angle(Point{0, 0}, g, at).passes_isuog);
}

TEST_CASE("insonation_angle properties") {
  synth::Rng rng(12);
  for (int i = 0; i < 200; ++i) {
    const Point apex{rng.uniform(0, 600), rng.uniform(-200, 0)};
    const Point c{rng.uniform(0, 600), rng.uniform(50, 600)};
    const double a = rng.uniform(0, 180);
    const auto r = insonation_angle(apex, gate_at(c, a));
    CHECK(r.angle_deg >= 0.0);
    CHECK(r.angle_deg <= 90.0);
    CHECK(r.passes_isuog == (r.angle_deg < 30.0));
    const auto flipped = insonation_angle(apex, gate_at(c, a + 180.0));
    CHECK(std::abs(flipped.angle_deg - r.angle_deg) <= 1e-9);
  }
}

TEST_CASE("fold_line_angle") {
  CHECK(fold_line_angle(0.0) == 0.0);
  CHECK(fold_line_angle(180.0) == 0.0);
  CHECK(fold_line_angle(-45.0) == doctest::Approx(135.0));
  CHECK(fold_line_angle(405.0) == doctest::Approx(45.0));
  for (double d = -720; d < 720; d += 7.3) {
    const double f = fold_line_angle(d);
    CHECK(f >= 0.0);
    CHECK(f < 180.0);
  }
}

TEST_CASE("read_annotations") {
  const std::string doc = R"({"shapes": [
    {"label": "gate", "shape_type": "rectangle", "points": [[10, 10], [60, 60]]},
    {"label": "vessel", "shape_type": "line", "points": [[20, 50], [50, 20]]},
    {"label": "note", "shape_type": "polygon", "points": [[0, 0], [1, 1], [2, 0]]}
  ]})";
  const auto gates = read_annotations(doc);
  REQUIRE(gates.size() == 1);
  CHECK(gates[0].vessel_angle_deg == doctest::Approx(135.0));
  CHECK(gates[0].score == 1.0);
  CHECK(gates[0].box.centroid() == Point{35, 35});

  CHECK(read_annotations(R"({"shapes": []})").empty());
  CHECK(code_of([] {
          read_annotations(
              R"({"shapes": [{"label": "g", "shape_type": "rectangle", "points": [[0,0],[5,5]]}]})");
        }) == Errc::annotation_mismatch);
  CHECK(code_of([] {
          read_annotations(
              R"({"shapes": [{"label": "v", "shape_type": "line", "points": [[0,0],[5,5]]}]})");
        }) == Errc::annotation_mismatch);
  const std::string two_lines = R"({"shapes": [
    {"label": "gate", "shape_type": "rectangle", "points": [[60, 60], [10, 10]]},
    {"label": "vessel", "shape_type": "line", "points": [[20, 50], [50, 20]]},
    {"label": "vessel", "shape_type": "line", "points": [[20, 20], [50, 50]]}
  ]})";
  CHECK(code_of([&] { read_annotations(two_lines); }) == Errc::annotation_mismatch);
}

TEST_CASE("locate_probe separates both edges of a wide thin-edged wedge") {
  synth::WedgeSpec spec;
  spec.apex = {292.7, 9.6};
  spec.half_angle_deg = 45.0;
  spec.inner_radius = 149.0;
  spec.outer_radius = 459.0;
  spec.arcs = false;
  for (double noise : {0.0, 0.01}) {
    spec.noise = noise;
    const auto [img, truth] = synth::gen_wedge(spec);
    const auto found = locate_probe(img);
    CHECK(std::hypot(found.apex.x - spec.apex.x, found.apex.y - spec.apex.y) <= 3.0);
    CHECK_FALSE(found.verified);
  }
}
