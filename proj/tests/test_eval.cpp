#include "doctest.h"

#include <cmath>
#include <limits>

#include "dqa/error.hpp"
#include "dqa/eval.hpp"
#include "dqa/synth.hpp"

using namespace dqa;
using namespace dqa::eval;

namespace {

GateCandidate at(double x, double y, double angle = 0.0) {
  GateCandidate g;
  g.box = {x, y, x, y};
  g.vessel_angle_deg = angle;
  return g;
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::invalid_argument;
}

}  // namespace

TEST_CASE("match") {
  const std::vector<GateCandidate> gts{at(0, 0), at(100, 100)};
  SUBCASE("identical") {
    const auto m = match(gts, gts);
    REQUIRE(m.pairs.size() == 2);
    for (const auto& p : m.pairs) CHECK(p.distance == 0.0);
  }
  SUBCASE("hand example") {
    const std::vector<GateCandidate> preds{at(3, 4), at(200, 200)};
    const auto m = match(gts, preds);
    REQUIRE(m.pairs.size() == 2);
    CHECK(m.pairs[0].distance == 5.0);
    CHECK(m.pairs[0].pred == 0);
    // (3,4) is also the nearest prediction to (100,100)
    CHECK(m.pairs[1].pred == 0);
    CHECK(m.pairs[1].distance == doctest::Approx(std::hypot(97.0, 96.0)));
    CHECK(m.unmatched_gt.empty());
    CHECK(sensitivity(m, 10) == 50.0);
  }
  SUBCASE("empty predictions") {
    const auto m = match(gts, {});
    CHECK(m.pairs.empty());
    CHECK(m.unmatched_gt.size() == 2);
    CHECK(sensitivity(m, 10) == 0.0);
  }
  SUBCASE("ties go to the lower prediction index; many-to-one allowed") {
    const std::vector<GateCandidate> preds{at(10, 0), at(-10, 0)};
    const auto m = match(std::vector<GateCandidate>{at(0, 0), at(1, 0)}, preds);
    CHECK(m.pairs[0].pred == 0);
    CHECK(m.pairs[1].pred == 0);
  }
  SUBCASE("centroid is the real-valued corner midpoint") {
    GateCandidate g;
    g.box = {0, 0, 3, 5};
    const auto m = match(std::vector<GateCandidate>{g}, std::vector<GateCandidate>{at(1.5, 2.5)});
    CHECK(m.pairs[0].distance == 0.0);
  }
}

TEST_CASE("sensitivity") {
  const std::vector<GateCandidate> gts{at(0, 0)};
  const auto m = match(gts, std::vector<GateCandidate>{at(10, 0)});
  CHECK(sensitivity(m, 10) == 0.0);  // strict
  CHECK(sensitivity(m, std::nextafter(10.0, 11.0)) == 100.0);
  CHECK(code_of([] { sensitivity(match({}, {}), 5); }) == Errc::no_ground_truth);
  CHECK(code_of([&] { sensitivity(m, 0); }) == Errc::invalid_argument);
}

TEST_CASE("mean_angle_error") {
  const std::vector<GateCandidate> gts{at(0, 0, 30), at(100, 0, 60)};
  const std::vector<GateCandidate> preds{at(1, 0, 35), at(101, 0, 50)};
  const auto m = match(gts, preds);
  CHECK(mean_angle_error(gts, preds, m, 5) == 7.5);
  CHECK(mean_angle_error(gts, gts, match(gts, gts), 5) == 0.0);
  const std::vector<GateCandidate> g1{at(0, 0, 5)}, p1{at(0, 0, 175)};
  CHECK(mean_angle_error(g1, p1, match(g1, p1), 1, true) == doctest::Approx(10.0));
  CHECK(mean_angle_error(g1, p1, match(g1, p1), 1, false) == doctest::Approx(170.0));
  CHECK(code_of([&] { mean_angle_error(gts, preds, m, 0.5); }) == Errc::no_matches);
}

TEST_CASE("sweep") {
  SUBCASE("perfect predictions") {
    const std::vector<GateCandidate> gts{at(5, 5, 10), at(50, 80, 100)};
    const std::vector<double> ns{1, 2, 5, 10};
    const auto c = sweep(gts, gts, ns);
    for (std::size_t i = 0; i < ns.size(); ++i) {
      CHECK(c.sensitivity[i] == 100.0);
      REQUIRE(c.mean_angle_err[i].has_value());
      CHECK(*c.mean_angle_err[i] == 0.0);
    }
  }
  SUBCASE("jittered predictions step exactly at the radius") {
    const auto scene = synth::gen_detection_scene(40, 7.0, 0.0, 3);
    std::vector<double> ns;
    for (int n = 1; n <= 20; ++n) ns.push_back(n);
    const auto c = sweep(scene.gts, scene.preds, ns);
    for (std::size_t i = 0; i < ns.size(); ++i) {
      CHECK(c.sensitivity[i] == (ns[i] > 7.0 ? 100.0 : 0.0));
      CHECK(c.mean_angle_err[i].has_value() == (ns[i] > 7.0));
    }
  }
  SUBCASE("absent rows are written as NA") {
    const std::vector<GateCandidate> gts{at(0, 0)};
    const std::vector<double> ns{1, 20};
    const auto csv = write_csv(sweep(gts, std::vector<GateCandidate>{at(10, 0)}, ns));
    CHECK(csv == "n,sensitivity_pct,mean_angle_err_deg\n1.000000,0.000000,NA\n"
                 "20.000000,100.000000,0.000000\n");
  }
  SUBCASE("range must ascend") {
    const std::vector<double> bad{5, 3};
    CHECK(code_of([&] { sweep({}, {}, bad); }) == Errc::invalid_argument);
  }
}

TEST_CASE("matching agrees with an exhaustive search and sensitivity is monotone") {
  synth::Rng rng(41);
  for (int trial = 0; trial < 300; ++trial) {
    const int ng = 1 + static_cast<int>(rng.uniform() * 8);
    const int np = static_cast<int>(rng.uniform() * 9);
    std::vector<GateCandidate> gts, preds;
    // small integer grid so exact ties happen
    for (int i = 0; i < ng; ++i) gts.push_back(at(std::floor(rng.uniform() * 6), std::floor(rng.uniform() * 6)));
    for (int i = 0; i < np; ++i) preds.push_back(at(std::floor(rng.uniform() * 6), std::floor(rng.uniform() * 6)));
    const auto m = match(gts, preds);
    CHECK(m.pairs.size() + m.unmatched_gt.size() == gts.size());
    for (const auto& p : m.pairs) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t j = 0; j < preds.size(); ++j) {
        const double d = std::hypot(preds[j].box.x0 - gts[p.gt].box.x0, preds[j].box.y0 - gts[p.gt].box.y0);
        if (d < best) {
          best = d;
          arg = j;
        }
      }
      CHECK(p.distance == best);
      CHECK(p.pred == arg);
    }
    double prev = -1.0;
    for (double n = 0.5; n < 10; n += 0.5) {
      const double s = sensitivity(m, n);
      CHECK(s >= prev);
      CHECK(s <= 100.0);
      prev = s;
    }
  }
}

TEST_CASE("csv reader") {
  const auto boxes = read_csv("x_center,y_center,angle_deg,score\n1.5,2,30,0.9\r\n\n4,5,6,1\n");
  REQUIRE(boxes.size() == 2);
  CHECK(boxes[0].box.centroid() == Point{1.5, 2});
  CHECK(boxes[0].vessel_angle_deg == 30);
  CHECK(boxes[0].score == 0.9);
  CHECK(code_of([] { read_csv("x,y,angle,score\n1,2,3,4\n"); }) == Errc::invalid_argument);
  CHECK(code_of([] { read_csv("x_center,y_center,angle_deg,score\n1,2,3\n"); }) ==
        Errc::invalid_argument);
  CHECK(code_of([] { read_csv("x_center,y_center,angle_deg,score\n1,2,abc,4\n"); }) ==
        Errc::invalid_argument);
  CHECK(code_of([] { read_csv(""); }) == Errc::invalid_argument);
}
