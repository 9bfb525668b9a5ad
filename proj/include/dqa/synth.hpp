#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "dqa/image.hpp"
#include "dqa/probe.hpp"
#include "dqa/spectrum.hpp"

namespace dqa::synth {

// std::mt19937_64 is specified bit for bit; the std distributions are not, so the
// conversions to real numbers are done here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next_u64() { return engine_(); }
  double uniform();                      ///< [0, 1), 53 random bits
  double uniform(double lo, double hi);  ///< [lo, hi)
  double normal();                       ///< standard normal, Box-Muller

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

struct WedgeSpec {
  Point apex{256.0, -80.0};
  double half_angle_deg = 30.0;
  double inner_radius = 150.0;
  double outer_radius = 400.0;
  int width = 512;
  int height = 512;
  double noise = 0.0;  ///< probability that a pixel is replaced by pure green
  double edge_thickness = 3.0;
  bool arcs = true;
  double speckle = 40.0;  ///< peak gray level of the background speckle
  std::uint64_t seed = 1;
};

struct WedgeTruth {
  ProbeLocation probe;
  double half_angle_deg = 0.0;
};

/// A fan-shaped box opening downward from the apex, edges and arcs in pure green.
std::pair<RasterImage, WedgeTruth> gen_wedge(const WedgeSpec& spec);
/// Rectangular (linear-array) box: two parallel edges that never meet.
RasterImage gen_linear_box(int width, int height, Box box, double thickness = 3.0);

struct OverlayLine {
  Point a;
  Point b;
  Rgb color{255, 255, 0};
  double thickness = 2.0;
};

struct SpectrumSpec {
  int n_waveforms = 0;
  int period = 150;                 ///< columns per cardiac cycle
  std::vector<double> peak_heights;  ///< pixels above the axis, one per waveform
  int axis_row = 200;
  std::vector<double> intensity;  ///< lobe brightness in [0, 1], one per waveform
  double noise_sigma = 0.0;
  std::vector<OverlayLine> overlay_lines;
  std::uint64_t seed = 1;
  int height = 0;                 ///< 0: axis_row + 40
  double diastolic_fraction = 0.3;  ///< valley level relative to the lower neighbouring peak
  double rise_fraction = 0.3;       ///< share of the cycle spent rising to the peak
  int wall_gap = 3;                 ///< dark rows between the lobes and the axis line
  double background = 0.02;
  double axis_intensity = 0.9;
};

struct SpectrumTruth {
  int axis_row = 0;
  std::vector<double> peak_cols;
  std::vector<double> valley_cols;  ///< n_waveforms + 1 boundaries
  std::vector<double> heights;      ///< pixels
  std::vector<double> height_pct;
  std::vector<double> intensity;
  std::vector<spectrum::Clarity> clarity;
  std::vector<double> velocity;  ///< analytic envelope per column
  bool sweep_pass = false;
  bool range_pass = false;
  bool clarity_pass = false;
};

int spectrum_width(const SpectrumSpec& spec);
/// Analytic peak velocity (pixels above the axis) at column x.
double spectrum_velocity(const SpectrumSpec& spec, double x);
std::pair<RasterImage, SpectrumTruth> gen_spectrum(const SpectrumSpec& spec,
                                                   const spectrum::QaRules& rules = {});

struct DetectionScene {
  std::vector<GateCandidate> gts;
  std::vector<GateCandidate> preds;
};

// Ground truths sit on a jittered grid spaced well beyond the jitter radius, so every
// prediction's nearest ground truth is its own and the step happens exactly at the radius.
DetectionScene gen_detection_scene(int n_gt, double jitter_radius, double angle_noise,
                                   std::uint64_t seed);

std::string to_json(const WedgeSpec& spec);
std::string to_json(const SpectrumSpec& spec);
WedgeSpec wedge_from_json(const std::string& text);
SpectrumSpec spectrum_from_json(const std::string& text);

}  // namespace dqa::synth
