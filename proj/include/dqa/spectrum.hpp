#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "dqa/image.hpp"
#include "dqa/solver.hpp"

namespace dqa::spectrum {

enum class Clarity { good, moderate, poor };
std::string_view to_string(Clarity c) noexcept;

/// Which pixels a waveform's mean intensity is taken over.
enum class MeanMode {
  foreground,  ///< segmented foreground pixels in the waveform's columns
  columns,     ///< every pixel between the envelope and the axis in those columns
};

struct Envelope {
  std::vector<double> top_y;
  int axis_y = 0;
  std::vector<double> velocity;  ///< axis_y - top_y, pixels
};

struct WaveformSpan {
  int start = 0;
  int peak = 0;
  int end = 0;

  friend bool operator==(const WaveformSpan&, const WaveformSpan&) = default;
};

struct Waveform {
  int start_col = 0;
  int peak_col = 0;
  int end_col = 0;
  double mean_intensity = 0.0;
  Clarity clarity = Clarity::poor;
  double height_pct = 0.0;
};

struct QaVerdict {
  int n_waveforms = 0;
  bool clarity_pass = false;
  bool sweep_pass = false;
  bool range_pass = false;
  std::vector<Waveform> waveforms;
};

struct SeedPolicy {
  double top_rows_fraction = 0.10;
  double top_bg_max = 0.08;
  double border_bg_max = 0.05;
  double fg_min = 0.15;
};

struct AxisOptions {
  double ridge_min = 0.15;
  int ridge_offset = 2;
  double theta_window_deg = 2.0;
  double theta_step_deg = 0.25;
  double min_votes_fraction = 0.3;
};

struct QaRules {
  double clarity_good = 0.56;
  double clarity_poor = 0.36;
  double range_pct = 75.0;
  int sweep_min = 3;
  int sweep_max = 10;
  int clarity_run = 3;
};

struct SpectrumConfig {
  double overlay_std_threshold = 12.0 / 255.0;
  int overlay_dilation_px = 2;
  SolverOptions solver;
  AxisOptions axis;
  double beta = 130.0;
  SeedPolicy seeds;
  double envelope_sigma = 8.0;
  int min_distance = 70;
  QaRules rules;
  MeanMode mean_mode = MeanMode::foreground;
};

/// Pixels whose RGB channel standard deviation (on a 0..1 scale) exceeds the threshold, dilated.
BinaryMask detect_overlays(const RasterImage& raster, double std_threshold = 12.0 / 255.0,
                           int dilation_px = 2);

/// ITU-R 601 luma rescaled to [0, 1].
GrayImage to_gray(const RasterImage& raster);

// Fills the hole with the minimiser of the squared discrete Laplacian (Neumann at the
// image edge); away from the border this satisfies the 13-point biharmonic stencil.
// Pixels outside the hole are copied bit for bit.
GrayImage inpaint_biharmonic(const GrayImage& gray, const BinaryMask& hole,
                             const SolverOptions& solver = {});

struct Seeds {
  BinaryMask fg;
  BinaryMask bg;
};

Seeds make_seeds(const GrayImage& gray, int axis_y, const SeedPolicy& policy = {});

struct RandomWalkerResult {
  GrayImage p_fg;
  GrayImage p_bg;
  SolveStats stats;
};

/// Edge weights exp(-beta (g_i - g_j)^2) on the 4-connected pixel grid.
kernels::GridGraph build_grid_graph(const GrayImage& gray, double beta);

/// Foreground arrival probability; seeded pixels carry their label exactly.
GrayImage random_walker_probability(const GrayImage& gray, const Seeds& seeds, double beta,
                                    const SolverOptions& solver = {},
                                    SolveStats* stats = nullptr);
/// Both class probabilities from two independent solves.
RandomWalkerResult random_walker(const GrayImage& gray, const Seeds& seeds, double beta,
                                 const SolverOptions& solver = {});

BinaryMask segment_spectrum(const GrayImage& gray, double beta, const Seeds& seeds,
                            const SolverOptions& solver = {});
BinaryMask segment_spectrum(const GrayImage& gray, double beta, int axis_y,
                            const SeedPolicy& policy, const SolverOptions& solver = {});

/// Thin bright horizontal lines: g(y) - max(g(y - k), g(y + k)) >= ridge_min.
BinaryMask horizontal_ridges(const GrayImage& gray, const AxisOptions& options = {});
int detect_x_axis(const GrayImage& gray, const AxisOptions& options = {},
                  kernels::Exec exec = kernels::Exec::parallel);

BinaryMask clean_with_axis(const BinaryMask& mask, int axis_y);
Envelope extract_envelope(const BinaryMask& mask, int axis_y);

struct Extrema {
  std::vector<int> peaks;
  std::vector<int> valleys;
};

Extrema detect_peaks_valleys(std::span<const double> velocity, double sigma, int min_distance);
inline Extrema detect_peaks_valleys(const Envelope& env, double sigma = 8.0,
                                    int min_distance = 70) {
  return detect_peaks_valleys(env.velocity, sigma, min_distance);
}

std::vector<WaveformSpan> identify_waveforms(std::span<const int> peaks,
                                             std::span<const int> valleys);

Clarity classify_clarity(double mean_intensity, double good = 0.56, double poor = 0.36);

Waveform score_waveform(const GrayImage& gray, const BinaryMask& mask, const Envelope& env,
                        const WaveformSpan& span, const QaRules& rules = {},
                        MeanMode mode = MeanMode::foreground);

QaVerdict make_verdict(std::vector<Waveform> waveforms, const QaRules& rules = {});

struct Analysis {
  GrayImage gray;       ///< after overlay inpainting
  BinaryMask overlays;
  int axis_y = 0;
  BinaryMask mask;      ///< segmented and cleaned
  Envelope envelope;
  Extrema extrema;
  QaVerdict verdict;
};

Analysis analyze(const RasterImage& raster, const SpectrumConfig& config = {});
QaVerdict assess(const RasterImage& raster, const SpectrumConfig& config = {});

}  // namespace dqa::spectrum
