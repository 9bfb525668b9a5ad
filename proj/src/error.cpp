#include "dqa/error.hpp"

namespace dqa {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::channel_mismatch: return "channel-mismatch";
    case Errc::dimension_mismatch: return "dimension-mismatch";
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::no_foreground: return "no-foreground";
    case Errc::wedge_not_found: return "wedge-not-found";
    case Errc::degenerate_intersection: return "degenerate-intersection";
    case Errc::at_apex: return "at-apex";
    case Errc::annotation_mismatch: return "annotation-mismatch";
    case Errc::domain: return "domain";
    case Errc::kink: return "kink";
    case Errc::no_boundary: return "no-boundary";
    case Errc::no_seeds: return "no-seeds";
    case Errc::no_convergence: return "no-convergence";
    case Errc::axis_not_found: return "axis-not-found";
    case Errc::empty_waveform: return "empty-waveform";
    case Errc::no_ground_truth: return "no-ground-truth";
    case Errc::no_matches: return "no-matches";
    case Errc::off_canvas: return "off-canvas";
    case Errc::clipped: return "clipped";
    case Errc::invalid_spec: return "invalid-spec";
    case Errc::io: return "io";
    case Errc::config: return "config";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

}  // namespace dqa
