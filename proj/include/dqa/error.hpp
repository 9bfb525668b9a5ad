#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dqa {

enum class Errc {
  channel_mismatch,
  dimension_mismatch,
  invalid_argument,
  no_foreground,
  wedge_not_found,
  degenerate_intersection,
  at_apex,
  annotation_mismatch,
  domain,
  kink,
  no_boundary,
  no_seeds,
  no_convergence,
  axis_not_found,
  empty_waveform,
  no_ground_truth,
  no_matches,
  off_canvas,
  clipped,
  invalid_spec,
  io,
  config,
};

/// Stable kebab-case identifier, used verbatim in JSON reports.
std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail);

  Errc code() const noexcept { return code_; }
  std::string_view code_name() const noexcept { return to_string(code_); }

 private:
  Errc code_;
};

}  // namespace dqa
