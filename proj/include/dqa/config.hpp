#pragma once

#include <string>
#include <vector>

#include "dqa/probe.hpp"
#include "dqa/spectrum.hpp"

namespace dqa {

struct EvalOptions {
  double n_min = 1.0;
  double n_max = 50.0;
  double n_step = 1.0;
  bool fold = false;

  std::vector<double> n_range() const;
};

struct RunConfig {
  ProbeConfig probe;
  spectrum::SpectrumConfig spectrum;
  EvalOptions eval;
  int jobs = 1;  ///< 0: one worker per hardware thread
  bool overlay = false;
  std::string out_dir = ".";

  // Keys are dotted paths such as "spectrum-qa.rules.clarity_good". Nested objects in
  // the file are flattened to these paths; arrays are leaf values.
  void load_file(const std::string& path);
  void load_json(const std::string& text);
  /// One "key=value" override; the value is read as JSON, else as a bare string.
  void set(const std::string& assignment);
  void set(const std::string& key, const std::string& json_value);

  /// Resolved parallelism (jobs, or hardware concurrency when jobs is 0).
  int workers() const;
};

/// Every recognised key with its current value, sorted, one "key = value" per line.
std::string describe(const RunConfig& config);
std::vector<std::string> config_keys();

}  // namespace dqa
