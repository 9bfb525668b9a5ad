#pragma once

#include <string>

#include "dqa/eval.hpp"
#include "dqa/probe.hpp"
#include "dqa/spectrum.hpp"
#include "json.hpp"

namespace dqa::report {

using nlohmann::json;

/// Sorted keys, two-space indent, every real number printed with exactly six decimals.
std::string dump(const json& doc);

json to_json(const Point& p);
json to_json(const PolarLine& line);
json to_json(const CircleArc& arc);
json to_json(const Box& box);
json to_json(const ProbeLocation& probe);
json to_json(const spectrum::Waveform& wf);
json to_json(const spectrum::QaVerdict& verdict);
json error_json(const std::string& code, const std::string& message);

}  // namespace dqa::report
