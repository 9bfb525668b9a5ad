#include "dqa/report.hpp"

#include <cmath>
#include <cstdio>

namespace dqa::report {

namespace {

void emit(const json& j, int depth, std::string& out) {
  const std::string pad(static_cast<std::size_t>(depth + 1) * 2, ' ');
  const std::string close_pad(static_cast<std::size_t>(depth) * 2, ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad;
        out += json(it.key()).dump();
        out += ": ";
        emit(it.value(), depth + 1, out);
      }
      out += "\n" + close_pad + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        emit(j[i], depth + 1, out);
      }
      out += "\n" + close_pad + "]";
      return;
    }
    case json::value_t::number_float: {
      double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        return;
      }
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.6f", v);
      std::string s = buf;
      if (s == "-0.000000") s = "0.000000";
      out += s;
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string dump(const json& doc) {
  std::string out;
  emit(doc, 0, out);
  out += '\n';
  return out;
}

json to_json(const Point& p) { return json::array({p.x, p.y}); }

json to_json(const PolarLine& line) {
  return {{"rho", line.rho}, {"theta_deg", rad2deg(line.theta)},
          {"votes", line.votes}};
}

json to_json(const CircleArc& arc) {
  return {{"center", to_json(arc.center)}, {"radius", arc.radius}, {"support", arc.support}};
}

json to_json(const Box& box) { return json::array({box.x0, box.y0, box.x1, box.y1}); }

json to_json(const ProbeLocation& probe) {
  json lines = json::array();
  for (const auto& l : probe.edge_lines) lines.push_back(to_json(l));
  json arcs = json::array();
  for (const auto& a : probe.arcs) arcs.push_back(to_json(a));
  return {{"apex", to_json(probe.apex)},
          {"verified", probe.verified},
          {"edge_lines", lines},
          {"arcs", arcs}};
}

json to_json(const spectrum::Waveform& wf) {
  return {{"start_col", wf.start_col},
          {"peak_col", wf.peak_col},
          {"end_col", wf.end_col},
          {"mean_intensity", wf.mean_intensity},
          {"clarity", std::string(spectrum::to_string(wf.clarity))},
          {"height_pct", wf.height_pct}};
}

json to_json(const spectrum::QaVerdict& v) {
  json wfs = json::array();
  for (const auto& w : v.waveforms) wfs.push_back(to_json(w));
  return {{"n_waveforms", v.n_waveforms},
          {"clarity_pass", v.clarity_pass},
          {"sweep_pass", v.sweep_pass},
          {"range_pass", v.range_pass},
          {"waveforms", wfs}};
}

json error_json(const std::string& code, const std::string& message) {
  return {{"code", code}, {"message", message}};
}

}  // namespace dqa::report
