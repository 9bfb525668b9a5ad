#include "dqa/app.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "dqa/config.hpp"
#include "dqa/draw.hpp"
#include "dqa/error.hpp"
#include "dqa/eval.hpp"
#include "dqa/png_io.hpp"
#include "dqa/report.hpp"
#include "dqa/synth.hpp"

namespace dqa {

namespace fs = std::filesystem;
using report::json;

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.flush();
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(Errc::io, "cannot create directory " + dir.string());
}

// Runs task(i) for every index on a bounded pool; result order is the input order.
void for_each_index(std::size_t n, int workers, const std::function<void(std::size_t)>& task) {
  const auto pool = static_cast<std::size_t>(std::max(1, workers));
  if (pool == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < std::min(pool, n); ++t) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) task(i);
    });
  }
  for (auto& th : threads) th.join();
}

json error_entry(const std::exception& e) {
  if (const auto* de = dynamic_cast<const Error*>(&e)) {
    return report::error_json(std::string(de->code_name()), de->what());
  }
  return report::error_json("internal", e.what());
}

// Kernels run multi-threaded only when images are processed one at a time.
RunConfig effective(const RunConfig& base) {
  RunConfig c = base;
  const auto exec = c.workers() == 1 ? kernels::Exec::parallel : kernels::Exec::serial;
  c.probe.hough.exec = exec;
  c.spectrum.solver.exec = exec;
  return c;
}

fs::path overlay_path(const fs::path& out_dir, const std::string& input, const char* suffix) {
  return out_dir / (fs::path(input).stem().string() + suffix);
}

void draw_full_line(RasterImage& img, const PolarLine& l, Rgb color) {
  const double c = std::cos(l.theta), s = std::sin(l.theta);
  const Point p0{l.rho * c, l.rho * s};
  const double len = std::hypot(img.width(), img.height()) + std::abs(l.rho);
  draw::segment(img, {p0.x - len * s, p0.y + len * c}, {p0.x + len * s, p0.y - len * c}, 2.0,
                color);
}

void probe_overlay(RasterImage img, const ProbeLocation& p, const fs::path& path) {
  for (const auto& l : p.edge_lines) draw_full_line(img, l, draw::kRed);
  for (const auto& a : p.arcs) {
    draw::arc(img, a.center, a.radius, 0.0, 2.0 * kPi, 2.0, draw::kBlue);
  }
  write_png(path.string(), img);
}

void spectrum_overlay(const spectrum::Analysis& a, const spectrum::QaRules& rules,
                      const fs::path& path) {
  RasterImage img(a.gray.width(), a.gray.height(), 3, 0);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const auto v = static_cast<std::uint8_t>(std::lround(std::clamp(a.gray(x, y), 0.0, 1.0) * 255));
      img.set_rgb(x, y, {v, v, v});
    }
  }
  const double w = img.width() - 1.0;
  const double range_y = a.axis_y - rules.range_pct / 100.0 * a.axis_y;
  draw::dotted_segment(img, {0, range_y}, {w, range_y}, 1.0, draw::kBlue);
  for (const auto& wf : a.verdict.waveforms) {
    const Rgb color = wf.clarity == spectrum::Clarity::good       ? draw::kGreen
                      : wf.clarity == spectrum::Clarity::moderate ? draw::kYellow
                                                                  : draw::kRed;
    const bool low = !(wf.height_pct > rules.range_pct);
    for (int x = wf.start_col; x < wf.end_col; ++x) {
      const Point p0{double(x), a.envelope.top_y[static_cast<std::size_t>(x)]};
      const Point p1{double(x + 1), a.envelope.top_y[static_cast<std::size_t>(x + 1)]};
      if (low) draw::dotted_segment(img, p0, p1, 2.0, color, 3.0);
      else draw::segment(img, p0, p1, 2.0, color);
    }
  }
  write_png(path.string(), img);
}

void eval_plot(const eval::EvalCurve& curve, const fs::path& path) {
  constexpr int kW = 800, kH = 360, kPad = 40;
  RasterImage img(kW, kH, 3, 255);
  const Rgb black{0, 0, 0};
  if (curve.n_values.empty()) {
    write_png(path.string(), img);
    return;
  }
  const double n0 = curve.n_values.front();
  const double n1 = std::max(curve.n_values.back(), n0 + 1e-9);
  double err_max = 1.0;
  for (const auto& e : curve.mean_angle_err) {
    if (e) err_max = std::max(err_max, *e);
  }
  // left panel: sensitivity (0..100); right panel: mean angle error
  const int panel_w = (kW - 3 * kPad) / 2;
  for (int p = 0; p < 2; ++p) {
    const double x0 = kPad + p * (panel_w + kPad);
    draw::segment(img, {x0, double(kPad)}, {x0, double(kH - kPad)}, 1.0, black);
    draw::segment(img, {x0, double(kH - kPad)}, {x0 + panel_w, double(kH - kPad)}, 1.0, black);
    auto map = [&](double n, double v, double vmax) {
      return Point{x0 + (n - n0) / (n1 - n0) * panel_w,
                   kH - kPad - v / vmax * (kH - 2 * kPad)};
    };
    for (std::size_t i = 1; i < curve.n_values.size(); ++i) {
      if (p == 0) {
        draw::segment(img, map(curve.n_values[i - 1], curve.sensitivity[i - 1], 100.0),
                      map(curve.n_values[i], curve.sensitivity[i], 100.0), 2.0, draw::kBlue);
      } else if (curve.mean_angle_err[i - 1] && curve.mean_angle_err[i]) {
        draw::segment(img, map(curve.n_values[i - 1], *curve.mean_angle_err[i - 1], err_max),
                      map(curve.n_values[i], *curve.mean_angle_err[i], err_max), 2.0, draw::kRed);
      }
    }
  }
  write_png(path.string(), img);
}

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  bool overlay = false;
  int jobs = -1;
};

RunConfig build_config(const Common& common) {
  RunConfig c;
  if (!common.config_path.empty()) c.load_file(common.config_path);
  for (const auto& o : common.overrides) c.set(o);
  if (common.jobs >= 0) c.jobs = common.jobs;
  if (common.overlay) c.overlay = true;
  if (!common.out_dir.empty()) c.out_dir = common.out_dir;
  return c;
}

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("--config", common.config_path, "JSON configuration file")
      ->check(CLI::ExistingFile);
  cmd->add_option("--set", common.overrides, "Override a configuration key (key=value)");
  cmd->add_option("--out", common.out_dir, "Output directory (default: current directory)");
  cmd->add_flag("--overlay", common.overlay, "Also write overlay images");
  cmd->add_option("--jobs", common.jobs, "Worker threads (0: all hardware threads)")
      ->check(CLI::Range(0, 1024));
}

json batch_summary(const json& items) {
  std::size_t failed = 0;
  for (const auto& it : items) failed += it.contains("error");
  return {{"images", items.size()}, {"failed", failed}};
}

int cmd_probe(const std::vector<std::string>& inputs, const RunConfig& cfg, std::ostream& out) {
  const fs::path dir(cfg.out_dir);
  ensure_dir(dir);
  std::vector<json> items(inputs.size());
  for_each_index(inputs.size(), cfg.workers(), [&](std::size_t i) {
    json item{{"input", inputs[i]}};
    try {
      const RasterImage img = read_png(inputs[i]);
      const ProbeLocation p = locate_probe(img, cfg.probe);
      item.update(report::to_json(p));
      if (cfg.overlay) probe_overlay(img, p, overlay_path(dir, inputs[i], ".probe.png"));
    } catch (const std::exception& e) {
      item["error"] = error_entry(e);
    }
    items[i] = std::move(item);
  });
  const json results(items);
  const json doc{{"command", "probe"}, {"results", results}, {"summary", batch_summary(results)}};
  write_text(dir / "probe.json", report::dump(doc));
  out << "probe: " << items.size() << " image(s), report " << (dir / "probe.json").string() << "\n";
  return kExitOk;
}

int cmd_angle(const std::string& image, const std::string& annotations, const RunConfig& cfg,
              std::ostream& out) {
  const fs::path dir(cfg.out_dir);
  ensure_dir(dir);
  const auto gates = read_annotations(read_text(annotations));
  json doc{{"command", "angle"}, {"input", image}, {"annotations", annotations}};
  try {
    const RasterImage img = read_png(image);
    const ProbeLocation p = locate_probe(img, cfg.probe);
    doc["apex"] = report::to_json(p.apex);
    doc["verified"] = p.verified;
    json records = json::array();
    for (const auto& g : gates) {
      json rec{{"box", report::to_json(g.box)},
               {"vessel_angle_deg", g.vessel_angle_deg},
               {"label", g.label}};
      try {
        const auto r = insonation_angle(p, g, cfg.probe.isuog_max_angle_deg);
        rec["insonation_deg"] = r.angle_deg;
        rec["passes_isuog"] = r.passes_isuog;
      } catch (const std::exception& e) {
        rec["error"] = error_entry(e);
      }
      records.push_back(rec);
    }
    doc["gates"] = records;
    if (cfg.overlay) probe_overlay(img, p, overlay_path(dir, image, ".probe.png"));
  } catch (const Error& e) {
    doc["error"] = error_entry(e);
  }
  write_text(dir / "angle.json", report::dump(doc));
  out << "angle: " << gates.size() << " gate(s), report " << (dir / "angle.json").string() << "\n";
  return kExitOk;
}

int cmd_spectrum(const std::vector<std::string>& inputs, const RunConfig& cfg, std::ostream& out) {
  const fs::path dir(cfg.out_dir);
  ensure_dir(dir);
  std::vector<json> items(inputs.size());
  for_each_index(inputs.size(), cfg.workers(), [&](std::size_t i) {
    json item{{"input", inputs[i]}};
    try {
      const RasterImage img = read_png(inputs[i]);
      const auto a = spectrum::analyze(img, cfg.spectrum);
      item.update(report::to_json(a.verdict));
      item["axis_row"] = a.axis_y;
      if (cfg.overlay) spectrum_overlay(a, cfg.spectrum.rules, overlay_path(dir, inputs[i], ".spectrum.png"));
    } catch (const std::exception& e) {
      item["error"] = error_entry(e);
    }
    items[i] = std::move(item);
  });
  const json results(items);
  const json doc{{"command", "spectrum"}, {"results", results}, {"summary", batch_summary(results)}};
  write_text(dir / "spectrum.json", report::dump(doc));
  out << "spectrum: " << items.size() << " image(s), report " << (dir / "spectrum.json").string()
      << "\n";
  return kExitOk;
}

std::vector<GateCandidate> read_boxes(const std::string& path) {
  const std::string text = read_text(path);
  if (fs::path(path).extension() == ".json") return read_annotations(text);
  return eval::read_csv(text);
}

int cmd_eval(const std::string& gt_file, const std::string& pred_file, const RunConfig& cfg,
             std::ostream& out) {
  const fs::path dir(cfg.out_dir);
  ensure_dir(dir);
  std::vector<GateCandidate> gts, preds;
  try {
    gts = read_boxes(gt_file);
    preds = read_boxes(pred_file);
  } catch (const Error& e) {
    if (e.code() == Errc::io) throw;
    throw Error(Errc::io, e.what());
  }
  const auto range = cfg.eval.n_range();
  const auto curve = eval::sweep(gts, preds, range, cfg.eval.fold);
  write_text(dir / "eval.csv", eval::write_csv(curve));
  if (cfg.overlay) eval_plot(curve, dir / "eval.png");
  out << "eval: " << gts.size() << " ground truth, " << preds.size() << " prediction(s), curve "
      << (dir / "eval.csv").string() << "\n";
  return kExitOk;
}

std::string scene_csv(const std::vector<GateCandidate>& boxes) {
  std::string s = "x_center,y_center,angle_deg,score\n";
  char buf[160];
  for (const auto& b : boxes) {
    const Point c = b.box.centroid();
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", c.x, c.y, b.vessel_angle_deg,
                  b.score);
    s += buf;
  }
  return s;
}

int cmd_synth(const std::string& spec_file, const RunConfig& cfg, std::ostream& out) {
  const fs::path dir(cfg.out_dir);
  json doc = json::parse(read_text(spec_file), nullptr, false);
  if (doc.is_discarded()) throw Error(Errc::invalid_spec, spec_file + " is not valid JSON");
  if (doc.is_object()) doc = json::array({doc});
  if (!doc.is_array()) throw Error(Errc::invalid_spec, "spec file must hold an object or an array");

  // validate everything before writing anything
  struct Job {
    std::string name;
    std::string kind;
    json spec;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& s = doc[i];
    if (!s.is_object() || !s.contains("kind") || !s["kind"].is_string()) {
      throw Error(Errc::invalid_spec, "spec " + std::to_string(i) + " has no \"kind\"");
    }
    Job job{s.value("name", "synth_" + std::to_string(i)), s["kind"].get<std::string>(), s};
    if (job.name.empty() || job.name.find_first_of("/\\") != std::string::npos) {
      throw Error(Errc::invalid_spec, "spec " + std::to_string(i) + " has an invalid name");
    }
    jobs.push_back(std::move(job));
  }
  ensure_dir(dir);

  std::vector<std::string> failures(jobs.size());
  for_each_index(jobs.size(), cfg.workers(), [&](std::size_t i) {
    const Job& job = jobs[i];
    try {
      const fs::path base = dir / job.name;
      if (job.kind == "wedge") {
        const auto spec = synth::wedge_from_json(job.spec.dump());
        const auto [img, truth] = synth::gen_wedge(spec);
        write_png(base.string() + ".png", img);
        json t = report::to_json(truth.probe);
        t["half_angle_deg"] = truth.half_angle_deg;
        t["spec"] = json::parse(synth::to_json(spec));
        write_text(base.string() + ".truth.json", report::dump(t));
      } else if (job.kind == "spectrum") {
        const auto spec = synth::spectrum_from_json(job.spec.dump());
        const auto [img, truth] = synth::gen_spectrum(spec);
        write_png(base.string() + ".png", img);
        json clarity = json::array();
        for (auto c : truth.clarity) clarity.push_back(std::string(spectrum::to_string(c)));
        json t{{"axis_row", truth.axis_row},
               {"peak_cols", truth.peak_cols},
               {"valley_cols", truth.valley_cols},
               {"heights", truth.heights},
               {"height_pct", truth.height_pct},
               {"intensity", truth.intensity},
               {"clarity", clarity},
               {"sweep_pass", truth.sweep_pass},
               {"range_pass", truth.range_pass},
               {"clarity_pass", truth.clarity_pass},
               {"spec", json::parse(synth::to_json(spec))}};
        write_text(base.string() + ".truth.json", report::dump(t));
      } else if (job.kind == "scene") {
        const auto& s = job.spec;
        for (const auto& [k, v] : s.items()) {
          if (k != "kind" && k != "name" && k != "n_gt" && k != "jitter_radius" &&
              k != "angle_noise" && k != "seed") {
            throw Error(Errc::invalid_spec, "unknown spec key '" + k + "'");
          }
        }
        const auto scene = synth::gen_detection_scene(
            s.value("n_gt", 1), s.value("jitter_radius", 0.0), s.value("angle_noise", 0.0),
            s.value("seed", std::uint64_t{1}));
        write_text(base.string() + ".gt.csv", scene_csv(scene.gts));
        write_text(base.string() + ".pred.csv", scene_csv(scene.preds));
      } else if (job.kind == "linear_box") {
        const auto& s = job.spec;
        const auto b = s.value("box", std::vector<double>{100, 50, 400, 400});
        if (b.size() != 4) throw Error(Errc::invalid_spec, "box is [x0, y0, x1, y1]");
        const auto img = synth::gen_linear_box(s.value("width", 512), s.value("height", 512),
                                               {b[0], b[1], b[2], b[3]},
                                               s.value("edge_thickness", 3.0));
        write_png(base.string() + ".png", img);
      } else {
        throw Error(Errc::invalid_spec, "unknown kind '" + job.kind + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      failures[i] = job.name + ": invalid-spec: " + e.what();
    } catch (const Error& e) {
      failures[i] = job.name + ": " + std::string(e.code_name()) + ": " + e.what();
    }
  });
  std::string first_failure;
  for (const auto& f : failures) {
    if (!f.empty() && first_failure.empty()) first_failure = f;
  }
  if (!first_failure.empty()) throw Error(Errc::invalid_spec, first_failure);
  out << "synth: " << jobs.size() << " spec(s) written to " << dir.string() << "\n";
  return kExitOk;
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case Errc::config:
    case Errc::invalid_spec:
      return kExitConfig;
    default:
      return kExitIo;
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Doppler ultrasound quality assurance", "dqa"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  Common common;
  std::vector<std::string> inputs;
  std::string image, annotations, gt_file, pred_file, spec_file;
  bool fold = false, list_keys = false;

  auto* probe = app.add_subcommand("probe", "Locate the probe apex from the green Doppler box");
  probe->add_option("inputs", inputs, "PNG images")->check(CLI::ExistingFile);
  add_common(probe, common);

  auto* angle = app.add_subcommand("angle", "Angle of insonation for annotated gates");
  angle->add_option("image", image, "PNG image")->required()->check(CLI::ExistingFile);
  angle->add_option("annotations", annotations, "LabelMe JSON")->required()->check(CLI::ExistingFile);
  add_common(angle, common);

  auto* spec = app.add_subcommand("spectrum", "Waveform quality verdicts for spectrum images");
  spec->add_option("inputs", inputs, "PNG images")->check(CLI::ExistingFile);
  add_common(spec, common);

  auto* ev = app.add_subcommand("eval", "Sensitivity and angle error against the threshold n");
  ev->add_option("gt", gt_file, "Ground truth (CSV or LabelMe JSON)")->required()->check(CLI::ExistingFile);
  ev->add_option("pred", pred_file, "Predictions (CSV or LabelMe JSON)")->required()->check(CLI::ExistingFile);
  ev->add_flag("--fold", fold, "Fold angle residuals into [0, 90]");
  add_common(ev, common);

  auto* syn = app.add_subcommand("synth", "Generate synthetic fixtures from a JSON spec file");
  syn->add_option("spec", spec_file, "Spec file (object or array of objects)")->required()->check(CLI::ExistingFile);
  add_common(syn, common);

  auto* keys = app.add_subcommand("config", "Print every configuration key and its value");
  keys->add_flag("--keys", list_keys, "Print key names only");
  add_common(keys, common);

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "dqa: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    RunConfig cfg = build_config(common);
    if (fold) cfg.eval.fold = true;
    cfg = effective(cfg);
    if (*probe) return cmd_probe(inputs, cfg, out);
    if (*angle) return cmd_angle(image, annotations, cfg, out);
    if (*spec) return cmd_spectrum(inputs, cfg, out);
    if (*ev) return cmd_eval(gt_file, pred_file, cfg, out);
    if (*syn) return cmd_synth(spec_file, cfg, out);
    if (list_keys) {
      for (const auto& k : config_keys()) out << k << "\n";
    } else {
      out << describe(cfg);
    }
    return kExitOk;
  } catch (const Error& e) {
    err << "dqa: " << e.code_name() << ": " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "dqa: " << e.what() << "\n";
    return kExitIo;
  }
}

}  // namespace dqa
