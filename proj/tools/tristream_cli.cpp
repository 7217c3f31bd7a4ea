// Copyright 2026 The Tristream Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <CLI11.hpp>
#include <thread>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "tristream/extract.hpp"
#include "tristream/inject.hpp"
#include "tristream/stats.hpp"
#include "tristream/trainer.hpp"
#include "tristream/visualize.hpp"

using json = nlohmann::ordered_json;

namespace ts = tristream;

namespace {

// Exit-code contract: 0 success, 1 input, 2 format, 3 internal.
constexpr int kExitInput = 1;
constexpr int kExitFormat = 2;
constexpr int kExitInternal = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ts::input_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const json& doc, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << doc.dump(2) << "\n";
  } else {
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) throw ts::input_error("cannot write " + out_path);
    out << doc.dump(2) << "\n";
  }
}

struct ExtractFlags {
  std::string input;
  int width = 0, height = 0, channels = 1;
  double fps = 30.0;
  std::string codec_tag = "rgb";
  bool native_available = false;
  std::string sidecar_csv;
  int anchors = 8;
  std::string anchor_rule = "center";
  std::string interval_convention = "bracket";
  ts::ExtractParams params;
  std::string mv_agg = "mean";
};

void add_extract_flags(CLI::App* cmd, ExtractFlags& f) {
  cmd->add_option("--input", f.input, "raw planar frame file")->required();
  cmd->add_option("--width", f.width, "frame width in pixels")->required();
  cmd->add_option("--height", f.height, "frame height in pixels")->required();
  cmd->add_option("--channels", f.channels, "1 or 3")->default_val(1);
  cmd->add_option("--fps", f.fps, "frames per second")->default_val(30.0);
  cmd->add_option("--codec-tag", f.codec_tag, "source codec tag for backend routing");
  cmd->add_flag("--native-available", f.native_available, "a fixed-GOP native reader exists");
  cmd->add_option("--sidecar-csv", f.sidecar_csv, "exported motion-vector CSV");
  cmd->add_option("--anchors", f.anchors, "anchor frame count")->default_val(8);
  cmd->add_option("--anchor-rule", f.anchor_rule, "center|endpoint")->default_val("center");
  cmd->add_option("--interval-convention", f.interval_convention, "bracket|between")
      ->default_val("bracket");
  cmd->add_option("--block-size", f.params.block_size)->default_val(16);
  cmd->add_option("--search-range", f.params.search_range)->default_val(8);
  cmd->add_option("--subpel", f.params.subpel_scale, "1, 2, or 4")->default_val(4);
  cmd->add_option("--mv-agg", f.mv_agg, "mean|last|max-mag")->default_val("mean");
  cmd->add_option("--ifr-downscale", f.params.ifr_downscale)->default_val(2);
  cmd->add_option("--threads", f.params.threads, "interval workers (0 = all cores)")->default_val(0);
}

struct ExtractRun {
  ts::BackendChoice backend;
  ts::Decomposition decomp;
  std::vector<ts::TriStreamInterval> intervals;
};

ExtractRun run_extraction(const ExtractFlags& f) {
  const ts::FrameSequence seq = ts::load_raw(f.input, f.width, f.height, f.channels, f.fps);

  std::vector<ts::SidecarRecord> records;
  ts::ExtractParams params = f.params;
  if (params.threads <= 0)
    params.threads = std::max(1u, std::thread::hardware_concurrency());
  if (f.mv_agg == "mean") params.mv_agg = ts::MvAggregation::mean;
  else if (f.mv_agg == "last") params.mv_agg = ts::MvAggregation::last;
  else if (f.mv_agg == "max-mag") params.mv_agg = ts::MvAggregation::max_mag;
  else throw ts::input_error("unknown --mv-agg '" + f.mv_agg + "'");

  const ts::BackendChoice backend =
      ts::route_backend(f.codec_tag, f.native_available, !f.sidecar_csv.empty());
  if (backend.kind == ts::BackendKind::sidecar_export) {
    records = ts::parse_sidecar(read_file(f.sidecar_csv));
    params.sidecar = &records;
  }

  ts::AnchorRule rule;
  if (f.anchor_rule == "center") rule = ts::AnchorRule::center;
  else if (f.anchor_rule == "endpoint") rule = ts::AnchorRule::endpoint;
  else throw ts::input_error("unknown --anchor-rule '" + f.anchor_rule + "'");

  ts::IntervalConvention convention;
  if (f.interval_convention == "bracket") convention = ts::IntervalConvention::bracket;
  else if (f.interval_convention == "between") convention = ts::IntervalConvention::between;
  else throw ts::input_error("unknown --interval-convention '" + f.interval_convention + "'");

  ExtractRun run;
  run.backend = backend;
  run.decomp = ts::decompose(seq.length(), f.anchors, rule, convention);
  run.intervals = ts::extract_tristream(seq, run.decomp, backend, params);
  return run;
}

json backend_json(const ts::BackendChoice& b) {
  return json{{"kind", ts::backend_name(b.kind)}, {"reason", b.reason}};
}

int cmd_extract(const ExtractFlags& f, const std::string& trs_out, const std::string& summary_out) {
  ExtractRun run = run_extraction(f);
  ts::write_trs(run.intervals, trs_out);

  json per_interval = json::array();
  for (std::size_t k = 0; k < run.intervals.size(); ++k) {
    const auto& iv = run.intervals[k];
    double mag_sum = 0.0, mag_max = 0.0, res_abs = 0.0;
    for (const auto& [mx, my] : iv.mv.mv) {
      const double mag = std::hypot(static_cast<double>(mx), static_cast<double>(my)) / iv.mv.subpel_scale;
      mag_sum += mag;
      mag_max = std::max(mag_max, mag);
    }
    for (const auto v : iv.res.data) res_abs += std::abs(v);
    per_interval.push_back(json{
        {"index", k},
        {"first_frame", run.decomp.intervals[k].first_frame},
        {"last_frame", run.decomp.intervals[k].last_frame},
        {"mv_mean_mag_px", mag_sum / static_cast<double>(iv.mv.mv.size())},
        {"mv_max_mag_px", mag_max},
        {"res_abs_mean", res_abs / static_cast<double>(iv.res.data.size())},
    });
  }
  json summary{
      {"backend", backend_json(run.backend)},
      {"anchors", run.decomp.anchors},
      {"k", run.intervals.size()},
      {"trs", trs_out},
      {"intervals", per_interval},
  };
  emit(summary, summary_out);
  return 0;
}

int cmd_visualize(const std::string& trs, int interval, const std::string& stream,
                  const std::string& out) {
  const auto intervals = ts::read_trs(trs);
  if (interval < 0 || interval >= static_cast<int>(intervals.size()))
    throw ts::input_error("interval index " + std::to_string(interval) + " out of range [0, " +
                          std::to_string(intervals.size()) + ")");
  const auto& iv = intervals[static_cast<std::size_t>(interval)];
  if (stream == "ifr") ts::save_ppm(iv.ifr, out);
  else if (stream == "mv") ts::save_ppm(ts::render_mv(iv.mv), out);
  else if (stream == "res") ts::save_ppm(ts::render_residual(iv.res), out);
  else throw ts::input_error("unknown stream '" + stream + "' (expected ifr, mv, or res)");
  return 0;
}

json budget_json(const ts::TokenBudget& b) {
  return json{{"anchor_tokens", b.anchor_tokens},
              {"motion_tokens", b.motion_tokens},
              {"text_overhead", b.text_overhead},
              {"total", b.total}};
}

int cmd_align(const std::string& config_path, const std::string& history_out,
              const std::string& gate_out, const std::string& gate_csv_out,
              const std::string& summary_out) {
  ts::Stage1FileConfig cfg = config_path.empty() ? ts::Stage1FileConfig{}
                                                 : ts::parse_stage1_config(read_file(config_path));
  if (const char* env_seed = std::getenv("TRISTREAM_SEED")) {
    cfg.train.seed = std::stoull(env_seed);
    cfg.data.seed = cfg.train.seed + 1;
  }

  const ts::Stage1Dataset data = ts::build_motion_dataset(cfg.data);
  const ts::Stage1Result result = ts::train_stage1(cfg.train, data);

  if (!history_out.empty()) {
    std::ofstream out(history_out, std::ios::trunc);
    if (!out) throw ts::input_error("cannot write " + history_out);
    out << "step,loss,mean_cosine,tau\n";
    for (std::size_t i = 0; i < result.history.steps.size(); ++i) {
      const auto& s = result.history.steps[i];
      out << i << ',' << s.loss << ',' << s.mean_cosine << ',' << s.tau << '\n';
    }
  }
  if (!gate_out.empty() || !gate_csv_out.empty()) {
    const auto report = ts::model_gate_report(result.model, data);
    if (!gate_out.empty()) {
      json rows = json::array();
      for (const auto& r : report)
        rows.push_back(json{{"label", r.label}, {"w_mv", r.w_mv}, {"w_res", r.w_res},
                            {"w_ifr", r.w_ifr}, {"n", r.n}});
      emit(rows, gate_out);
    }
    if (!gate_csv_out.empty()) {
      std::ofstream out(gate_csv_out, std::ios::trunc);
      if (!out) throw ts::input_error("cannot write " + gate_csv_out);
      out << "label,w_mv,w_res,w_ifr,n\n";
      for (const auto& r : report)
        out << r.label << ',' << r.w_mv << ',' << r.w_res << ',' << r.w_ifr << ',' << r.n << '\n';
    }
  }

  const auto& last = result.history.steps.back();
  json summary{
      {"steps", result.history.steps.size()},
      {"samples", data.size()},
      {"final_loss", last.loss},
      {"final_mean_cosine", last.mean_cosine},
      {"final_tau", last.tau},
      {"class_separation_rad", ts::class_angular_separation(result.model, data)},
  };
  emit(summary, summary_out);
  return 0;
}

int cmd_inject_demo(int seq_len, int intervals, int tokens_per_interval,
                    const std::string& strategy_name, const std::string& spans_arg, int dim) {
  ts::PlacementStrategy strategy;
  if (strategy_name == "prefix") strategy = ts::PlacementStrategy::prefix;
  else if (strategy_name == "per-anchor") strategy = ts::PlacementStrategy::per_anchor;
  else if (strategy_name == "suffix") strategy = ts::PlacementStrategy::suffix;
  else throw ts::input_error("unknown strategy '" + strategy_name + "'");

  std::vector<ts::AnchorSpan> spans;
  std::istringstream in(spans_arg);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    const auto colon = tok.find(':');
    if (colon == std::string::npos)
      throw ts::input_error("bad span '" + tok + "', expected start:len");
    spans.push_back({std::stoi(tok.substr(0, colon)), std::stoi(tok.substr(colon + 1))});
  }

  const auto layout = ts::build_layout(strategy, spans, intervals, tokens_per_interval, seq_len);

  ts::EmbeddingSeq seq;
  seq.e = ts::Mat::Zero(seq_len, dim);
  for (int i = 0; i < seq_len; ++i) seq.e(i, 0) = i;
  ts::Mat motion = ts::Mat::Constant(layout.slot_count(), dim, -1.0);
  for (int j = 0; j < layout.slot_count(); ++j) motion(j, 0) = 1000 + j;

  const auto result = ts::scatter_inject(seq, layout, motion);

  std::vector<std::string> tag(static_cast<std::size_t>(seq_len), "seq");
  for (const auto& s : spans)
    for (int i = s.start; i < s.start + s.len; ++i) tag[static_cast<std::size_t>(i)] = "anchor";
  std::cout << "row  source      frozen  e[0]\n";
  for (int i = 0; i < seq_len; ++i) {
    const int src = result.provenance[static_cast<std::size_t>(i)];
    std::string source = src >= 0 ? ("motion[" + std::to_string(src) + "]") : tag[static_cast<std::size_t>(i)];
    std::printf("%-4d %-11s %-7s %g\n", i, source.c_str(),
                result.seq.frozen[static_cast<std::size_t>(i)] ? "yes" : "no",
                result.seq.e(i, 0));
  }
  return 0;
}

int cmd_bench(const ExtractFlags& f, int repeats, const std::string& out) {
  const ts::FrameSequence seq = ts::load_raw(f.input, f.width, f.height, f.channels, f.fps);
  std::vector<ts::SidecarRecord> records;
  ts::ExtractParams params = f.params;
  const ts::BackendChoice backend =
      ts::route_backend(f.codec_tag, f.native_available, !f.sidecar_csv.empty());
  if (backend.kind == ts::BackendKind::sidecar_export) {
    records = ts::parse_sidecar(read_file(f.sidecar_csv));
    params.sidecar = &records;
  }
  const ts::Decomposition decomp = ts::decompose(seq.length(), f.anchors);
  const ts::LatencyReport report = ts::bench_backend(seq, decomp, backend, params, repeats);
  emit(json{{"backend", backend_json(report.backend)},
            {"video_seconds", report.video_seconds},
            {"wall_ms", report.wall_ms},
            {"ms_per_video_second", report.ms_per_video_second},
            {"threads", report.threads}},
       out);
  return 0;
}

int cmd_stats_wilson(std::int64_t correct, std::int64_t total, double conf,
                     const std::string& out) {
  const auto [lo, hi] = ts::wilson_interval({correct, total, conf});
  emit(json{{"acc", ts::accuracy(correct, total)}, {"lo", lo}, {"hi", hi}}, out);
  return 0;
}

json history_summary_json(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw ts::input_error("cannot open " + csv_path);
  std::string line;
  if (!std::getline(in, line) || line != "step,loss,mean_cosine,tau")
    throw ts::format_error(csv_path + ": expected header 'step,loss,mean_cosine,tau'");
  int steps = 0;
  double loss = 0, cosine = 0, tau = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');
    std::getline(row, cell, ',');
    loss = std::stod(cell);
    std::getline(row, cell, ',');
    cosine = std::stod(cell);
    std::getline(row, cell, ',');
    tau = std::stod(cell);
    ++steps;
  }
  if (steps == 0) throw ts::format_error(csv_path + ": no history rows");
  return json{{"steps", steps}, {"final_loss", loss}, {"final_mean_cosine", cosine}, {"final_tau", tau}};
}

int cmd_report(const std::string& budget_path, const std::string& gate_path,
               const std::string& latency_path, const std::string& history_path,
               const std::string& trs_path, const std::string& out) {
  std::vector<std::string> missing;
  for (const auto& p : {budget_path, gate_path, latency_path, history_path, trs_path}) {
    if (!p.empty() && !std::ifstream(p)) missing.push_back(p);
  }
  if (!missing.empty()) {
    std::string msg = "missing artifact files:";
    for (const auto& p : missing) msg += " " + p;
    throw ts::input_error(msg);
  }

  json doc{{"schema_version", 1},
           {"budget", nullptr},
           {"gate_report", nullptr},
           {"latency", nullptr},
           {"train_history", nullptr},
           {"tristream", nullptr}};
  try {
    if (!budget_path.empty()) doc["budget"] = json::parse(read_file(budget_path));
    if (!gate_path.empty()) doc["gate_report"] = json::parse(read_file(gate_path));
    if (!latency_path.empty()) doc["latency"] = json::parse(read_file(latency_path));
  } catch (const json::parse_error& e) {
    throw ts::format_error(std::string("bad JSON artifact: ") + e.what());
  }
  if (!history_path.empty()) doc["train_history"] = history_summary_json(history_path);
  if (!trs_path.empty()) {
    const auto intervals = ts::read_trs(trs_path);
    const auto& head = intervals.front();
    doc["tristream"] = json{{"k", intervals.size()},
                            {"block_size", head.mv.block_size},
                            {"subpel_scale", head.mv.subpel_scale},
                            {"grid", {head.mv.grid_w, head.mv.grid_h}},
                            {"ifr", {head.ifr.width, head.ifr.height}},
                            {"channels", head.ifr.channels}};
  }
  emit(doc, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"compressed-domain tri-stream pipeline"};
  app.require_subcommand(1);

  // extract
  auto* extract = app.add_subcommand("extract", "extract a tri-stream container from raw frames");
  ExtractFlags ef;
  add_extract_flags(extract, ef);
  std::string trs_out, extract_summary;
  extract->add_option("--out", trs_out, ".trs output path")->required();
  extract->add_option("--summary", extract_summary, "summary JSON path (default stdout)");

  // visualize
  auto* visualize = app.add_subcommand("visualize", "render one interval's stream to a PPM/PGM image");
  std::string vis_trs, vis_stream = "mv", vis_out;
  int vis_interval = 0;
  visualize->add_option("--trs", vis_trs)->required();
  visualize->add_option("--interval", vis_interval)->required();
  visualize->add_option("--stream", vis_stream, "ifr|mv|res")->required();
  visualize->add_option("--out", vis_out)->required();

  // budget
  auto* budget = app.add_subcommand("budget", "token-budget accounting");
  std::int64_t b_anchors = 8, b_tvit = 1396, b_k = 8, b_km = 64, b_text = 0;
  std::string budget_out;
  budget->add_option("--anchors", b_anchors)->default_val(8);
  budget->add_option("--tokens-per-frame", b_tvit)->default_val(1396);
  budget->add_option("--intervals", b_k)->default_val(8);
  budget->add_option("--motion-tokens", b_km)->default_val(64);
  budget->add_option("--text-overhead", b_text)->default_val(0);
  budget->add_option("--out", budget_out, "output path (default stdout)");

  // align
  auto* align = app.add_subcommand("align", "run stage-1 alignment on the synthetic motion set");
  std::string align_config, align_history, align_gate, align_gate_csv, align_summary;
  align->add_option("--config", align_config, "flat key=value config file");
  align->add_option("--history", align_history, "per-step CSV output");
  align->add_option("--gate-report", align_gate, "per-class gate weight JSON");
  align->add_option("--gate-report-csv", align_gate_csv, "per-class gate weight CSV");
  align->add_option("--summary", align_summary, "summary JSON path (default stdout)");

  // inject-demo
  auto* inject = app.add_subcommand("inject-demo", "print the provenance map of a scatter injection");
  int inj_s = 14, inj_k = 2, inj_km = 2, inj_dim = 4;
  std::string inj_strategy = "per-anchor", inj_spans = "0:3,7:3";
  inject->add_option("--seq-len", inj_s)->default_val(14);
  inject->add_option("--intervals", inj_k)->default_val(2);
  inject->add_option("--motion-tokens", inj_km)->default_val(2);
  inject->add_option("--strategy", inj_strategy, "prefix|per-anchor|suffix")->default_val("per-anchor");
  inject->add_option("--spans", inj_spans, "anchor spans as start:len,start:len,...");
  inject->add_option("--dim", inj_dim)->default_val(4);

  // bench
  auto* bench = app.add_subcommand("bench", "time single-threaded extraction");
  ExtractFlags bf;
  add_extract_flags(bench, bf);
  int repeats = 3;
  std::string bench_out;
  bench->add_option("--repeats", repeats)->default_val(3);
  bench->add_option("--out", bench_out, "output path (default stdout)");

  // stats
  auto* stats = app.add_subcommand("stats", "report arithmetic");
  auto* wilson = stats->add_subcommand("wilson", "Wilson score interval for a correct/total count");
  std::int64_t w_correct = 0, w_total = 0;
  double w_conf = 0.95;
  std::string stats_out;
  wilson->add_option("correct", w_correct)->required();
  wilson->add_option("total", w_total)->required();
  wilson->add_option("--conf", w_conf)->default_val(0.95);
  wilson->add_option("--out", stats_out, "output path (default stdout)");
  stats->require_subcommand(1);

  // report
  auto* report = app.add_subcommand("report", "consolidate run artifacts into one JSON document");
  std::string r_budget, r_gate, r_latency, r_history, r_trs, r_out;
  report->add_option("--budget", r_budget, "budget JSON");
  report->add_option("--gate-report", r_gate, "gate report JSON");
  report->add_option("--latency", r_latency, "latency JSON");
  report->add_option("--history", r_history, "training history CSV");
  report->add_option("--trs", r_trs, "tri-stream container");
  report->add_option("--out", r_out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*extract) return cmd_extract(ef, trs_out, extract_summary);
    if (*visualize) return cmd_visualize(vis_trs, vis_interval, vis_stream, vis_out);
    if (*budget) {
      emit(budget_json(ts::token_budget(b_anchors, b_tvit, b_k, b_km, b_text)), budget_out);
      return 0;
    }
    if (*align) return cmd_align(align_config, align_history, align_gate, align_gate_csv, align_summary);
    if (*inject) return cmd_inject_demo(inj_s, inj_k, inj_km, inj_strategy, inj_spans, inj_dim);
    if (*bench) return cmd_bench(bf, repeats, bench_out);
    if (*stats) return cmd_stats_wilson(w_correct, w_total, w_conf, stats_out);
    if (*report) return cmd_report(r_budget, r_gate, r_latency, r_history, r_trs, r_out);
  } catch (const ts::input_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ts::format_error& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kExitFormat;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return 0;
}
