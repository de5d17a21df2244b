#include "gboc/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "gboc/csv_format.hpp"
#include "gboc/error.hpp"
#include "gboc/granular.hpp"
#include "gboc/kernels.hpp"
#include "gboc/metrics.hpp"
#include "gboc/model.hpp"
#include "gboc/scoring.hpp"
#include "gboc/trainer.hpp"
#include "gboc/tsdata.hpp"

namespace gboc::cli {
namespace {

std::optional<std::string> opt_string(const std::string& s) {
  return s.empty() ? std::nullopt : std::optional<std::string>(s);
}

// The label column is dropped when present; a normal series may not have one.
TimeSeries load_unlabelled(const std::filesystem::path& path, const std::string& label_col) {
  if (!label_col.empty()) {
    std::ifstream in(path);
    std::string header, field;
    std::getline(in, header);
    std::stringstream ss(header);
    while (std::getline(ss, field, ',')) {
      const auto b = field.find_first_not_of(" \t\r");
      const auto e = field.find_last_not_of(" \t\r");
      if (b != std::string::npos && field.substr(b, e - b + 1) == label_col) return load_csv(path, label_col);
    }
  }
  return load_csv(path);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// Splices the entries of a --config file in as flags right after the
// subcommand name, so later command-line flags take precedence.
std::vector<std::string> with_config_file(const std::vector<std::string>& args) {
  static const std::vector<std::string> commands{"synth", "train", "detect", "eval", "dump-balls"};
  const auto sub = std::find_first_of(args.begin(), args.end(), commands.begin(), commands.end());
  if (sub == args.end()) return args;
  std::string path;
  for (auto it = sub; it != args.end(); ++it) {
    if (*it == "--config" && std::next(it) != args.end()) path = *std::next(it);
    else if (it->rfind("--config=", 0) == 0) path = it->substr(9);
  }
  if (path.empty()) return args;

  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open config file " + path);
  std::vector<std::string> injected;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::BadParams, "config line without '=': " + line);
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (value == "true") {
      injected.push_back("--" + key);
    } else if (value != "false") {
      injected.push_back("--" + key);
      injected.push_back(value);
    }
  }
  std::vector<std::string> out(args.begin(), std::next(sub));
  out.insert(out.end(), injected.begin(), injected.end());
  out.insert(out.end(), std::next(sub), args.end());
  return out;
}

std::vector<std::size_t> parse_deltas(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    long long v = -1;
    try {
      v = std::stoll(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != item.size() || v < 0) throw Error(ErrorCode::BadParams, "bad tolerance '" + item + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw Error(ErrorCode::BadParams, "empty --delta-set");
  return out;
}

struct SynthArgs {
  std::string kind = "clean";
  std::size_t length = 2000;
  std::uint64_t seed = 2024;
  std::string out_dir = ".";
  SynthParams params;
};

struct TrainArgs {
  std::string train_csv;
  std::string label_col;
  std::string model_path;
  std::string curve_path;
  TrainConfig cfg;
};

struct DetectArgs {
  std::string model_path;
  std::string test_csv;
  std::string label_col;
  std::string out_path;
  std::string threshold_fit = "self";
  std::string val_csv;
  bool scores_only = false;
};

struct EvalArgs {
  std::string report;
  std::string test_csv;
  std::string label_col;
  std::string delta_set = "0,1,2,3,4";
  double sigma_aff = 0.0;
  std::size_t window = 5;
  std::string model_path;
  std::string out_path;
};

struct DumpArgs {
  std::string model_path;
  std::string out_path;
};

int cmd_synth(const SynthArgs& a, std::ostream& err) {
  const auto kind = parse_scenario_kind(a.kind);
  if (!kind) throw Error(ErrorCode::BadParams, "unknown scenario kind '" + a.kind + "'");
  const Scenario sc = synth_scenario(*kind, a.length, a.seed, a.params);
  const std::filesystem::path dir(a.out_dir);
  std::filesystem::create_directories(dir);
  save_csv(sc.train, dir / "train.csv");
  save_csv(sc.test, dir / "test.csv");
  err << "synth: wrote " << (dir / "train.csv").string() << " and " << (dir / "test.csv").string() << '\n';
  return 0;
}

int cmd_train(const TrainArgs& a, std::ostream& err) {
  const TimeSeries series = load_unlabelled(a.train_csv, a.label_col);
  std::ofstream curve;
  if (!a.curve_path.empty()) {
    curve.open(a.curve_path);
    if (!curve) throw Error(ErrorCode::Io, "cannot write " + a.curve_path);
    curve << "epoch,l_rec,l_gb,l,balls_before,balls_after\n";
  }
  const auto result = train(series, a.cfg, [&](const EpochReport& r) {
    err << "epoch " << r.epoch << ": L_rec=" << r.reconstruction << " L_gb=" << r.alignment << " L=" << r.total
        << " balls=" << r.balls_before_pruning << "->" << r.balls_after_pruning << '\n';
    if (curve.is_open()) {
      curve << r.epoch << ',' << format_real(r.reconstruction) << ',' << format_real(r.alignment) << ','
            << format_real(r.total) << ',' << r.balls_before_pruning << ',' << r.balls_after_pruning << '\n';
    }
  });
  save_model(result.model, a.model_path);
  err << "train: " << result.model.centers.rows << " centers, model written to " << a.model_path << '\n';
  return 0;
}

int cmd_detect(const DetectArgs& a, std::ostream& err) {
  const GbocModel model = load_model(a.model_path);
  const TimeSeries test = load_csv(a.test_csv, opt_string(a.label_col));
  std::optional<TimeSeries> val;
  if (a.threshold_fit == "validation") {
    if (a.val_csv.empty()) throw Error(ErrorCode::BadParams, "--threshold-fit validation needs --val-csv");
    val = load_unlabelled(a.val_csv, a.label_col);
  } else if (a.threshold_fit != "self") {
    throw Error(ErrorCode::BadParams, "--threshold-fit must be self or validation");
  }
  const AnomalyReport report = detect(model, test, val ? &*val : nullptr);
  write_report_csv(report, test.labels, a.out_path, a.scores_only);
  std::size_t flagged = 0;
  for (auto f : report.flags) flagged += f;
  err << "detect: threshold " << report.threshold << ", " << flagged << " of " << report.flags.size()
      << " timesteps flagged\n";
  return 0;
}

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const ReportTable table = read_report_csv(a.report);
  std::vector<std::uint8_t> labels;
  if (!a.test_csv.empty()) {
    if (a.label_col.empty()) throw Error(ErrorCode::BadParams, "--test-csv needs --label-col for eval");
    labels = *load_csv(a.test_csv, a.label_col).labels;
  } else if (table.labels) {
    labels = *table.labels;
  } else {
    throw Error(ErrorCode::BadParams, "report has no label column; pass --test-csv and --label-col");
  }
  if (!table.flags) throw Error(ErrorCode::BadParams, "report has no flag column (was it written with --scores-only?)");
  if (labels.size() != table.scores.size()) throw Error(ErrorCode::ShapeMismatch, "labels and report differ in length");

  std::size_t window = a.window;
  if (!a.model_path.empty()) window = load_model(a.model_path).window_len;
  const double sigma = a.sigma_aff > 0.0 ? a.sigma_aff : static_cast<double>(window) / 2.0;
  const auto deltas = parse_deltas(a.delta_set);
  const EvalScores s = evaluate(table.scores, *table.flags, labels, deltas, sigma);

  out << "metric,value\n";
  out << "VUS-PR," << format_real(s.vus_pr) << '\n';
  out << "VUS-ROC," << format_real(s.vus_roc) << '\n';
  out << "Affiliation-F1," << (std::isnan(s.affiliation_f1) ? std::string("NaN") : format_real(s.affiliation_f1))
      << '\n';
  if (!a.out_path.empty()) {
    std::ofstream csv(a.out_path);
    if (!csv) throw Error(ErrorCode::Io, "cannot write " + a.out_path);
    csv << "delta,auc_pr,auc_roc\n";
    for (const auto& r : s.per_delta) csv << r.delta << ',' << format_real(r.auc_pr) << ',' << format_real(r.auc_roc) << '\n';
  }
  err << "eval: " << labels.size() << " timesteps, sigma " << sigma << '\n';
  return 0;
}

int cmd_dump_balls(const DumpArgs& a, std::ostream& out) {
  const GbocModel model = load_model(a.model_path);
  std::ofstream file;
  if (!a.out_path.empty()) {
    file.open(a.out_path);
    if (!file) throw Error(ErrorCode::Io, "cannot write " + a.out_path);
  }
  std::ostream& dst = a.out_path.empty() ? out : file;
  for (std::size_t c = 0; c < model.centers.cols; ++c) dst << 'c' << c << ',';
  dst << "radius,member_count\n";
  for (std::size_t j = 0; j < model.centers.rows; ++j) {
    for (double v : model.centers.row(j)) dst << format_real(v) << ',';
    dst << format_real(model.radii[j]) << ',' << model.member_counts[j] << '\n';
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Granular-ball one-class network for time-series anomaly detection", "gboc"};
  app.require_subcommand(1);
  std::string kernel_choice;
  app.add_option("--kernels", kernel_choice, "Kernel backend: scalar, avx2 or neon")
      ->check(CLI::IsMember({"scalar", "avx2", "neon"}));
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  std::string config_path;
  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Write a synthetic train/test scenario");
  s->add_option("--config", config_path, "Flat key=value file; flags on the command line win");
  s->add_option("--kind", synth.kind, "clean | drift | noise | drift_noise")->capture_default_str();
  s->add_option("--length", synth.length, "Timesteps per split")->capture_default_str();
  s->add_option("--seed", synth.seed)->capture_default_str();
  s->add_option("--out", synth.out_dir, "Output directory")->capture_default_str();
  s->add_option("--channels", synth.params.channels)->capture_default_str();
  s->add_option("--points", synth.params.point_anomalies, "Number of spikes")->capture_default_str();
  s->add_option("--ranges", synth.params.range_anomalies, "Number of level shifts")->capture_default_str();
  s->add_option("--range-len", synth.params.range_length)->capture_default_str();
  s->add_option("--spike", synth.params.spike_magnitude)->capture_default_str();
  s->add_option("--shift", synth.params.shift_magnitude)->capture_default_str();
  s->add_option("--drift", synth.params.drift_slope, "Trend slope per timestep")->capture_default_str();
  s->add_option("--noise-sigma", synth.params.noise_sigma)->capture_default_str();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a model on a normal series");
  t->add_option("--config", config_path, "Flat key=value file; flags on the command line win");
  t->add_option("--train-csv", tr.train_csv)->required();
  t->add_option("--label-col", tr.label_col, "Column to exclude from the features");
  t->add_option("--model", tr.model_path, "Output model file")->required();
  t->add_option("--out", tr.curve_path, "Training-curve CSV");
  t->add_option("--window", tr.cfg.window)->capture_default_str();
  t->add_option("--stride", tr.cfg.stride)->capture_default_str();
  t->add_option("--layers", tr.cfg.layers)->capture_default_str();
  t->add_option("--hidden", tr.cfg.hidden)->capture_default_str();
  t->add_option("--decoder-width", tr.cfg.decoder_width)->capture_default_str();
  t->add_option("--epochs", tr.cfg.epochs)->capture_default_str();
  t->add_option("--batch", tr.cfg.batch_size)->capture_default_str();
  t->add_option("--lr", tr.cfg.lr)->capture_default_str();
  t->add_option("--lambda", tr.cfg.lambda)->capture_default_str();
  t->add_option("--smin", tr.cfg.s_min)->capture_default_str();
  t->add_option("--mu", tr.cfg.mu)->capture_default_str();
  t->add_option("--seed", tr.cfg.seed)->capture_default_str();
  t->add_option("--rebuild-every", tr.cfg.rebuild_every)->capture_default_str();
  t->add_flag("--gbc-off", tr.cfg.gbc_off, "k-means centers instead of granular-balls");
  t->add_flag("--prune-off", tr.cfg.prune_off, "Keep diffuse balls");
  t->add_flag("--assign-unpruned", tr.cfg.assign_unpruned, "Align against the unpruned balls during training");
  t->add_flag("--strict-child-support", tr.cfg.strict_child_support, "Split children need >= smin members");

  DetectArgs det;
  auto* d = app.add_subcommand("detect", "Score a series and flag anomalies");
  d->add_option("--config", config_path, "Flat key=value file; flags on the command line win");
  d->add_option("--model", det.model_path)->required();
  d->add_option("--test-csv", det.test_csv)->required();
  d->add_option("--label-col", det.label_col, "Label column (copied into the report)");
  d->add_option("--out", det.out_path, "Report CSV")->required();
  d->add_option("--threshold-fit", det.threshold_fit, "self | validation")
      ->check(CLI::IsMember({"self", "validation"}))
      ->capture_default_str();
  d->add_option("--val-csv", det.val_csv, "Normal series for --threshold-fit validation");
  d->add_flag("--scores-only", det.scores_only, "Write t,point_score only");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Compute VUS-PR, VUS-ROC and Affiliation-F1 for a report");
  e->add_option("--config", config_path, "Flat key=value file; flags on the command line win");
  e->add_option("--report", ev.report, "Report CSV from detect")->required();
  e->add_option("--test-csv", ev.test_csv, "Labels source when the report has none");
  e->add_option("--label-col", ev.label_col);
  e->add_option("--delta-set", ev.delta_set, "Comma-separated tolerances")->capture_default_str();
  e->add_option("--sigma-aff", ev.sigma_aff, "Affiliation bandwidth (default window/2)");
  e->add_option("--window", ev.window, "Window length used for the default bandwidth")->capture_default_str();
  e->add_option("--model", ev.model_path, "Take the window length from a model file");
  e->add_option("--out", ev.out_path, "Per-tolerance CSV");

  DumpArgs dump;
  auto* b = app.add_subcommand("dump-balls", "Write retained centers and radii as CSV");
  b->add_option("--model", dump.model_path)->required();
  b->add_option("--out", dump.out_path, "CSV path (default stdout)");

  std::vector<std::string> expanded;
  try {
    expanded = with_config_file(args);
  } catch (const Error& ex) {
    err << "error: " << ex.what() << '\n';
    return 2;
  }
  std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    if (code != 0) err << app.help();
    return code;
  }

  try {
    if (!kernel_choice.empty()) {
      if (kernel_choice == "scalar") kernels::select(kernels::Backend::Scalar);
      else if (kernel_choice == "avx2") kernels::select(kernels::Backend::Avx2);
      else kernels::select(kernels::Backend::Neon);
    }
    if (s->parsed()) return cmd_synth(synth, err);
    if (t->parsed()) return cmd_train(tr, err);
    if (d->parsed()) return cmd_detect(det, err);
    if (e->parsed()) return cmd_eval(ev, out, err);
    if (b->parsed()) return cmd_dump_balls(dump, out);
  } catch (const Error& ex) {
    err << "error: " << ex.what() << '\n';
    return 2;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace gboc::cli
