#include "wme/harness.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "json.hpp"
#include "wme/external_expert.hpp"
#include "wme/io.hpp"

namespace wme {

using nlohmann::ordered_json;

int exit_code_for(const std::exception& e) {
  if (auto* p = dynamic_cast<const PhaseError*>(&e)) return p->exit_code();
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
      dynamic_cast<const GapError*>(&e) || dynamic_cast<const DuplicateError*>(&e) ||
      dynamic_cast<const CalibrationError*>(&e) || dynamic_cast<const DegeneratePriceError*>(&e) ||
      dynamic_cast<const DataError*>(&e))
    return kExitInvalid;
  return kExitRuntime;
}

namespace {

template <typename Fn>
auto in_phase(const std::string& phase, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const PhaseError&) {
    throw;
  } catch (const std::exception& e) {
    throw PhaseError(phase, e.what(), exit_code_for(e));
  }
}

bool parse_bool(std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("expected a boolean, got \"" + std::string(v) + "\"");
}

std::int64_t parse_int_value(std::string_view key, std::string_view v) {
  std::int64_t out = 0;
  if (!io::parse_int(v, out)) throw ConfigError("key " + std::string(key) + " expects an integer");
  return out;
}

fs::path resolve(const fs::path& base, std::string_view v) {
  fs::path p{std::string(v)};
  return p.is_relative() && !base.empty() ? base / p : p;
}

double mean_of(const std::vector<double>& xs) {
  double s = 0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

double pop_std(const std::vector<double>& xs) {
  if (xs.empty() || std::all_of(xs.begin(), xs.end(), [&](double x) { return x == xs.front(); })) return 0.0;
  const double mu = mean_of(xs);
  double s = 0;
  for (double x : xs) s += (x - mu) * (x - mu);
  return std::sqrt(s / static_cast<double>(xs.size()));
}

ordered_json report_json(const TradeReport& r) {
  ordered_json j;
  j["name"] = r.name;
  j["accuracy"] = r.accuracy;
  j["support"] = r.support;
  j["total_utility"] = r.total_utility;
  j["utility_per_prediction"] = r.utility_per_prediction;
  j["trades"] = r.trades;
  j["masked"] = r.masked;
  j["unlabeled"] = r.unlabeled;
  return j;
}

ordered_json vector_json(const Eigen::VectorXd& v) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

}  // namespace

void RunConfig::set(std::string_view key, std::string_view value, const fs::path& base) {
  value = io::trim(value);
  if (key == "mu") {
    engine.min_window = static_cast<int>(parse_int_value(key, value));
  } else if (key == "lambda") {
    engine.max_window = static_cast<int>(parse_int_value(key, value));
  } else if (key == "phi") {
    engine.metric = parse_metric(value);
  } else if (key == "r_start_train") {
    engine.r_start_train = static_cast<int>(parse_int_value(key, value));
  } else if (key == "vote_with_current_weights") {
    engine.vote_with_current_weights = parse_bool(value);
  } else if (key == "seed") {
    const auto s = parse_int_value(key, value);
    if (s < 0) throw ConfigError("seed must be non-negative");
    seed = static_cast<std::uint64_t>(s);
  } else if (key == "deadline_ms") {
    deadline_ms = static_cast<int>(parse_int_value(key, value));
  } else if (key == "experts") {
    experts.clear();
    for (auto part : io::split(value, ','))
      if (auto name = io::trim(part); !name.empty()) experts.emplace_back(name);
  } else if (key == "prev_day") {
    prev_day = resolve(base, value);
  } else if (key == "curr_day") {
    curr_day = resolve(base, value);
  } else if (key == "calibration_dir") {
    set_calibration_dir(resolve(base, value));
  } else if (key == "calibration_stats") {
    calibration_stats = resolve(base, value);
  } else if (key == "bin_edges") {
    bin_edges = resolve(base, value);
  } else if (key == "volume_baseline") {
    volume_baseline = resolve(base, value);
  } else if (key == "utility_matrix") {
    utility_matrix = resolve(base, value);
  } else {
    throw ConfigError("unknown config key \"" + std::string(key) + "\"");
  }
}

void RunConfig::set_calibration_dir(const fs::path& dir) {
  calibration_stats = dir / kStatsFile;
  bin_edges = dir / kBinsFile;
  volume_baseline = dir / kVolumeFile;
}

void RunConfig::validate() const {
  engine.validate();
  if (engine.r_start_train > kRoundsPerDay - engine.min_window)
    throw ConfigError("r_start_train must lie in [0, 75 - mu]");
  if (experts.empty()) throw ConfigError("the expert roster is empty");
  if (deadline_ms < 1) throw ConfigError("deadline_ms must be positive");
}

RunConfig RunConfig::parse(std::string_view text, const fs::path& base) {
  RunConfig cfg;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = io::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key = value", line_no);
    try {
      cfg.set(io::trim(line.substr(0, eq)), line.substr(eq + 1), base);
    } catch (const ConfigError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return cfg;
}

RunConfig RunConfig::load(const fs::path& path) {
  try {
    return parse(io::read_file(path), path.parent_path());
  } catch (const ParseError& e) {
    throw ParseError(e.detail(), e.line(), path.string());
  }
}

std::string method_label(Metric metric, int min_window, int max_window) {
  return std::string(metric == Metric::kAccuracy ? "WMA AccWts" : "WMA UtilWts") + " (" + std::to_string(min_window) +
         "," + std::to_string(max_window) + ")";
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) throw Error("sha256 failed");
  std::string out;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    out += buf;
  }
  return out;
}

CalibrationArtifacts calibrate(std::span<const std::vector<Candle>> days) {
  if (days.empty()) throw ConfigError("calibration needs at least one day");
  CalibrationArtifacts art;
  art.volume = fit_volume_baseline(days);
  std::vector<double> returns;
  std::vector<FeatureVector> rows;
  for (std::size_t i = 0; i < days.size(); ++i) {
    const auto series = i == 0 ? days.subspan(0, 1) : days.subspan(i - 1, 2);
    const auto tl = normalize_days(series, art.volume);
    const int first = i == 0 ? 0 : kRoundsPerDay;
    for (int r = first; r < first + kRoundsPerDay; ++r)
      for (int t = 0; t < tl.ticker_count(); ++t) {
        rows.push_back(build_feature_vector(tl, t, r));
        if (auto x = raw_return(tl, t, r)) returns.push_back(*x);
      }
  }
  art.bins = fit_bins(returns);
  art.stats = fit_calibration(rows);
  return art;
}

void write_calibration(const CalibrationArtifacts& art, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  io::write_file_atomic(out_dir / kStatsFile, format_calibration(art.stats));
  io::write_file_atomic(out_dir / kBinsFile, format_bins(art.bins));
  io::write_file_atomic(out_dir / kVolumeFile, format_volume_baseline(art.volume));
}

ExpertPanel build_panel(const RunConfig& config) {
  ExpertPanel panel;
  ExternalOptions opts;
  opts.deadline = std::chrono::milliseconds(config.deadline_ms);
  for (const auto& name : config.experts) {
    if (name.starts_with("cmd:") || name.starts_with("tcp:"))
      panel.add(host_external(name, opts));
    else
      panel.add(make_builtin(name, config.seed));
  }
  if (panel.size() < 1) throw ConfigError("the expert roster is empty");
  return panel;
}

DayReplay replay_day(const RunConfig& config, std::span<const Metric> metrics) {
  in_phase("config", [&] { config.validate(); });
  auto panel = in_phase("experts", [&] { return build_panel(config); });
  return replay_day(config, metrics, panel);
}

DayReplay replay_day(const RunConfig& config, std::span<const Metric> metrics, ExpertPanel& panel) {
  if (metrics.empty()) throw ConfigError("no metric requested");
  DayReplay out;
  struct Inputs {
    std::vector<Candle> prev, curr;
    VolumeBaseline volume;
    CalibrationStats stats;
    BinEdges bins;
    UtilityMatrix utility;
  };
  const Inputs in = in_phase("ingest", [&] {
    config.validate();
    Inputs x;
    const auto read = [&](const char* label, const fs::path& p) {
      if (p.empty()) throw ConfigError(std::string("no path given for ") + label);
      auto text = io::read_file(p);
      out.checksums.emplace_back(label, sha256_hex(text));
      return text;
    };
    const auto with_source = [](const fs::path& p, auto&& fn) {
      try {
        return fn();
      } catch (const ParseError& e) {
        throw ParseError(e.detail(), e.line(), p.string());
      }
    };
    const auto prev_text = read("prev_day", config.prev_day);
    const auto curr_text = read("curr_day", config.curr_day);
    const auto stats_text = read("calibration_stats", config.calibration_stats);
    const auto bins_text = read("bin_edges", config.bin_edges);
    const auto vol_text = read("volume_baseline", config.volume_baseline);
    x.prev = with_source(config.prev_day, [&] { return parse_day(prev_text, 0); });
    x.curr = with_source(config.curr_day, [&] { return parse_day(curr_text, 1); });
    x.stats = with_source(config.calibration_stats, [&] { return parse_calibration(stats_text); });
    x.bins = with_source(config.bin_edges, [&] { return parse_bins(bins_text); });
    x.volume = with_source(config.volume_baseline, [&] { return parse_volume_baseline(vol_text); });
    x.utility = config.utility_matrix.empty() ? default_utility_matrix() : [&] {
      auto text = read("utility_matrix", config.utility_matrix);
      return with_source(config.utility_matrix, [&] { return parse_utility_matrix(text); });
    }();
    return x;
  });

  DayTimeline timeline;
  FeatureTable z;
  in_phase("features", [&] {
    timeline = normalize_timeline(in.prev, in.curr, in.volume);
    z = znormalize(build_feature_table(timeline), in.stats);
    out.truths = TruthStore(timeline, in.bins);
    out.tickers = timeline.tickers;
  });

  out.experts = panel.ids();
  const MarketFeed feed{out.tickers, &z};
  const int last = static_cast<int>(timeline.rounds()) - 1;
  for (Metric metric : metrics) {
    EngineConfig ec = config.engine;
    ec.metric = metric;
    ec.utility = in.utility;
    EnsembleRun run;
    run.metric = metric;
    run.method = method_label(metric, ec.min_window, ec.max_window);
    run.training = in_phase("training", [&] { return run_training_mode(feed, panel, out.truths, ec); });
    run.inference =
        in_phase("inference", [&] { return run_inference_mode(feed, panel, out.truths, run.training, ec); });
    in_phase("metrics", [&] {
      run.report = simulate_masked(ensemble_stream(run.inference.predictions, static_cast<int>(out.tickers.size()),
                                                   kCurrentDayStart, last),
                                   out.truths, in.utility, run.method);
      run.shares = reward_shares(run.inference.trajectory);
    });
    out.ensembles.push_back(std::move(run));
  }

  in_phase("metrics", [&] {
    const auto& first = out.ensembles.front().inference;
    out.abstentions.assign(out.experts.size(), 0);
    for (const auto& rec : first.records)
      if (rec.abstained) ++out.abstentions[static_cast<std::size_t>(rec.expert)];
    for (std::size_t j = 0; j < out.experts.size(); ++j)
      out.models.push_back(simulate_masked(expert_stream(first.history, static_cast<int>(j), kCurrentDayStart, last),
                                           out.truths, in.utility, out.experts[j].name));
    out.avg = avg_model(out.models);
  });
  return out;
}

std::string format_report(const RunConfig& config, const DayReplay& replay) {
  ordered_json j;
  ordered_json cfg;
  cfg["mu"] = config.engine.min_window;
  cfg["lambda"] = config.engine.max_window;
  cfg["phi"] = std::string(metric_name(config.engine.metric));
  cfg["r_start_train"] = config.engine.r_start_train;
  cfg["vote_with_current_weights"] = config.engine.vote_with_current_weights;
  cfg["seed"] = config.seed;
  cfg["deadline_ms"] = config.deadline_ms;
  cfg["experts"] = config.experts;
  j["config"] = cfg;

  ordered_json inputs = ordered_json::object();
  for (const auto& [name, sum] : replay.checksums) inputs[name] = {{"sha256", sum}};
  j["inputs"] = inputs;
  j["tickers"] = replay.tickers;

  ordered_json experts = ordered_json::array();
  for (std::size_t i = 0; i < replay.experts.size(); ++i)
    experts.push_back({{"name", replay.experts[i].name},
                       {"kind", replay.experts[i].kind == ExpertKind::kBuiltin ? "builtin" : "external"},
                       {"abstentions", replay.abstentions.at(i)}});
  j["experts"] = experts;

  ordered_json models = ordered_json::array();
  for (const auto& m : replay.models) models.push_back(report_json(m));
  j["models"] = models;
  ordered_json avg;
  avg["name"] = replay.avg.name;
  avg["accuracy"] = replay.avg.accuracy;
  avg["utility_per_prediction"] = replay.avg.utility_per_prediction;
  j["avg_model"] = avg;

  ordered_json ensembles = ordered_json::array();
  for (const auto& e : replay.ensembles) {
    ordered_json ej = report_json(e.report);
    ej["method"] = e.method;
    ej["phi"] = std::string(metric_name(e.metric));
    ej["warm_weights"] = vector_json(e.training.weights.values);
    ej["final_weights"] = vector_json(e.inference.trajectory.back().weights);
    ordered_json shares = ordered_json::object();
    for (std::size_t i = 0; i < replay.experts.size(); ++i)
      shares[replay.experts[i].name] = e.shares(static_cast<Eigen::Index>(i));
    ej["reward_shares"] = shares;
    ensembles.push_back(ej);
  }
  j["ensemble"] = ensembles.front();
  j["ensembles"] = ensembles;
  j["reward_shares"] = ensembles.front()["reward_shares"];
  return j.dump(2) + "\n";
}

std::string format_weights_csv(const DayReplay& replay, std::size_t ensemble) {
  const auto& run = replay.ensembles.at(ensemble);
  std::string out = "round,expert_name,weight\n";
  for (const auto* traj : {&run.training.trajectory, &run.inference.trajectory})
    for (const auto& s : *traj)
      for (std::size_t i = 0; i < replay.experts.size(); ++i)
        out += std::to_string(s.round) + ',' + replay.experts[i].name + ',' +
               io::format_double(s.weights(static_cast<Eigen::Index>(i))) + '\n';
  return out;
}

std::string format_predictions_csv(const DayReplay& replay, std::size_t ensemble) {
  std::string out = "round,ticker,class,tie_flag\n";
  for (const auto& p : replay.ensembles.at(ensemble).inference.predictions)
    out += std::to_string(p.round) + ',' + replay.tickers.at(static_cast<std::size_t>(p.ticker)) + ',' +
           std::to_string(p.label.value()) + ',' + (p.tie ? "1" : "0") + '\n';
  return out;
}

void write_replay(const RunConfig& config, const DayReplay& replay, const fs::path& out_dir) {
  in_phase("report", [&] {
    fs::create_directories(out_dir);
    io::write_file_atomic(out_dir / "report.json", format_report(config, replay));
    io::write_file_atomic(out_dir / "weights.csv", format_weights_csv(replay));
    io::write_file_atomic(out_dir / "predictions.csv", format_predictions_csv(replay));
    io::write_file_atomic(out_dir / "truths.csv", replay.truths.format_csv(replay.tickers));
  });
}

SweepResult run_sweep(const RunConfig& base, std::span<const DayPair> pairs, std::span<const SweepWindow> windows,
                      const fs::path& out_dir) {
  if (pairs.empty()) throw ConfigError("sweep needs at least one day pair");
  if (windows.empty()) throw ConfigError("sweep needs at least one window configuration");
  SweepResult result;
  const Metric metrics[] = {Metric::kAccuracy, Metric::kUtility};
  for (const auto& w : windows) {
    const std::string window = "(" + std::to_string(w.min_window) + "," + std::to_string(w.max_window) + ")";
    std::vector<std::string> order;
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> values;
    const auto record = [&](const std::string& method, double acc, double util) {
      if (!values.contains(method)) order.push_back(method);
      values[method].first.push_back(acc);
      values[method].second.push_back(util);
    };
    for (std::size_t d = 0; d < pairs.size(); ++d) {
      RunConfig cfg = base;
      cfg.engine.min_window = w.min_window;
      cfg.engine.max_window = w.max_window;
      cfg.prev_day = pairs[d].prev_day;
      cfg.curr_day = pairs[d].curr_day;
      const std::string tag = "w" + std::to_string(w.min_window) + "_" + std::to_string(w.max_window) + "/day" +
                              std::to_string(d);
      try {
        const auto replay = replay_day(cfg, metrics);
        write_replay(cfg, replay, out_dir / tag);
        ++result.reports;
        for (const auto& m : replay.models) record(m.name, m.accuracy, m.utility_per_prediction);
        record("AVG_MODEL", replay.avg.accuracy, replay.avg.utility_per_prediction);
        for (const auto& e : replay.ensembles)
          record(e.metric == Metric::kAccuracy ? "WMA AccWts" : "WMA UtilWts", e.report.accuracy,
                 e.report.utility_per_prediction);
      } catch (const std::exception& e) {
        result.failures.push_back(tag + ": " + e.what());
      }
    }
    for (const auto& method : order) {
      const auto& [acc, util] = values[method];
      result.summary.push_back(
          {window, method, mean_of(acc), pop_std(acc), mean_of(util), pop_std(util), static_cast<int>(acc.size())});
    }
  }
  fs::create_directories(out_dir);
  io::write_file_atomic(out_dir / "summary.csv", format_summary_csv(result.summary));
  return result;
}

std::string format_summary_csv(std::span<const SweepRow> rows) {
  std::string out = "window,method,accuracy_mean,accuracy_std,utility_mean,utility_std,days\n";
  for (const auto& r : rows)
    out += '"' + r.window + "\"," + r.method + ',' + io::format_double(r.accuracy_mean) + ',' +
           io::format_double(r.accuracy_std) + ',' + io::format_double(r.utility_mean) + ',' +
           io::format_double(r.utility_std) + ',' + std::to_string(r.days) + '\n';
  return out;
}

}  // namespace wme
