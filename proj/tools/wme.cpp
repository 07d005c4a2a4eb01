// wme: calibrate, replay, sweep and fixture generation.
#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "wme/fixture.hpp"
#include "wme/harness.hpp"
#include "wme/io.hpp"

namespace {

using namespace wme;

struct Overrides {
  std::string config;
  std::optional<int> mu, lambda, deadline_ms, r_start_train;
  std::optional<std::string> phi, calibration, utility_matrix;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> experts;
  bool current_weights = false;
};

void add_run_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "key = value config file");
  cmd->add_option("--mu", o.mu, "minimum window size");
  cmd->add_option("--lambda", o.lambda, "maximum window size");
  cmd->add_option("--phi", o.phi, "scoring metric")->check(CLI::IsMember({"accuracy", "utility"}));
  cmd->add_option("--r-start-train", o.r_start_train, "first warm-up round");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--expert", o.experts, "built-in name, cmd:COMMAND or tcp:HOST:PORT (repeatable)");
  cmd->add_option("--deadline-ms", o.deadline_ms, "per-round deadline for external experts");
  cmd->add_option("--calibration", o.calibration, "directory holding calibration artifacts");
  cmd->add_option("--utility-matrix", o.utility_matrix, "5x5 utility matrix file");
  cmd->add_flag("--vote-with-current-weights", o.current_weights, "vote with w(r) instead of w(r-1)");
}

RunConfig build_config(const Overrides& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : RunConfig::load(o.config);
  if (o.mu) cfg.engine.min_window = *o.mu;
  if (o.lambda) cfg.engine.max_window = *o.lambda;
  if (o.phi) cfg.engine.metric = parse_metric(*o.phi);
  if (o.r_start_train) cfg.engine.r_start_train = *o.r_start_train;
  if (o.seed) cfg.seed = *o.seed;
  if (o.deadline_ms) cfg.deadline_ms = *o.deadline_ms;
  if (o.calibration) cfg.set_calibration_dir(*o.calibration);
  if (o.utility_matrix) cfg.utility_matrix = *o.utility_matrix;
  if (o.current_weights) cfg.engine.vote_with_current_weights = true;
  if (!o.experts.empty()) cfg.experts = o.experts;
  return cfg;
}

SweepWindow parse_window(const std::string& text) {
  const auto parts = io::split(text, ',');
  std::int64_t mu = 0, lambda = 0;
  if (parts.size() != 2 || !io::parse_int(io::trim(parts[0]), mu) || !io::parse_int(io::trim(parts[1]), lambda))
    throw ConfigError("window must be MU,LAMBDA, got \"" + text + "\"");
  return {static_cast<int>(mu), static_cast<int>(lambda)};
}

DayPair parse_pair(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("day pair must be PREV:CURR, got \"" + text + "\"");
  return {text.substr(0, colon), text.substr(colon + 1)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted-majority ensemble replay harness"};
  app.require_subcommand(1);

  std::vector<std::string> cal_days;
  std::string cal_out;
  auto* calibrate_cmd = app.add_subcommand("calibrate", "fit calibration stats, bin edges and volume baseline");
  calibrate_cmd->add_option("days", cal_days, "day CSV files in chronological order")->required();
  calibrate_cmd->add_option("--out", cal_out, "output directory")->required();

  Overrides replay_opts;
  std::string prev_day, curr_day, replay_out;
  auto* replay_cmd = app.add_subcommand("replay", "replay one day pair end to end");
  add_run_options(replay_cmd, replay_opts);
  replay_cmd->add_option("prev", prev_day, "previous-day CSV");
  replay_cmd->add_option("curr", curr_day, "current-day CSV");
  replay_cmd->add_option("--out", replay_out, "output directory")->required();

  Overrides sweep_opts;
  std::vector<std::string> pairs, windows;
  std::string sweep_out;
  auto* sweep_cmd = app.add_subcommand("sweep", "replay several day pairs under several window sizes");
  add_run_options(sweep_cmd, sweep_opts);
  sweep_cmd->add_option("--pair", pairs, "PREV:CURR day files (repeatable)")->required();
  sweep_cmd->add_option("--window", windows, "MU,LAMBDA (repeatable; default 5,5 5,10 5,20)");
  sweep_cmd->add_option("--out", sweep_out, "output directory")->required();

  FixtureParams fx;
  std::string fixture_out;
  auto* fixture_cmd = app.add_subcommand("gen-fixture", "write synthetic day CSVs");
  fixture_cmd->add_option("--tickers", fx.tickers, "ticker count")->check(CLI::Range(1, 702));
  fixture_cmd->add_option("--days", fx.days, "day count")->check(CLI::Range(1, 1000));
  fixture_cmd->add_option("--seed", fx.seed, "seed");
  fixture_cmd->add_option("--trend", fx.trend, "log drift per round");
  fixture_cmd->add_option("--noise", fx.noise, "log-return volatility per round");
  fixture_cmd->add_option("--regime-shift", fx.regime_shift, "global round where the drift flips");
  fixture_cmd->add_option("--out", fixture_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*calibrate_cmd) {
      std::vector<std::vector<Candle>> days;
      for (std::size_t i = 0; i < cal_days.size(); ++i) days.push_back(load_day(cal_days[i], static_cast<int>(i)));
      write_calibration(calibrate(days), cal_out);
      std::cout << "wrote calibration artifacts to " << cal_out << '\n';
    } else if (*replay_cmd) {
      auto cfg = build_config(replay_opts);
      if (!prev_day.empty()) cfg.prev_day = prev_day;
      if (!curr_day.empty()) cfg.curr_day = curr_day;
      const Metric metrics[] = {cfg.engine.metric};
      const auto replay = replay_day(cfg, metrics);
      write_replay(cfg, replay, replay_out);
      const auto& r = replay.ensembles.front().report;
      std::cout << r.name << ": accuracy " << io::format_double(r.accuracy) << ", utility/prediction "
                << io::format_double(r.utility_per_prediction) << ", support " << r.support << '\n';
    } else if (*sweep_cmd) {
      const auto cfg = build_config(sweep_opts);
      std::vector<DayPair> day_pairs;
      for (const auto& p : pairs) day_pairs.push_back(parse_pair(p));
      std::vector<SweepWindow> sweep_windows;
      for (const auto& w : windows) sweep_windows.push_back(parse_window(w));
      if (sweep_windows.empty()) sweep_windows = {{5, 5}, {5, 10}, {5, 20}};
      const auto result = run_sweep(cfg, day_pairs, sweep_windows, sweep_out);
      for (const auto& f : result.failures) std::cerr << "failed: " << f << '\n';
      std::cout << result.reports << " reports written to " << sweep_out << '\n';
      if (!result.failures.empty()) return kExitPartial;
    } else if (*fixture_cmd) {
      for (const auto& p : write_fixture(fx, fixture_out)) std::cout << p.string() << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kExitOk;
}
