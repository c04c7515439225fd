#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tdhorde/cli.hpp"
#include "tdhorde/config.hpp"
#include "tdhorde/errors.hpp"
#include "tdhorde/evaluation.hpp"
#include "tdhorde/stream.hpp"

using namespace tdhorde;

namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const char* name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  REQUIRE(out.good());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::size_t line_count(const std::string& text) {
  std::size_t lines = 0;
  for (char c : text) {
    if (c == '\n') ++lines;
  }
  return lines;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string config_error_message(const std::string& json_text) {
  try {
    ExperimentConfig::from_json_text(json_text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "<no error>";
}

// 80-frame four-phase profile over the default 108 channels; small coder so
// CLI smoke runs finish in well under a second.
std::string tiny_config_text(const fs::path& out_dir, const std::string& extra_sections = "") {
  std::ostringstream text;
  text << "{\n"
       << "  \"data\": {\"seed\": 7, \"step_period_s\": 0.25, \"pattern_period_s\": 5.0,"
       << " \"drift_channel\": -1},\n"
       << "  \"schedule\": [\n"
       << "    {\"kind\": \"rest\", \"steps\": 20}, {\"kind\": \"movement\", \"steps\": 20},\n"
       << "    {\"kind\": \"rest\", \"steps\": 20}, {\"kind\": \"movement\", \"steps\": 20}\n"
       << "  ],\n"
       << "  \"coder\": {\"prototypes\": 50, \"active_ratio\": 0.1, \"seed\": 3},\n"
       << "  \"horde\": {\"learner\": \"tidbd\", \"discount\": 0.5, \"trace_decay\": 0.9},\n"
       << "  \"run\": {\"seeds\": [1], \"out_dir\": \"" << out_dir.string() << "\"}"
       << (extra_sections.empty() ? "" : ",\n" + extra_sections) << "\n}\n";
  return text.str();
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path path = dir / "config.json";
  write_text(path, text);
  return path;
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("defaults describe the reference experiment") {
  const ExperimentConfig cfg;
  CHECK(cfg.data.source == ExperimentConfig::DataSource::synthetic);
  CHECK(cfg.data.seed == 1);
  CHECK(cfg.data.step_period_s == 0.265);
  CHECK(cfg.data.pattern_period_s == 100.0);
  CHECK(cfg.data.rest_noise_fraction == 1e-3);
  CHECK(cfg.data.temperature_rise_fraction == 0.3);
  CHECK(cfg.data.drift_channel == 39);
  CHECK(cfg.data.drift_phase == 4);
  CHECK(cfg.data.drift_fraction == 0.25);

  REQUIRE(cfg.schedule.size() == 6);
  for (std::size_t p = 0; p < 6; ++p) {
    CHECK(cfg.schedule[p].steps == 1132);
    CHECK(cfg.schedule[p].kind == (p % 2 == 0 ? PhaseKind::rest : PhaseKind::movement));
  }

  CHECK(cfg.coder.prototypes == 30000);
  CHECK(cfg.coder.active_ratio == 0.032);
  CHECK(cfg.coder.seed == 1);

  CHECK(cfg.horde.learner == LearnerKind::tidbd);
  CHECK(cfg.horde.discount == 0.9);
  CHECK(cfg.horde.trace_decay == 0.9);
  CHECK(cfg.horde.step_size == 0.0);
  CHECK(cfg.horde.meta_step_size == 0.01);
  CHECK(cfg.horde.decay_time == 1e4);
  CHECK(!cfg.horde.xi_consistent_form);
  CHECK(cfg.horde.cumulant_source == CumulantSource::normalized);

  CHECK(cfg.run.seeds == std::vector<std::uint64_t>{1});
  CHECK(cfg.run.out_dir == fs::path("out"));
  CHECK(cfg.run.threads == 1);
  CHECK(!cfg.failure.has_value());
  CHECK(!cfg.sweep.has_value());

  // step_size 0 resolves to one unit of step mass over the active set.
  CHECK(cfg.resolved_step_size() == 1.0 / 960.0);
  CHECK(cfg.channel_meta().size() == 108);

  const GvfSpec tmpl = cfg.horde_template();
  CHECK(tmpl.kind == LearnerKind::tidbd);
  CHECK(tmpl.tidbd.initial_step_size == 1.0 / 960.0);
  CHECK(tmpl.tidbd.meta_step_size == 0.01);
  CHECK(tmpl.td.step_size == 1.0 / 960.0);

  CHECK_NOTHROW(cfg.validate());

  // An empty JSON object is exactly the default configuration.
  const ExperimentConfig parsed = ExperimentConfig::from_json_text("{}");
  CHECK(parsed.to_json_text() == cfg.to_json_text());
}

TEST_CASE("json parsing fills every section") {
  const std::string text = R"({
    "data": {"seed": 9, "step_period_s": 0.5, "drift_channel": -1},
    "schedule": [{"kind": "rest", "steps": 4}, {"kind": "movement", "steps": 6}],
    "coder": {"prototypes": 200, "active_ratio": 0.05, "seed": 12},
    "horde": {"learner": "classic_td", "discount": 0.8, "trace_decay": 0.7,
              "step_size": 0.03, "cumulant_source": "raw"},
    "failure": {"kind": "broken", "channels": [2, 5], "seed": 4},
    "run": {"seeds": [3, 1], "out_dir": "elsewhere", "snapshot_steps": [0, 5], "threads": 2},
    "sweep": {"method": "tidbd", "prototype_grid": [100], "ratio_grid": [0.1],
              "step_multiplier_grid": [1.0], "theta_grid": [0.02], "seeds": [5]}
  })";
  const ExperimentConfig cfg = ExperimentConfig::from_json_text(text);

  CHECK(cfg.data.seed == 9);
  CHECK(cfg.data.step_period_s == 0.5);
  CHECK(cfg.data.drift_channel == -1);
  REQUIRE(cfg.schedule.size() == 2);
  CHECK(cfg.schedule[0].kind == PhaseKind::rest);
  CHECK(cfg.schedule[0].steps == 4);
  CHECK(cfg.schedule[1].kind == PhaseKind::movement);
  CHECK(cfg.coder.prototypes == 200);
  CHECK(cfg.coder.active_ratio == 0.05);
  CHECK(cfg.horde.learner == LearnerKind::classic_td);
  CHECK(cfg.horde.discount == 0.8);
  CHECK(cfg.horde.step_size == 0.03);
  CHECK(cfg.resolved_step_size() == 0.03);  // explicit value wins over 1/(n*eta)
  CHECK(cfg.horde.cumulant_source == CumulantSource::raw);

  REQUIRE(cfg.failure.has_value());
  CHECK(cfg.failure->kind == FailureKind::broken);
  CHECK(cfg.failure->channels == std::vector<std::uint32_t>{2, 5});
  CHECK(cfg.failure->noise_mean == 0.0);  // broken-kind default
  CHECK(cfg.failure->noise_std == 10.0);
  CHECK(cfg.failure->seed == 4);

  CHECK(cfg.run.seeds == std::vector<std::uint64_t>{3, 1});
  CHECK(cfg.run.out_dir == fs::path("elsewhere"));
  CHECK(cfg.run.snapshot_steps == std::vector<std::int64_t>{0, 5});
  CHECK(cfg.run.threads == 2);

  REQUIRE(cfg.sweep.has_value());
  CHECK(cfg.sweep->method == LearnerKind::tidbd);
  CHECK(cfg.sweep->prototype_grid == std::vector<std::uint32_t>{100});
  CHECK(cfg.sweep->theta_grid == std::vector<double>{0.02});
  // Sweep dynamics come from the horde section.
  CHECK(cfg.sweep->discount == 0.8);
  CHECK(cfg.sweep->trace_decay == 0.7);
  CHECK(cfg.sweep->cumulant_source == CumulantSource::raw);
}

TEST_CASE("failure defaults pick the elbow channels and kind-specific noise") {
  const ExperimentConfig stuck =
      ExperimentConfig::from_json_text(R"({"failure": {"kind": "stuck"}})");
  REQUIRE(stuck.failure.has_value());
  CHECK(stuck.failure->channels == default_elbow_channels());
  CHECK(stuck.failure->noise_mean == 1.0);
  CHECK(stuck.failure->noise_std == 0.5);

  // Explicit noise overrides the kind defaults.
  const ExperimentConfig custom = ExperimentConfig::from_json_text(
      R"({"failure": {"kind": "stuck", "noise_mean": 2.0, "noise_std": 0.25}})");
  CHECK(custom.failure->noise_mean == 2.0);
  CHECK(custom.failure->noise_std == 0.25);
}

TEST_CASE("trials expand to the seed range and exclude explicit seeds") {
  const ExperimentConfig cfg =
      ExperimentConfig::from_json_text(R"({"run": {"trials": 3}})");
  CHECK(cfg.run.seeds == std::vector<std::uint64_t>{1, 2, 3});

  CHECK(config_error_message(R"({"run": {"trials": 2, "seeds": [7]}})")
            .find("either 'seeds' or 'trials'") != std::string::npos);
}

TEST_CASE("unknown keys are rejected with their location") {
  CHECK(config_error_message(R"({"digest": 1})").find("unknown key 'digest'") !=
        std::string::npos);
  const std::string data_message = config_error_message(R"({"data": {"sed": 1}})");
  CHECK(data_message.find("unknown key 'sed'") != std::string::npos);
  CHECK(data_message.find("data") != std::string::npos);
  CHECK(config_error_message(R"({"horde": {"alpha": 0.1}})").find("unknown key 'alpha'") !=
        std::string::npos);
  CHECK(config_error_message(R"({"sweep": {"grid": []}})").find("unknown key 'grid'") !=
        std::string::npos);
}

TEST_CASE("invalid values are rejected") {
  CHECK(config_error_message("not json at all") != "<no error>");
  CHECK(config_error_message(R"({"schedule": [{"kind": "nap", "steps": 5}]})") != "<no error>");
  CHECK(config_error_message(R"({"schedule": [{"steps": 5}]})").find("needs 'kind'") !=
        std::string::npos);
  CHECK(config_error_message(R"({"horde": {"learner": "sarsa"}})") != "<no error>");
  CHECK(config_error_message(R"({"horde": {"cumulant_source": "psychic"}})") != "<no error>");
  CHECK(config_error_message(R"({"failure": {"channels": [1]}})").find("needs 'kind'") !=
        std::string::npos);
  CHECK(config_error_message(R"({"failure": {"kind": "melted"}})") != "<no error>");
  CHECK(config_error_message(R"({"data": {"source": "csv"}})") != "<no error>");
  CHECK(config_error_message(R"({"data": {"source": "telepathy"}})") != "<no error>");
  CHECK(config_error_message(R"({"run": {"seeds": []}})") != "<no error>");
  CHECK(config_error_message(R"({"run": {"threads": 0}})") != "<no error>");
  CHECK(config_error_message(R"({"coder": {"active_ratio": 0.0}})") != "<no error>");

  // Overrides must cover every channel (108 by default).
  CHECK(config_error_message(R"({"horde": {"step_size_overrides": [0.1, 0.2]}})") !=
        "<no error>");

  // The default drift phase (4) does not exist in a two-phase schedule.
  CHECK(config_error_message(
            R"({"schedule": [{"kind": "rest", "steps": 5}, {"kind": "movement", "steps": 5}]})") !=
        "<no error>");

  // Wrong JSON types surface as ConfigError, not as raw json exceptions.
  CHECK(config_error_message(R"({"coder": {"prototypes": "many"}})") != "<no error>");
  CHECK(config_error_message(R"({"schedule": {"kind": "rest"}})") != "<no error>");
}

TEST_CASE("effective config text reloads to the same configuration") {
  const std::string text = R"({
    "schedule": [{"kind": "rest", "steps": 10}, {"kind": "movement", "steps": 10}],
    "data": {"drift_channel": -1},
    "coder": {"prototypes": 80, "active_ratio": 0.1},
    "failure": {"kind": "stuck"},
    "sweep": {"prototype_grid": [80], "ratio_grid": [0.1], "step_multiplier_grid": [1.0]}
  })";
  const ExperimentConfig cfg = ExperimentConfig::from_json_text(text);
  const std::string effective = cfg.to_json_text();

  const ExperimentConfig reloaded = ExperimentConfig::from_json_text(effective);
  CHECK(reloaded.to_json_text() == effective);  // fixed point
  CHECK(reloaded.coder.prototypes == 80);
  REQUIRE(reloaded.failure.has_value());
  CHECK(reloaded.failure->noise_mean == 1.0);
  REQUIRE(reloaded.sweep.has_value());
  CHECK(reloaded.sweep->prototype_grid == std::vector<std::uint32_t>{80});
  // The echoed text carries the resolved step size, not the 0 placeholder.
  CHECK(reloaded.horde.step_size == 1.0 / 8.0);
  CHECK_NOTHROW(reloaded.validate());
}

TEST_CASE("snapshot steps default to the reporting moments") {
  const ExperimentConfig cfg;  // six 1132-step phases
  CHECK(cfg.snapshot_steps_for(6792) ==
        std::vector<std::int64_t>{0, 2264, 4528, 6792});
  // Shorter runs clip the later moments and drop duplicates.
  CHECK(cfg.snapshot_steps_for(3000) == std::vector<std::int64_t>{0, 2264, 3000});
  CHECK(cfg.snapshot_steps_for(100) == std::vector<std::int64_t>{0, 100});

  ExperimentConfig custom;
  custom.run.snapshot_steps = {9, 3, 9, 50000};
  CHECK(custom.snapshot_steps_for(6792) == std::vector<std::int64_t>{3, 9});
}

TEST_CASE("load reports missing files as configuration errors") {
  CHECK_THROWS_AS(ExperimentConfig::load("/nonexistent/config.json"), ConfigError);

  const fs::path dir = temp_dir("tdhorde_config_load_test");
  const fs::path path = dir / "config.json";
  write_text(path, R"({"coder": {"prototypes": 64, "active_ratio": 0.25}})");
  const ExperimentConfig cfg = ExperimentConfig::load(path);
  CHECK(cfg.coder.prototypes == 64);
  CHECK(cfg.resolved_step_size() == 1.0 / 16.0);
  fs::remove_all(dir);
}

}  // TEST_SUITE

TEST_SUITE("cli") {

TEST_CASE("usage errors exit with code 2 and help with 0") {
  CHECK(run_main({}) == 2);                                      // missing subcommand
  CHECK(run_main({"conjure"}) == 2);                             // unknown subcommand
  CHECK(run_main({"run"}) == 2);                                 // missing --config
  CHECK(run_main({"run", "--config", "/nonexistent.json"}) == 2);
  CHECK(run_main({"--help"}) == 0);
  CHECK(run_main({"run", "--help"}) == 0);
}

TEST_CASE("generate then run produce the full report tree") {
  const fs::path dir = temp_dir("tdhorde_cli_run_test");
  const fs::path out = dir / "out";
  const fs::path config = write_config(dir, tiny_config_text(out));

  REQUIRE(run_main({"generate", "--config", config.string()}) == 0);
  REQUIRE(fs::exists(out / "stream.csv"));
  REQUIRE(fs::exists(out / "channel_meta.csv"));
  // Header plus one row per frame of the four 20-step phases.
  CHECK(line_count(read_text(out / "stream.csv")) == 81);

  REQUIRE(run_main({"run", "--config", config.string()}) == 0);

  // The echoed effective config reloads and reproduces itself.
  const std::string effective = read_text(out / "effective_config.json");
  const ExperimentConfig echoed = ExperimentConfig::from_json_text(effective);
  CHECK(echoed.to_json_text() == effective);
  CHECK(echoed.horde.step_size == 0.2);  // resolved 1/(50 * 0.1)

  const fs::path seed_dir = out / "seed_1";
  // gamma = 0.5 cuts the last 7 of 80 frames: 73 scored steps plus a header.
  const std::string rmse_text = read_text(seed_dir / "rmse_per_step.csv");
  CHECK(line_count(rmse_text) == 74);
  CHECK(rmse_text.rfind("step,rmse\n", 0) == 0);

  const std::string period_text = read_text(seed_dir / "rmse_per_period.csv");
  CHECK(line_count(period_text) == 5);  // header + 4 phases
  CHECK(period_text.find("0,rest,") != std::string::npos);
  CHECK(period_text.find("1,movement,") != std::string::npos);

  CHECK(line_count(read_text(seed_dir / "timing.csv")) == 2);
  CHECK(line_count(read_text(out / "aggregate_rmse_per_period.csv")) == 5);

  // Default snapshot moments for 79 steps of this schedule: 0, 40, 79.
  REQUIRE(fs::exists(seed_dir / "stepsize_snapshot_0.csv"));
  REQUIRE(fs::exists(seed_dir / "stepsize_snapshot_40.csv"));
  REQUIRE(fs::exists(seed_dir / "stepsize_snapshot_79.csv"));
  CHECK(!fs::exists(seed_dir / "stepsize_snapshot_80.csv"));

  // Before any update every GVF reports alpha0 everywhere and nothing touched.
  const std::string snap0 = read_text(seed_dir / "stepsize_snapshot_0.csv");
  CHECK(line_count(snap0) == 109);  // header + one row per GVF
  const std::string first_row = snap0.substr(snap0.find('\n') + 1);
  const std::vector<std::string> cells =
      split_line(first_row.substr(0, first_row.find('\n')));
  REQUIRE(cells.size() == 7);
  CHECK(cells[0] == "0");            // gvf
  CHECK(cells[1] == "0");            // cumulant channel
  CHECK(cells[2] == "0");            // touched_count
  CHECK(cells[3] == "NA");           // no touched features yet
  // The mean is an accumulated sum over 50 copies of 0.2, so it can sit a
  // few ulps off; min and max are the stored values themselves.
  CHECK(std::strtod(cells[4].c_str(), nullptr) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(std::strtod(cells[5].c_str(), nullptr) == 0.2);
  CHECK(std::strtod(cells[6].c_str(), nullptr) == 0.2);

  // After learning, snapshots show movement: some features touched.
  const std::string snap79 = read_text(seed_dir / "stepsize_snapshot_79.csv");
  const std::string row79 = snap79.substr(snap79.find('\n') + 1);
  const std::vector<std::string> cells79 = split_line(row79.substr(0, row79.find('\n')));
  CHECK(std::strtol(cells79[2].c_str(), nullptr, 10) > 0);

  fs::remove_all(dir);
}

TEST_CASE("run reports are byte-deterministic given config and seeds") {
  const fs::path dir = temp_dir("tdhorde_cli_determinism_test");
  const fs::path out_a = dir / "a";
  const fs::path out_b = dir / "b";
  const fs::path config_a = dir / "config_a.json";
  const fs::path config_b = dir / "config_b.json";
  write_text(config_a, tiny_config_text(out_a));
  write_text(config_b, tiny_config_text(out_b));

  REQUIRE(run_main({"run", "--config", config_a.string()}) == 0);
  REQUIRE(run_main({"run", "--config", config_b.string()}) == 0);

  CHECK(read_text(out_a / "seed_1" / "rmse_per_step.csv") ==
        read_text(out_b / "seed_1" / "rmse_per_step.csv"));
  CHECK(read_text(out_a / "seed_1" / "rmse_per_period.csv") ==
        read_text(out_b / "seed_1" / "rmse_per_period.csv"));
  CHECK(read_text(out_a / "aggregate_rmse_per_period.csv") ==
        read_text(out_b / "aggregate_rmse_per_period.csv"));
  CHECK(read_text(out_a / "seed_1" / "stepsize_snapshot_79.csv") ==
        read_text(out_b / "seed_1" / "stepsize_snapshot_79.csv"));
  fs::remove_all(dir);
}

TEST_CASE("seed flags override the config seed list") {
  const fs::path dir = temp_dir("tdhorde_cli_seeds_test");
  const fs::path out = dir / "out";
  const fs::path config = write_config(dir, tiny_config_text(out));

  REQUIRE(run_main({"run", "--config", config.string(), "--seeds", "2", "3"}) == 0);
  CHECK(fs::exists(out / "seed_2" / "rmse_per_step.csv"));
  CHECK(fs::exists(out / "seed_3" / "rmse_per_step.csv"));
  CHECK(!fs::exists(out / "seed_1"));

  // Different seeds give different trajectories.
  CHECK(read_text(out / "seed_2" / "rmse_per_step.csv") !=
        read_text(out / "seed_3" / "rmse_per_step.csv"));
  fs::remove_all(dir);
}

TEST_CASE("inject writes the failure stream and requires a failure section") {
  const fs::path dir = temp_dir("tdhorde_cli_inject_test");
  const fs::path out = dir / "out";
  const fs::path config = write_config(
      dir, tiny_config_text(out, "  \"failure\": {\"kind\": \"broken\", \"seed\": 2}"));

  REQUIRE(run_main({"inject", "--config", config.string()}) == 0);
  REQUIRE(fs::exists(out / "injected_stream.csv"));
  CHECK(line_count(read_text(out / "injected_stream.csv")) == 81);

  const fs::path plain_config = dir / "no_failure.json";
  write_text(plain_config, tiny_config_text(out));
  CHECK(run_main({"inject", "--config", plain_config.string()}) == 2);
  fs::remove_all(dir);
}

TEST_CASE("sweep and report build the sensitivity tables") {
  const fs::path dir = temp_dir("tdhorde_cli_sweep_test");
  const fs::path out = dir / "out";
  const std::string sweep_section =
      "  \"sweep\": {\"method\": \"classic_td\", \"prototype_grid\": [24],"
      " \"ratio_grid\": [0.25], \"step_multiplier_grid\": [0.5, 1.0], \"seeds\": [1, 2]}";
  const fs::path config = write_config(dir, tiny_config_text(out, sweep_section));

  REQUIRE(run_main({"sweep", "--config", config.string()}) == 0);
  const fs::path results = out / "sweep_results.csv";
  REQUIRE(fs::exists(results));
  CHECK(line_count(read_text(results)) == 5);  // header + 2 cells x 2 seeds

  // Resume leaves finished work untouched.
  const std::string first_bytes = read_text(results);
  REQUIRE(run_main({"sweep", "--config", config.string()}) == 0);
  CHECK(read_text(results) == first_bytes);

  REQUIRE(run_main({"report", "--config", config.string()}) == 0);
  const std::string curves = read_text(out / "sensitivity_curves.csv");
  CHECK(line_count(curves) == 3);  // header + one row per alpha0 value
  CHECK(curves.rfind("method,theta,prototypes,ratio,alpha0,accumulated_rmse\n", 0) == 0);
  const std::string spread = read_text(out / "sensitivity_spread.csv");
  CHECK(line_count(spread) == 2);  // header + one (method, theta, n, eta) group
  CHECK(spread.rfind("method,theta,prototypes,ratio,spread\n", 0) == 0);

  // Sweeping without a sweep section is a usage error; reporting without
  // results is a data error.
  const fs::path plain_config = dir / "plain.json";
  write_text(plain_config, tiny_config_text(out / "other"));
  CHECK(run_main({"sweep", "--config", plain_config.string()}) == 2);
  CHECK(run_main({"report", "--config", plain_config.string()}) == 3);
  fs::remove_all(dir);
}

TEST_CASE("diverging runs exit with code 4") {
  const fs::path dir = temp_dir("tdhorde_cli_divergence_test");
  const fs::path out = dir / "out";
  std::string text = tiny_config_text(out);
  const std::string needle = "\"learner\": \"tidbd\", \"discount\": 0.5";
  const std::size_t pos = text.find(needle);
  REQUIRE(pos != std::string::npos);
  text.replace(pos, needle.size(),
               "\"learner\": \"classic_td\", \"step_size\": 1e100, \"discount\": 0.5");
  const fs::path config = write_config(dir, text);

  CHECK(run_main({"run", "--config", config.string()}) == 4);
  fs::remove_all(dir);
}

TEST_CASE("missing data files exit with code 3") {
  const fs::path dir = temp_dir("tdhorde_cli_data_error_test");
  const fs::path out = dir / "out";
  const std::string text = R"({
    "data": {"source": "csv", "stream_csv": ")" +
                           (dir / "missing.csv").string() + R"("},
    "schedule": [{"kind": "rest", "steps": 5}, {"kind": "movement", "steps": 5}],
    "coder": {"prototypes": 50, "active_ratio": 0.1},
    "run": {"seeds": [1], "out_dir": ")" + out.string() + R"("}
  })";
  const fs::path config = write_config(dir, text);
  CHECK(run_main({"run", "--config", config.string()}) == 3);
  fs::remove_all(dir);
}

}  // TEST_SUITE
