#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pbrnn/cli.hpp"
#include "pbrnn/data.hpp"
#include "pbrnn/emit.hpp"

using namespace pbrnn;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spill(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << text;
}

// Scoped temp file names; tests run from the build tree so cwd is writable.
struct TempFile {
  std::string path;
  explicit TempFile(std::string p) : path(std::move(p)) { std::remove(path.c_str()); }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("config text: pairs, comments, trimming and failure modes") {
  const auto kv = parse_config_text(
      "# a comment\n"
      "alpha = 0.5\n"
      "\n"
      "  name=value with spaces  \n"
      "trail = 7 # inline comment\n");
  REQUIRE(kv.size() == 3);
  CHECK(kv.at("alpha") == "0.5");
  CHECK(kv.at("name") == "value with spaces");
  CHECK(kv.at("trail") == "7");

  CHECK_THROWS_AS(parse_config_text("just words\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("= no key\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("a = 1\na = 2\n"), std::invalid_argument);
  CHECK(parse_config_text("").empty());
}

TEST_CASE("cli: argument errors exit with the config-error code") {
  CHECK(run_cli({}) == 2);
  CHECK(run_cli({"bogus"}) == 2);
  CHECK(run_cli({"--help"}) == 0);
  CHECK(run_cli({"synth"}) == 2);                          // --out is required
  CHECK(run_cli({"benchmark", "--config", "no_such_file.conf"}) == 2);
  CHECK(run_cli({"rv", "missing.csv", "--out", "x.csv"}) == 2);
  CHECK(run_cli({"train", "--workers", "0"}) == 2);
}

TEST_CASE("cli: synth writes a deterministic loadable series") {
  TempFile a("cli_synth_a.csv");
  TempFile b("cli_synth_b.csv");
  TempFile cfg("cli_synth.conf");
  spill(cfg.path, "synth_length = 420\nsynth_lag = 5\n");

  REQUIRE(run_cli({"synth", "--config", cfg.path, "--seed", "9", "--out", a.path}) == 0);
  REQUIRE(run_cli({"synth", "--config", cfg.path, "--seed", "9", "--out", b.path}) == 0);
  CHECK(slurp(a.path) == slurp(b.path));

  const RvSeries rv = load_rv_csv(a.path);
  CHECK(rv.rv.size() == 420);
  for (double v : rv.rv) {
    CHECK(v > 0.0);
  }
}

TEST_CASE("cli: rv aggregates prices into bars") {
  TempFile in("cli_prices.csv");
  TempFile out("cli_rv.csv");
  spill(in.path,
        "timestamp,price\n"
        "2024-01-02T09:30:00,100\n"
        "2024-01-02T09:31:00,101\n"
        "2024-01-02T10:07:00,102\n");
  REQUIRE(run_cli({"rv", in.path, "--out", out.path}) == 0);
  const RvSeries rv = load_rv_csv(out.path);
  REQUIRE(rv.rv.size() == 2);  // 09:30 bar and 10:00 bar
  const double r1 = std::log(101.0 / 100.0);
  const double r2 = std::log(102.0 / 101.0);
  CHECK(rv.rv[0] == doctest::Approx(r1 * r1).epsilon(1e-12));
  CHECK(rv.rv[1] == doctest::Approx(r2 * r2).epsilon(1e-12));
}

TEST_CASE("cli: train runs one cell and reports budget use") {
  TempFile cfg("cli_train.conf");
  TempFile out("cli_train.json");
  spill(cfg.path,
        "synth_length = 420\n"
        "synth_lag = 5\n"
        "trainer = npso\n"
        "population = 6\n"
        "iterations = 4\n"
        "hidden = 4\n");
  REQUIRE(run_cli({"train", "--config", cfg.path, "--seed", "3", "--out", out.path}) == 0);
  const std::string text = slurp(out.path);
  CHECK(text.find("\"trainer\": \"npso\"") != std::string::npos);
  CHECK(text.find("\"passes_used\": 24") != std::string::npos);
  CHECK(text.find("\"iterations_run\": 4") != std::string::npos);

  // Unknown hyperparameter keys are rejected, not ignored.
  TempFile bad("cli_train_bad.conf");
  spill(bad.path, "trainer = npso\nlearning_rate = 0.1\n");
  CHECK(run_cli({"train", "--config", bad.path}) == 2);

  TempFile fru("cli_train_fru.conf");
  spill(fru.path, "synth_length = 420\nsynth_lag = 5\ntrainer = sgd\narch = fru\n");
  CHECK(run_cli({"train", "--config", fru.path}) == 2);  // no gradient path
}

TEST_CASE("cli: benchmark renders the requested format and honours parity") {
  TempFile cfg("cli_bench.conf");
  spill(cfg.path,
        "synth_length = 420\n"
        "synth_lag = 5\n"
        "budget = 40\n"
        "sgd_search = 4\n"
        "pbo_search = 2\n"
        "population = 5\n"
        "architectures = lstm\n"
        "trainers = sgd,es\n");

  TempFile js("cli_bench.json");
  REQUIRE(run_cli({"benchmark", "--config", cfg.path, "--seed", "3", "--format", "json",
                   "--out", js.path}) == 0);
  const ResultTable table = parse_results_json(slurp(js.path));
  REQUIRE(table.cells.size() == 2);
  CHECK(table.budget == 40);
  CHECK(table.cells[0].normalized_mse == 1.0);

  TempFile md("cli_bench.md");
  REQUIRE(run_cli({"benchmark", "--config", cfg.path, "--seed", "3", "--format", "markdown",
                   "--out", md.path}) == 0);
  CHECK(slurp(md.path).find("| Architecture | SGD | ES |") == 0);

  CHECK(run_cli({"benchmark", "--config", cfg.path, "--format", "yaml"}) == 2);

  TempFile parity("cli_parity.conf");
  spill(parity.path, "synth_length = 420\nsynth_lag = 5\nbudget = 41\n");
  CHECK(run_cli({"benchmark", "--config", parity.path}) == 3);

  TempFile unknown("cli_unknown.conf");
  spill(unknown.path, "synth_length = 420\nbudjet = 40\n");
  CHECK(run_cli({"benchmark", "--config", unknown.path}) == 2);
}

TEST_CASE("cli: worker count never changes the benchmark file") {
  TempFile cfg("cli_bench_det.conf");
  spill(cfg.path,
        "synth_length = 420\n"
        "synth_lag = 5\n"
        "budget = 40\n"
        "sgd_search = 4\n"
        "pbo_search = 2\n"
        "population = 5\n");
  TempFile one("cli_det_w1.json");
  TempFile four("cli_det_w4.json");
  REQUIRE(run_cli({"benchmark", "--config", cfg.path, "--seed", "12", "--workers", "1",
                   "--format", "json", "--out", one.path}) == 0);
  REQUIRE(run_cli({"benchmark", "--config", cfg.path, "--seed", "12", "--workers", "4",
                   "--format", "json", "--out", four.path}) == 0);
  CHECK(slurp(one.path) == slurp(four.path));
}

TEST_CASE("cli: accept control run exits cleanly and reports control") {
  TempFile cfg("cli_accept.conf");
  TempFile out("cli_accept.json");
  spill(cfg.path,
        "synth_length = 420\n"
        "synth_gamma = 0\n"
        "synth_phi = 0.5\n"
        "budget = 60\n"
        "hidden = 3\n");
  REQUIRE(run_cli({"accept", "--config", cfg.path, "--seed", "5", "--out", out.path}) == 0);
  const std::string text = slurp(out.path);
  CHECK(text.find("\"control\": true") != std::string::npos);
  CHECK(text.find("\"pass\": false") != std::string::npos);

  TempFile seeded("cli_accept_seed.conf");
  spill(seeded.path, "synth_seed = 4\n");
  CHECK(run_cli({"accept", "--config", seeded.path}) == 2);

  TempFile shortlag("cli_accept_lag.conf");
  spill(shortlag.path, "lag = 10\n");
  CHECK(run_cli({"accept", "--config", shortlag.path}) == 2);
}
