#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rpchol/experiment.hpp"
#include "rpchol/generators.hpp"
#include "rpchol/linalg.hpp"

#include "helpers.hpp"

using namespace rpchol;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig config;
  config.experiment = "unit";
  config.matrix.kind = "powerlaw";
  config.matrix.n = 60;
  config.matrix.exponent = 2.0;
  config.strategies = {"rpcholesky", "uniform"};
  config.ranks = {2, 4, 8, 12};
  config.trials = 3;
  config.seed = 5;
  config.timing = false;
  return config;
}

}  // namespace

TEST_CASE("comparison emits one row per cell in canonical order") {
  const ExperimentConfig config = small_config();
  const std::vector<ResultRow> rows = run_comparison(config);
  CHECK(rows.size() == 2 * 4 * 3);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto key = [](const ResultRow& r) { return std::make_tuple(r.strategy, r.k, r.trial); };
    CHECK(key(rows[i - 1]) < key(rows[i]));
  }
  for (const ResultRow& row : rows) {
    CHECK(row.rel_trace_error >= 0.0);
    CHECK(row.rel_trace_error <= 1.0 + 1e-12);
  }
}

TEST_CASE("entry accounting in comparison rows") {
  ExperimentConfig config = small_config();
  config.strategies = {"rpcholesky", "greedy", "uniform"};
  const std::vector<ResultRow> rows = run_comparison(config);
  for (const ResultRow& row : rows) {
    const std::uint64_t budget = static_cast<std::uint64_t>(row.k + 1) * 60;
    if (row.strategy == "rpcholesky" || row.strategy == "greedy")
      CHECK(row.entry_evals == budget);
    else
      CHECK(row.entry_evals <= budget);
  }
  // Greedy and the randomized diagonal walk bill identically at equal rank.
  for (const ResultRow& row : rows)
    if (row.strategy == "greedy")
      for (const ResultRow& other : rows)
        if (other.strategy == "rpcholesky" && other.k == row.k)
          CHECK(other.entry_evals == row.entry_evals);
}

TEST_CASE("csv round-trips") {
  const std::vector<ResultRow> rows = run_comparison(small_config());
  std::stringstream stream;
  write_result_csv(rows, stream);
  const std::vector<ResultRow> parsed = read_result_csv(stream);
  REQUIRE(parsed.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(parsed[i].experiment == rows[i].experiment);
    CHECK(parsed[i].strategy == rows[i].strategy);
    CHECK(parsed[i].k == rows[i].k);
    CHECK(parsed[i].trial == rows[i].trial);
    CHECK(parsed[i].rel_trace_error == rows[i].rel_trace_error);
    CHECK(parsed[i].entry_evals == rows[i].entry_evals);
    CHECK(parsed[i].wall_ms == rows[i].wall_ms);
    CHECK(std::isnan(parsed[i].extra) == std::isnan(rows[i].extra));
  }
}

TEST_CASE("csv has exactly header plus cells lines") {
  const std::vector<ResultRow> rows = run_comparison(small_config());
  std::stringstream stream;
  write_result_csv(rows, stream);
  std::size_t lines = 0;
  std::string line;
  while (std::getline(stream, line)) ++lines;
  CHECK(lines == 1 + 2 * 4 * 3);
}

TEST_CASE("repeat runs are byte identical without timing") {
  const ExperimentConfig config = small_config();
  std::stringstream first, second;
  write_result_csv(run_comparison(config), first);
  write_result_csv(run_comparison(config), second);
  CHECK(first.str() == second.str());
}

TEST_CASE("parallel and serial execution agree") {
  ExperimentConfig config = small_config();
  config.trials = 6;
  std::stringstream serial, parallel;
  write_result_csv(run_comparison(config), serial);
  config.parallel = true;
  write_result_csv(run_comparison(config), parallel);
  CHECK(serial.str() == parallel.str());
}

TEST_CASE("kernel-backed comparison uses the residual trace for the error") {
  ExperimentConfig config;
  config.experiment = "kernel";
  config.matrix.kind = "blobs";
  config.matrix.n = 120;
  config.matrix.dim = 2;
  config.matrix.clusters = 3;
  config.matrix.bandwidth = 1.0;
  config.strategies = {"rpcholesky"};
  config.ranks = {6};
  config.trials = 2;
  config.seed = 8;
  config.timing = false;
  const std::vector<ResultRow> rows = run_comparison(config);
  for (const ResultRow& row : rows) {
    CHECK(row.rel_trace_error > 0.0);
    CHECK(row.rel_trace_error < 1.0);
  }
}

TEST_CASE("config parsing, overrides, and rejection of unknown keys") {
  const std::string text =
      "# comparison preset\n"
      "experiment = demo\n"
      "trials = 4\n"
      "seed = 9\n"
      "strategies = rpcholesky greedy\n"
      "ranks = 3 6\n"
      "timing = false\n"
      "\n"
      "[matrix]\n"
      "kind = powerlaw\n"
      "n = 40\n"
      "exponent = 1.5\n";
  std::istringstream stream(text);
  const ExperimentConfig config = parse_config(stream, "inline");
  CHECK(config.experiment == "demo");
  CHECK(config.trials == 4);
  CHECK(config.seed == 9);
  CHECK(config.strategies == std::vector<std::string>{"rpcholesky", "greedy"});
  CHECK(config.ranks == std::vector<Eigen::Index>{3, 6});
  CHECK(config.matrix.kind == "powerlaw");
  CHECK(config.matrix.n == 40);
  CHECK(config.matrix.exponent == 1.5);
  CHECK_FALSE(config.timing);

  std::istringstream bad("unknown_key = 1\n");
  CHECK_THROWS(parse_config(bad, "inline"));
  std::istringstream malformed("experiment demo\n");
  CHECK_THROWS(parse_config(malformed, "inline"));
  std::istringstream dup("trials = 1\ntrials = 2\n");
  CHECK_THROWS(parse_config(dup, "inline"));
}

TEST_CASE("leverage sampling is rejected on kernel-only inputs") {
  ExperimentConfig config;
  config.matrix.kind = "blobs";
  config.matrix.n = 40;
  config.matrix.dim = 2;
  config.strategies = {"rls"};
  config.ranks = {5};
  config.rls_lambda = 0.1;
  config.seed = 1;
  CHECK_THROWS(run_comparison(config));
}

TEST_CASE("comparison validates its configuration") {
  ExperimentConfig config = small_config();
  config.trials = 0;
  CHECK_THROWS(run_comparison(config));
  config = small_config();
  config.ranks = {4, 4};
  CHECK_THROWS(run_comparison(config));
  config = small_config();
  config.ranks = {8, 2};
  CHECK_THROWS(run_comparison(config));
  config = small_config();
  config.strategies.clear();
  CHECK_THROWS(run_comparison(config));
}

TEST_CASE("oracle construction from matrix specs") {
  MatrixSpec spec;
  spec.kind = "greedy_worstcase";
  spec.n = 50;
  spec.eta = 0.2;
  spec.eps = 1.0;
  const EntryOracle greedy_oracle = build_oracle(spec, 1);
  CHECK(greedy_oracle.is_explicit());
  CHECK(greedy_oracle.dim() == 50);

  // For the uniform worst case, matrix.n is the per-block size m and
  // matrix.blocks is the block count r, so the dimension is n * blocks.
  MatrixSpec uniform_spec;
  uniform_spec.kind = "uniform_worstcase";
  uniform_spec.n = 8;
  uniform_spec.blocks = 3;
  uniform_spec.delta = 0.4;
  const EntryOracle uniform_oracle = build_oracle(uniform_spec, 1);
  CHECK(uniform_oracle.dim() == 24);

  spec.kind = "nonsense";
  CHECK_THROWS(build_oracle(spec, 1));
}

TEST_CASE("rank-eps verification on the benchmark fixture") {
  const Eigen::MatrixXd a = gen_powerlaw_psd(200, 2.0, 13);
  const RankEpsReport report = verify_rank_eps_bound(a, 4, 0.5, 40, 7);
  CHECK_FALSE(report.exactness_mode);
  CHECK(report.k_used == static_cast<Eigen::Index>(std::ceil(std::min(report.k_branch_log, report.k_branch_flat))));
  CHECK(report.k_branch_log > 0.0);
  CHECK(report.k_branch_flat > 0.0);
  CHECK(report.bound == doctest::Approx(1.5 * report.tail));
  CHECK(report.satisfied);
}

TEST_CASE("rank-eps verification switches to exact recovery on low rank") {
  const Eigen::MatrixXd a = test_helpers::random_psd(60, 3, 3);
  const RankEpsReport report = verify_rank_eps_bound(a, 3, 0.5, 10, 2);
  CHECK(report.exactness_mode);
  CHECK(report.satisfied);
}
