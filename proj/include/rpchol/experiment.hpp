#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "rpchol/baselines.hpp"
#include "rpchol/oracle.hpp"

namespace rpchol {

/// Description of the experiment input, either a synthetic generator or a CSV
/// file. `bandwidth` == 0 picks the fixture default for the chosen kind.
struct MatrixSpec {
  std::string kind = "powerlaw";  // smile|outliers|blobs|powerlaw|greedy_worstcase|uniform_worstcase|points_csv|dense_csv
  std::string kernel = "gaussian";
  double bandwidth = 0.0;
  Eigen::Index n = 500;
  Eigen::Index dim = 2;
  Eigen::Index n_out = 50;
  double scale = 100.0;
  double eta = 0.1;
  double eps = 1.0;
  double exponent = 2.0;
  double delta = 0.5;
  Eigen::Index blocks = 2;       // r of the uniform worst case
  int clusters = 4;              // blobs
  double separation = 10.0;      // blobs
  double spread = 0.25;          // blobs
  std::string path;              // csv kinds
};

/// Builds the oracle; generator kinds derive the data stream from the seed so
/// the same configuration always reproduces the same input.
EntryOracle build_oracle(const MatrixSpec& spec, std::uint64_t seed);

struct ExperimentConfig {
  std::string experiment = "compare";
  MatrixSpec matrix;
  std::vector<std::string> strategies = {"rpcholesky"};
  std::vector<Eigen::Index> ranks = {10};
  int trials = 1;
  std::uint64_t seed = 0;
  Eigen::Index block = 16;      // blocked strategy
  bool uniform_replace = false;
  double rls_lambda = 0.0;
  double rls_delta = 0.05;
  std::string output;           // CSV path; empty = stdout only
  bool timing = true;           // false writes wall_ms as 0 for reproducible bytes
  bool parallel = false;
};

/// One CSV record. `extra` is NaN when the experiment has no auxiliary
/// metric; it serializes as an empty field.
struct ResultRow {
  std::string experiment;
  std::string strategy;
  Eigen::Index k = 0;
  int trial = 0;
  double rel_trace_error = 0.0;
  std::uint64_t entry_evals = 0;
  double wall_ms = 0.0;
  double extra = std::numeric_limits<double>::quiet_NaN();
};

/// Runs every strategy x rank x trial cell and returns the rows in canonical
/// order (strategy, k, trial). Trial t always uses the stream derived from
/// (seed, t), so parallel and serial execution produce identical rows.
std::vector<ResultRow> run_comparison(const ExperimentConfig& config);

/// CSV schema: experiment,strategy,k,trial,rel_trace_error,entry_evals,wall_ms,extra
void write_result_csv(const std::vector<ResultRow>& rows, std::ostream& out);
std::vector<ResultRow> read_result_csv(std::istream& in);
void write_result_csv_file(const std::vector<ResultRow>& rows, const std::string& path);
std::vector<ResultRow> read_result_csv_file(const std::string& path);

/// Key-value configuration file with [matrix] section; unknown keys are
/// rejected. See README for the schema.
ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config(std::istream& in, const std::string& origin);

/// Monte Carlo check of the (r, eps) guarantee on an explicit matrix.
struct RankEpsReport {
  Eigen::Index r = 0;
  double eps = 0.0;
  double trace = 0.0;
  double tail = 0.0;       // best rank-r trace error
  double eta = 0.0;        // tail / trace
  double k_branch_log = 0.0;  // r/eps + r log_+(1/(eps eta))
  double k_branch_flat = 0.0; // r/eps + r + r log_+(2^r/eps)
  Eigen::Index k_used = 0;    // ceil of the smaller branch
  int trials = 0;
  double mc_mean = 0.0;    // Monte Carlo mean of the residual trace at k_used
  double mc_stderr = 0.0;
  double bound = 0.0;      // (1 + eps) * tail
  bool exactness_mode = false;  // input had rank <= r; tested exact recovery instead
  bool satisfied = false;
};

RankEpsReport verify_rank_eps_bound(const Eigen::MatrixXd& matrix, Eigen::Index r, double eps,
                                    int trials, std::uint64_t seed);

void print_report(const RankEpsReport& report, std::ostream& out);

}  // namespace rpchol
