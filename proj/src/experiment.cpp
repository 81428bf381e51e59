#include "rpchol/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "rpchol/generators.hpp"
#include "rpchol/linalg.hpp"
#include "rpchol/rng.hpp"
#include "rpchol/rpcholesky.hpp"

namespace rpchol {

namespace {

constexpr std::uint64_t kMatrixStream = 0x6d617472ULL;
constexpr std::uint64_t kTrialStream = 0x747269616cULL;

double default_bandwidth(const MatrixSpec& spec) {
  if (spec.bandwidth > 0.0) return spec.bandwidth;
  if (spec.kind == "smile") return kSmileBandwidth;
  if (spec.kind == "outliers") return kOutliersBandwidth;
  return 1.0;
}

Eigen::MatrixXd read_dense_csv(const std::string& path) {
  const Dataset rows = read_points_csv_file(path);
  Eigen::MatrixXd matrix = rows.points().transpose();  // rows of the file become matrix rows
  if (matrix.rows() != matrix.cols()) throw std::runtime_error("dense_csv: matrix must be square");
  return matrix;
}

}  // namespace

EntryOracle build_oracle(const MatrixSpec& spec, std::uint64_t seed) {
  const std::uint64_t data_seed = derive_stream(seed, {kMatrixStream});
  const KernelSpec kernel(kernel_family_from_string(spec.kernel), default_bandwidth(spec));
  if (spec.kind == "smile")
    return EntryOracle::from_kernel(kernel, gen_smile(spec.n, data_seed));
  if (spec.kind == "outliers")
    return EntryOracle::from_kernel(kernel, gen_outliers(spec.n, spec.dim, spec.n_out, spec.scale, data_seed));
  if (spec.kind == "blobs")
    return EntryOracle::from_kernel(
        kernel, gen_blobs(spec.n, spec.dim, spec.clusters, spec.separation, spec.spread, data_seed).points);
  if (spec.kind == "powerlaw")
    return EntryOracle::from_dense(gen_powerlaw_psd(spec.n, spec.exponent, data_seed));
  if (spec.kind == "greedy_worstcase")
    return EntryOracle::from_dense(gen_greedy_worstcase(spec.n, spec.eta, spec.eps));
  if (spec.kind == "uniform_worstcase")
    return EntryOracle::from_dense(gen_uniform_worstcase(spec.n, spec.blocks, spec.delta));
  if (spec.kind == "points_csv")
    return EntryOracle::from_kernel(kernel, read_points_csv_file(spec.path));
  if (spec.kind == "dense_csv")
    return EntryOracle::from_dense(read_dense_csv(spec.path));
  throw std::invalid_argument("unknown matrix kind: " + spec.kind);
}

namespace {

ResultRow run_cell(const ExperimentConfig& config, const EntryOracle& base, const std::string& strategy_name,
                   Eigen::Index k, int trial) {
  EntryOracle oracle = base;  // shares the data, owns a fresh tally
  oracle.reset_entry_evals();
  const PivotStrategy strategy = strategy_from_string(strategy_name);
  StrategyOptions options;
  options.block = config.block;
  options.uniform_with_replacement = config.uniform_replace;
  options.rls_lambda = config.rls_lambda;
  options.rls_delta = config.rls_delta;
  const std::uint64_t stream =
      derive_stream(config.seed, {kTrialStream, static_cast<std::uint64_t>(trial)});

  const auto start = std::chrono::steady_clock::now();
  const auto [factor, trace] = select_factor(oracle, strategy, k, stream, options);
  const auto stop = std::chrono::steady_clock::now();

  ResultRow row;
  row.experiment = config.experiment;
  row.strategy = strategy_name;
  row.k = k;
  row.trial = trial;
  if (oracle.is_explicit()) {
    row.rel_trace_error = relative_trace_error(oracle.dense(), factor);
  } else {
    // Kernel matrices here have unit diagonal, so the initial trace is N.
    const double initial = static_cast<double>(oracle.dim());
    const double residual =
        trace.residual_trace_history.empty() ? initial : trace.residual_trace_history.back();
    row.rel_trace_error = std::max(0.0, residual / initial);
  }
  row.entry_evals = trace.entry_evals;
  row.wall_ms =
      config.timing ? std::chrono::duration<double, std::milli>(stop - start).count() : 0.0;
  return row;
}

}  // namespace

std::vector<ResultRow> run_comparison(const ExperimentConfig& config) {
  if (config.trials < 1) throw std::invalid_argument("run_comparison: trials must be >= 1");
  if (config.strategies.empty() || config.ranks.empty())
    throw std::invalid_argument("run_comparison: need at least one strategy and one rank");
  for (std::size_t i = 1; i < config.ranks.size(); ++i)
    if (config.ranks[i] <= config.ranks[i - 1])
      throw std::invalid_argument("run_comparison: ranks must be positive ascending");
  if (config.ranks.front() < 1) throw std::invalid_argument("run_comparison: ranks must be positive");

  const EntryOracle base = build_oracle(config.matrix, config.seed);

  struct Cell {
    std::string strategy;
    Eigen::Index k;
    int trial;
  };
  std::vector<Cell> cells;
  for (const std::string& s : config.strategies)
    for (Eigen::Index k : config.ranks)
      for (int t = 0; t < config.trials; ++t) cells.push_back({s, k, t});

  std::vector<ResultRow> rows(cells.size());
  if (config.parallel) {
    const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1))
          rows[i] = run_cell(config, base, cells[i].strategy, cells[i].k, cells[i].trial);
      });
    }
    for (auto& t : pool) t.join();
  } else {
    for (std::size_t i = 0; i < cells.size(); ++i)
      rows[i] = run_cell(config, base, cells[i].strategy, cells[i].k, cells[i].trial);
  }

  std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    if (a.strategy != b.strategy) return a.strategy < b.strategy;
    if (a.k != b.k) return a.k < b.k;
    return a.trial < b.trial;
  });
  if (!config.output.empty()) write_result_csv_file(rows, config.output);
  return rows;
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_result_csv(const std::vector<ResultRow>& rows, std::ostream& out) {
  out << "experiment,strategy,k,trial,rel_trace_error,entry_evals,wall_ms,extra\n";
  for (const ResultRow& row : rows) {
    out << row.experiment << ',' << row.strategy << ',' << row.k << ',' << row.trial << ','
        << fmt_double(row.rel_trace_error) << ',' << row.entry_evals << ','
        << fmt_double(row.wall_ms) << ',';
    if (!std::isnan(row.extra)) out << fmt_double(row.extra);
    out << '\n';
  }
}

std::vector<ResultRow> read_result_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("result csv: empty input");
  if (line != "experiment,strategy,k,trial,rel_trace_error,entry_evals,wall_ms,extra")
    throw std::runtime_error("result csv: unexpected header");
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      fields.push_back(line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (fields.size() != 8) throw std::runtime_error("result csv: bad row: " + line);
    ResultRow row;
    row.experiment = fields[0];
    row.strategy = fields[1];
    row.k = std::stoll(fields[2]);
    row.trial = std::stoi(fields[3]);
    row.rel_trace_error = std::stod(fields[4]);
    row.entry_evals = std::stoull(fields[5]);
    row.wall_ms = std::stod(fields[6]);
    row.extra = fields[7].empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(fields[7]);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_result_csv_file(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  write_result_csv(rows, out);
}

std::vector<ResultRow> read_result_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_result_csv(in);
}

namespace {

struct ConfigMap {
  std::map<std::string, std::string> values;
  std::string origin;

  bool has(const std::string& key) const { return values.count(key) > 0; }
  std::string take(const std::string& key, std::string fallback) {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    std::string out = it->second;
    values.erase(it);
    return out;
  }
};

ConfigMap read_config_map(std::istream& in, const std::string& origin) {
  ConfigMap map;
  map.origin = origin;
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const std::size_t e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    if (line.front() == '[') {
      if (line.back() != ']') throw std::runtime_error(origin + ": bad section at line " + std::to_string(lineno));
      section = line.substr(1, line.size() - 2) + ".";
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error(origin + ": expected key = value at line " + std::to_string(lineno));
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    key.erase(key.find_last_not_of(" \t") + 1);
    value.erase(0, value.find_first_not_of(" \t"));
    if (key.empty()) throw std::runtime_error(origin + ": empty key at line " + std::to_string(lineno));
    if (!map.values.emplace(section + key, value).second)
      throw std::runtime_error(origin + ": duplicate key " + section + key);
  }
  return map;
}

double to_double(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw std::runtime_error("config: bad number for " + key + ": '" + v + "'");
  }
}

long long to_int(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const long long out = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw std::runtime_error("config: bad integer for " + key + ": '" + v + "'");
  }
}

bool to_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::runtime_error("config: bad boolean for " + key + ": '" + v + "'");
}

std::vector<std::string> split_words(const std::string& v) {
  std::vector<std::string> out;
  std::istringstream stream(v);
  std::string word;
  while (stream >> word) out.push_back(word);
  return out;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::string& origin) {
  ConfigMap map = read_config_map(in, origin);
  ExperimentConfig config;
  config.experiment = map.take("experiment", config.experiment);
  if (map.has("trials")) config.trials = static_cast<int>(to_int(map.take("trials", ""), "trials"));
  if (map.has("seed")) config.seed = static_cast<std::uint64_t>(to_int(map.take("seed", ""), "seed"));
  if (map.has("strategies")) config.strategies = split_words(map.take("strategies", ""));
  if (map.has("ranks")) {
    config.ranks.clear();
    for (const std::string& w : split_words(map.take("ranks", "")))
      config.ranks.push_back(to_int(w, "ranks"));
  }
  if (map.has("block")) config.block = to_int(map.take("block", ""), "block");
  if (map.has("uniform_replace")) config.uniform_replace = to_bool(map.take("uniform_replace", ""), "uniform_replace");
  if (map.has("rls_lambda")) config.rls_lambda = to_double(map.take("rls_lambda", ""), "rls_lambda");
  if (map.has("rls_delta")) config.rls_delta = to_double(map.take("rls_delta", ""), "rls_delta");
  config.output = map.take("output", config.output);
  if (map.has("timing")) config.timing = to_bool(map.take("timing", ""), "timing");
  if (map.has("parallel")) config.parallel = to_bool(map.take("parallel", ""), "parallel");

  MatrixSpec& m = config.matrix;
  m.kind = map.take("matrix.kind", m.kind);
  m.kernel = map.take("matrix.kernel", m.kernel);
  if (map.has("matrix.bandwidth")) m.bandwidth = to_double(map.take("matrix.bandwidth", ""), "matrix.bandwidth");
  if (map.has("matrix.n")) m.n = to_int(map.take("matrix.n", ""), "matrix.n");
  if (map.has("matrix.dim")) m.dim = to_int(map.take("matrix.dim", ""), "matrix.dim");
  if (map.has("matrix.n_out")) m.n_out = to_int(map.take("matrix.n_out", ""), "matrix.n_out");
  if (map.has("matrix.scale")) m.scale = to_double(map.take("matrix.scale", ""), "matrix.scale");
  if (map.has("matrix.eta")) m.eta = to_double(map.take("matrix.eta", ""), "matrix.eta");
  if (map.has("matrix.eps")) m.eps = to_double(map.take("matrix.eps", ""), "matrix.eps");
  if (map.has("matrix.exponent")) m.exponent = to_double(map.take("matrix.exponent", ""), "matrix.exponent");
  if (map.has("matrix.delta")) m.delta = to_double(map.take("matrix.delta", ""), "matrix.delta");
  if (map.has("matrix.blocks")) m.blocks = to_int(map.take("matrix.blocks", ""), "matrix.blocks");
  if (map.has("matrix.clusters")) m.clusters = static_cast<int>(to_int(map.take("matrix.clusters", ""), "matrix.clusters"));
  if (map.has("matrix.separation")) m.separation = to_double(map.take("matrix.separation", ""), "matrix.separation");
  if (map.has("matrix.spread")) m.spread = to_double(map.take("matrix.spread", ""), "matrix.spread");
  m.path = map.take("matrix.path", m.path);

  if (!map.values.empty())
    throw std::runtime_error(origin + ": unknown key '" + map.values.begin()->first + "'");
  return config;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_config(in, path);
}

RankEpsReport verify_rank_eps_bound(const Eigen::MatrixXd& matrix, Eigen::Index r, double eps,
                                    int trials, std::uint64_t seed) {
  if (r < 1 || r > matrix.rows()) throw std::invalid_argument("verify_rank_eps_bound: bad r");
  if (!(eps > 0.0)) throw std::invalid_argument("verify_rank_eps_bound: eps must be positive");
  if (trials < 2) throw std::invalid_argument("verify_rank_eps_bound: need at least two trials");

  RankEpsReport report;
  report.r = r;
  report.eps = eps;
  report.trials = trials;
  report.trace = matrix.trace();
  report.tail = best_rank_r_error(matrix, r);
  report.eta = report.tail / report.trace;
  report.bound = (1.0 + eps) * report.tail;

  const EntryOracle oracle = EntryOracle::from_dense(matrix);
  if (report.eta <= 1e-14) {
    // Input is (numerically) rank <= r; the bound is vacuous and the right
    // check is exact recovery after r pivots.
    report.exactness_mode = true;
    report.k_used = r;
    const auto [factor, trace] = rpcholesky(oracle, StopRule::fixed_rank(r), derive_stream(seed, {0}));
    report.mc_mean = trace.residual_trace_history.empty() ? report.trace
                                                          : trace.residual_trace_history.back();
    report.satisfied = report.mc_mean <= 1e-10 * report.trace;
    return report;
  }

  const double log_plus_inv = std::max(std::log(1.0 / (eps * report.eta)), 0.0);
  const double log_plus_flat =
      std::max(static_cast<double>(r) * std::log(2.0) - std::log(eps), 0.0);
  report.k_branch_log = static_cast<double>(r) / eps + static_cast<double>(r) * log_plus_inv;
  report.k_branch_flat =
      static_cast<double>(r) / eps + static_cast<double>(r) + static_cast<double>(r) * log_plus_flat;
  report.k_used = static_cast<Eigen::Index>(std::ceil(std::min(report.k_branch_log, report.k_branch_flat)));
  report.k_used = std::min<Eigen::Index>(report.k_used, matrix.rows());

  double sum = 0.0, sum_sq = 0.0;
  for (int t = 0; t < trials; ++t) {
    const auto [factor, trace] = rpcholesky(oracle, StopRule::fixed_rank(report.k_used),
                                            derive_stream(seed, {kTrialStream, static_cast<std::uint64_t>(t)}));
    const double residual =
        trace.residual_trace_history.empty() ? report.trace : trace.residual_trace_history.back();
    sum += residual;
    sum_sq += residual * residual;
  }
  report.mc_mean = sum / trials;
  const double variance = std::max(0.0, (sum_sq - sum * sum / trials) / (trials - 1));
  report.mc_stderr = std::sqrt(variance / trials);
  report.satisfied = report.mc_mean <= report.bound + 3.0 * report.mc_stderr;
  return report;
}

void print_report(const RankEpsReport& report, std::ostream& out) {
  out << "r=" << report.r << " eps=" << report.eps << " trace=" << report.trace
      << " tail=" << report.tail << " eta=" << report.eta << '\n';
  if (report.exactness_mode) {
    out << "input has rank <= r; exact recovery residual " << report.mc_mean << " (target "
        << 1e-10 * report.trace << ")\n";
  } else {
    out << "column budgets: log branch " << report.k_branch_log << ", flat branch "
        << report.k_branch_flat << "; using k=" << report.k_used << '\n';
    out << "MC mean over " << report.trials << " trials: " << report.mc_mean << " +- "
        << report.mc_stderr << " vs bound " << report.bound << '\n';
  }
  out << (report.satisfied ? "bound satisfied" : "bound violated") << '\n';
}

}  // namespace rpchol
