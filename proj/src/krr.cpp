#include "rpchol/krr.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "rpchol/linalg.hpp"
#include "rpchol/oracle.hpp"
#include "rpchol/rpcholesky.hpp"

namespace rpchol {

KrrModel krr_fit(const Dataset& train, const Eigen::VectorXd& targets, const KernelSpec& kernel,
                 Eigen::Index k, double lambda, PivotStrategy strategy, std::uint64_t seed,
                 const StrategyOptions& options) {
  const Eigen::Index n = train.size();
  if (targets.size() != n) throw std::invalid_argument("krr_fit: target length mismatch");
  if (!(lambda > 0.0)) throw std::invalid_argument("krr_fit: lambda must be positive");
  if (k < 1 || k > n) throw std::invalid_argument("krr_fit: rank must lie in [1, N]");

  const EntryOracle oracle = EntryOracle::from_kernel(kernel, train);
  std::vector<Eigen::Index> pivots;
  if (strategy == PivotStrategy::kFull) {
    pivots.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) pivots[static_cast<std::size_t>(i)] = i;
  } else {
    pivots = select_factor(oracle, strategy, k, seed, options).first.pivots;
  }
  if (pivots.empty()) throw std::runtime_error("krr_fit: strategy selected no pivots");
  const Eigen::Index m = static_cast<Eigen::Index>(pivots.size());

  // rows(i, :) = A(s_i, :); k columns of the kernel matrix, transposed.
  Eigen::MatrixXd rows(m, n);
  for (Eigen::Index i = 0; i < m; ++i) rows.row(i) = oracle.column(pivots[static_cast<std::size_t>(i)]).transpose();
  Eigen::MatrixXd core(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) core(i, j) = rows(i, pivots[static_cast<std::size_t>(j)]);
  core = 0.5 * (core + core.transpose().eval());

  Eigen::MatrixXd system = rows * rows.transpose() + (lambda * static_cast<double>(n)) * core;
  system = 0.5 * (system + system.transpose().eval());
  const Eigen::VectorXd rhs = rows * targets;

  KrrModel model;
  model.kernel = kernel;
  model.lambda = lambda;
  model.pivots = pivots;
  model.pivot_points.resize(train.dim(), m);
  for (Eigen::Index i = 0; i < m; ++i)
    model.pivot_points.col(i) = train.point(pivots[static_cast<std::size_t>(i)]);
  try {
    model.beta = solve_spd(system, rhs);
  } catch (const std::runtime_error&) {
    // Clustered pivots can leave the system numerically semidefinite.
    system.diagonal().array() += 10.0 * std::numeric_limits<double>::epsilon() * core.trace();
    model.beta = solve_spd(system, rhs);
  }
  return model;
}

Eigen::VectorXd krr_predict(const KrrModel& model, const Dataset& queries) {
  if (queries.dim() != model.pivot_points.rows())
    throw std::invalid_argument("krr_predict: dimension mismatch");
  const Dataset pivot_data{Eigen::MatrixXd(model.pivot_points)};
  Eigen::VectorXd out(queries.size());
  for (Eigen::Index q = 0; q < queries.size(); ++q)
    out[q] = model.kernel.against_all(pivot_data, queries.point(q)).dot(model.beta);
  return out;
}

double smape(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
  if (y_true.size() != y_pred.size()) throw std::invalid_argument("smape: length mismatch");
  if (y_true.size() == 0) throw std::invalid_argument("smape: empty input");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < y_true.size(); ++i) {
    const double a = std::abs(y_true[i]);
    const double b = std::abs(y_pred[i]);
    if (a < 1e-300 && b < 1e-300) continue;  // 0/0 term counts as 0
    sum += std::abs(y_true[i] - y_pred[i]) / (0.5 * (a + b));
  }
  return sum / static_cast<double>(y_true.size());
}

void save_krr_model(const KrrModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "rpchol-model krr 1\n";
  out << "kernel " << to_string(model.kernel.family) << ' ' << num(model.kernel.bandwidth) << '\n';
  out << "lambda " << num(model.lambda) << '\n';
  out << "pivots " << model.pivots.size() << '\n';
  for (std::size_t i = 0; i < model.pivots.size(); ++i)
    out << model.pivots[i] << (i + 1 < model.pivots.size() ? ' ' : '\n');
  out << "beta " << model.beta.size() << '\n';
  for (Eigen::Index i = 0; i < model.beta.size(); ++i)
    out << num(model.beta[i]) << (i + 1 < model.beta.size() ? ' ' : '\n');
  out << "points " << model.pivot_points.rows() << ' ' << model.pivot_points.cols() << '\n';
  for (Eigen::Index c = 0; c < model.pivot_points.cols(); ++c)
    for (Eigen::Index r = 0; r < model.pivot_points.rows(); ++r)
      out << num(model.pivot_points(r, c)) << (r + 1 < model.pivot_points.rows() ? ' ' : '\n');
}

KrrModel load_krr_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string tag, kind;
  int version = 0;
  in >> tag >> kind >> version;
  if (tag != "rpchol-model" || kind != "krr" || version != 1)
    throw std::runtime_error("load_krr_model: unrecognized header in " + path);
  KrrModel model;
  std::string key;
  std::string family;
  double bandwidth = 0.0;
  in >> key >> family >> bandwidth;
  if (key != "kernel") throw std::runtime_error("load_krr_model: bad file");
  model.kernel = KernelSpec(kernel_family_from_string(family), bandwidth);
  in >> key >> model.lambda;
  if (key != "lambda") throw std::runtime_error("load_krr_model: bad file");
  std::size_t npivots = 0;
  in >> key >> npivots;
  if (key != "pivots") throw std::runtime_error("load_krr_model: bad file");
  model.pivots.resize(npivots);
  for (auto& p : model.pivots) in >> p;
  Eigen::Index nbeta = 0;
  in >> key >> nbeta;
  if (key != "beta") throw std::runtime_error("load_krr_model: bad file");
  model.beta.resize(nbeta);
  for (Eigen::Index i = 0; i < nbeta; ++i) in >> model.beta[i];
  Eigen::Index rows = 0, cols = 0;
  in >> key >> rows >> cols;
  if (key != "points") throw std::runtime_error("load_krr_model: bad file");
  model.pivot_points.resize(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) in >> model.pivot_points(r, c);
  if (!in) throw std::runtime_error("load_krr_model: truncated file " + path);
  return model;
}

}  // namespace rpchol
