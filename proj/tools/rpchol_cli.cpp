#include <CLI11.hpp>

#include <Eigen/Dense>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "rpchol/cluster.hpp"
#include "rpchol/experiment.hpp"
#include "rpchol/generators.hpp"
#include "rpchol/krr.hpp"
#include "rpchol/linalg.hpp"
#include "rpchol/rng.hpp"
#include "rpchol/rpcholesky.hpp"

namespace {

using namespace rpchol;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_dense_csv(const Eigen::MatrixXd& matrix, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) out << (j ? "," : "") << fmt(matrix(i, j));
    out << '\n';
  }
}

void write_factor_file(const NystromFactor& factor, const PivotTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "rpchol-factor 1\n";
  out << "n " << factor.source_dim << " rank " << factor.rank() << " pivots " << factor.pivots.size() << '\n';
  out << "pivot_list\n";
  for (std::size_t i = 0; i < factor.pivots.size(); ++i)
    out << factor.pivots[i] << (i + 1 < factor.pivots.size() ? ' ' : '\n');
  out << "residual_trace_history " << trace.residual_trace_history.size() << '\n';
  for (std::size_t i = 0; i < trace.residual_trace_history.size(); ++i)
    out << fmt(trace.residual_trace_history[i]) << (i + 1 < trace.residual_trace_history.size() ? ' ' : '\n');
  out << "entry_evals " << trace.entry_evals << " rejected " << trace.rejected_pivots << '\n';
  out << "matrix\n";
  for (Eigen::Index i = 0; i < factor.matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < factor.matrix.cols(); ++j) out << (j ? " " : "") << fmt(factor.matrix(i, j));
    out << '\n';
  }
}

struct GenArgs {
  std::string kind = "smile";
  std::string out;
  std::string labels_out;
  std::uint64_t seed = 0;
  MatrixSpec spec;
};

int run_gen(const GenArgs& args) {
  const MatrixSpec& s = args.spec;
  if (args.kind == "smile") {
    write_points_csv_file(gen_smile(s.n, args.seed), args.out);
  } else if (args.kind == "outliers") {
    write_points_csv_file(gen_outliers(s.n, s.dim, s.n_out, s.scale, args.seed), args.out);
  } else if (args.kind == "blobs") {
    const LabeledDataset blobs = gen_blobs(s.n, s.dim, s.clusters, s.separation, s.spread, args.seed);
    write_points_csv_file(blobs.points, args.out);
    if (!args.labels_out.empty()) write_labels_csv_file(blobs.labels, args.labels_out);
  } else if (args.kind == "powerlaw") {
    write_dense_csv(gen_powerlaw_psd(s.n, s.exponent, args.seed), args.out);
  } else if (args.kind == "greedy_worstcase") {
    write_dense_csv(gen_greedy_worstcase(s.n, s.eta, s.eps), args.out);
  } else if (args.kind == "uniform_worstcase") {
    write_dense_csv(gen_uniform_worstcase(s.n, s.blocks, s.delta), args.out);
  } else {
    throw std::runtime_error("unknown generator kind: " + args.kind);
  }
  std::cout << "wrote " << args.out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-rank psd approximation by randomly pivoted partial Cholesky"};
  app.require_subcommand(1);

  GenArgs gen_args;
  CLI::App* gen = app.add_subcommand("gen", "generate synthetic datasets and matrices");
  gen->add_option("--kind", gen_args.kind,
                  "smile|outliers|blobs|powerlaw|greedy_worstcase|uniform_worstcase")->required();
  gen->add_option("--out", gen_args.out, "output CSV path")->required();
  gen->add_option("--labels-out", gen_args.labels_out, "labels CSV (blobs only)");
  gen->add_option("--seed", gen_args.seed, "RNG seed")->required();
  gen->add_option("--n", gen_args.spec.n, "point/matrix count");
  gen->add_option("--dim", gen_args.spec.dim, "point dimension");
  gen->add_option("--n-out", gen_args.spec.n_out, "outlier count");
  gen->add_option("--scale", gen_args.spec.scale, "outlier scale");
  gen->add_option("--eta", gen_args.spec.eta, "relative tail fraction");
  gen->add_option("--eps", gen_args.spec.eps, "accuracy parameter");
  gen->add_option("--exponent", gen_args.spec.exponent, "power-law decay exponent");
  gen->add_option("--delta", gen_args.spec.delta, "off-diagonal constant");
  gen->add_option("--blocks", gen_args.spec.blocks, "number of blocks");
  gen->add_option("--clusters", gen_args.spec.clusters, "blob count");
  gen->add_option("--separation", gen_args.spec.separation, "blob separation");
  gen->add_option("--spread", gen_args.spec.spread, "blob spread");

  struct {
    std::string data, dense, out, kernel = "gaussian", strategy = "rpcholesky";
    double bandwidth = 1.0, tol = 0.0, rls_lambda = 0.0, rls_delta = 0.05;
    Eigen::Index k = 0, block = 16;
    std::uint64_t seed = 0;
  } fac;
  CLI::App* factorize = app.add_subcommand("factorize", "factor a matrix or kernel dataset");
  factorize->add_option("--data", fac.data, "points CSV (kernel matrix)");
  factorize->add_option("--dense", fac.dense, "dense symmetric matrix CSV");
  factorize->add_option("--kernel", fac.kernel, "gaussian|laplace_l1");
  factorize->add_option("--bandwidth", fac.bandwidth, "kernel bandwidth");
  factorize->add_option("--k", fac.k, "approximation rank");
  factorize->add_option("--tol", fac.tol, "relative trace tolerance in (0,1)");
  factorize->add_option("--strategy", fac.strategy, "rpcholesky|blocked|greedy|uniform|diagonal|rls|full");
  factorize->add_option("--block", fac.block, "block size for the blocked strategy");
  factorize->add_option("--rls-lambda", fac.rls_lambda, "ridge parameter for rls");
  factorize->add_option("--rls-delta", fac.rls_delta, "failure parameter for rls");
  factorize->add_option("--seed", fac.seed, "RNG seed")->required();
  factorize->add_option("--out", fac.out, "factor file path")->required();

  struct {
    std::string config, output;
    std::uint64_t seed = 0;
    int trials = -1;
    bool parallel = false, no_timing = false;
  } cmp;
  CLI::App* compare = app.add_subcommand("compare", "run a strategy comparison from a config file");
  compare->add_option("--config", cmp.config, "experiment config file")->required();
  compare->add_option("--seed", cmp.seed, "RNG seed (overrides config)")->required();
  compare->add_option("--output", cmp.output, "CSV output path (overrides config)");
  compare->add_option("--trials", cmp.trials, "trial count (overrides config)");
  compare->add_flag("--parallel", cmp.parallel, "run trials on all cores");
  compare->add_flag("--no-timing", cmp.no_timing, "write wall_ms as 0 for byte-reproducible output");

  struct {
    std::string train, train_targets, test, test_targets, kernel = "gaussian", strategy = "rpcholesky", model_out;
    double bandwidth = 1.0, lambda = 1e-6;
    Eigen::Index k = 0;
    std::uint64_t seed = 0;
  } krr_args;
  CLI::App* krr_cmd = app.add_subcommand("krr", "kernel ridge regression with landmark pivots");
  krr_cmd->add_option("--train", krr_args.train, "training points CSV")->required();
  krr_cmd->add_option("--train-targets", krr_args.train_targets, "training targets CSV")->required();
  krr_cmd->add_option("--test", krr_args.test, "test points CSV");
  krr_cmd->add_option("--test-targets", krr_args.test_targets, "test targets CSV");
  krr_cmd->add_option("--kernel", krr_args.kernel, "gaussian|laplace_l1");
  krr_cmd->add_option("--bandwidth", krr_args.bandwidth, "kernel bandwidth");
  krr_cmd->add_option("--k", krr_args.k, "pivot count")->required();
  krr_cmd->add_option("--lambda", krr_args.lambda, "ridge parameter");
  krr_cmd->add_option("--strategy", krr_args.strategy, "pivot strategy");
  krr_cmd->add_option("--model-out", krr_args.model_out, "save the fitted model here");
  krr_cmd->add_option("--seed", krr_args.seed, "RNG seed")->required();

  struct {
    std::string data, reference, labels_out, model_out, kernel = "gaussian", strategy = "rpcholesky";
    double bandwidth = 1.0;
    Eigen::Index k = 40, m = 3;
    int clusters = 4, restarts = 1;
    std::uint64_t seed = 0;
  } cl;
  CLI::App* cluster_cmd = app.add_subcommand("cluster", "low-rank kernel spectral clustering");
  cluster_cmd->add_option("--data", cl.data, "points CSV")->required();
  cluster_cmd->add_option("--reference", cl.reference, "reference labels CSV for error reporting");
  cluster_cmd->add_option("--labels-out", cl.labels_out, "write labels CSV here")->required();
  cluster_cmd->add_option("--model-out", cl.model_out, "save the cluster model here");
  cluster_cmd->add_option("--kernel", cl.kernel, "gaussian|laplace_l1");
  cluster_cmd->add_option("--bandwidth", cl.bandwidth, "kernel bandwidth");
  cluster_cmd->add_option("--k", cl.k, "approximation rank");
  cluster_cmd->add_option("--m", cl.m, "embedding dimension (m <= k)");
  cluster_cmd->add_option("--clusters", cl.clusters, "cluster count");
  cluster_cmd->add_option("--restarts", cl.restarts, "k-means restarts");
  cluster_cmd->add_option("--strategy", cl.strategy, "pivot strategy");
  cluster_cmd->add_option("--seed", cl.seed, "RNG seed")->required();

  struct {
    std::string suite = "rank-eps", dense;
    Eigen::Index n = 500, r = 5;
    double exponent = 2.0, eps = 0.5;
    int trials = 100;
    std::uint64_t seed = 0;
  } ver;
  CLI::App* verify = app.add_subcommand("verify", "Monte Carlo checks of the error guarantees");
  verify->add_option("--suite", ver.suite, "rank-eps|doubling|residual-map");
  verify->add_option("--dense", ver.dense, "dense matrix CSV (default: power-law fixture)");
  verify->add_option("--n", ver.n, "fixture dimension");
  verify->add_option("--exponent", ver.exponent, "power-law exponent");
  verify->add_option("--r", ver.r, "comparison rank");
  verify->add_option("--eps", ver.eps, "accuracy parameter");
  verify->add_option("--trials", ver.trials, "Monte Carlo trials");
  verify->add_option("--seed", ver.seed, "RNG seed")->required();

  try {
    app.parse(argc, argv);

    if (*gen) return run_gen(gen_args);

    if (*factorize) {
      if (fac.data.empty() == fac.dense.empty())
        throw std::runtime_error("factorize: pass exactly one of --data and --dense");
      MatrixSpec spec;
      if (!fac.data.empty()) {
        spec.kind = "points_csv";
        spec.path = fac.data;
        spec.kernel = fac.kernel;
        spec.bandwidth = fac.bandwidth;
      } else {
        spec.kind = "dense_csv";
        spec.path = fac.dense;
      }
      const EntryOracle oracle = build_oracle(spec, fac.seed);
      StrategyOptions options;
      options.block = fac.block;
      options.rls_lambda = fac.rls_lambda;
      options.rls_delta = fac.rls_delta;
      NystromFactor factor;
      PivotTrace trace;
      if (fac.tol > 0.0) {
        if (fac.strategy == "rpcholesky")
          std::tie(factor, trace) = rpcholesky(oracle, StopRule::tolerance(fac.tol), fac.seed);
        else if (fac.strategy == "greedy")
          std::tie(factor, trace) = greedy_pivots(oracle, StopRule::tolerance(fac.tol));
        else
          throw std::runtime_error("factorize: --tol supports rpcholesky and greedy only");
      } else {
        if (fac.k < 1) throw std::runtime_error("factorize: pass --k or --tol");
        std::tie(factor, trace) = select_factor(oracle, strategy_from_string(fac.strategy), fac.k,
                                                fac.seed, options);
      }
      write_factor_file(factor, trace, fac.out);
      const double initial = oracle.is_explicit() ? oracle.dense().trace()
                                                  : static_cast<double>(oracle.dim());
      const double residual = trace.residual_trace_history.empty()
                                  ? initial
                                  : trace.residual_trace_history.back();
      std::cout << "accepted " << trace.accepted << " pivots, rejected " << trace.rejected_pivots
                << ", entry evals " << trace.entry_evals << ", relative trace error "
                << fmt(residual / initial) << '\n';
      return 0;
    }

    if (*compare) {
      ExperimentConfig config = parse_config_file(cmp.config);
      config.seed = cmp.seed;
      if (!cmp.output.empty()) config.output = cmp.output;
      if (cmp.trials > 0) config.trials = cmp.trials;
      if (cmp.parallel) config.parallel = true;
      if (cmp.no_timing) config.timing = false;
      const std::vector<ResultRow> rows = run_comparison(config);
      if (config.output.empty())
        write_result_csv(rows, std::cout);
      else
        std::cout << "wrote " << rows.size() << " rows to " << config.output << '\n';
      return 0;
    }

    if (*krr_cmd) {
      const Dataset train = read_points_csv_file(krr_args.train);
      const Dataset train_y_data = read_points_csv_file(krr_args.train_targets);
      if (train_y_data.dim() != 1 || train_y_data.size() != train.size())
        throw std::runtime_error("krr: targets must be one column matching the training rows");
      const Eigen::VectorXd train_y = train_y_data.points().row(0);
      const KernelSpec kernel(kernel_family_from_string(krr_args.kernel), krr_args.bandwidth);
      const KrrModel model = krr_fit(train, train_y, kernel, krr_args.k, krr_args.lambda,
                                     strategy_from_string(krr_args.strategy), krr_args.seed);
      std::cout << "train smape " << fmt(smape(train_y, krr_predict(model, train))) << '\n';
      if (!krr_args.test.empty()) {
        if (krr_args.test_targets.empty()) throw std::runtime_error("krr: --test needs --test-targets");
        const Dataset test = read_points_csv_file(krr_args.test);
        const Dataset test_y_data = read_points_csv_file(krr_args.test_targets);
        if (test_y_data.dim() != 1 || test_y_data.size() != test.size())
          throw std::runtime_error("krr: test targets must be one column matching the test rows");
        const Eigen::VectorXd test_y = test_y_data.points().row(0);
        std::cout << "test smape " << fmt(smape(test_y, krr_predict(model, test))) << '\n';
      }
      if (!krr_args.model_out.empty()) save_krr_model(model, krr_args.model_out);
      return 0;
    }

    if (*cluster_cmd) {
      const Dataset data = read_points_csv_file(cl.data);
      const KernelSpec kernel(kernel_family_from_string(cl.kernel), cl.bandwidth);
      const ClusterModel model =
          spectral_cluster(data, kernel, cl.k, cl.m, cl.clusters,
                           strategy_from_string(cl.strategy), cl.seed, {}, cl.restarts);
      write_labels_csv_file(model.labels, cl.labels_out);
      if (!cl.model_out.empty()) save_cluster_model(model, cl.model_out);
      std::cout << "wrote labels to " << cl.labels_out << '\n';
      if (!cl.reference.empty()) {
        const std::vector<int> reference = read_labels_csv_file(cl.reference);
        std::cout << "clustering error "
                  << fmt(clustering_error(model.labels, reference, cl.clusters)) << '\n';
      }
      return 0;
    }

    if (*verify) {
      Eigen::MatrixXd matrix;
      if (!ver.dense.empty()) {
        MatrixSpec spec;
        spec.kind = "dense_csv";
        spec.path = ver.dense;
        matrix = build_oracle(spec, ver.seed).dense();
      } else {
        matrix = gen_powerlaw_psd(ver.n, ver.exponent, derive_stream(ver.seed, {0x706f77ULL}));
      }
      if (ver.suite == "rank-eps") {
        const RankEpsReport report = verify_rank_eps_bound(matrix, ver.r, ver.eps, ver.trials, ver.seed);
        print_report(report, std::cout);
        return report.satisfied ? 0 : 1;
      }
      if (ver.suite == "doubling") {
        // MC mean of the residual trace after k steps against 2^k times the
        // best rank-k error, for k = 1, 2, 3.
        const EntryOracle oracle = EntryOracle::from_dense(matrix);
        bool ok = true;
        for (Eigen::Index k : {1, 2, 3}) {
          double sum = 0.0, sum_sq = 0.0;
          for (int t = 0; t < ver.trials; ++t) {
            const auto [factor, trace] = rpcholesky(
                oracle, StopRule::fixed_rank(k),
                derive_stream(ver.seed, {static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(t)}));
            const double residual = trace.residual_trace_history.back();
            sum += residual;
            sum_sq += residual * residual;
          }
          const double mean = sum / ver.trials;
          const double se = std::sqrt(
              std::max(0.0, (sum_sq - sum * sum / ver.trials) / (ver.trials - 1)) / ver.trials);
          const double bound = std::ldexp(best_rank_r_error(matrix, k), static_cast<int>(k));
          const bool pass = mean <= bound + 3.0 * se;
          ok = ok && pass;
          std::cout << "k=" << k << " MC mean " << fmt(mean) << " +- " << fmt(se) << " vs bound "
                    << fmt(bound) << (pass ? " ok" : " VIOLATED") << '\n';
        }
        return ok ? 0 : 1;
      }
      if (ver.suite == "residual-map") {
        // Entrywise MC mean of the one-step residual against A - A^2/trA.
        const Eigen::MatrixXd expected = expected_residual_map(matrix);
        Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(matrix.rows(), matrix.cols());
        Eigen::MatrixXd sum_sq = sum;
        for (int t = 0; t < ver.trials; ++t) {
          const DenseFactorizationResult step = rpcholesky_naive(
              matrix, StopRule::fixed_rank(1),
              derive_stream(ver.seed, {0x726573ULL, static_cast<std::uint64_t>(t)}));
          sum += step.residual;
          sum_sq += step.residual.cwiseAbs2();
        }
        const Eigen::MatrixXd mean = sum / ver.trials;
        const Eigen::MatrixXd se =
            ((sum_sq - sum.cwiseAbs2() / ver.trials) / (ver.trials - 1.0) / ver.trials)
                .cwiseMax(0.0)
                .cwiseSqrt();
        const double worst = ((mean - expected).cwiseAbs() - 3.0 * se).maxCoeff();
        std::cout << "max entrywise |MC mean - map| minus 3 se: " << fmt(worst)
                  << (worst <= 0.0 ? " ok" : " VIOLATED") << '\n';
        return worst <= 0.0 ? 0 : 1;
      }
      throw std::runtime_error("unknown verify suite: " + ver.suite);
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
