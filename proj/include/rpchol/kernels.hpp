#pragma once

#include <Eigen/Dense>

#include <string>

#include "rpchol/dataset.hpp"

namespace rpchol {

enum class KernelFamily { kGaussian, kLaplaceL1 };

/// Positive-definite kernel with unit diagonal:
///   gaussian:   K(x, y) = exp(-||x - y||^2 / (2 sigma^2))
///   laplace_l1: K(x, y) = exp(-||x - y||_1 / sigma)
struct KernelSpec {
  KernelFamily family = KernelFamily::kGaussian;
  double bandwidth = 1.0;

  KernelSpec() = default;
  KernelSpec(KernelFamily f, double sigma);

  double operator()(const Eigen::Ref<const Eigen::VectorXd>& x,
                    const Eigen::Ref<const Eigen::VectorXd>& y) const;

  /// K(x^(i), q) for every point of `data` against a single query point.
  Eigen::VectorXd against_all(const Dataset& data,
                              const Eigen::Ref<const Eigen::VectorXd>& q) const;
};

KernelFamily kernel_family_from_string(const std::string& name);
std::string to_string(KernelFamily family);

}  // namespace rpchol
