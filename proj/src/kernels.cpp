#include "rpchol/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace rpchol {

KernelSpec::KernelSpec(KernelFamily f, double sigma) : family(f), bandwidth(sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("KernelSpec: bandwidth must be positive");
}

double KernelSpec::operator()(const Eigen::Ref<const Eigen::VectorXd>& x,
                              const Eigen::Ref<const Eigen::VectorXd>& y) const {
  if (x.size() != y.size()) throw std::invalid_argument("kernel: dimension mismatch");
  switch (family) {
    case KernelFamily::kGaussian:
      return std::exp(-(x - y).squaredNorm() / (2.0 * bandwidth * bandwidth));
    case KernelFamily::kLaplaceL1:
      return std::exp(-(x - y).cwiseAbs().sum() / bandwidth);
  }
  throw std::logic_error("kernel: unknown family");
}

Eigen::VectorXd KernelSpec::against_all(const Dataset& data,
                                        const Eigen::Ref<const Eigen::VectorXd>& q) const {
  if (q.size() != data.dim()) throw std::invalid_argument("kernel: dimension mismatch");
  const Eigen::MatrixXd& pts = data.points();
  switch (family) {
    case KernelFamily::kGaussian:
      return ((pts.colwise() - q).colwise().squaredNorm() *
              (-1.0 / (2.0 * bandwidth * bandwidth)))
          .array()
          .exp()
          .transpose();
    case KernelFamily::kLaplaceL1:
      return ((pts.colwise() - q).cwiseAbs().colwise().sum() * (-1.0 / bandwidth))
          .array()
          .exp()
          .transpose();
  }
  throw std::logic_error("kernel: unknown family");
}

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "gaussian") return KernelFamily::kGaussian;
  if (name == "laplace_l1" || name == "laplace") return KernelFamily::kLaplaceL1;
  throw std::invalid_argument("unknown kernel family: " + name);
}

std::string to_string(KernelFamily family) {
  return family == KernelFamily::kGaussian ? "gaussian" : "laplace_l1";
}

}  // namespace rpchol
