#include "rpchol/generators.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "rpchol/rng.hpp"

namespace rpchol {

Dataset gen_smile(Eigen::Index n, std::uint64_t seed) {
  if (n < 200) throw std::invalid_argument("gen_smile: need n >= 200");
  SplitMix64 rng(seed);
  const Eigen::Index n_eyes = std::max<Eigen::Index>(n / 100, 10);
  const Eigen::Index n_left = n_eyes / 2;
  const Eigen::Index n_right = n_eyes - n_left;
  const Eigen::Index n_rest = n - n_eyes;
  const Eigen::Index n_face = (n_rest * 3) / 5;
  const Eigen::Index n_mouth = n_rest - n_face;

  constexpr double face_radius = 1.0;
  constexpr double mouth_radius = 0.6;
  constexpr double radial_jitter = 0.02;
  constexpr double eye_x = 0.4;
  constexpr double eye_y = 0.35;
  constexpr double eye_spread = 0.01;
  const double pi = std::numbers::pi;

  Eigen::MatrixXd pts(2, n);
  Eigen::Index col = 0;
  for (Eigen::Index i = 0; i < n_face; ++i) {
    const double angle = 2.0 * pi * rng.next_double();
    const double radius = face_radius + radial_jitter * (2.0 * rng.next_double() - 1.0);
    pts.col(col++) << radius * std::cos(angle), radius * std::sin(angle);
  }
  // Lower arc between 200 and 340 degrees.
  for (Eigen::Index i = 0; i < n_mouth; ++i) {
    const double angle = pi * (200.0 + 140.0 * rng.next_double()) / 180.0;
    const double radius = mouth_radius + radial_jitter * (2.0 * rng.next_double() - 1.0);
    pts.col(col++) << radius * std::cos(angle), radius * std::sin(angle);
  }
  for (Eigen::Index i = 0; i < n_left; ++i)
    pts.col(col++) << -eye_x + eye_spread * sample_normal(rng), eye_y + eye_spread * sample_normal(rng);
  for (Eigen::Index i = 0; i < n_right; ++i)
    pts.col(col++) << eye_x + eye_spread * sample_normal(rng), eye_y + eye_spread * sample_normal(rng);
  return Dataset(std::move(pts));
}

Dataset gen_outliers(Eigen::Index n, Eigen::Index d, Eigen::Index n_out, double scale,
                     std::uint64_t seed) {
  if (n < 1 || d < 1) throw std::invalid_argument("gen_outliers: need n >= 1 and d >= 1");
  if (n_out < 0 || n_out > n) throw std::invalid_argument("gen_outliers: need 0 <= n_out <= n");
  SplitMix64 rng(seed);
  Eigen::MatrixXd pts(d, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) pts(j, i) = sample_normal(rng);
  pts.rightCols(n_out) *= scale;
  return Dataset(std::move(pts));
}

LabeledDataset gen_blobs(Eigen::Index n, Eigen::Index d, int c, double separation, double spread,
                         std::uint64_t seed) {
  if (n < c || c < 1) throw std::invalid_argument("gen_blobs: need n >= c >= 1");
  if (d < 1) throw std::invalid_argument("gen_blobs: need d >= 1");
  if (c > (1 << std::min<Eigen::Index>(d, 30)))
    throw std::invalid_argument("gen_blobs: too many blobs for the dimension");
  SplitMix64 rng(seed);
  Eigen::MatrixXd centers = Eigen::MatrixXd::Zero(d, c);
  for (int j = 0; j < c; ++j)
    for (Eigen::Index b = 0; b < d; ++b)
      if ((j >> b) & 1) centers(b, j) = separation;

  LabeledDataset out;
  out.labels.resize(static_cast<std::size_t>(n));
  Eigen::MatrixXd pts(d, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % c);
    out.labels[static_cast<std::size_t>(i)] = label;
    for (Eigen::Index b = 0; b < d; ++b) pts(b, i) = centers(b, label) + spread * sample_normal(rng);
  }
  out.points = Dataset(std::move(pts));
  return out;
}

Eigen::MatrixXd gen_greedy_worstcase(Eigen::Index n, double eta, double eps) {
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("gen_greedy_worstcase: eta must lie in (0,1)");
  if (!(eps > 0.0)) throw std::invalid_argument("gen_greedy_worstcase: eps must be positive");
  const Eigen::Index m = static_cast<Eigen::Index>(std::floor((1.0 - eta) * static_cast<double>(n))) + 1;
  if (m >= n || m < 1) throw std::invalid_argument("gen_greedy_worstcase: infeasible parameters");
  const double delta = (static_cast<double>(m) - (1.0 - eta) * static_cast<double>(n)) /
                       ((1.0 - eta) * static_cast<double>(n - m));
  if (!(delta > 0.0)) throw std::invalid_argument("gen_greedy_worstcase: infeasible parameters");

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  out.topLeftCorner(n - m, n - m) = (1.0 + delta) * Eigen::MatrixXd::Identity(n - m, n - m);
  out.bottomRightCorner(m, m).setOnes();
  return out;
}

Eigen::MatrixXd gen_uniform_worstcase(Eigen::Index m, Eigen::Index r, double delta) {
  if (m < 2 || r < 2) throw std::invalid_argument("gen_uniform_worstcase: need m >= 2 and r >= 2");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("gen_uniform_worstcase: delta must lie in (0,1)");
  const Eigen::Index n = m * r;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  out.topLeftCorner(m, m).setOnes();
  for (Eigen::Index b = 1; b < r; ++b) {
    auto block = out.block(b * m, b * m, m, m);
    block.setConstant(delta);
    block.diagonal().setOnes();
  }
  return out;
}

Eigen::MatrixXd gen_powerlaw_psd(Eigen::Index n, double exponent, std::uint64_t seed) {
  if (n < 1 || n > 2000) throw std::invalid_argument("gen_powerlaw_psd: need 1 <= n <= 2000");
  SplitMix64 rng(seed);
  Eigen::MatrixXd gauss(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) gauss(i, j) = sample_normal(rng);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauss);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);

  Eigen::VectorXd spectrum(n);
  for (Eigen::Index i = 0; i < n; ++i) spectrum[i] = std::pow(static_cast<double>(i + 1), -exponent);
  Eigen::MatrixXd out = q * spectrum.asDiagonal() * q.transpose();
  return 0.5 * (out + out.transpose().eval());
}

}  // namespace rpchol
