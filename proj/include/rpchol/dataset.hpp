#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>

namespace rpchol {

/// A collection of d-dimensional points, stored once as a d x n matrix
/// (one column per point) so that kernel column evaluations stream down
/// contiguous memory.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(Eigen::MatrixXd points_by_column);

  Eigen::Index size() const { return points_.cols(); }
  Eigen::Index dim() const { return points_.rows(); }
  const Eigen::MatrixXd& points() const { return points_; }
  Eigen::MatrixXd::ConstColXpr point(Eigen::Index i) const { return points_.col(i); }

 private:
  Eigen::MatrixXd points_;
};

/// Reads a dataset from CSV: one point per row, d numeric columns, no header.
Dataset read_points_csv(std::istream& in);
Dataset read_points_csv_file(const std::string& path);

/// Writes the same format back (one row per point, full double precision).
void write_points_csv(const Dataset& data, std::ostream& out);
void write_points_csv_file(const Dataset& data, const std::string& path);

}  // namespace rpchol
