#include "rpchol/dataset.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace rpchol {

Dataset::Dataset(Eigen::MatrixXd points_by_column) : points_(std::move(points_by_column)) {
  if (points_.cols() < 1) throw std::invalid_argument("Dataset: need at least one point");
  if (points_.rows() < 1) throw std::invalid_argument("Dataset: need dimension >= 1");
}

namespace {

std::vector<double> parse_csv_row(const std::string& line, std::size_t lineno) {
  std::vector<double> row;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t comma = line.find(',', pos);
    if (comma == std::string::npos) comma = line.size();
    std::string tok = line.substr(pos, comma - pos);
    // from_chars does not skip whitespace
    std::size_t b = tok.find_first_not_of(" \t\r");
    std::size_t e = tok.find_last_not_of(" \t\r");
    if (b == std::string::npos) throw std::runtime_error("csv: empty field at line " + std::to_string(lineno));
    tok = tok.substr(b, e - b + 1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
      throw std::runtime_error("csv: bad number '" + tok + "' at line " + std::to_string(lineno));
    row.push_back(v);
    pos = comma + 1;
    if (comma == line.size()) break;
  }
  return row;
}

}  // namespace

Dataset read_points_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    rows.push_back(parse_csv_row(line, lineno));
    if (rows.back().size() != rows.front().size())
      throw std::runtime_error("csv: inconsistent column count at line " + std::to_string(lineno));
  }
  if (rows.empty()) throw std::runtime_error("csv: no data rows");
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index d = static_cast<Eigen::Index>(rows.front().size());
  Eigen::MatrixXd points(d, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) points(j, i) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return Dataset(std::move(points));
}

Dataset read_points_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_points_csv(in);
}

void write_points_csv(const Dataset& data, std::ostream& out) {
  char buf[64];
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (Eigen::Index j = 0; j < data.dim(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", data.points()(j, i));
      if (j) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

void write_points_csv_file(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  write_points_csv(data, out);
}

}  // namespace rpchol
