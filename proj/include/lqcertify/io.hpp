#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lqcertify/core.hpp"

namespace lqc {

/// One file-related failure; message carries the path.
class FileError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Plain CSV, one row per line, decimal reals, no header; dimensions inferred.
inline Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw FileError("bad number '" + cell + "' in " + path);
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw FileError("ragged rows in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FileError("empty matrix file " + path);
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

/// Vector file: one real per line.
inline Vector read_vector_file(const std::string& path) {
  const Matrix m = read_matrix_csv(path);
  if (m.cols() != 1) throw FileError("expected one value per line in " + path);
  return m.col(0);
}

/// 17 significant digits; round-trips doubles exactly.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace lqc
