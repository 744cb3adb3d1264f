#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "pips/pips.hpp"

namespace pips::test {

inline Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double lo = -1.0, double hi = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(lo, hi);
  return m;
}

/// Integer-valued matrix, so distance and split ties actually happen.
inline Matrix random_grid_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, int levels) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = static_cast<double>(rng.index(static_cast<std::size_t>(levels)));
  return m;
}

inline std::vector<double> ascending_band(std::size_t m, double start = 90.0, double step = 2.5) {
  std::vector<double> band(m);
  for (std::size_t i = 0; i < m; ++i) band[i] = start + step * static_cast<double>(i);
  return band;
}

inline Dataset random_dataset(Rng& rng, Eigen::Index n, Eigen::Index m) {
  return validate_dataset(random_matrix(rng, n, m, -80.0, -30.0), random_matrix(rng, n, 3, 0.0, 5.0),
                          ascending_band(static_cast<std::size_t>(m)));
}

/// Fresh scratch directory under the system temp path.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("pips-" + tag + "-" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace pips::test
