#pragma once

// Domain types shared by every module: sensor configuration, positions,
// spectrum/label datasets, grid construction and train/test splitting.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pips/error.hpp"
#include "pips/random.hpp"

namespace pips {

/// Row-major so that one sample is one contiguous row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline constexpr int kNumCoordinates = 3;

/// Tunable receiver parameters: band (MHz), step (MHz), sample rate (Hz).
struct SensorConfig {
  std::vector<double> band_mhz;
  double step_mhz = 2.4;
  double sample_rate_hz = 2.4e6;
  int samples_per_position = 100;
  /// 0 for the initial full band, incremented by every reconfiguration.
  int reconfig_index = 0;

  bool operator==(const SensorConfig&) const = default;
};

inline void validate(const SensorConfig& config) {
  if (config.band_mhz.empty()) throw InvalidArgument("sensor band is empty");
  for (std::size_t i = 0; i < config.band_mhz.size(); ++i) {
    const double f = config.band_mhz[i];
    if (!std::isfinite(f) || f <= 0.0) {
      throw InvalidArgument("sensor band entry " + std::to_string(i) + " is not a positive frequency");
    }
    if (i > 0 && f <= config.band_mhz[i - 1]) {
      throw InvalidArgument("sensor band is not strictly increasing at index " + std::to_string(i));
    }
  }
  if (!(config.step_mhz > 0.0)) throw InvalidArgument("sensor step must be > 0");
  if (!(config.sample_rate_hz > 0.0)) throw InvalidArgument("sensor sample rate must be > 0");
  if (config.samples_per_position < 0) throw InvalidArgument("samples_per_position must be >= 0");
}

struct Position {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  bool operator==(const Position&) const = default;
};

struct RoomDims {
  double length = 0.0;
  double width = 0.0;
  double height = 0.0;

  bool operator==(const RoomDims&) const = default;
};

inline bool inside(const RoomDims& room, const Position& p) {
  return p.x >= 0.0 && p.x <= room.length && p.y >= 0.0 && p.y <= room.width && p.z >= 0.0 &&
         p.z <= room.height;
}

/// Spectrum fingerprints paired with 3D coordinates.
///
/// features is n x m average power in dB, labels is n x 3 in meters and
/// frequencies holds the m column centre frequencies in MHz. Instances are
/// only produced by validate_dataset, so every Dataset satisfies its
/// invariants.
class Dataset {
 public:
  Dataset() = default;

  const Matrix& features() const noexcept { return features_; }
  const Matrix& labels() const noexcept { return labels_; }
  const std::vector<double>& frequencies() const noexcept { return frequencies_; }
  std::size_t n() const noexcept { return static_cast<std::size_t>(features_.rows()); }
  std::size_t m() const noexcept { return frequencies_.size(); }
  bool empty() const noexcept { return n() == 0; }

  /// Subset of rows, in the order given.
  Dataset rows(std::span<const std::size_t> index) const;
  /// Subset of frequency columns, in the order given.
  Dataset columns(std::span<const std::size_t> index) const;

  bool operator==(const Dataset& other) const {
    return frequencies_ == other.frequencies_ && features_ == other.features_ && labels_ == other.labels_;
  }

 private:
  friend Dataset validate_dataset(Matrix features, Matrix labels, std::vector<double> frequencies);
  Matrix features_ = Matrix(0, 0);
  Matrix labels_ = Matrix(0, kNumCoordinates);
  std::vector<double> frequencies_;
};

inline Dataset validate_dataset(Matrix features, Matrix labels, std::vector<double> frequencies) {
  if (features.rows() != labels.rows()) {
    throw InvalidArgument("dimension mismatch: features have " + std::to_string(features.rows()) +
                          " rows but labels have " + std::to_string(labels.rows()));
  }
  if (labels.cols() != kNumCoordinates) {
    throw InvalidArgument("dimension mismatch: labels must have 3 columns, got " +
                          std::to_string(labels.cols()));
  }
  if (features.cols() != static_cast<Eigen::Index>(frequencies.size())) {
    throw InvalidArgument("dimension mismatch: features have " + std::to_string(features.cols()) +
                          " columns but " + std::to_string(frequencies.size()) + " frequencies given");
  }
  for (std::size_t j = 0; j < frequencies.size(); ++j) {
    if (!std::isfinite(frequencies[j])) {
      throw InvalidArgument("non-finite frequency at index " + std::to_string(j));
    }
    if (j > 0 && frequencies[j] <= frequencies[j - 1]) {
      throw InvalidArgument("frequencies not strictly increasing at index " + std::to_string(j));
    }
  }
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
      if (!std::isfinite(features(i, j))) {
        throw InvalidArgument("non-finite feature at row " + std::to_string(i) + ", column " +
                              std::to_string(j));
      }
    }
    for (Eigen::Index j = 0; j < labels.cols(); ++j) {
      if (!std::isfinite(labels(i, j))) {
        throw InvalidArgument("non-finite label at row " + std::to_string(i) + ", column " +
                              std::to_string(j));
      }
    }
  }
  Dataset d;
  d.features_ = std::move(features);
  d.labels_ = std::move(labels);
  d.frequencies_ = std::move(frequencies);
  return d;
}

inline Dataset Dataset::rows(std::span<const std::size_t> index) const {
  Matrix f(static_cast<Eigen::Index>(index.size()), features_.cols());
  Matrix l(static_cast<Eigen::Index>(index.size()), labels_.cols());
  for (std::size_t r = 0; r < index.size(); ++r) {
    if (index[r] >= n()) throw InvalidArgument("row index " + std::to_string(index[r]) + " out of range");
    f.row(static_cast<Eigen::Index>(r)) = features_.row(static_cast<Eigen::Index>(index[r]));
    l.row(static_cast<Eigen::Index>(r)) = labels_.row(static_cast<Eigen::Index>(index[r]));
  }
  return validate_dataset(std::move(f), std::move(l), frequencies_);
}

inline Dataset Dataset::columns(std::span<const std::size_t> index) const {
  Matrix f(features_.rows(), static_cast<Eigen::Index>(index.size()));
  std::vector<double> freqs;
  freqs.reserve(index.size());
  for (std::size_t c = 0; c < index.size(); ++c) {
    if (index[c] >= m()) throw InvalidArgument("column index " + std::to_string(index[c]) + " out of range");
    f.col(static_cast<Eigen::Index>(c)) = features_.col(static_cast<Eigen::Index>(index[c]));
    freqs.push_back(frequencies_[index[c]]);
  }
  return validate_dataset(std::move(f), labels_, std::move(freqs));
}

/// Concatenate row-wise; frequencies must agree.
inline Dataset concat(const Dataset& a, const Dataset& b) {
  if (a.frequencies() != b.frequencies()) throw InvalidArgument("cannot concatenate datasets with different frequencies");
  Matrix f(a.features().rows() + b.features().rows(), static_cast<Eigen::Index>(a.m()));
  f << a.features(), b.features();
  Matrix l(a.labels().rows() + b.labels().rows(), kNumCoordinates);
  l << a.labels(), b.labels();
  return validate_dataset(std::move(f), std::move(l), a.frequencies());
}

struct GridCounts {
  int nx = 6;
  int ny = 5;
};

/// Grid of measurement positions centred on the room footprint.
///
/// Order is x fastest, then y, then height. The margin along an axis is
/// (dim - (count - 1) * spacing) / 2.
inline std::vector<Position> grid_positions(const RoomDims& room, GridCounts counts, double spacing,
                                            std::span<const double> heights) {
  if (counts.nx < 1 || counts.ny < 1) throw InvalidArgument("grid counts must be >= 1");
  if (!(spacing > 0.0)) throw InvalidArgument("grid spacing must be > 0");
  const double span_x = (counts.nx - 1) * spacing;
  const double span_y = (counts.ny - 1) * spacing;
  if (span_x > room.length) {
    throw InvalidArgument("grid does not fit in room: x span " + std::to_string(span_x) + " m exceeds length " +
                          std::to_string(room.length) + " m");
  }
  if (span_y > room.width) {
    throw InvalidArgument("grid does not fit in room: y span " + std::to_string(span_y) + " m exceeds width " +
                          std::to_string(room.width) + " m");
  }
  for (std::size_t h = 0; h < heights.size(); ++h) {
    if (!(heights[h] >= 0.0 && heights[h] <= room.height)) {
      throw InvalidArgument("grid height " + std::to_string(h) + " outside [0, room height]");
    }
  }
  const double margin_x = (room.length - span_x) / 2.0;
  const double margin_y = (room.width - span_y) / 2.0;
  std::vector<Position> out;
  out.reserve(static_cast<std::size_t>(counts.nx * counts.ny) * heights.size());
  for (double z : heights) {
    for (int iy = 0; iy < counts.ny; ++iy) {
      for (int ix = 0; ix < counts.nx; ++ix) {
        out.push_back({margin_x + ix * spacing, margin_y + iy * spacing, z});
      }
    }
  }
  return out;
}

struct SplitDataset {
  Dataset train;
  Dataset test;
  /// Source row of every train / test row.
  std::vector<std::size_t> train_index;
  std::vector<std::size_t> test_index;
};

/// Uniform seeded shuffle, then the first round(n * train_fraction) rows train.
inline SplitDataset train_test_split(const Dataset& data, double train_fraction, std::uint64_t seed) {
  if (data.empty()) throw InvalidArgument("cannot split an empty dataset");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidArgument("train fraction must lie in (0, 1)");
  }
  Rng rng(seed);
  std::vector<std::size_t> order = rng.permutation(data.n());
  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(data.n()) * train_fraction));
  SplitDataset split;
  split.train_index.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test_index.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  split.train = data.rows(split.train_index);
  split.test = data.rows(split.test_index);
  return split;
}

}  // namespace pips
