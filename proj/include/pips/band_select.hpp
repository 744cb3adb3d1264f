#pragma once

// Frequency-band selection loop: pre-sample the full band, rank every
// frequency by how much positioning error grows when its column is
// shuffled, keep the top_k and re-collect on that rated band.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "pips/core.hpp"
#include "pips/metrics.hpp"
#include "pips/model.hpp"
#include "pips/random.hpp"
#include "pips/registry.hpp"
#include "pips/simulator.hpp"

namespace pips {

struct ImportanceReport {
  std::vector<double> frequencies_mhz;
  /// Mean RMSE increase (m) when the column is shuffled.
  std::vector<double> scores;
  double baseline_rmse = 0.0;
  int n_repeats = 1;
  std::uint64_t seed = 0;
};

/// Permutation importance of every frequency column of `test` for a fitted model.
///
/// Repeat r of column j shuffles with derive_seed(seed, j, r), so scores do
/// not depend on evaluation order.
inline ImportanceReport permutation_importance(const Regressor& model, std::span<const double> model_frequencies,
                                               const Dataset& test, int n_repeats, std::uint64_t seed) {
  if (n_repeats < 1) throw InvalidArgument("permutation importance needs n_repeats >= 1");
  if (model_frequencies.size() != test.m() ||
      !std::equal(model_frequencies.begin(), model_frequencies.end(), test.frequencies().begin())) {
    throw InvalidArgument("frequency-set mismatch between model and dataset");
  }
  if (test.empty()) throw InvalidArgument("permutation importance needs a non-empty test set");

  ImportanceReport report;
  report.frequencies_mhz = test.frequencies();
  report.n_repeats = n_repeats;
  report.seed = seed;
  report.baseline_rmse = rmse(test.labels(), model.predict(test.features()));
  report.scores.assign(test.m(), 0.0);

  Matrix shuffled = test.features();
  std::vector<double> column(test.n());
  for (std::size_t j = 0; j < test.m(); ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    double total = 0.0;
    for (int r = 0; r < n_repeats; ++r) {
      for (std::size_t i = 0; i < test.n(); ++i) column[i] = test.features()(static_cast<Eigen::Index>(i), col);
      Rng rng(derive_seed(seed, j, static_cast<std::uint64_t>(r)));
      rng.shuffle(column);
      for (std::size_t i = 0; i < test.n(); ++i) shuffled(static_cast<Eigen::Index>(i), col) = column[i];
      total += rmse(test.labels(), model.predict(shuffled)) - report.baseline_rmse;
    }
    shuffled.col(col) = test.features().col(col);
    report.scores[j] = total / n_repeats;
  }
  return report;
}

/// Indices of the top_k scores; ties go to the lower frequency.
inline std::vector<std::size_t> top_frequencies(const ImportanceReport& report, std::size_t top_k) {
  std::vector<std::size_t> order(report.scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (report.scores[a] != report.scores[b]) return report.scores[a] > report.scores[b];
    return report.frequencies_mhz[a] < report.frequencies_mhz[b];
  });
  order.resize(top_k);
  return order;
}

/// Reconfigure `current` to the top_k frequencies (ascending). Step and sample rate pass through.
inline SensorConfig select_rated_band(const ImportanceReport& report, std::size_t top_k, const SensorConfig& current) {
  if (report.frequencies_mhz.size() != report.scores.size()) throw InvalidArgument("malformed importance report");
  if (top_k < 1 || top_k > report.frequencies_mhz.size()) {
    throw InvalidArgument("top_k = " + std::to_string(top_k) + " out of range [1, " +
                          std::to_string(report.frequencies_mhz.size()) + "]");
  }
  auto chosen = top_frequencies(report, top_k);
  std::sort(chosen.begin(), chosen.end());
  SensorConfig next = current;
  next.band_mhz.clear();
  for (std::size_t i : chosen) next.band_mhz.push_back(report.frequencies_mhz[i]);
  next.reconfig_index = current.reconfig_index + 1;
  return next;
}

/// Fraction of scan frequencies no longer sampled: 1 - |new| / |old|.
inline double sampling_reduction(const SensorConfig& before, const SensorConfig& after) {
  return 1.0 - static_cast<double>(after.band_mhz.size()) / static_cast<double>(before.band_mhz.size());
}

struct DddasOptions {
  double train_fraction = 0.7;
  int n_repeats = 5;
};

struct DddasResult {
  SensorConfig config;
  EvalReport before;
  EvalReport after;
  ImportanceReport importance;
};

/// One reconfiguration cycle: full-band collection, fit, rank, shrink the band, re-collect, refit.
inline DddasResult dddas_cycle(const Scenario& scenario, const SensorConfig& full_config,
                               std::span<const Position> positions, const std::string& model_id, std::size_t top_k,
                               std::uint64_t seed, DddasOptions options = {}) {
  if (top_k < 1 || top_k > full_config.band_mhz.size()) {
    throw InvalidArgument("top_k = " + std::to_string(top_k) + " out of range for a band of " +
                          std::to_string(full_config.band_mhz.size()));
  }
  DddasResult out;
  const Dataset full = generate_dataset(scenario, full_config, positions);
  const SplitDataset split = train_test_split(full, options.train_fraction, seed);
  auto model = make_model(model_id, seed);
  model->fit(split.train);
  out.before = evaluate(model_id, split.test.labels(), model->predict(split.test.features()), model->fit_time_s());
  out.importance = permutation_importance(*model, full.frequencies(), split.test, options.n_repeats, seed);
  out.config = select_rated_band(out.importance, top_k, full_config);

  const Dataset rated = generate_dataset(scenario, out.config, positions);
  const SplitDataset rated_split = train_test_split(rated, options.train_fraction, seed);
  auto refit = make_model(model_id, seed);
  refit->fit(rated_split.train);
  out.after = evaluate(model_id, rated_split.test.labels(), refit->predict(rated_split.test.features()),
                       refit->fit_time_s());
  return out;
}

}  // namespace pips
