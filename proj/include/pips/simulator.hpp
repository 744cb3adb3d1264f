#pragma once

// Synthetic spectrum fingerprints. Each source follows a log-distance path
// loss law, loses a fixed amount per obstructing box on the direct path and
// rolls off outside its bandwidth. Sources add in the linear power domain and
// measurement noise is i.i.d. Gaussian in dB.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "pips/core.hpp"
#include "pips/error.hpp"
#include "pips/random.hpp"

namespace pips {

/// Signal of opportunity: an ambient transmitter used for positioning.
struct SoopSource {
  Position position;
  double center_frequency_mhz = 100.0;
  double bandwidth_mhz = 0.2;
  /// Power at the 1 m reference distance.
  double tx_power_dbm = -40.0;
  double path_loss_exponent = 2.0;

  bool operator==(const SoopSource&) const = default;
};

/// Axis-aligned box that attenuates every direct path passing through it.
struct SignatureObject {
  Position min_corner;
  Position max_corner;
  double attenuation_db = 0.0;

  bool operator==(const SignatureObject&) const = default;
};

struct Scenario {
  RoomDims room;
  std::vector<SoopSource> sources;
  std::vector<SignatureObject> objects;
  double noise_sigma_db = 1.0;
  /// Receiver noise floor added to every frequency; -inf disables it.
  double noise_floor_dbm = -std::numeric_limits<double>::infinity();
  std::uint64_t rng_seed = 0;

  bool operator==(const Scenario&) const = default;
};

inline constexpr double kReferenceDistance = 1.0;

inline void validate(const Scenario& s) {
  if (!(s.room.length > 0.0 && s.room.width > 0.0 && s.room.height > 0.0)) {
    throw InvalidArgument("room dimensions must be positive");
  }
  for (std::size_t i = 0; i < s.sources.size(); ++i) {
    const auto& src = s.sources[i];
    const std::string at = "source " + std::to_string(i);
    if (!inside(s.room, src.position)) throw InvalidArgument(at + " lies outside the room");
    if (!(src.bandwidth_mhz > 0.0)) throw InvalidArgument(at + ": bandwidth must be > 0");
    if (!(src.path_loss_exponent >= 1.5 && src.path_loss_exponent <= 6.0)) {
      throw InvalidArgument(at + ": path loss exponent must lie in [1.5, 6]");
    }
    if (!std::isfinite(src.tx_power_dbm) || !std::isfinite(src.center_frequency_mhz)) {
      throw InvalidArgument(at + ": non-finite power or frequency");
    }
  }
  for (std::size_t i = 0; i < s.objects.size(); ++i) {
    const auto& obj = s.objects[i];
    const std::string at = "object " + std::to_string(i);
    if (!(obj.max_corner.x > obj.min_corner.x && obj.max_corner.y > obj.min_corner.y &&
          obj.max_corner.z > obj.min_corner.z)) {
      throw InvalidArgument(at + ": box must have positive volume");
    }
    if (!inside(s.room, obj.min_corner) || !inside(s.room, obj.max_corner)) {
      throw InvalidArgument(at + " lies outside the room");
    }
    if (!(obj.attenuation_db >= 0.0)) throw InvalidArgument(at + ": attenuation must be >= 0");
  }
  if (!(s.noise_sigma_db >= 0.0)) throw InvalidArgument("noise_sigma_db must be >= 0");
}

/// Slab test for the closed segment a-b against a closed box. Touching a face counts.
inline bool segment_intersects_box(const Position& a, const Position& b, const SignatureObject& box) {
  const std::array<double, 3> origin{a.x, a.y, a.z};
  const std::array<double, 3> delta{b.x - a.x, b.y - a.y, b.z - a.z};
  const std::array<double, 3> lo{box.min_corner.x, box.min_corner.y, box.min_corner.z};
  const std::array<double, 3> hi{box.max_corner.x, box.max_corner.y, box.max_corner.z};
  double t_enter = 0.0;
  double t_exit = 1.0;
  for (int axis = 0; axis < 3; ++axis) {
    if (delta[axis] == 0.0) {
      if (origin[axis] < lo[axis] || origin[axis] > hi[axis]) return false;
      continue;
    }
    double t0 = (lo[axis] - origin[axis]) / delta[axis];
    double t1 = (hi[axis] - origin[axis]) / delta[axis];
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
    if (t_enter > t_exit) return false;
  }
  return true;
}

inline double distance(const Position& a, const Position& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}

/// Out-of-band loss: zero inside the occupied band, 20 log10(1 + |df| / bw) outside.
inline double spectral_rolloff_db(const SoopSource& source, double frequency_mhz) {
  const double offset = std::abs(frequency_mhz - source.center_frequency_mhz);
  if (offset <= source.bandwidth_mhz / 2.0) return 0.0;
  return 20.0 * std::log10(1.0 + offset / source.bandwidth_mhz);
}

/// Noise-free power (dB) received at `position` from one source.
inline double received_power(const Scenario& scenario, const SoopSource& source, const Position& position,
                             double frequency_mhz) {
  if (!inside(scenario.room, position)) throw InvalidArgument("position lies outside the room");
  const double d = std::max(distance(source.position, position), kReferenceDistance);
  double power = source.tx_power_dbm - 10.0 * source.path_loss_exponent * std::log10(d / kReferenceDistance);
  for (const auto& obj : scenario.objects) {
    if (segment_intersects_box(source.position, position, obj)) power -= obj.attenuation_db;
  }
  return power - spectral_rolloff_db(source, frequency_mhz);
}

/// 10 log10(sum 10^(p/10)); -inf entries contribute nothing.
inline double power_sum_db(std::span<const double> powers_db) {
  double linear = 0.0;
  for (double p : powers_db) linear += std::pow(10.0, p / 10.0);
  return 10.0 * std::log10(linear);
}

/// Noise-free spectrum at one position: every source plus the noise floor, per frequency.
inline std::vector<double> clean_spectrum(const Scenario& scenario, const Position& position,
                                          std::span<const double> band_mhz) {
  std::vector<double> spectrum(band_mhz.size());
  std::vector<double> parts;
  parts.reserve(scenario.sources.size() + 1);
  for (std::size_t j = 0; j < band_mhz.size(); ++j) {
    parts.clear();
    for (const auto& src : scenario.sources) parts.push_back(received_power(scenario, src, position, band_mhz[j]));
    if (std::isfinite(scenario.noise_floor_dbm)) parts.push_back(scenario.noise_floor_dbm);
    if (parts.empty()) throw InvalidArgument("scenario has neither sources nor a noise floor");
    spectrum[j] = power_sum_db(parts);
  }
  return spectrum;
}

/// Fingerprint dataset: samples_per_position noisy rows per position, position-major.
///
/// Position p draws its noise from the stream derive_seed(rng_seed, p), so
/// rows do not depend on how many other positions are generated.
inline Dataset generate_dataset(const Scenario& scenario, const SensorConfig& config,
                                std::span<const Position> positions) {
  if (config.band_mhz.empty()) throw InvalidArgument("sensor band is empty");
  validate(config);
  validate(scenario);
  if (positions.empty()) throw InvalidArgument("no positions given");
  if (config.samples_per_position < 1) throw InvalidArgument("samples_per_position must be >= 1");

  const auto per = static_cast<std::size_t>(config.samples_per_position);
  const auto n = static_cast<Eigen::Index>(positions.size() * per);
  const auto m = static_cast<Eigen::Index>(config.band_mhz.size());
  Matrix features(n, m);
  Matrix labels(n, kNumCoordinates);
  Eigen::Index row = 0;
  for (std::size_t p = 0; p < positions.size(); ++p) {
    const auto spectrum = clean_spectrum(scenario, positions[p], config.band_mhz);
    Rng rng(derive_seed(scenario.rng_seed, p));
    for (std::size_t s = 0; s < per; ++s, ++row) {
      for (Eigen::Index j = 0; j < m; ++j) {
        const double noise = scenario.noise_sigma_db > 0.0 ? rng.normal(0.0, scenario.noise_sigma_db) : 0.0;
        features(row, j) = spectrum[static_cast<std::size_t>(j)] + noise;
      }
      labels(row, 0) = positions[p].x;
      labels(row, 1) = positions[p].y;
      labels(row, 2) = positions[p].z;
    }
  }
  return validate_dataset(std::move(features), std::move(labels), config.band_mhz);
}

struct ScenarioSetup {
  Scenario scenario;
  SensorConfig sensor;
  std::vector<Position> positions;
};

inline constexpr RoomDims kPaperRoom{6.15, 4.30, 2.42};

/// The rated five-frequency band, MHz.
inline const std::vector<double>& rated_band_mhz() {
  static const std::vector<double> band{91.2, 93.6, 96.0, 98.4, 100.8};
  return band;
}

namespace detail {

inline Position random_point(Rng& rng, const RoomDims& room, double z_lo, double z_hi) {
  return {rng.uniform(0.0, room.length), rng.uniform(0.0, room.width), rng.uniform(z_lo, z_hi)};
}

/// Seeded furniture-sized boxes: a metal cabinet, a water tank and an interior wall stub.
inline std::vector<SignatureObject> random_objects(Rng& rng, const RoomDims& room) {
  std::vector<SignatureObject> objects;
  const std::array<std::array<double, 3>, 3> sizes{{{0.6, 0.5, 1.8}, {0.5, 0.5, 1.0}, {1.5, 0.15, 2.42}}};
  const std::array<double, 3> attenuation{9.0, 6.0, 4.0};
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const auto& sz = sizes[i];
    const double x0 = rng.uniform(0.0, room.length - sz[0]);
    const double y0 = rng.uniform(0.0, room.width - sz[1]);
    const double z1 = std::min(sz[2], room.height);
    objects.push_back({{x0, y0, 0.0}, {x0 + sz[0], y0 + sz[1], z1}, attenuation[i] + rng.uniform(-1.0, 1.0)});
  }
  return objects;
}

}  // namespace detail

/// Living-room geometry, the rated band and the 6 x 5 x 2 measurement grid.
///
/// One in-room source per band frequency plus seeded obstructions; the
/// noise level is chosen so that fingerprints of neighbouring positions
/// overlap only occasionally.
inline ScenarioSetup make_paper_scenario(std::uint64_t seed) {
  ScenarioSetup setup;
  Rng rng(derive_seed(seed, 0x5ce9a210ULL));
  Scenario& s = setup.scenario;
  s.room = kPaperRoom;
  s.rng_seed = seed;
  s.noise_sigma_db = 0.4;
  s.noise_floor_dbm = -110.0;
  for (double f : rated_band_mhz()) {
    SoopSource src;
    src.position = detail::random_point(rng, s.room, 0.3, s.room.height);
    src.center_frequency_mhz = f;
    src.bandwidth_mhz = 0.2;
    src.tx_power_dbm = rng.uniform(-45.0, -30.0);
    src.path_loss_exponent = rng.uniform(2.0, 3.5);
    s.sources.push_back(src);
  }
  s.objects = detail::random_objects(rng, s.room);

  setup.sensor.band_mhz = rated_band_mhz();
  setup.sensor.step_mhz = 2.4;
  setup.sensor.sample_rate_hz = 2.4e6;
  setup.sensor.samples_per_position = 100;
  setup.sensor.reconfig_index = 1;

  const std::array<double, 2> heights{0.0, 1.0};
  setup.positions = grid_positions(s.room, {6, 5}, 1.0, heights);
  return setup;
}

struct FullbandSetup : ScenarioSetup {
  /// Band indices whose frequency coincides with a source centre frequency.
  std::vector<std::size_t> informative;
};

inline constexpr double kFullbandLowMhz = 88.0;
inline constexpr double kFullbandHighMhz = 1000.0;
inline constexpr std::size_t kInformativeCount = 5;

/// Equally spaced 88-1000 MHz scan where only five seeded frequencies carry a source.
///
/// Sources are narrow enough that their rolloff at the neighbouring scan
/// frequency sits far below the noise floor, so every other column is a
/// position-independent floor plus measurement noise.
inline FullbandSetup make_fullband_scenario(std::uint64_t seed, std::size_t n_frequencies) {
  if (n_frequencies < 10) throw InvalidArgument("full band needs at least 10 frequencies");
  FullbandSetup setup;
  Rng rng(derive_seed(seed, 0xf011ba2dULL));
  Scenario& s = setup.scenario;
  s.room = kPaperRoom;
  s.rng_seed = seed;
  s.noise_sigma_db = 1.0;
  s.noise_floor_dbm = -60.0;

  const double step = (kFullbandHighMhz - kFullbandLowMhz) / static_cast<double>(n_frequencies - 1);
  std::vector<double> band(n_frequencies);
  for (std::size_t i = 0; i < n_frequencies; ++i) band[i] = kFullbandLowMhz + step * static_cast<double>(i);
  band.back() = kFullbandHighMhz;

  setup.informative = rng.sample_without_replacement(n_frequencies, kInformativeCount);
  std::sort(setup.informative.begin(), setup.informative.end());
  for (std::size_t idx : setup.informative) {
    SoopSource src;
    src.position = detail::random_point(rng, s.room, 0.3, s.room.height);
    src.center_frequency_mhz = band[idx];
    src.bandwidth_mhz = 0.001;
    src.tx_power_dbm = rng.uniform(-25.0, -15.0);
    src.path_loss_exponent = rng.uniform(2.0, 3.0);
    s.sources.push_back(src);
  }
  s.objects = detail::random_objects(rng, s.room);

  setup.sensor.band_mhz = std::move(band);
  setup.sensor.step_mhz = step;
  setup.sensor.sample_rate_hz = 2.4e6;
  setup.sensor.samples_per_position = 100;
  setup.sensor.reconfig_index = 0;

  const std::array<double, 2> heights{0.0, 1.0};
  setup.positions = grid_positions(s.room, {6, 5}, 1.0, heights);
  return setup;
}

}  // namespace pips
