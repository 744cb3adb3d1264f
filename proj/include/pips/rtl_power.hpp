#pragma once

// Reader for rtl_power scan files. Each line is
//
//   date, time, hz_low, hz_high, hz_step, n_samples, db, db, ...
//
// and reading i sits at hz_low + i * hz_step. Consecutive lines sharing a
// date and time belong to one sweep; one sweep becomes one dataset row.

#include <algorithm>
#include <cmath>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "pips/core.hpp"
#include "pips/io.hpp"

namespace pips {

struct ScanReading {
  double frequency_mhz = 0.0;
  double power_db = 0.0;
};

struct ScanLine {
  std::string date;
  std::string time;
  double hz_low = 0.0;
  double hz_high = 0.0;
  double hz_step = 0.0;
  long long n_samples = 0;
  std::vector<double> db;
  std::size_t line = 0;

  std::vector<ScanReading> readings() const {
    std::vector<ScanReading> out;
    out.reserve(db.size());
    for (std::size_t i = 0; i < db.size(); ++i) {
      out.push_back({(hz_low + static_cast<double>(i) * hz_step) / 1e6, db[i]});
    }
    return out;
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

}  // namespace detail

inline std::vector<ScanLine> parse_rtl_power(std::istream& in) {
  std::vector<ScanLine> out;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (detail::trim(text).empty()) continue;
    const auto fields = split_fields(text);
    if (fields.size() < 7) {
      throw ParseError("line " + std::to_string(line_no) + ": malformed rtl_power row, expected at least 7 fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    ScanLine row;
    row.line = line_no;
    row.date = detail::trim(fields[0]);
    row.time = detail::trim(fields[1]);
    row.hz_low = parse_double(fields[2], line_no, "hz_low");
    row.hz_high = parse_double(fields[3], line_no, "hz_high");
    row.hz_step = parse_double(fields[4], line_no, "hz_step");
    const double samples = parse_double(fields[5], line_no, "sample count");
    if (!(row.hz_step > 0.0) || row.hz_high < row.hz_low || samples < 0.0 || samples != std::floor(samples)) {
      throw ParseError("line " + std::to_string(line_no) + ": malformed rtl_power row, inconsistent range or step",
                       line_no);
    }
    row.n_samples = static_cast<long long>(samples);
    for (std::size_t i = 6; i < fields.size(); ++i) row.db.push_back(parse_double(fields[i], line_no, "dB reading"));
    out.push_back(std::move(row));
  }
  if (out.empty()) throw ParseError("scan file contains no rows");
  return out;
}

/// Nearest reading to every band frequency, which must lie within step / 2.
inline std::vector<double> match_band(const std::vector<ScanReading>& readings, const std::vector<double>& band_mhz,
                                      double step_mhz, std::size_t line) {
  std::vector<double> out;
  out.reserve(band_mhz.size());
  for (double f : band_mhz) {
    const ScanReading* best = nullptr;
    for (const auto& r : readings) {
      if (best == nullptr || std::abs(r.frequency_mhz - f) < std::abs(best->frequency_mhz - f)) best = &r;
    }
    if (best == nullptr || std::abs(best->frequency_mhz - f) > step_mhz / 2.0) {
      throw ParseError("sweep at line " + std::to_string(line) + ": no reading within " + format_double(step_mhz / 2.0) +
                           " MHz of " + format_double(f) + " MHz",
                       line);
    }
    out.push_back(best->power_db);
  }
  return out;
}

/// Turn a scan into dataset rows labelled with `position`.
///
/// Without a band every reading of the first sweep becomes a column.
inline Dataset ingest_rtl_power(std::istream& in, const Position& position, std::optional<std::vector<double>> band_mhz,
                                double step_mhz) {
  if (!(step_mhz > 0.0)) throw InvalidArgument("step must be > 0");
  const auto lines = parse_rtl_power(in);

  struct Sweep {
    std::vector<ScanReading> readings;
    std::size_t line;
  };
  std::vector<Sweep> sweeps;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i == 0 || lines[i].date != lines[i - 1].date || lines[i].time != lines[i - 1].time) {
      sweeps.push_back({{}, lines[i].line});
    }
    const auto r = lines[i].readings();
    sweeps.back().readings.insert(sweeps.back().readings.end(), r.begin(), r.end());
  }

  std::vector<double> band;
  if (band_mhz) {
    band = *band_mhz;
    if (band.empty()) throw InvalidArgument("band filter is empty");
    std::sort(band.begin(), band.end());
  } else {
    for (const auto& r : sweeps.front().readings) band.push_back(r.frequency_mhz);
    std::sort(band.begin(), band.end());
    band.erase(std::unique(band.begin(), band.end()), band.end());
  }

  Matrix features(static_cast<Eigen::Index>(sweeps.size()), static_cast<Eigen::Index>(band.size()));
  Matrix labels(static_cast<Eigen::Index>(sweeps.size()), kNumCoordinates);
  for (std::size_t s = 0; s < sweeps.size(); ++s) {
    const auto row = match_band(sweeps[s].readings, band, step_mhz, sweeps[s].line);
    for (std::size_t j = 0; j < row.size(); ++j) {
      features(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j)) = row[j];
    }
    labels.row(static_cast<Eigen::Index>(s)) << position.x, position.y, position.z;
  }
  return validate_dataset(std::move(features), std::move(labels), std::move(band));
}

}  // namespace pips
