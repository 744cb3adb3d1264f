#pragma once

// File formats.
//
// Dataset CSV: header `f_<MHz>,...,x,y,z`, one sample per row, '\n' line
// endings. Numbers use the shortest decimal form that reads back to the
// same double, so write -> read is bit-exact.
//
// Scenario JSON:
//   { "room_dims": [l, w, h],
//     "sources": [ { "position": [x, y, z], "center_frequency_mhz": f,
//                    "bandwidth_mhz": b, "tx_power_dbm": p, "path_loss_exponent": n } ],
//     "objects": [ { "min_corner": [x, y, z], "max_corner": [x, y, z], "attenuation_db": a } ],
//     "noise_sigma_db": s, "noise_floor_dbm": floor-or-null, "rng_seed": seed }
//
// Sensor JSON:
//   { "band_mhz": [...], "step_mhz": d, "sample_rate_hz": r,
//     "samples_per_position": k, "reconfig_index": i }

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pips/band_select.hpp"
#include "pips/core.hpp"
#include "pips/error.hpp"
#include "pips/metrics.hpp"
#include "pips/pca.hpp"
#include "pips/simulator.hpp"

namespace pips {

using json = nlohmann::json;

/// Shortest round-trip decimal; "nan" / "inf" / "-inf" for non-finite values.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// Frequency column name, always with a decimal point: 96 -> "f_96.0".
inline std::string frequency_header(double mhz) {
  std::string s = format_double(mhz);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return "f_" + s;
}

inline double parse_double(std::string_view text, std::size_t line, std::string_view what = "value") {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ParseError("line " + std::to_string(line) + ": malformed " + std::string(what) + " '" + std::string(text) + "'",
                     line);
  }
  return v;
}

inline std::vector<std::string_view> split_fields(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

inline std::string dataset_header(const std::vector<double>& frequencies) {
  std::string h;
  for (double f : frequencies) h += frequency_header(f) + ",";
  return h + "x,y,z";
}

inline void write_dataset_rows(std::ostream& out, const Dataset& data) {
  for (std::size_t i = 0; i < data.n(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (std::size_t j = 0; j < data.m(); ++j) out << format_double(data.features()(r, static_cast<Eigen::Index>(j))) << ',';
    out << format_double(data.labels()(r, 0)) << ',' << format_double(data.labels()(r, 1)) << ','
        << format_double(data.labels()(r, 2)) << '\n';
  }
}

inline void write_dataset_csv(std::ostream& out, const Dataset& data) {
  out << dataset_header(data.frequencies()) << '\n';
  write_dataset_rows(out, data);
}

/// Frequencies encoded in a dataset header line.
inline std::vector<double> parse_dataset_header(std::string_view header) {
  if (!header.empty() && header.back() == '\r') header.remove_suffix(1);
  const auto fields = split_fields(header);
  if (fields.size() < 3 || fields[fields.size() - 3] != "x" || fields[fields.size() - 2] != "y" ||
      fields[fields.size() - 1] != "z") {
    throw ParseError("line 1: dataset header must end with x,y,z", 1);
  }
  std::vector<double> freqs;
  for (std::size_t j = 0; j + 3 < fields.size(); ++j) {
    if (fields[j].substr(0, 2) != "f_") {
      throw ParseError("line 1: column " + std::to_string(j) + " header '" + std::string(fields[j]) +
                           "' is not of the form f_<MHz>",
                       1);
    }
    freqs.push_back(parse_double(fields[j].substr(2), 1, "frequency header"));
  }
  return freqs;
}

inline Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty dataset file", 1);
  auto freqs = parse_dataset_header(line);
  const std::size_t m = freqs.size();
  std::vector<double> values;
  std::size_t line_no = 1, rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != m + 3) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(m + 3) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    for (const auto f : fields) values.push_back(parse_double(f, line_no));
    ++rows;
  }
  Matrix features(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(m));
  Matrix labels(static_cast<Eigen::Index>(rows), kNumCoordinates);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * (m + 3) + j];
    }
    for (int c = 0; c < kNumCoordinates; ++c) {
      labels(static_cast<Eigen::Index>(i), c) = values[i * (m + 3) + m + static_cast<std::size_t>(c)];
    }
  }
  return validate_dataset(std::move(features), std::move(labels), std::move(freqs));
}

inline void write_dataset_file(const std::string& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_dataset_csv(out, data);
  if (!out) throw Error("failed writing '" + path + "'");
}

inline Dataset read_dataset_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open dataset '" + path + "'");
  try {
    return read_dataset_csv(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), e.line());
  }
}

// ---------------------------------------------------------------------------
// JSON configs

namespace detail {

inline const json& member(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw ParseError(path + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw ParseError(path + "." + key + ": missing");
  return *it;
}

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ParseError(path + ": expected a number");
  return j.get<double>();
}

inline double number_at(const json& j, const std::string& key, const std::string& path) {
  return number(member(j, key, path), path + "." + key);
}

inline std::vector<double> numbers(const json& j, const std::string& path, std::size_t expected = 0) {
  if (!j.is_array()) throw ParseError(path + ": expected an array");
  if (expected != 0 && j.size() != expected) {
    throw ParseError(path + ": expected " + std::to_string(expected) + " entries, got " + std::to_string(j.size()));
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline Position position(const json& j, const std::string& path) {
  const auto v = numbers(j, path, 3);
  return {v[0], v[1], v[2]};
}

inline json position_json(const Position& p) { return json::array({p.x, p.y, p.z}); }

}  // namespace detail

inline json scenario_to_json(const Scenario& s) {
  json j;
  j["room_dims"] = json::array({s.room.length, s.room.width, s.room.height});
  j["sources"] = json::array();
  for (const auto& src : s.sources) {
    j["sources"].push_back({{"position", detail::position_json(src.position)},
                            {"center_frequency_mhz", src.center_frequency_mhz},
                            {"bandwidth_mhz", src.bandwidth_mhz},
                            {"tx_power_dbm", src.tx_power_dbm},
                            {"path_loss_exponent", src.path_loss_exponent}});
  }
  j["objects"] = json::array();
  for (const auto& obj : s.objects) {
    j["objects"].push_back({{"min_corner", detail::position_json(obj.min_corner)},
                            {"max_corner", detail::position_json(obj.max_corner)},
                            {"attenuation_db", obj.attenuation_db}});
  }
  j["noise_sigma_db"] = s.noise_sigma_db;
  j["noise_floor_dbm"] = std::isfinite(s.noise_floor_dbm) ? json(s.noise_floor_dbm) : json(nullptr);
  j["rng_seed"] = s.rng_seed;
  return j;
}

/// Parse and validate a scenario; errors name the JSON path ("$.sources[1].bandwidth_mhz").
inline Scenario scenario_from_json(const json& j) {
  using namespace detail;
  Scenario s;
  const std::string root = "$";
  const auto dims = numbers(member(j, "room_dims", root), "$.room_dims", 3);
  s.room = {dims[0], dims[1], dims[2]};
  const json& sources = member(j, "sources", root);
  if (!sources.is_array()) throw ParseError("$.sources: expected an array");
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const std::string at = "$.sources[" + std::to_string(i) + "]";
    const json& js = sources[i];
    SoopSource src;
    src.position = position(member(js, "position", at), at + ".position");
    src.center_frequency_mhz = number_at(js, "center_frequency_mhz", at);
    src.bandwidth_mhz = number_at(js, "bandwidth_mhz", at);
    src.tx_power_dbm = number_at(js, "tx_power_dbm", at);
    src.path_loss_exponent = number_at(js, "path_loss_exponent", at);
    if (!(src.bandwidth_mhz > 0.0)) throw ParseError(at + ".bandwidth_mhz: must be > 0");
    if (!(src.path_loss_exponent >= 1.5 && src.path_loss_exponent <= 6.0)) {
      throw ParseError(at + ".path_loss_exponent: must lie in [1.5, 6]");
    }
    if (!inside(s.room, src.position)) throw ParseError(at + ".position: outside the room");
    s.sources.push_back(src);
  }
  if (j.contains("objects")) {
    const json& objects = j["objects"];
    if (!objects.is_array()) throw ParseError("$.objects: expected an array");
    for (std::size_t i = 0; i < objects.size(); ++i) {
      const std::string at = "$.objects[" + std::to_string(i) + "]";
      SignatureObject obj;
      obj.min_corner = position(member(objects[i], "min_corner", at), at + ".min_corner");
      obj.max_corner = position(member(objects[i], "max_corner", at), at + ".max_corner");
      obj.attenuation_db = number_at(objects[i], "attenuation_db", at);
      if (!(obj.attenuation_db >= 0.0)) throw ParseError(at + ".attenuation_db: must be >= 0");
      s.objects.push_back(obj);
    }
  }
  s.noise_sigma_db = number_at(j, "noise_sigma_db", root);
  if (!(s.noise_sigma_db >= 0.0)) throw ParseError("$.noise_sigma_db: must be >= 0");
  if (j.contains("noise_floor_dbm") && !j["noise_floor_dbm"].is_null()) {
    s.noise_floor_dbm = number(j["noise_floor_dbm"], "$.noise_floor_dbm");
  }
  const json& seed = member(j, "rng_seed", root);
  if (!seed.is_number_integer() || seed.get<long long>() < 0) {
    throw ParseError("$.rng_seed: expected a non-negative integer");
  }
  s.rng_seed = seed.get<std::uint64_t>();
  try {
    validate(s);
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("$: ") + e.what());
  }
  return s;
}

inline json sensor_to_json(const SensorConfig& c) {
  return {{"band_mhz", c.band_mhz},
          {"step_mhz", c.step_mhz},
          {"sample_rate_hz", c.sample_rate_hz},
          {"samples_per_position", c.samples_per_position},
          {"reconfig_index", c.reconfig_index}};
}

inline SensorConfig sensor_from_json(const json& j) {
  using namespace detail;
  SensorConfig c;
  c.band_mhz = numbers(member(j, "band_mhz", "$"), "$.band_mhz");
  if (j.contains("step_mhz")) c.step_mhz = number(j["step_mhz"], "$.step_mhz");
  if (j.contains("sample_rate_hz")) c.sample_rate_hz = number(j["sample_rate_hz"], "$.sample_rate_hz");
  if (j.contains("samples_per_position")) {
    if (!j["samples_per_position"].is_number_integer()) throw ParseError("$.samples_per_position: expected an integer");
    c.samples_per_position = j["samples_per_position"].get<int>();
  }
  if (j.contains("reconfig_index")) {
    if (!j["reconfig_index"].is_number_integer()) throw ParseError("$.reconfig_index: expected an integer");
    c.reconfig_index = j["reconfig_index"].get<int>();
  }
  try {
    validate(c);
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("$: ") + e.what());
  }
  return c;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error("failed writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// Result tables

inline void write_report_csv(std::ostream& out, const std::vector<EvalReport>& rows) {
  out << "model,rmse_m,r2,ce95_m,fit_time_s\n";
  for (const auto& r : rows) {
    out << r.model_id << ',' << format_double(r.rmse_m) << ',' << format_double(r.r2) << ','
        << format_double(r.ce95_m) << ',' << format_double(r.fit_time_s) << '\n';
  }
}

inline void write_importance_csv(std::ostream& out, const ImportanceReport& report) {
  out << "frequency_mhz,score_m\n";
  for (std::size_t j = 0; j < report.scores.size(); ++j) {
    out << format_double(report.frequencies_mhz[j]) << ',' << format_double(report.scores[j]) << '\n';
  }
}

/// `pc1..pcr,x,y,z` rows.
inline void write_pca_csv(std::ostream& out, const Matrix& scores, const Matrix& labels) {
  for (Eigen::Index c = 0; c < scores.cols(); ++c) out << "pc" << (c + 1) << ',';
  out << "x,y,z\n";
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    for (Eigen::Index c = 0; c < scores.cols(); ++c) out << format_double(scores(i, c)) << ',';
    out << format_double(labels(i, 0)) << ',' << format_double(labels(i, 1)) << ',' << format_double(labels(i, 2))
        << '\n';
  }
}

}  // namespace pips
