// pips: batch command line for simulation, benchmarking, band selection,
// PCA export, rtl_power ingestion and dataset splitting.
//
// Exit status: 0 success, 2 usage error, 1 runtime error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pips/pips.hpp"

namespace {

using pips::json;

constexpr int kUsageError = 2;
constexpr int kRuntimeError = 1;

/// Reads `--config` files written as JSON. Top-level keys set global options,
/// an object under a subcommand name sets that subcommand's options.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    json j;
    for (const CLI::Option* opt : app->get_options({})) {
      if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
      const std::string name = opt->get_lnames().front();
      if (opt->count() > 0) {
        const auto& res = opt->results();
        j[name] = res.size() == 1 ? json(res.front()) : json(res);
      } else if (default_also && !opt->get_default_str().empty()) {
        j[name] = opt->get_default_str();
      }
    }
    return j.dump(2) + "\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json j;
    try {
      j = json::parse(input);
    } catch (const json::parse_error& e) {
      throw CLI::ConversionError(std::string("config file: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config file: top level must be an object");
    std::vector<CLI::ConfigItem> items;
    flatten(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_float()) return pips::format_double(v.get<double>());
    return v.dump();
  }

  static void flatten(const json& j, const std::vector<std::string>& parents, std::vector<CLI::ConfigItem>& out) {
    for (const auto& [key, value] : j.items()) {
      std::string name = key;
      std::replace(name.begin(), name.end(), '_', '-');
      if (value.is_object()) {
        auto next = parents;
        next.push_back(name);
        flatten(value, next, out);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = name;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      out.push_back(std::move(item));
    }
  }
};

std::string fixed(double v, int digits) {
  if (!std::isfinite(v)) return pips::format_double(v);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string scenario;
  std::string sensor;
  bool paper = false;
  std::size_t fullband = 0;
  std::uint64_t seed = 0;
  std::string out;
};

std::vector<pips::Position> positions_from_json(const json& j) {
  std::vector<pips::Position> out;
  if (!j.is_array()) throw pips::ParseError("$.positions: expected an array");
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(pips::detail::position(j[i], "$.positions[" + std::to_string(i) + "]"));
  }
  return out;
}

int run_simulate(const SimulateArgs& a) {
  pips::ScenarioSetup setup;
  if (a.paper) {
    setup = pips::make_paper_scenario(a.seed);
  } else if (a.fullband > 0) {
    setup = pips::make_fullband_scenario(a.seed, a.fullband);
  } else {
    const json j = pips::read_json_file(a.scenario);
    try {
      setup.scenario = pips::scenario_from_json(j);
      setup.positions = j.contains("positions") ? positions_from_json(j["positions"])
                                                : pips::make_paper_scenario(0).positions;
    } catch (const pips::ParseError& e) {
      throw pips::ParseError(a.scenario + ": " + e.what());
    }
    setup.scenario.rng_seed = a.seed;
    setup.sensor = pips::make_paper_scenario(0).sensor;
  }
  if (!a.sensor.empty()) {
    try {
      setup.sensor = pips::sensor_from_json(pips::read_json_file(a.sensor));
    } catch (const pips::ParseError& e) {
      throw pips::ParseError(a.sensor + ": " + e.what());
    }
  }
  const pips::Dataset data = pips::generate_dataset(setup.scenario, setup.sensor, setup.positions);
  pips::write_dataset_file(a.out, data);
  std::cout << "n " << data.n() << ", m " << data.m() << ", positions " << setup.positions.size() << '\n';
  return 0;
}

struct BenchmarkArgs {
  std::string data;
  std::vector<std::string> models{"baseline-all"};
  double split = 0.7;
  std::uint64_t seed = 0;
  std::string out;
};

int run_benchmark(const BenchmarkArgs& a) {
  std::vector<std::string> ids;
  try {
    ids = pips::expand_model_list(a.models);
  } catch (const pips::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n" << pips::valid_model_ids_help() << '\n';
    return kUsageError;
  }
  const pips::Dataset data = pips::read_dataset_file(a.data);
  const pips::SplitDataset split = pips::train_test_split(data, a.split, a.seed);
  const auto rows = pips::benchmark(ids, split, a.seed);

  if (!a.out.empty()) {
    std::ostringstream csv;
    pips::write_report_csv(csv, rows);
    pips::write_text_file(a.out, csv.str());
  }

  std::size_t width = 5;
  for (const auto& r : rows) width = std::max(width, r.model_id.size());
  std::printf("%-*s  %9s  %7s  %9s  %10s\n", static_cast<int>(width), "Model", "RMSE (m)", "R2", "CE95 (m)",
              "Time (s)");
  bool any_failed = false;
  for (const auto& r : rows) {
    std::printf("%-*s  %9s  %7s  %9s  %10s", static_cast<int>(width), r.model_id.c_str(), fixed(r.rmse_m, 3).c_str(),
                fixed(r.r2, 3).c_str(), fixed(r.ce95_m, 3).c_str(), fixed(r.fit_time_s, 3).c_str());
    if (!r.error.empty()) {
      std::printf("  error: %s", r.error.c_str());
      any_failed = true;
    }
    std::printf("\n");
  }
  std::fflush(stdout);
  return any_failed ? kRuntimeError : 0;
}

struct SelectBandArgs {
  std::string data;
  std::string model = "dtr";
  std::size_t top_k = 5;
  int repeats = 5;
  double split = 0.7;
  std::uint64_t seed = 0;
  std::string sensor;
  std::string out;
  std::string sensor_out;
};

int run_select_band(const SelectBandArgs& a) {
  const pips::Dataset data = pips::read_dataset_file(a.data);
  if (a.top_k > data.m()) {
    std::cerr << "error: --top-k " << a.top_k << " out of range [1, " << data.m() << "]\n";
    return kUsageError;
  }
  pips::SensorConfig current;
  if (!a.sensor.empty()) {
    current = pips::sensor_from_json(pips::read_json_file(a.sensor));
    if (current.band_mhz != data.frequencies()) {
      throw pips::InvalidArgument("sensor band does not match the dataset's frequency columns");
    }
  } else {
    current.band_mhz = data.frequencies();
  }
  const pips::SplitDataset split = pips::train_test_split(data, a.split, a.seed);
  auto model = pips::make_model(a.model, a.seed);
  model->fit(split.train);
  const auto report = pips::permutation_importance(*model, split.train.frequencies(), split.test, a.repeats, a.seed);
  const pips::SensorConfig rated = pips::select_rated_band(report, a.top_k, current);

  std::ostringstream csv;
  pips::write_importance_csv(csv, report);
  pips::write_text_file(a.out, csv.str());
  pips::write_text_file(a.sensor_out, pips::sensor_to_json(rated).dump(2) + "\n");

  std::cout << "baseline rmse " << fixed(report.baseline_rmse, 4) << " m\nrated band (MHz):";
  for (double f : rated.band_mhz) std::cout << ' ' << pips::format_double(f);
  std::cout << "\nsampled-frequency reduction " << fixed(100.0 * pips::sampling_reduction(current, rated), 2)
            << "%\n";
  return 0;
}

struct PcaArgs {
  std::string data;
  int components = 3;
  std::string out;
};

int run_pca(const PcaArgs& a) {
  const pips::Dataset data = pips::read_dataset_file(a.data);
  const pips::PcaModel model = pips::pca_fit(data.features(), a.components);
  const pips::Matrix scores = pips::pca_transform(model, data.features());
  std::ostringstream csv;
  pips::write_pca_csv(csv, scores, data.labels());
  pips::write_text_file(a.out, csv.str());
  std::cout << "explained variance ratio:";
  for (Eigen::Index i = 0; i < model.explained_ratio.size(); ++i) std::cout << ' ' << fixed(model.explained_ratio(i), 6);
  std::cout << "\ntotal " << fixed(model.explained_ratio.sum(), 6) << '\n';
  return 0;
}

struct IngestArgs {
  std::string scan;
  std::vector<double> position;
  std::vector<double> band;
  double step = 2.4;
  std::string out;
};

int run_ingest(const IngestArgs& a) {
  std::ifstream in(a.scan, std::ios::binary);
  if (!in) throw pips::Error("cannot open scan file '" + a.scan + "'");
  std::optional<std::vector<double>> band;
  if (!a.band.empty()) band = a.band;
  pips::Dataset rows;
  try {
    rows = pips::ingest_rtl_power(in, {a.position[0], a.position[1], a.position[2]}, band, a.step);
  } catch (const pips::ParseError& e) {
    throw pips::ParseError(a.scan + ": " + e.what(), e.line());
  }

  namespace fs = std::filesystem;
  const std::string header = pips::dataset_header(rows.frequencies());
  const bool existing = fs::exists(a.out) && fs::file_size(a.out) > 0;
  if (existing) {
    std::ifstream check(a.out, std::ios::binary);
    std::string first;
    std::getline(check, first);
    if (first != header) {
      throw pips::Error(a.out + ": header '" + first + "' does not match the ingested band '" + header + "'");
    }
  }
  std::ofstream out(a.out, std::ios::binary | std::ios::app);
  if (!out) throw pips::Error("cannot open '" + a.out + "' for writing");
  if (!existing) out << header << '\n';
  pips::write_dataset_rows(out, rows);
  if (!out) throw pips::Error("failed writing '" + a.out + "'");
  std::cout << "appended " << rows.n() << " row(s) with " << rows.m() << " frequencies\n";
  return 0;
}

struct SplitArgs {
  std::string data;
  double fraction = 0.7;
  std::uint64_t seed = 0;
  std::string train_out;
  std::string test_out;
};

int run_split(const SplitArgs& a) {
  const pips::Dataset data = pips::read_dataset_file(a.data);
  const pips::SplitDataset split = pips::train_test_split(data, a.fraction, a.seed);
  pips::write_dataset_file(a.train_out, split.train);
  pips::write_dataset_file(a.test_out, split.test);
  std::cout << "train " << split.train.n() << ", test " << split.test.n() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Passive-RF indoor positioning toolkit"};
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file with option values; command-line flags take precedence");
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic fingerprint dataset");
  auto* scen_opt = simulate->add_option("--scenario", sim.scenario, "Scenario JSON file")->check(CLI::ExistingFile);
  auto* paper_opt = simulate->add_flag("--paper-scenario", sim.paper, "Use the built-in living-room scenario");
  auto* full_opt =
      simulate->add_option("--fullband", sim.fullband, "Use the built-in wide-band scenario with N frequencies")
          ->check(CLI::Range(std::size_t{10}, std::size_t{100000}));
  scen_opt->excludes(paper_opt)->excludes(full_opt);
  paper_opt->excludes(full_opt);
  simulate->add_option("--sensor", sim.sensor, "Sensor config JSON (overrides the scenario's band)")
      ->check(CLI::ExistingFile);
  simulate->add_option("--seed", sim.seed, "Random seed")->required();
  simulate->add_option("--out", sim.out, "Output dataset CSV")->required();

  BenchmarkArgs bench;
  auto* benchmark = app.add_subcommand("benchmark", "Fit and score regressors on a train/test split");
  benchmark->add_option("--data", bench.data, "Dataset CSV")->required()->check(CLI::ExistingFile);
  benchmark->add_option("--models", bench.models, "Model ids or groups")->delimiter(',')->capture_default_str();
  benchmark->add_option("--split", bench.split, "Training fraction")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  benchmark->add_option("--seed", bench.seed, "Random seed")->required();
  benchmark->add_option("--out", bench.out, "Report CSV");

  SelectBandArgs sel;
  auto* select = app.add_subcommand("select-band", "Rank frequencies by permutation importance and pick a rated band");
  select->add_option("--data", sel.data, "Full-band dataset CSV")->required()->check(CLI::ExistingFile);
  select->add_option("--model", sel.model, "Model id used for ranking")->capture_default_str();
  select->add_option("--top-k", sel.top_k, "Number of frequencies to keep")
      ->check(CLI::Range(std::size_t{1}, std::size_t{1000000}))
      ->capture_default_str();
  select->add_option("--repeats", sel.repeats, "Shuffles per frequency")->check(CLI::Range(1, 1000))->capture_default_str();
  select->add_option("--split", sel.split, "Training fraction")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  select->add_option("--seed", sel.seed, "Random seed")->required();
  select->add_option("--sensor", sel.sensor, "Current sensor config JSON")->check(CLI::ExistingFile);
  select->add_option("--out", sel.out, "Importance CSV")->required();
  select->add_option("--sensor-out", sel.sensor_out, "Rated-band sensor config JSON")->required();

  PcaArgs pca_args;
  auto* pca = app.add_subcommand("pca", "Project features onto principal components");
  pca->add_option("--data", pca_args.data, "Dataset CSV")->required()->check(CLI::ExistingFile);
  pca->add_option("--components", pca_args.components, "Number of components")
      ->check(CLI::Range(1, 1000000))
      ->capture_default_str();
  pca->add_option("--out", pca_args.out, "Scores CSV")->required();

  IngestArgs ing;
  auto* ingest = app.add_subcommand("ingest-rtlpower", "Append rtl_power scan sweeps as labelled dataset rows");
  ingest->add_option("--scan", ing.scan, "rtl_power CSV")->required()->check(CLI::ExistingFile);
  ingest->add_option("--position", ing.position, "Sensor position x,y,z in metres")
      ->required()
      ->expected(3)
      ->delimiter(',');
  ingest->add_option("--band", ing.band, "Frequencies to keep, MHz")->delimiter(',');
  ingest->add_option("--step", ing.step, "Matching tolerance is step / 2, MHz")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ingest->add_option("--out", ing.out, "Dataset CSV to append to")->required();

  SplitArgs spl;
  auto* split = app.add_subcommand("split", "Write a seeded train/test split as two CSVs");
  split->add_option("--data", spl.data, "Dataset CSV")->required()->check(CLI::ExistingFile);
  split->add_option("--fraction", spl.fraction, "Training fraction")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  split->add_option("--seed", spl.seed, "Random seed")->required();
  split->add_option("--train-out", spl.train_out, "Training CSV")->required();
  split->add_option("--test-out", spl.test_out, "Test CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }
  if (simulate->parsed() && sim.scenario.empty() && !sim.paper && sim.fullband == 0) {
    std::cerr << "simulate: one of --scenario, --paper-scenario or --fullband is required\n";
    return kUsageError;
  }

  try {
    if (simulate->parsed()) return run_simulate(sim);
    if (benchmark->parsed()) return run_benchmark(bench);
    if (select->parsed()) return run_select_band(sel);
    if (pca->parsed()) return run_pca(pca_args);
    if (ingest->parsed()) return run_ingest(ing);
    if (split->parsed()) return run_split(spl);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}
