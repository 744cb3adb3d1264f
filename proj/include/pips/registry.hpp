#pragma once

// Model identifiers used on the command line and in run configs.
//
//   base:      svr knr gpr dtr mlp
//   boosting:  abr-<base> gbr hgbr
//   bagging:   bagging-<base> rfr ert
//   stacking:  stacking-<final>[:<base>+<base>+...]
//
// A stacking final is any non-stacking id ("abr" alone means abr-dtr, "etr"
// is accepted for ert). Without an explicit base list the ten standard
// regressors are stacked.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pips/adaboost.hpp"
#include "pips/bagging.hpp"
#include "pips/boosting.hpp"
#include "pips/cart.hpp"
#include "pips/gpr.hpp"
#include "pips/knn.hpp"
#include "pips/mlp.hpp"
#include "pips/stacking.hpp"
#include "pips/svr.hpp"

namespace pips {

enum class Strategy { Single, BoostingAbr, BoostingGbr, BoostingHgbr, Bagging, RandomForest, ExtraTrees, Stacking };

NLOHMANN_JSON_SERIALIZE_ENUM(Strategy, {{Strategy::Single, "single"},
                                        {Strategy::BoostingAbr, "boosting-abr"},
                                        {Strategy::BoostingGbr, "boosting-gbr"},
                                        {Strategy::BoostingHgbr, "boosting-hgbr"},
                                        {Strategy::Bagging, "bagging"},
                                        {Strategy::RandomForest, "random-forest"},
                                        {Strategy::ExtraTrees, "extra-trees"},
                                        {Strategy::Stacking, "stacking"}})

struct EnsembleSpec {
  Strategy strategy = Strategy::Single;
  /// Base estimator ids (one for single/abr/bagging; the stack for stacking).
  std::vector<std::string> base;
  /// Final estimator id, stacking only.
  std::string final;
  int n_estimators = 100;
  double learning_rate = 0.1;
  int max_depth = 3;
  int max_bins = 255;
  int max_features = 0;
  int n_folds = 5;
  std::uint64_t seed = 0;

  bool operator==(const EnsembleSpec&) const = default;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(EnsembleSpec, strategy, base, final, n_estimators, learning_rate,
                                                max_depth, max_bins, max_features, n_folds, seed)

inline void validate(const EnsembleSpec& spec) {
  if (spec.n_estimators < 1) throw InvalidArgument("ensemble: n_estimators must be >= 1");
  if (!(spec.learning_rate > 0.0 && spec.learning_rate <= 1.0)) {
    throw InvalidArgument("ensemble: learning_rate must lie in (0, 1]");
  }
  if (spec.max_bins < 2 || spec.max_bins > 256) throw InvalidArgument("ensemble: max_bins must lie in [2, 256]");
  if (spec.n_folds < 2) throw InvalidArgument("ensemble: n_folds must be >= 2");
  if (spec.base.empty()) throw InvalidArgument("ensemble: no base estimator");
  if (spec.strategy == Strategy::Stacking && spec.final.empty()) {
    throw InvalidArgument("ensemble: stacking needs a final estimator");
  }
}

inline const std::vector<std::string>& base_ids() {
  static const std::vector<std::string> ids{"svr", "knr", "gpr", "dtr", "mlp"};
  return ids;
}

/// The ten regressors stacked by default, in table order.
inline const std::vector<std::string>& standard_stack() {
  static const std::vector<std::string> ids{"svr", "knr", "gpr", "dtr", "mlp", "abr-dtr", "gbr", "hgbr", "rfr", "ert"};
  return ids;
}

inline std::vector<std::string> model_group(const std::string& group) {
  if (group == "baseline-all") return base_ids();
  if (group == "boosting-all") return {"abr-svr", "abr-knr", "abr-gpr", "abr-dtr", "gbr", "hgbr"};
  if (group == "bagging-all") return {"bagging-svr", "bagging-knr", "bagging-gpr", "rfr", "ert"};
  if (group == "stacking-all") {
    return {"stacking-svr", "stacking-knr", "stacking-gpr", "stacking-dtr", "stacking-mlp",
            "stacking-abr", "stacking-gbr", "stacking-hgbr", "stacking-rfr", "stacking-ert"};
  }
  return {};
}

inline std::string valid_model_ids_help() {
  return "valid ids: svr knr gpr dtr mlp, abr-<base>, gbr, hgbr, bagging-<base>, rfr, ert, "
         "stacking-<final>[:<base>+...]; groups: baseline-all boosting-all bagging-all stacking-all";
}

namespace detail {

inline bool is_base(const std::string& id) {
  return std::find(base_ids().begin(), base_ids().end(), id) != base_ids().end();
}

inline std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace detail

/// Parse a model id into its spec (defaults filled in). Throws InvalidArgument on unknown ids.
inline EnsembleSpec parse_model_id(const std::string& raw_id, std::uint64_t seed = 0) {
  std::string id = raw_id;
  if (id == "etr") id = "ert";
  if (id == "abr") id = "abr-dtr";
  EnsembleSpec spec;
  spec.seed = seed;
  auto fail = [&] { return InvalidArgument("unknown model id '" + raw_id + "'; " + valid_model_ids_help()); };

  if (detail::is_base(id)) {
    spec.strategy = Strategy::Single;
    spec.base = {id};
  } else if (id.rfind("abr-", 0) == 0 && detail::is_base(id.substr(4))) {
    spec.strategy = Strategy::BoostingAbr;
    spec.base = {id.substr(4)};
    spec.n_estimators = 50;
  } else if (id == "gbr" || id == "hgbr") {
    spec.strategy = id == "gbr" ? Strategy::BoostingGbr : Strategy::BoostingHgbr;
    spec.base = {"dtr"};
  } else if (id.rfind("bagging-", 0) == 0 && detail::is_base(id.substr(8))) {
    spec.strategy = Strategy::Bagging;
    spec.base = {id.substr(8)};
  } else if (id == "rfr" || id == "ert") {
    spec.strategy = id == "rfr" ? Strategy::RandomForest : Strategy::ExtraTrees;
    spec.base = {"dtr"};
  } else if (id.rfind("stacking-", 0) == 0) {
    std::string rest = id.substr(9);
    std::vector<std::string> bases = standard_stack();
    if (const auto colon = rest.find(':'); colon != std::string::npos) {
      bases = detail::split_list(rest.substr(colon + 1), '+');
      rest = rest.substr(0, colon);
      if (bases.empty()) throw fail();
    }
    if (rest.rfind("stacking", 0) == 0) throw fail();
    spec.strategy = Strategy::Stacking;
    parse_model_id(rest);  // validates the final id
    spec.final = rest == "etr" ? "ert" : (rest == "abr" ? "abr-dtr" : rest);
    for (auto& b : bases) {
      if (b == "etr") b = "ert";
      if (b == "abr") b = "abr-dtr";
      if (b.rfind("stacking", 0) == 0) throw fail();
      parse_model_id(b);  // validates
    }
    spec.base = std::move(bases);
  } else {
    throw fail();
  }
  return spec;
}

inline std::unique_ptr<Regressor> make_base(const std::string& id, std::uint64_t seed) {
  if (id == "svr") return std::make_unique<SvrRegressor>();
  if (id == "knr") return std::make_unique<KnnRegressor>();
  if (id == "gpr") return std::make_unique<GprRegressor>();
  if (id == "dtr") {
    TreeOptions opts;
    opts.seed = seed;
    return std::make_unique<CartRegressor>(opts);
  }
  if (id == "mlp") return std::make_unique<MlpRegressor>(100, 500, 0.05, seed);
  throw InvalidArgument("unknown base estimator '" + id + "'; " + valid_model_ids_help());
}

inline std::unique_ptr<Regressor> make_regressor(const EnsembleSpec& spec);

/// Build an unfitted model from an id string.
inline std::unique_ptr<Regressor> make_model(const std::string& id, std::uint64_t seed = 0) {
  return make_regressor(parse_model_id(id, seed));
}

inline std::unique_ptr<Regressor> make_regressor(const EnsembleSpec& spec) {
  validate(spec);
  auto single_base = [&]() -> const std::string& {
    if (spec.base.size() != 1) throw InvalidArgument("ensemble needs exactly one base estimator");
    return spec.base.front();
  };
  switch (spec.strategy) {
    case Strategy::Single:
      return make_base(single_base(), spec.seed);
    case Strategy::BoostingAbr:
      return std::make_unique<AdaBoostR2>(make_base(single_base(), spec.seed), spec.n_estimators, spec.seed);
    case Strategy::BoostingGbr:
    case Strategy::BoostingHgbr: {
      BoostingOptions opts;
      opts.n_estimators = spec.n_estimators;
      opts.learning_rate = spec.learning_rate;
      opts.max_depth = spec.max_depth;
      opts.max_bins = spec.strategy == Strategy::BoostingHgbr ? spec.max_bins : 0;
      opts.seed = spec.seed;
      return std::make_unique<GradientBoosting>(opts);
    }
    case Strategy::Bagging:
      return std::make_unique<BaggingRegressor>(make_base(single_base(), spec.seed), spec.n_estimators, true,
                                                spec.seed);
    case Strategy::RandomForest:
      return make_random_forest(spec.n_estimators, spec.max_features, spec.seed);
    case Strategy::ExtraTrees:
      return make_extra_trees(spec.n_estimators, spec.max_features, spec.seed);
    case Strategy::Stacking: {
      std::vector<std::unique_ptr<Regressor>> bases;
      for (const auto& b : spec.base) bases.push_back(make_model(b, spec.seed));
      return std::make_unique<StackingRegressor>(std::move(bases), make_model(spec.final, spec.seed), spec.n_folds,
                                                 spec.seed);
    }
  }
  throw InvalidArgument("unhandled ensemble strategy");
}

/// Expand groups and validate every id; order is preserved.
inline std::vector<std::string> expand_model_list(const std::vector<std::string>& requested) {
  std::vector<std::string> out;
  for (const auto& id : requested) {
    if (auto group = model_group(id); !group.empty()) {
      out.insert(out.end(), group.begin(), group.end());
    } else {
      parse_model_id(id);
      out.push_back(id);
    }
  }
  return out;
}

}  // namespace pips
