#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pips/core.hpp"
#include "pips/metrics.hpp"
#include "pips/registry.hpp"

namespace pips {

/// Fit every model on split.train and score it on split.test, in the order requested.
///
/// A failing model yields a row with NaN metrics and the error message; the
/// remaining models still run. Stacking models that share a base list reuse
/// one cross-fitted base layer; each such row's fit time includes it.
inline std::vector<EvalReport> benchmark(const std::vector<std::string>& model_ids, const SplitDataset& split,
                                         std::uint64_t seed) {
  std::vector<EvalReport> rows;
  std::map<std::pair<std::vector<std::string>, int>, std::shared_ptr<StackedBases>> layers;
  const Matrix& x = split.train.features();
  const Matrix& y = split.train.labels();
  for (const auto& id : model_ids) {
    try {
      const EnsembleSpec spec = parse_model_id(id, seed);
      auto model = make_regressor(spec);
      double extra_time = 0.0;
      if (spec.strategy == Strategy::Stacking) {
        auto& layer = layers[{spec.base, spec.n_folds}];
        if (!layer) {
          std::vector<std::unique_ptr<Regressor>> prototypes;
          for (const auto& b : spec.base) prototypes.push_back(make_model(b, spec.seed));
          layer = StackedBases::fit(prototypes, x, y, spec.n_folds, spec.seed);
        }
        static_cast<StackingRegressor&>(*model).use_shared_bases(layer);
        extra_time = layer->fit_time_s;
      }
      model->fit(x, y);
      const Matrix pred = model->predict(split.test.features());
      rows.push_back(evaluate(id, split.test.labels(), pred, model->fit_time_s() + extra_time));
    } catch (const std::exception& e) {
      EvalReport failed;
      failed.model_id = id;
      failed.rmse_m = failed.r2 = failed.ce95_m = failed.fit_time_s = std::numeric_limits<double>::quiet_NaN();
      failed.error = e.what();
      rows.push_back(std::move(failed));
    }
  }
  return rows;
}

}  // namespace pips
