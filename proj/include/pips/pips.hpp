#pragma once

#include "pips/adaboost.hpp"
#include "pips/bagging.hpp"
#include "pips/band_select.hpp"
#include "pips/benchmark.hpp"
#include "pips/boosting.hpp"
#include "pips/cart.hpp"
#include "pips/core.hpp"
#include "pips/error.hpp"
#include "pips/gpr.hpp"
#include "pips/io.hpp"
#include "pips/knn.hpp"
#include "pips/metrics.hpp"
#include "pips/mlp.hpp"
#include "pips/model.hpp"
#include "pips/pca.hpp"
#include "pips/random.hpp"
#include "pips/registry.hpp"
#include "pips/rtl_power.hpp"
#include "pips/simulator.hpp"
#include "pips/stacking.hpp"
#include "pips/svr.hpp"
