#pragma once

#include "ijcomb/ensemble.hpp"
#include "ijcomb/tree.hpp"

namespace ijcomb {

using Forest = Ensemble<RegressionTree>;
using GbtEnsemble = Ensemble<GbtModel>;

struct ForestConfig {
  EnsembleConfig ensemble;
  TreeConfig tree;
};

struct GbtEnsembleConfig {
  EnsembleConfig ensemble;
  GbtConfig gbt;
};

Forest fit_forest(const Dataset& data, const ForestConfig& cfg, SeedSpec seed);
GbtEnsemble fit_gbt_ensemble(const Dataset& data, const GbtEnsembleConfig& cfg, SeedSpec seed);

}  // namespace ijcomb
