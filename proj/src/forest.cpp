#include "ijcomb/forest.hpp"

namespace ijcomb {

Forest fit_forest(const Dataset& data, const ForestConfig& cfg, SeedSpec seed) {
  validate(data);
  validate(cfg.tree);
  const TreeBuilder builder(data.X);
  const std::span<const double> y(data.y.data(), static_cast<std::size_t>(data.y.size()));
  return fit_ensemble<RegressionTree>(
      data, cfg.ensemble,
      [&](std::span<const int> counts, SeedSpec member_seed) {
        return builder.fit(y, counts, cfg.tree, member_seed);
      },
      seed);
}

GbtEnsemble fit_gbt_ensemble(const Dataset& data, const GbtEnsembleConfig& cfg, SeedSpec seed) {
  validate(data);
  validate(cfg.gbt);
  const TreeBuilder builder(data.X);
  const std::span<const double> y(data.y.data(), static_cast<std::size_t>(data.y.size()));
  return fit_ensemble<GbtModel>(
      data, cfg.ensemble,
      [&](std::span<const int> counts, SeedSpec member_seed) {
        return fit_gbt(builder, y, counts, cfg.gbt, member_seed);
      },
      seed);
}

}  // namespace ijcomb
