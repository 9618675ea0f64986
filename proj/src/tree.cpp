#include "ijcomb/tree.hpp"

#include <algorithm>
#include <numeric>

#include "ijcomb/error.hpp"

namespace ijcomb {

void validate(const TreeConfig& cfg) {
  if (cfg.min_samples_leaf < 1) throw Error(ErrorKind::config, "min_samples_leaf must be >= 1");
  if (cfg.max_depth && *cfg.max_depth < 1) throw Error(ErrorKind::config, "max_depth must be >= 1");
  if (cfg.features_per_split && *cfg.features_per_split < 1)
    throw Error(ErrorKind::config, "features_per_split must be >= 1");
}

void validate(const GbtConfig& cfg) {
  if (cfg.n_rounds < 1) throw Error(ErrorKind::config, "GBT needs at least one round");
  if (!(cfg.learning_rate > 0.0 && cfg.learning_rate <= 1.0))
    throw Error(ErrorKind::config, "GBT learning rate must lie in (0, 1]");
  if (cfg.max_depth < 1) throw Error(ErrorKind::config, "GBT max_depth must be >= 1");
}

int RegressionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<int> level(nodes_.size(), 0);
  int deepest = 0;
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    const Node& node = nodes_[id];
    if (node.left < 0) continue;
    level[node.left] = level[node.left + 1] = level[id] + 1;
    deepest = std::max(deepest, level[id] + 1);
  }
  return deepest;
}

TreeBuilder::TreeBuilder(const RowMatrix& X) : X_(&X) {
  const auto n = static_cast<int>(X.rows());
  const auto d = static_cast<int>(X.cols());
  sorted_.resize(static_cast<std::size_t>(n) * d);
  for (int f = 0; f < d; ++f) {
    auto block = sorted_.begin() + static_cast<std::ptrdiff_t>(f) * n;
    std::iota(block, block + n, 0);
    std::sort(block, block + n, [&](int a, int b) {
      const double xa = X(a, f), xb = X(b, f);
      return xa < xb || (xa == xb && a < b);
    });
  }
}

TreeBuilder::Sample TreeBuilder::prepare(std::span<const int> counts) const {
  const auto n = static_cast<int>(size());
  const auto d = static_cast<int>(dim());
  if (static_cast<int>(counts.size()) != n)
    throw Error(ErrorKind::dimension, "row multiset length does not match dataset");
  Sample s;
  for (int i = 0; i < n; ++i) {
    if (counts[i] < 0) throw Error(ErrorKind::domain, "negative row count");
    if (counts[i] > 0) {
      s.rows.push_back(i);
      s.total_weight += counts[i];
    }
  }
  if (s.rows.empty()) throw Error(ErrorKind::empty_data, "row multiset has zero total count");
  s.order.reserve(s.rows.size() * d);
  for (int f = 0; f < d; ++f) {
    auto block = sorted_.begin() + static_cast<std::ptrdiff_t>(f) * n;
    for (auto it = block; it != block + n; ++it)
      if (counts[*it] > 0) s.order.push_back(*it);
  }
  return s;
}

RegressionTree TreeBuilder::fit(std::span<const double> y, std::span<const int> counts,
                                const TreeConfig& cfg, SeedSpec seed) const {
  return fit(prepare(counts), y, counts, cfg, seed);
}

namespace {

struct Pending {
  std::int32_t node;
  int begin;
  int end;
  int depth;
};

}  // namespace

RegressionTree TreeBuilder::fit(const Sample& sample, std::span<const double> y,
                                std::span<const int> counts, const TreeConfig& cfg,
                                SeedSpec seed) const {
  validate(cfg);
  const RowMatrix& X = *X_;
  const auto d = static_cast<int>(dim());
  const auto u = static_cast<int>(sample.rows.size());
  if (static_cast<Eigen::Index>(y.size()) != size())
    throw Error(ErrorKind::dimension, "response length does not match dataset");
  if (sample.total_weight < cfg.min_samples_leaf)
    throw Error(ErrorKind::empty_data, "total count below min_samples_leaf");

  std::vector<int> work = sample.order;
  std::vector<int> scratch(static_cast<std::size_t>(u));
  std::vector<char> goes_left(static_cast<std::size_t>(size()), 0);
  std::vector<int> features(static_cast<std::size_t>(d));
  const int n_try = cfg.features_per_split ? std::min(*cfg.features_per_split, d) : d;
  Engine engine = make_engine(seed);

  RegressionTree tree;
  tree.nodes_.emplace_back();
  std::vector<Pending> stack{{0, 0, u, 0}};

  while (!stack.empty()) {
    const Pending cur = stack.back();
    stack.pop_back();
    const int count = cur.end - cur.begin;

    double W = 0.0, S = 0.0, lo = y[work[cur.begin]], hi = lo;
    for (int p = cur.begin; p < cur.end; ++p) {
      const int r = work[p];
      W += counts[r];
      S += counts[r] * y[r];
      lo = std::min(lo, y[r]);
      hi = std::max(hi, y[r]);
    }
    const double mean = S / W;
    tree.nodes_[cur.node].value = mean;

    const bool depth_left = !cfg.max_depth || cur.depth < *cfg.max_depth;
    if (!depth_left || count < 2 * cfg.min_samples_leaf || lo == hi) continue;

    double sse = 0.0;
    for (int p = cur.begin; p < cur.end; ++p) {
      const int r = work[p];
      sse += counts[r] * (y[r] - mean) * (y[r] - mean);
    }

    std::iota(features.begin(), features.end(), 0);
    if (n_try < d) {
      for (int a = 0; a < n_try; ++a) {
        std::uniform_int_distribution<int> pick(a, d - 1);
        std::swap(features[a], features[pick(engine)]);
      }
      std::sort(features.begin(), features.begin() + n_try);
    }

    // Gain of a split is SL^2 * W / (WL * WR) with sums taken over centered
    // responses; strict '>' keeps the lowest feature and threshold on ties.
    double best_gain = 0.0;
    int best_feature = -1, best_left = 0;
    double best_threshold = 0.0;
    for (int t = 0; t < n_try; ++t) {
      const int f = features[t];
      const int* seg = work.data() + static_cast<std::ptrdiff_t>(f) * u;
      double WL = 0.0, SL = 0.0;
      for (int p = cur.begin; p < cur.end - 1; ++p) {
        const int r = seg[p];
        WL += counts[r];
        SL += counts[r] * (y[r] - mean);
        const int n_left = p - cur.begin + 1;
        if (n_left < cfg.min_samples_leaf) continue;
        if (count - n_left < cfg.min_samples_leaf) break;
        const double xa = X(r, f), xb = X(seg[p + 1], f);
        if (!(xa < xb)) continue;
        const double WR = W - WL;
        const double gain = SL * SL * W / (WL * WR);
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          best_left = n_left;
          double mid = xa + 0.5 * (xb - xa);
          if (!(mid < xb)) mid = xa;
          best_threshold = mid;
        }
      }
    }
    if (best_feature < 0 || !(best_gain > 1e-12 * sse)) continue;

    const int split = cur.begin + best_left;
    {
      const int* seg = work.data() + static_cast<std::ptrdiff_t>(best_feature) * u;
      for (int p = cur.begin; p < cur.end; ++p) goes_left[seg[p]] = p < split;
    }
    for (int f = 0; f < d; ++f) {
      if (f == best_feature) continue;
      int* seg = work.data() + static_cast<std::ptrdiff_t>(f) * u;
      int l = cur.begin, r = 0;
      for (int p = cur.begin; p < cur.end; ++p) {
        if (goes_left[seg[p]])
          seg[l++] = seg[p];
        else
          scratch[r++] = seg[p];
      }
      std::copy(scratch.begin(), scratch.begin() + r, seg + l);
    }

    const auto left = static_cast<std::int32_t>(tree.nodes_.size());
    tree.nodes_.emplace_back();
    tree.nodes_.emplace_back();
    auto& parent = tree.nodes_[cur.node];
    parent.feature = best_feature;
    parent.value = best_threshold;
    parent.left = left;
    stack.push_back({left + 1, split, cur.end, cur.depth + 1});
    stack.push_back({left, cur.begin, split, cur.depth + 1});
  }
  return tree;
}

RegressionTree fit_tree(const Dataset& data, std::span<const int> counts, const TreeConfig& cfg,
                        SeedSpec seed) {
  validate(data);
  TreeBuilder builder(data.X);
  return builder.fit({data.y.data(), static_cast<std::size_t>(data.y.size())}, counts, cfg, seed);
}

double GbtModel::predict(std::span<const double> x, std::size_t rounds) const {
  double sum = 0.0;
  const std::size_t r = std::min(rounds, trees.size());
  for (std::size_t t = 0; t < r; ++t) sum += trees[t].predict(x);
  return base_score + learning_rate * sum;
}

GbtModel fit_gbt(const TreeBuilder& builder, std::span<const double> y, std::span<const int> counts,
                 const GbtConfig& cfg, SeedSpec seed) {
  validate(cfg);
  const TreeBuilder::Sample sample = builder.prepare(counts);
  const RowMatrix& X = builder.covariates();

  GbtModel model;
  model.learning_rate = cfg.learning_rate;
  double S = 0.0;
  for (int r : sample.rows) S += counts[r] * y[r];
  model.base_score = S / sample.total_weight;

  std::vector<double> residual(static_cast<std::size_t>(builder.size()), 0.0);
  for (int r : sample.rows) residual[r] = y[r] - model.base_score;

  const TreeConfig tree_cfg{cfg.max_depth, 1, std::nullopt};
  model.trees.reserve(static_cast<std::size_t>(cfg.n_rounds));
  for (int round = 0; round < cfg.n_rounds; ++round) {
    model.trees.push_back(builder.fit(sample, residual, counts, tree_cfg,
                                      seed.derive(static_cast<std::uint64_t>(round))));
    const RegressionTree& tree = model.trees.back();
    for (int r : sample.rows) residual[r] -= cfg.learning_rate * tree.predict(row_span(X, r));
  }
  return model;
}

GbtModel fit_gbt(const Dataset& data, const GbtConfig& cfg, SeedSpec seed) {
  validate(data);
  if (data.size() < 2) throw Error(ErrorKind::empty_data, "GBT needs at least two rows");
  TreeBuilder builder(data.X);
  std::vector<int> ones(static_cast<std::size_t>(data.size()), 1);
  return fit_gbt(builder, {data.y.data(), static_cast<std::size_t>(data.y.size())}, ones, cfg,
                 seed);
}

}  // namespace ijcomb
