#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ijcomb/data.hpp"

namespace ijcomb {

struct TreeConfig {
  std::optional<int> max_depth;           // nullopt grows to full depth
  int min_samples_leaf = 1;               // distinct rows, not weighted count
  std::optional<int> features_per_split;  // nullopt considers every feature
};

/// Axis-aligned regression tree. Internal nodes route left iff x[f] <= t.
class RegressionTree {
 public:
  struct Node {
    double value = 0.0;        // split threshold, or leaf prediction when left < 0
    std::int32_t left = -1;    // right child always sits at left + 1
    std::int32_t feature = -1;
  };

  double predict(std::span<const double> x) const {
    return nodes_[static_cast<std::size_t>(leaf_id(x))].value;
  }

  /// Index of the leaf node that x lands in; the root of a stump is leaf 0.
  int leaf_id(std::span<const double> x) const {
    std::int32_t id = 0;
    while (nodes_[id].left >= 0) {
      const Node& node = nodes_[id];
      id = x[node.feature] <= node.value ? node.left : node.left + 1;
    }
    return id;
  }

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t leaf_count() const noexcept { return (nodes_.size() + 1) / 2; }
  int depth() const;

 private:
  friend class TreeBuilder;
  std::vector<Node> nodes_;
};

/// Holds the covariates presorted along every feature so that many trees
/// can be grown on multisets of the same rows without re-sorting.
class TreeBuilder {
 public:
  explicit TreeBuilder(const RowMatrix& X);

  /// Rows with positive count, in sorted order for each feature. Reusable
  /// across fits that share the same counts (GBT rounds).
  struct Sample {
    std::vector<int> rows;
    std::vector<int> order;  // dim() blocks of rows.size() entries
    double total_weight = 0.0;
  };
  Sample prepare(std::span<const int> counts) const;

  RegressionTree fit(std::span<const double> y, std::span<const int> counts,
                     const TreeConfig& cfg, SeedSpec seed) const;
  RegressionTree fit(const Sample& sample, std::span<const double> y, std::span<const int> counts,
                     const TreeConfig& cfg, SeedSpec seed) const;

  const RowMatrix& covariates() const noexcept { return *X_; }
  Eigen::Index size() const noexcept { return X_->rows(); }
  Eigen::Index dim() const noexcept { return X_->cols(); }

 private:
  const RowMatrix* X_;
  std::vector<int> sorted_;  // dim() blocks of size() row indices
};

RegressionTree fit_tree(const Dataset& data, std::span<const int> counts, const TreeConfig& cfg,
                        SeedSpec seed);

struct GbtConfig {
  int n_rounds = 100;
  int max_depth = 6;
  double learning_rate = 0.3;
};

/// Plain squared-loss gradient boosting of depth-bounded trees.
struct GbtModel {
  double base_score = 0.0;
  double learning_rate = 0.3;
  std::vector<RegressionTree> trees;

  double predict(std::span<const double> x) const { return predict(x, trees.size()); }
  /// Prediction using only the first `rounds` trees.
  double predict(std::span<const double> x, std::size_t rounds) const;
};

GbtModel fit_gbt(const TreeBuilder& builder, std::span<const double> y, std::span<const int> counts,
                 const GbtConfig& cfg, SeedSpec seed);
GbtModel fit_gbt(const Dataset& data, const GbtConfig& cfg, SeedSpec seed);

void validate(const GbtConfig& cfg);
void validate(const TreeConfig& cfg);

}  // namespace ijcomb
