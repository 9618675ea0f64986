#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>

#include "ijcomb/types.hpp"

namespace ijcomb {

enum class SignalKind { friedman, linear, constant };

std::string_view to_string(SignalKind kind) noexcept;
SignalKind parse_signal(std::string_view name);

/// Identifies one reproducible random stream. Streams with distinct
/// (master_seed, stream_index) pairs are statistically independent, and
/// `derive` builds a tree of sub-streams without any shared state.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;

  SeedSpec derive(std::uint64_t child) const noexcept;
  std::uint64_t key() const noexcept;

  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

using Engine = std::mt19937_64;
Engine make_engine(SeedSpec seed);

/// The single training sample every model shares.
struct Dataset {
  RowMatrix X;
  Vector y;

  Eigen::Index size() const noexcept { return X.rows(); }
  Eigen::Index dim() const noexcept { return X.cols(); }
};

/// Query points, one per row.
struct QuerySet {
  RowMatrix Q;

  Eigen::Index size() const noexcept { return Q.rows(); }
  Eigen::Index dim() const noexcept { return Q.cols(); }
};

/// Throws unless n >= 1, y has n entries and everything is finite.
void validate(const Dataset& data);
void validate(const QuerySet& queries, const Dataset& data);

inline constexpr int kDefaultDim = 6;

int min_signal_dim(SignalKind kind) noexcept;
double eval_signal(SignalKind kind, std::span<const double> x);

Dataset gen_dataset(SignalKind kind, int n, int d, SeedSpec seed);
QuerySet gen_queries(SignalKind kind, int m, int d, SeedSpec seed);

/// True conditional mean at every query row.
Vector true_mean(SignalKind kind, const QuerySet& queries);

}  // namespace ijcomb
