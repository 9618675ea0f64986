#include "ijcomb/data.hpp"

#include <cmath>
#include <numbers>

#include "ijcomb/error.hpp"

namespace ijcomb {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::empty_data: return "empty_data";
    case ErrorKind::singular_design: return "singular_design";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::estimation: return "estimation";
    case ErrorKind::singular_covariance: return "singular_covariance";
    case ErrorKind::negative_variance: return "negative_variance";
    case ErrorKind::domain: return "domain";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

std::string_view to_string(SignalKind kind) noexcept {
  switch (kind) {
    case SignalKind::friedman: return "friedman";
    case SignalKind::linear: return "linear";
    case SignalKind::constant: return "constant";
  }
  return "unknown";
}

SignalKind parse_signal(std::string_view name) {
  if (name == "friedman" || name == "Friedman") return SignalKind::friedman;
  if (name == "linear" || name == "Linear") return SignalKind::linear;
  if (name == "constant" || name == "Constant") return SignalKind::constant;
  throw Error(ErrorKind::config, "unknown signal '" + std::string(name) + "'");
}

namespace {

// SplitMix64 finalizer; a bijection on 64-bit words with full avalanche.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t SeedSpec::key() const noexcept {
  return mix64(mix64(master_seed) ^ mix64(stream_index ^ 0x5851f42d4c957f2dULL));
}

SeedSpec SeedSpec::derive(std::uint64_t child) const noexcept {
  return SeedSpec{key(), child};
}

Engine make_engine(SeedSpec seed) {
  const std::uint64_t k = seed.key();
  std::seed_seq seq{static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32),
                    static_cast<std::uint32_t>(seed.stream_index),
                    static_cast<std::uint32_t>(seed.stream_index >> 32)};
  return Engine(seq);
}

void validate(const Dataset& data) {
  if (data.X.rows() < 1) throw Error(ErrorKind::empty_data, "dataset has no rows");
  if (data.y.size() != data.X.rows())
    throw Error(ErrorKind::dimension, "response length does not match covariate rows");
  if (!data.X.allFinite() || !data.y.allFinite())
    throw Error(ErrorKind::domain, "dataset contains non-finite values");
}

void validate(const QuerySet& queries, const Dataset& data) {
  if (queries.Q.rows() < 1) throw Error(ErrorKind::empty_data, "query set is empty");
  if (queries.Q.cols() != data.X.cols())
    throw Error(ErrorKind::dimension, "query dimension does not match dataset");
}

int min_signal_dim(SignalKind kind) noexcept {
  switch (kind) {
    case SignalKind::friedman: return 5;
    case SignalKind::linear: return 4;
    case SignalKind::constant: return 0;
  }
  return 0;
}

double eval_signal(SignalKind kind, std::span<const double> x) {
  if (static_cast<int>(x.size()) < min_signal_dim(kind))
    throw Error(ErrorKind::dimension, std::string(to_string(kind)) + " signal needs at least " +
                                          std::to_string(min_signal_dim(kind)) + " covariates");
  switch (kind) {
    case SignalKind::friedman: {
      const double c = x[2] - 0.5;
      return 10.0 * std::sin(std::numbers::pi * x[0] * x[1]) + 20.0 * c * c + 10.0 * x[3] +
             5.0 * x[4];
    }
    case SignalKind::linear:
      return x[0] + x[1] + x[2] + x[3];
    case SignalKind::constant:
      return 2.0;
  }
  return 0.0;
}

namespace {

RowMatrix uniform_rows(int rows, int d, Engine& engine) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  RowMatrix X(rows, d);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < d; ++j) X(i, j) = unif(engine);
  return X;
}

void check_dim(SignalKind kind, int d) {
  if (d < 1 || d < min_signal_dim(kind))
    throw Error(ErrorKind::dimension, "dimension " + std::to_string(d) + " too small for " +
                                          std::string(to_string(kind)) + " signal");
}

}  // namespace

Dataset gen_dataset(SignalKind kind, int n, int d, SeedSpec seed) {
  if (n < 1) throw Error(ErrorKind::empty_data, "requested an empty dataset");
  check_dim(kind, d);
  Engine engine = make_engine(seed);
  Dataset data;
  data.X = uniform_rows(n, d, engine);
  data.y.resize(n);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int i = 0; i < n; ++i) data.y[i] = eval_signal(kind, row_span(data.X, i)) + noise(engine);
  return data;
}

QuerySet gen_queries(SignalKind kind, int m, int d, SeedSpec seed) {
  if (m < 1) throw Error(ErrorKind::empty_data, "requested an empty query set");
  check_dim(kind, d);
  Engine engine = make_engine(seed);
  return QuerySet{uniform_rows(m, d, engine)};
}

Vector true_mean(SignalKind kind, const QuerySet& queries) {
  Vector out(queries.size());
  for (Eigen::Index j = 0; j < queries.size(); ++j)
    out[j] = eval_signal(kind, row_span(queries.Q, j));
  return out;
}

}  // namespace ijcomb
