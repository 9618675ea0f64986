#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "ijcomb/model.hpp"

namespace ijcomb {

struct ExperimentConfig {
  SignalKind signal = SignalKind::friedman;
  int n = 1000;
  int replicates = 200;
  int queries = 100;
  int dim = kDefaultDim;
  int trees = 1000;
  int subsample = 200;
  int features_per_split = 0;  // 0 means all features
  std::uint64_t seed = 1;
  Correction correction = Correction::vstat;
  double level = 0.95;
  std::vector<std::string> models{"rf"};
  std::vector<std::pair<std::string, std::string>> pairs;
  std::vector<std::string> boost_tests;  // two-stage specs "base+boost"
  int splits = 10;
  int test_size = 1000;
  unsigned threads = 1;

  /// n 500, 100 replicates, 500 members, 20 queries.
  static ExperimentConfig desk();
};

void validate(const ExperimentConfig& cfg);

/// Model specs:
///   lm                     least squares with intercept
///   rf[:depth|full]        random forest, cfg.trees members of cfg.subsample rows
///   rfmod[:depth|full][:oob]  forest with local bias correction
///   gbt[:rounds[:depth[:rate]]]  ensemble of boosted trees (alias xgb)
///   nn[:units[:sigmoid|relu[:fixed|random]]]  one-hidden-layer network
///   nw:h[:gaussian|uniform]  Nadaraya-Watson smoother
///   A+B                    B fit to the residuals of A
/// The fitted model is named by the spec text.
Fitter make_fitter(const std::string& spec, const ExperimentConfig& cfg);

struct NamedFitter {
  std::string name;
  Fitter fit;
};

std::vector<NamedFitter> make_roster(const std::vector<std::string>& specs,
                                     const ExperimentConfig& cfg);

/// Stable 64-bit FNV-1a; seeds each model from its name so results do not
/// depend on roster order.
std::uint64_t stable_hash(std::string_view text) noexcept;

/// Seeds. Replicate r draws its data from SeedSpec{seed, r}.derive(0) and
/// fits model `name` with SeedSpec{seed, r}.derive(1).derive(hash(name)).
SeedSpec replicate_seed(const ExperimentConfig& cfg, int replicate);
SeedSpec model_seed(SeedSpec replicate, std::string_view name, int slot = 0);
QuerySet experiment_queries(const ExperimentConfig& cfg);

struct QueryCoverage {
  double coe = 0.0;
  double cot = 0.0;
  double mean_width = 0.0;
  int used = 0;  // replicates contributing at this query
};

struct CoverageReport {
  std::string model;
  Correction correction = Correction::vstat;
  std::vector<QueryCoverage> queries;
  int n_failed = 0;    // replicates whose fit or derivatives threw
  int n_negative = 0;  // (replicate, query) cells with a negative variance
  std::vector<std::string> failures;  // first few messages

  double median_coe() const;
  double mean_coe() const;
  double mean_cot() const;
};

/// Fits every model on each replicate dataset, builds level-intervals at
/// fixed queries and scores them against the replicate mean prediction
/// (CoE) and the true signal (CoT).
std::vector<CoverageReport> run_coverage(const ExperimentConfig& cfg,
                                         const std::vector<NamedFitter>& roster);
/// Same fits scored under several corrections; reports are model-major.
std::vector<CoverageReport> run_coverage(const ExperimentConfig& cfg,
                                         const std::vector<NamedFitter>& roster,
                                         const std::vector<Correction>& corrections);
std::vector<CoverageReport> run_coverage(const ExperimentConfig& cfg);

struct PowerEntry {
  std::string model_a;
  std::string model_b;
  double power = 0.0;  // rejection proportion at 1 - level
  int n_singular = 0;
  int n_failed = 0;
  int used = 0;
  int n_indefinite = 0;  // used tests whose covariance had a negative eigenvalue
};

/// Model-pair tests for cfg.pairs, then boost-stage tests for
/// cfg.boost_tests (reported as model_a = spec, model_b = "stage2").
/// Requires cfg.queries <= 5.
std::vector<PowerEntry> run_power(const ExperimentConfig& cfg);

struct ReproductionSource {
  std::vector<Dataset> splits;  // disjoint training sets
  Dataset test;
  QuerySet queries;
};

ReproductionSource simulate_reproduction_source(const ExperimentConfig& cfg);
/// Shuffles the rows, holds out `test_fraction` as a test set and cuts the
/// rest into `splits` disjoint parts. Queries are the first rows of the test set.
ReproductionSource split_reproduction_source(const Dataset& data, int splits, int queries,
                                             double test_fraction, SeedSpec seed);

struct ReproductionReport {
  std::string model;
  std::vector<double> cor;  // per query
  std::vector<double> mse;  // per split, NaN when the fit failed
  int n_failed = 0;
  int n_negative = 0;

  double mean_cor() const;
};

/// CoR(x) = 1/(S(S-1)) sum_i sum_{j != i} 1{f_j(x) in I_i(x)} over the
/// successfully fitted splits, with I_i the reproduction interval.
std::vector<ReproductionReport> run_reproduction(const ExperimentConfig& cfg,
                                                 const ReproductionSource& source,
                                                 const std::vector<NamedFitter>& roster);

std::string format_number(double v);
void write_coverage_csv(std::ostream& out, const std::vector<CoverageReport>& reports);
void write_power_csv(std::ostream& out, const std::vector<PowerEntry>& entries);
void write_reproduction_csv(std::ostream& out, const std::vector<ReproductionReport>& reports);
void write_mse_csv(std::ostream& out, const std::vector<ReproductionReport>& reports);

}  // namespace ijcomb
