#include "ijcomb/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>

#include "ijcomb/error.hpp"
#include "ijcomb/parallel.hpp"
#include "ijcomb/stats.hpp"

namespace ijcomb {

ExperimentConfig ExperimentConfig::desk() {
  ExperimentConfig cfg;
  cfg.n = 500;
  cfg.replicates = 100;
  cfg.trees = 500;
  cfg.queries = 20;
  return cfg;
}

void validate(const ExperimentConfig& cfg) {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::config, what); };
  if (cfg.n < 1) fail("n must be positive");
  if (cfg.replicates < 2) fail("need at least 2 replicates");
  if (cfg.queries < 1) fail("need at least one query point");
  if (cfg.dim < min_signal_dim(cfg.signal))
    fail("dimension " + std::to_string(cfg.dim) + " too small for signal " +
         std::string(to_string(cfg.signal)));
  if (cfg.trees < 2) fail("ensembles need at least 2 members");
  if (cfg.subsample < 1) fail("subsample size must be positive");
  if (cfg.features_per_split < 0) fail("features per split must be non-negative");
  if (!(cfg.level > 0.0 && cfg.level < 1.0)) fail("level must lie in (0, 1)");
  if (cfg.splits < 2) fail("need at least 2 splits");
  if (cfg.test_size < 1) fail("test size must be positive");
}

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return parts;
}

[[noreturn]] void bad_spec(const std::string& spec, const std::string& why) {
  throw Error(ErrorKind::config, "bad model spec '" + spec + "': " + why);
}

int parse_int(const std::string& spec, const std::string& field) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(field, &used);
    if (used != field.size()) bad_spec(spec, "'" + field + "' is not an integer");
    return v;
  } catch (const std::logic_error&) {
    bad_spec(spec, "'" + field + "' is not an integer");
  }
}

double parse_real(const std::string& spec, const std::string& field) {
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used != field.size()) bad_spec(spec, "'" + field + "' is not a number");
    return v;
  } catch (const std::logic_error&) {
    bad_spec(spec, "'" + field + "' is not a number");
  }
}

std::optional<int> parse_depth(const std::string& spec, const std::string& field) {
  if (field == "full") return std::nullopt;
  const int depth = parse_int(spec, field);
  if (depth < 1) bad_spec(spec, "depth must be at least 1");
  return depth;
}

EnsembleConfig ensemble_settings(const ExperimentConfig& cfg) {
  EnsembleConfig e;
  e.n_members = cfg.trees;
  e.subsample_size = cfg.subsample;
  e.threads = 1;
  return e;
}

Fitter single_stage(const std::string& spec, const ExperimentConfig& cfg) {
  const std::vector<std::string> f = split(spec, ':');
  const std::string& kind = f[0];
  auto arity = [&](std::size_t max) {
    if (f.size() > max + 1) bad_spec(spec, "too many fields");
  };

  if (kind == "lm") {
    arity(0);
    return [spec](const Dataset& data, SeedSpec) -> ModelPtr {
      return std::make_shared<MEstimatorModel>(spec, fit_linear(data));
    };
  }
  if (kind == "rf" || kind == "rfmod") {
    ForestConfig fc;
    fc.ensemble = ensemble_settings(cfg);
    if (cfg.features_per_split > 0) fc.tree.features_per_split = cfg.features_per_split;
    std::size_t next = 1;
    if (f.size() > next && f[next] != "oob") fc.tree.max_depth = parse_depth(spec, f[next++]);
    ResidualMode mode = ResidualMode::in_sample;
    if (kind == "rfmod" && f.size() > next && f[next] == "oob") {
      mode = ResidualMode::out_of_bag;
      ++next;
    }
    if (f.size() > next) bad_spec(spec, "unexpected field '" + f[next] + "'");
    validate(fc.tree);
    if (kind == "rf")
      return [spec, fc](const Dataset& data, SeedSpec seed) -> ModelPtr {
        return std::make_shared<ForestModel>(spec, fit_forest(data, fc, seed));
      };
    return [spec, fc, mode](const Dataset& data, SeedSpec seed) -> ModelPtr {
      return std::make_shared<LocallyModifiedForest>(spec, fit_forest(data, fc, seed), data, mode);
    };
  }
  if (kind == "gbt" || kind == "xgb") {
    arity(3);
    GbtEnsembleConfig gc;
    gc.ensemble = ensemble_settings(cfg);
    if (f.size() > 1) gc.gbt.n_rounds = parse_int(spec, f[1]);
    if (f.size() > 2) gc.gbt.max_depth = parse_int(spec, f[2]);
    if (f.size() > 3) gc.gbt.learning_rate = parse_real(spec, f[3]);
    validate(gc.gbt);
    return [spec, gc](const Dataset& data, SeedSpec seed) -> ModelPtr {
      return std::make_shared<GbtEnsembleModel>(spec, fit_gbt_ensemble(data, gc, seed));
    };
  }
  if (kind == "nn") {
    arity(3);
    NetConfig nc;
    if (f.size() > 1) nc.hidden_units = parse_int(spec, f[1]);
    if (nc.hidden_units < 1) bad_spec(spec, "need at least one hidden unit");
    if (f.size() > 2) {
      if (f[2] == "sigmoid") nc.activation = Activation::sigmoid;
      else if (f[2] == "relu") nc.activation = Activation::relu;
      else bad_spec(spec, "unknown activation '" + f[2] + "'");
    }
    if (f.size() > 3) {
      if (f[3] == "fixed") nc.init = NetConfig::Init::fixed;
      else if (f[3] == "random") nc.init = NetConfig::Init::random;
      else bad_spec(spec, "unknown init '" + f[3] + "'");
    }
    return [spec, nc](const Dataset& data, SeedSpec seed) -> ModelPtr {
      return std::make_shared<MEstimatorModel>(spec, fit_network(data, nc, seed));
    };
  }
  if (kind == "nw") {
    arity(2);
    if (f.size() < 2) bad_spec(spec, "bandwidth required, e.g. nw:0.5");
    KernelSpec ks;
    ks.bandwidth = parse_real(spec, f[1]);
    if (!(ks.bandwidth > 0.0)) bad_spec(spec, "bandwidth must be positive");
    if (f.size() > 2) {
      if (f[2] == "gaussian") ks.kernel = KernelKind::gaussian;
      else if (f[2] == "uniform") ks.kernel = KernelKind::uniform;
      else bad_spec(spec, "unknown kernel '" + f[2] + "'");
    }
    return [spec, ks](const Dataset& data, SeedSpec) -> ModelPtr {
      return std::make_shared<KernelModel>(spec, data, ks);
    };
  }
  bad_spec(spec, "unknown model '" + kind + "'");
}

}  // namespace

Fitter make_fitter(const std::string& spec, const ExperimentConfig& cfg) {
  if (spec.empty()) bad_spec(spec, "empty");
  const auto plus = spec.find('+');
  if (plus == std::string::npos) return single_stage(spec, cfg);
  const std::string first = spec.substr(0, plus);
  const std::string second = spec.substr(plus + 1);
  if (second.find('+') != std::string::npos) bad_spec(spec, "only two stages are supported");
  if (first.empty() || second.empty()) bad_spec(spec, "empty stage");
  Fitter base = single_stage(first, cfg);
  Fitter boost = single_stage(second, cfg);
  return [base, boost](const Dataset& data, SeedSpec seed) -> ModelPtr {
    return std::make_shared<TwoStageModel>(fit_boost(data, base, boost, seed));
  };
}

std::vector<NamedFitter> make_roster(const std::vector<std::string>& specs,
                                     const ExperimentConfig& cfg) {
  std::vector<NamedFitter> roster;
  for (const auto& spec : specs) {
    for (const auto& other : roster)
      if (other.name == spec) throw Error(ErrorKind::config, "duplicate model '" + spec + "'");
    roster.push_back({spec, make_fitter(spec, cfg)});
  }
  if (roster.empty()) throw Error(ErrorKind::config, "no models given");
  return roster;
}

std::uint64_t stable_hash(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

SeedSpec replicate_seed(const ExperimentConfig& cfg, int replicate) {
  return SeedSpec{cfg.seed, static_cast<std::uint64_t>(replicate)};
}

SeedSpec model_seed(SeedSpec replicate, std::string_view name, int slot) {
  return replicate.derive(1).derive(stable_hash(name)).derive(static_cast<std::uint64_t>(slot));
}

QuerySet experiment_queries(const ExperimentConfig& cfg) {
  // a stream no replicate index can reach
  return gen_queries(cfg.signal, cfg.queries, cfg.dim,
                     SeedSpec{cfg.seed, std::numeric_limits<std::uint64_t>::max()});
}

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

constexpr std::size_t kKeptMessages = 5;

void note_failure(std::vector<std::string>& failures, const std::string& what) {
  if (failures.size() < kKeptMessages) failures.push_back(what);
}

// One model's predictions and variances at the queries, one variance
// vector per requested correction.
struct Fit {
  bool ok = false;
  Vector pred;
  std::vector<Vector> var;
  std::string error;
};

Fit evaluate(const NamedFitter& model, const Dataset& data, const QuerySet& queries,
             const std::vector<Correction>& corrections, SeedSpec seed) {
  Fit out;
  try {
    const ModelPtr fitted = model.fit(data, seed);
    out.pred = fitted->predict(queries.Q);
    out.ok = out.pred.allFinite();
    for (const Correction c : corrections) {
      out.var.push_back(self_covariance(fitted->derivatives(queries, c)).diagonal());
      out.ok = out.ok && out.var.back().allFinite();
    }
    if (!out.ok) out.error = "non-finite prediction or variance";
  } catch (const Error& e) {
    out.error = std::string(to_string(e.kind())) + ": " + e.what();
  }
  return out;
}

}  // namespace

double CoverageReport::median_coe() const {
  std::vector<double> v;
  for (const auto& q : queries)
    if (q.used > 0) v.push_back(q.coe);
  return median(v);
}

double CoverageReport::mean_coe() const {
  std::vector<double> v;
  for (const auto& q : queries)
    if (q.used > 0) v.push_back(q.coe);
  return mean(v);
}

double CoverageReport::mean_cot() const {
  std::vector<double> v;
  for (const auto& q : queries)
    if (q.used > 0) v.push_back(q.cot);
  return mean(v);
}

std::vector<CoverageReport> run_coverage(const ExperimentConfig& cfg,
                                         const std::vector<NamedFitter>& roster) {
  return run_coverage(cfg, roster, {cfg.correction});
}

std::vector<CoverageReport> run_coverage(const ExperimentConfig& cfg,
                                         const std::vector<NamedFitter>& roster,
                                         const std::vector<Correction>& corrections) {
  validate(cfg);
  if (corrections.empty()) throw Error(ErrorKind::config, "no corrections requested");
  const QuerySet queries = experiment_queries(cfg);
  const Vector truth = true_mean(cfg.signal, queries);
  const auto R = static_cast<std::size_t>(cfg.replicates);
  const std::size_t M = roster.size();

  std::vector<std::vector<Fit>> fits(R, std::vector<Fit>(M));
  parallel_for(R, cfg.threads, [&](std::size_t r) {
    const SeedSpec rep = replicate_seed(cfg, static_cast<int>(r));
    const Dataset data = gen_dataset(cfg.signal, cfg.n, cfg.dim, rep.derive(0));
    for (std::size_t s = 0; s < M; ++s)
      fits[r][s] = evaluate(roster[s], data, queries, corrections,
                            model_seed(rep, roster[s].name));
  });

  const double z = two_sided_z(cfg.level);
  std::vector<CoverageReport> reports;
  for (std::size_t s = 0; s < M; ++s)
    for (std::size_t c = 0; c < corrections.size(); ++c) {
      CoverageReport report;
      report.model = roster[s].name;
      report.correction = corrections[c];
      for (std::size_t r = 0; r < R; ++r)
        if (!fits[r][s].ok) {
          ++report.n_failed;
          note_failure(report.failures, "replicate " + std::to_string(r) + ": " + fits[r][s].error);
        }
      for (Eigen::Index j = 0; j < queries.size(); ++j) {
        QueryCoverage qc;
        double sum = 0.0;
        int count = 0;
        for (std::size_t r = 0; r < R; ++r)
          if (fits[r][s].ok) {
            sum += fits[r][s].pred[j];
            ++count;
          }
        const double expected = count > 0 ? sum / count : 0.0;
        int hit_e = 0, hit_t = 0;
        double width = 0.0;
        for (std::size_t r = 0; r < R; ++r) {
          const Fit& f = fits[r][s];
          if (!f.ok) continue;
          const double var = f.var[c][j];
          if (var < 0.0) {
            ++report.n_negative;
            continue;
          }
          const double half = z * std::sqrt(var);
          const Interval iv{f.pred[j] - half, f.pred[j] + half};
          hit_e += iv.contains(expected);
          hit_t += iv.contains(truth[j]);
          width += iv.width();
          ++qc.used;
        }
        if (qc.used > 0) {
          qc.coe = static_cast<double>(hit_e) / qc.used;
          qc.cot = static_cast<double>(hit_t) / qc.used;
          qc.mean_width = width / qc.used;
        } else {
          qc.coe = qc.cot = qc.mean_width = std::numeric_limits<double>::quiet_NaN();
        }
        report.queries.push_back(qc);
      }
      reports.push_back(std::move(report));
    }
  return reports;
}

std::vector<CoverageReport> run_coverage(const ExperimentConfig& cfg) {
  return run_coverage(cfg, make_roster(cfg.models, cfg));
}

namespace {

struct Outcome {
  enum Kind { reject, accept, singular, failed } kind = failed;
  bool indefinite = false;
};

Outcome decide(const ComparisonResult& res, const ExperimentConfig& cfg) {
  return {res.p_value < 1.0 - cfg.level ? Outcome::reject : Outcome::accept, res.indefinite};
}

Outcome compare_pair(const Fitter& fa, const std::string& a, const Fitter& fb,
                     const std::string& b, const Dataset& data, const QuerySet& queries,
                     const ExperimentConfig& cfg, SeedSpec rep) {
  // Seeds follow the names in sorted order so (a, b) and (b, a) fit the
  // same models; equal names take slots 0 and 1.
  const bool swap = b < a;
  const std::string key = swap ? b + "|" + a : a + "|" + b;
  const SeedSpec seed_a = model_seed(rep, key, swap ? 1 : 0);
  const SeedSpec seed_b = model_seed(rep, key, swap ? 0 : 1);
  try {
    const ModelPtr ma = fa(data, seed_a);
    const ModelPtr mb = fb(data, seed_b);
    const CovBlocks blocks =
        cov_blocks(ma->derivatives(queries, cfg.correction), mb->derivatives(queries, cfg.correction));
    return decide(compare_models(ma->predict(queries.Q), mb->predict(queries.Q), blocks), cfg);
  } catch (const SingularCovarianceError&) {
    return {Outcome::singular};
  } catch (const Error&) {
    return {Outcome::failed};
  }
}

Outcome boost_stage(const Fitter& fit, const std::string& spec, const Dataset& data,
                    const QuerySet& queries, const ExperimentConfig& cfg, SeedSpec rep) {
  try {
    const ModelPtr model = fit(data, model_seed(rep, spec));
    const auto* two = dynamic_cast<const TwoStageModel*>(model.get());
    if (two == nullptr) throw Error(ErrorKind::config, "boost test needs a two-stage spec");
    return decide(compare_boost_stage(*two, queries, cfg.correction), cfg);
  } catch (const SingularCovarianceError&) {
    return {Outcome::singular};
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::config) throw;
    return {Outcome::failed};
  }
}

PowerEntry tally(std::string a, std::string b, const std::vector<Outcome>& outcomes) {
  PowerEntry e{std::move(a), std::move(b)};
  int rejected = 0;
  for (const Outcome o : outcomes) {
    e.n_indefinite += o.indefinite;
    switch (o.kind) {
      case Outcome::reject: ++rejected; ++e.used; break;
      case Outcome::accept: ++e.used; break;
      case Outcome::singular: ++e.n_singular; break;
      case Outcome::failed: ++e.n_failed; break;
    }
  }
  e.power = e.used > 0 ? static_cast<double>(rejected) / e.used
                       : std::numeric_limits<double>::quiet_NaN();
  return e;
}

}  // namespace

std::vector<PowerEntry> run_power(const ExperimentConfig& cfg) {
  validate(cfg);
  if (cfg.queries > 5) throw Error(ErrorKind::config, "model tests use at most 5 query points");
  if (cfg.pairs.empty() && cfg.boost_tests.empty())
    throw Error(ErrorKind::config, "no model pairs or boost tests given");
  struct Task {
    Fitter a, b;
    std::string name_a, name_b;
    bool boost = false;
  };
  std::vector<Task> tasks;
  for (const auto& [a, b] : cfg.pairs) tasks.push_back({make_fitter(a, cfg), make_fitter(b, cfg), a, b});
  for (const auto& spec : cfg.boost_tests) {
    if (spec.find('+') == std::string::npos)
      throw Error(ErrorKind::config, "boost test needs a two-stage spec, got '" + spec + "'");
    tasks.push_back({make_fitter(spec, cfg), {}, spec, "stage2", true});
  }

  const QuerySet queries = experiment_queries(cfg);
  const auto R = static_cast<std::size_t>(cfg.replicates);
  std::vector<std::vector<Outcome>> outcomes(tasks.size(), std::vector<Outcome>(R));
  parallel_for(R, cfg.threads, [&](std::size_t r) {
    const SeedSpec rep = replicate_seed(cfg, static_cast<int>(r));
    const Dataset data = gen_dataset(cfg.signal, cfg.n, cfg.dim, rep.derive(0));
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      const Task& task = tasks[t];
      outcomes[t][r] = task.boost
                           ? boost_stage(task.a, task.name_a, data, queries, cfg, rep)
                           : compare_pair(task.a, task.name_a, task.b, task.name_b, data, queries,
                                          cfg, rep);
    }
  });

  std::vector<PowerEntry> entries;
  for (std::size_t t = 0; t < tasks.size(); ++t)
    entries.push_back(tally(tasks[t].name_a, tasks[t].name_b, outcomes[t]));
  return entries;
}

ReproductionSource simulate_reproduction_source(const ExperimentConfig& cfg) {
  validate(cfg);
  ReproductionSource src;
  for (int s = 0; s < cfg.splits; ++s)
    src.splits.push_back(gen_dataset(cfg.signal, cfg.n, cfg.dim, replicate_seed(cfg, s).derive(0)));
  src.test = gen_dataset(cfg.signal, cfg.test_size, cfg.dim,
                         SeedSpec{cfg.seed, std::numeric_limits<std::uint64_t>::max() - 1});
  src.queries = experiment_queries(cfg);
  return src;
}

ReproductionSource split_reproduction_source(const Dataset& data, int splits, int queries,
                                             double test_fraction, SeedSpec seed) {
  validate(data);
  if (splits < 2) throw Error(ErrorKind::config, "need at least 2 splits");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw Error(ErrorKind::config, "test fraction must lie in (0, 1)");
  const auto n = static_cast<int>(data.size());
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Engine engine = make_engine(seed);
  std::shuffle(order.begin(), order.end(), engine);
  const int n_test = std::max(1, static_cast<int>(std::lround(test_fraction * n)));
  const int per_split = (n - n_test) / splits;
  if (per_split < 2) throw Error(ErrorKind::empty_data, "too few rows for the requested splits");
  if (queries < 1 || queries > n_test)
    throw Error(ErrorKind::config, "query count must lie in [1, test rows]");

  auto take = [&](int begin, int count) {
    Dataset out;
    out.X.resize(count, data.dim());
    out.y.resize(count);
    for (int i = 0; i < count; ++i) {
      const int src = order[static_cast<std::size_t>(begin + i)];
      out.X.row(i) = data.X.row(src);
      out.y[i] = data.y[src];
    }
    return out;
  };
  ReproductionSource result;
  result.test = take(0, n_test);
  result.queries.Q = result.test.X.topRows(queries);
  for (int s = 0; s < splits; ++s) result.splits.push_back(take(n_test + s * per_split, per_split));
  return result;
}

double ReproductionReport::mean_cor() const {
  std::vector<double> v;
  for (const double c : cor)
    if (!std::isnan(c)) v.push_back(c);
  return mean(v);
}

std::vector<ReproductionReport> run_reproduction(const ExperimentConfig& cfg,
                                                 const ReproductionSource& source,
                                                 const std::vector<NamedFitter>& roster) {
  if (source.splits.size() < 2) throw Error(ErrorKind::config, "need at least 2 splits");
  if (!(cfg.level > 0.0 && cfg.level < 1.0)) throw Error(ErrorKind::config, "level must lie in (0, 1)");
  const std::size_t S = source.splits.size();
  const std::size_t M = roster.size();
  const QuerySet& queries = source.queries;

  std::vector<std::vector<Fit>> fits(S, std::vector<Fit>(M));
  std::vector<std::vector<double>> mse(S, std::vector<double>(M, std::numeric_limits<double>::quiet_NaN()));
  parallel_for(S, cfg.threads, [&](std::size_t s) {
    const SeedSpec rep = replicate_seed(cfg, static_cast<int>(s));
    for (std::size_t k = 0; k < M; ++k) {
      Fit& f = fits[s][k];
      try {
        const ModelPtr model = roster[k].fit(source.splits[s], model_seed(rep, roster[k].name));
        f.pred = model->predict(queries.Q);
        f.var = {self_covariance(model->derivatives(queries, cfg.correction)).diagonal()};
        f.ok = f.pred.allFinite() && f.var[0].allFinite();
        mse[s][k] = (model->predict(source.test.X) - source.test.y).squaredNorm() /
                    static_cast<double>(source.test.size());
      } catch (const Error& e) {
        f.ok = false;
        f.error = e.what();
      }
    }
  });

  const double z = two_sided_z(cfg.level);
  std::vector<ReproductionReport> reports;
  for (std::size_t k = 0; k < M; ++k) {
    ReproductionReport report;
    report.model = roster[k].name;
    for (std::size_t s = 0; s < S; ++s) {
      if (!fits[s][k].ok) ++report.n_failed;
      report.mse.push_back(mse[s][k]);
    }
    for (Eigen::Index j = 0; j < queries.size(); ++j) {
      int hits = 0, pairs = 0;
      for (std::size_t i = 0; i < S; ++i) {
        const Fit& fi = fits[i][k];
        if (!fi.ok) continue;
        if (fi.var[0][j] < 0.0) {
          ++report.n_negative;
          continue;
        }
        const double half = z * std::sqrt(2.0 * fi.var[0][j]);
        const Interval iv{fi.pred[j] - half, fi.pred[j] + half};
        for (std::size_t o = 0; o < S; ++o) {
          if (o == i || !fits[o][k].ok) continue;
          hits += iv.contains(fits[o][k].pred[j]);
          ++pairs;
        }
      }
      report.cor.push_back(pairs > 0 ? static_cast<double>(hits) / pairs
                                     : std::numeric_limits<double>::quiet_NaN());
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_coverage_csv(std::ostream& out, const std::vector<CoverageReport>& reports) {
  out << "model,query_index,coe,cot,mean_width\n";
  for (const auto& r : reports)
    for (std::size_t j = 0; j < r.queries.size(); ++j)
      out << r.model << ',' << j << ',' << format_number(r.queries[j].coe) << ','
          << format_number(r.queries[j].cot) << ',' << format_number(r.queries[j].mean_width)
          << '\n';
}

void write_power_csv(std::ostream& out, const std::vector<PowerEntry>& entries) {
  out << "model_a,model_b,power,n_singular\n";
  for (const auto& e : entries)
    out << e.model_a << ',' << e.model_b << ',' << format_number(e.power) << ',' << e.n_singular
        << '\n';
}

void write_reproduction_csv(std::ostream& out, const std::vector<ReproductionReport>& reports) {
  out << "model,query_index,cor\n";
  for (const auto& r : reports)
    for (std::size_t j = 0; j < r.cor.size(); ++j)
      out << r.model << ',' << j << ',' << format_number(r.cor[j]) << '\n';
}

void write_mse_csv(std::ostream& out, const std::vector<ReproductionReport>& reports) {
  out << "model,split,mse\n";
  for (const auto& r : reports)
    for (std::size_t s = 0; s < r.mse.size(); ++s)
      out << r.model << ',' << s << ',' << format_number(r.mse[s]) << '\n';
}

}  // namespace ijcomb
