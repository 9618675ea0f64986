#include "ijcomb/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <filesystem>
#include <fstream>
#include <optional>
#include <thread>

#include "ijcomb/error.hpp"
#include "ijcomb/harness.hpp"
#include "ijcomb/stats.hpp"
#include "ijcomb/tabular.hpp"

namespace ijcomb {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Everything a subcommand may read, as given on the command line. Unset
// flags leave the config file (then the preset) in charge.
struct Flags {
  std::string config_path;
  bool desk = false;
  std::optional<std::string> signal, correction, out;
  std::optional<int> n, replicates, queries, dim, trees, subsample, mtry, splits, test_size;
  std::optional<std::uint64_t> seed;
  std::optional<double> level;
  std::optional<unsigned> threads;
  std::vector<std::string> models, pairs, boost_tests;

  std::optional<std::string> data, target;
  bool log_target = false;
  std::vector<std::string> categorical, drop;
  std::optional<double> test_fraction;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(',', start);
    std::string item = text.substr(start, pos - start);
    if (!item.empty()) out.push_back(item);
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::pair<std::string, std::string> parse_pair(const std::string& text) {
  const auto parts = split_list(text);
  if (parts.size() != 2) throw Error(ErrorKind::config, "pair must look like a,b: '" + text + "'");
  return {parts[0], parts[1]};
}

void add_experiment_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file");
  cmd->add_flag("--desk", f.desk, "desk-scale preset (n 500, 100 replicates, 500 members, 20 queries)");
  cmd->add_option("--signal", f.signal, "friedman | linear | constant");
  cmd->add_option("--n", f.n, "training rows per replicate");
  cmd->add_option("--replicates", f.replicates, "Monte Carlo replicates");
  cmd->add_option("--queries", f.queries, "number of query points");
  cmd->add_option("--dim", f.dim, "covariate dimension");
  cmd->add_option("--trees", f.trees, "ensemble members");
  cmd->add_option("--subsample", f.subsample, "rows drawn with replacement per member");
  cmd->add_option("--mtry", f.mtry, "features tried per split (default all)");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--correction", f.correction, "raw | ranger | vstat");
  cmd->add_option("--level", f.level, "interval / test level");
  cmd->add_option("--models", f.models, "comma-separated model specs")->delimiter(',');
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--threads", f.threads, "worker threads, 0 for all cores");
}

void add_data_flags(CLI::App* cmd, Flags& f, bool required) {
  auto* data = cmd->add_option("--data", f.data, "input CSV with header");
  auto* target = cmd->add_option("--target", f.target, "response column");
  if (required) {
    data->required();
    target->required();
  }
  cmd->add_flag("--log-target", f.log_target, "take the log of the response");
  cmd->add_option("--categorical", f.categorical, "columns to expand into indicators")->delimiter(',');
  cmd->add_option("--drop", f.drop, "columns to ignore; col=level drops one indicator")->delimiter(',');
}

template <class T>
void read_key(const json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

ExperimentConfig build_config(const Flags& f, const json& file) {
  const bool desk = f.desk || file.value("desk", false);
  ExperimentConfig cfg = desk ? ExperimentConfig::desk() : ExperimentConfig{};
  try {
    if (file.contains("signal")) cfg.signal = parse_signal(file.at("signal").get<std::string>());
    if (file.contains("correction"))
      cfg.correction = parse_correction(file.at("correction").get<std::string>());
    read_key(file, "n", cfg.n);
    read_key(file, "replicates", cfg.replicates);
    read_key(file, "queries", cfg.queries);
    read_key(file, "dim", cfg.dim);
    read_key(file, "trees", cfg.trees);
    read_key(file, "subsample", cfg.subsample);
    read_key(file, "features_per_split", cfg.features_per_split);
    read_key(file, "seed", cfg.seed);
    read_key(file, "level", cfg.level);
    read_key(file, "models", cfg.models);
    read_key(file, "boost_tests", cfg.boost_tests);
    read_key(file, "splits", cfg.splits);
    read_key(file, "test_size", cfg.test_size);
    read_key(file, "threads", cfg.threads);
    if (file.contains("pairs"))
      for (const auto& p : file.at("pairs")) {
        const auto v = p.get<std::vector<std::string>>();
        if (v.size() != 2) throw Error(ErrorKind::config, "each pair needs two model specs");
        cfg.pairs.emplace_back(v[0], v[1]);
      }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::config, std::string("config file: ") + e.what());
  }
  if (f.signal) cfg.signal = parse_signal(*f.signal);
  if (f.correction) cfg.correction = parse_correction(*f.correction);
  if (f.n) cfg.n = *f.n;
  if (f.replicates) cfg.replicates = *f.replicates;
  if (f.queries) cfg.queries = *f.queries;
  if (f.dim) cfg.dim = *f.dim;
  if (f.trees) cfg.trees = *f.trees;
  if (f.subsample) cfg.subsample = *f.subsample;
  if (f.mtry) cfg.features_per_split = *f.mtry;
  if (f.seed) cfg.seed = *f.seed;
  if (f.level) cfg.level = *f.level;
  if (f.splits) cfg.splits = *f.splits;
  if (f.test_size) cfg.test_size = *f.test_size;
  if (f.threads) cfg.threads = *f.threads;
  if (!f.models.empty()) cfg.models = f.models;
  if (!f.pairs.empty()) {
    cfg.pairs.clear();
    for (const auto& p : f.pairs) cfg.pairs.push_back(parse_pair(p));
  }
  if (!f.boost_tests.empty()) cfg.boost_tests = f.boost_tests;
  if (cfg.threads == 0) cfg.threads = std::max(1u, std::thread::hardware_concurrency());
  return cfg;
}

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open config '" + path + "'");
  try {
    json j = json::parse(in);
    if (!j.is_object()) throw Error(ErrorKind::config, "config must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::config, std::string("malformed config: ") + e.what());
  }
}

json config_json(const ExperimentConfig& cfg) {
  json pairs = json::array();
  for (const auto& [a, b] : cfg.pairs) pairs.push_back({a, b});
  return {{"signal", to_string(cfg.signal)},
          {"n", cfg.n},
          {"replicates", cfg.replicates},
          {"queries", cfg.queries},
          {"dim", cfg.dim},
          {"trees", cfg.trees},
          {"subsample", cfg.subsample},
          {"features_per_split", cfg.features_per_split},
          {"seed", cfg.seed},
          {"correction", to_string(cfg.correction)},
          {"level", cfg.level},
          {"models", cfg.models},
          {"pairs", pairs},
          {"boost_tests", cfg.boost_tests},
          {"splits", cfg.splits},
          {"test_size", cfg.test_size},
          {"threads", cfg.threads}};
}

fs::path output_dir(const Flags& f, const json& file) {
  fs::path dir = f.out ? *f.out : file.value("out", std::string("."));
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create output directory '" + dir.string() + "'");
  return dir;
}

template <class Writer>
void write_file(const fs::path& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
  writer(out);
  if (!out) throw Error(ErrorKind::io, "write failed for '" + path.string() + "'");
}

void write_manifest(const fs::path& dir, const std::string& command, const ExperimentConfig& cfg,
                    json extra) {
  json manifest = {
      {"tool", "ijcomb"},
      {"version", kVersion},
      {"command", command},
      {"config", config_json(cfg)},
      {"seeds",
       {{"master_seed", cfg.seed},
        {"replicate_streams", "SeedSpec{master_seed, replicate}"},
        {"query_stream", "SeedSpec{master_seed, 2^64-1}"}}},
      {"libraries",
       {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                      "." + std::to_string(EIGEN_MINOR_VERSION)},
        {"boost", BOOST_LIB_VERSION},
        {"cli11", CLI11_VERSION},
        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
        {"compiler", __VERSION__}}},
  };
  manifest.update(extra);
  write_file(dir / "manifest.json", [&](std::ostream& out) { out << manifest.dump(2) << '\n'; });
}

TabularSchema schema_from(const Flags& f, const json& file) {
  TabularSchema s;
  s.target = f.target ? *f.target : file.value("target", std::string());
  s.log_target = f.log_target || file.value("log_target", false);
  s.categorical = !f.categorical.empty() ? f.categorical
                                         : file.value("categorical", std::vector<std::string>{});
  s.drop = !f.drop.empty() ? f.drop : file.value("drop", std::vector<std::string>{});
  if (s.target.empty()) throw Error(ErrorKind::config, "a target column is required");
  return s;
}

std::string data_path(const Flags& f, const json& file) {
  const std::string path = f.data ? *f.data : file.value("data", std::string());
  if (path.empty()) throw Error(ErrorKind::config, "a --data CSV is required");
  return path;
}

// Query rows for real data: m rows spread evenly through the file.
QuerySet spread_queries(const Dataset& data, int m) {
  if (m < 1 || m > data.size()) throw Error(ErrorKind::config, "query count must lie in [1, rows]");
  QuerySet q;
  q.Q.resize(m, data.dim());
  for (int j = 0; j < m; ++j) q.Q.row(j) = data.X.row(static_cast<Eigen::Index>(j) * data.size() / m);
  return q;
}

json tabular_summary(const TabularData& t) {
  return {{"rows_read", t.rows_read},
          {"rows_dropped", t.rows_dropped},
          {"rows_used", t.data.size()},
          {"columns", t.columns}};
}

int cmd_coverage(const Flags& f) {
  const json file = load_config_file(f.config_path);
  const ExperimentConfig cfg = build_config(f, file);
  const fs::path dir = output_dir(f, file);
  const auto reports = run_coverage(cfg);
  write_file(dir / "coverage.csv", [&](std::ostream& o) { write_coverage_csv(o, reports); });
  json failures = json::object();
  for (const auto& r : reports)
    failures[r.model] = {{"failed_replicates", r.n_failed},
                         {"negative_variances", r.n_negative},
                         {"messages", r.failures}};
  write_manifest(dir, "simulate-coverage", cfg,
                 {{"outputs", {"coverage.csv"}}, {"failures", failures}});
  return 0;
}

int cmd_power(const Flags& f) {
  const json file = load_config_file(f.config_path);
  json base = file;
  if (!f.queries && !file.contains("queries")) base["queries"] = 5;
  const ExperimentConfig cfg = build_config(f, base);
  const fs::path dir = output_dir(f, file);
  const auto entries = run_power(cfg);
  write_file(dir / "power.csv", [&](std::ostream& o) { write_power_csv(o, entries); });
  json failures = json::array();
  for (const auto& e : entries)
    failures.push_back({{"model_a", e.model_a},
                        {"model_b", e.model_b},
                        {"used", e.used},
                        {"singular", e.n_singular},
                        {"indefinite", e.n_indefinite},
                        {"failed", e.n_failed}});
  write_manifest(dir, "power", cfg, {{"outputs", {"power.csv"}}, {"replicate_outcomes", failures}});
  return 0;
}

int cmd_reproduction(const Flags& f) {
  const json file = load_config_file(f.config_path);
  const ExperimentConfig cfg = build_config(f, file);
  const fs::path dir = output_dir(f, file);
  json extra = {{"outputs", {"reproduction.csv", "mse.csv"}}};
  ReproductionSource source;
  if (f.data || file.contains("data")) {
    const TabularData t = ingest_csv(data_path(f, file), schema_from(f, file));
    const double frac = f.test_fraction ? *f.test_fraction : file.value("test_fraction", 0.2);
    source = split_reproduction_source(t.data, cfg.splits, cfg.queries, frac, SeedSpec{cfg.seed, 0});
    extra["data"] = tabular_summary(t);
  } else {
    source = simulate_reproduction_source(cfg);
  }
  const auto reports = run_reproduction(cfg, source, make_roster(cfg.models, cfg));
  write_file(dir / "reproduction.csv", [&](std::ostream& o) { write_reproduction_csv(o, reports); });
  write_file(dir / "mse.csv", [&](std::ostream& o) { write_mse_csv(o, reports); });
  json failures = json::object();
  for (const auto& r : reports)
    failures[r.model] = {{"failed_splits", r.n_failed}, {"negative_variances", r.n_negative}};
  extra["failures"] = failures;
  write_manifest(dir, "reproduction", cfg, extra);
  return 0;
}

int cmd_fit_csv(const Flags& f) {
  const json file = load_config_file(f.config_path);
  json base = file;
  if (!f.queries && !file.contains("queries")) base["queries"] = 5;
  const ExperimentConfig cfg = build_config(f, base);
  const fs::path dir = output_dir(f, file);
  const TabularData t = ingest_csv(data_path(f, file), schema_from(f, file));
  const QuerySet queries = spread_queries(t.data, cfg.queries);
  const double z = two_sided_z(cfg.level);
  const auto roster = make_roster(cfg.models, cfg);
  write_file(dir / "predictions.csv", [&](std::ostream& o) {
    o << "model,query_index,prediction,variance,lower,upper\n";
    for (const auto& model : roster) {
      const ModelPtr fitted = model.fit(t.data, model_seed(SeedSpec{cfg.seed, 0}, model.name));
      const Vector pred = fitted->predict(queries.Q);
      const Vector var = self_covariance(fitted->derivatives(queries, cfg.correction)).diagonal();
      for (Eigen::Index j = 0; j < queries.size(); ++j) {
        // negative corrected variances are reported but get no interval
        const double half = var[j] >= 0.0 ? z * std::sqrt(var[j]) : std::nan("");
        o << model.name << ',' << j << ',' << format_number(pred[j]) << ','
          << format_number(var[j]) << ',' << format_number(pred[j] - half) << ','
          << format_number(pred[j] + half) << '\n';
      }
    }
  });
  write_manifest(dir, "fit-csv", cfg,
                 {{"outputs", {"predictions.csv"}}, {"data", tabular_summary(t)}});
  return 0;
}

int cmd_compare_csv(const Flags& f) {
  const json file = load_config_file(f.config_path);
  json base = file;
  if (!f.queries && !file.contains("queries")) base["queries"] = 5;
  const ExperimentConfig cfg = build_config(f, base);
  if (cfg.queries > 5) throw Error(ErrorKind::config, "model tests use at most 5 query points");
  if (cfg.pairs.empty() && cfg.boost_tests.empty())
    throw Error(ErrorKind::config, "no model pairs or boost tests given");
  const fs::path dir = output_dir(f, file);
  const TabularData t = ingest_csv(data_path(f, file), schema_from(f, file));
  const QuerySet queries = spread_queries(t.data, cfg.queries);
  const SeedSpec root{cfg.seed, 0};
  write_file(dir / "comparison.csv", [&](std::ostream& o) {
    o << "model_a,model_b,statistic,df,p_value,condition_number,indefinite\n";
    auto row = [&](const std::string& a, const std::string& b, const ComparisonResult& r) {
      o << a << ',' << b << ',' << format_number(r.statistic) << ',' << r.df << ','
        << format_number(r.p_value) << ',' << format_number(r.condition_number) << ','
        << (r.indefinite ? 1 : 0) << '\n';
    };
    auto guarded = [&](const std::string& a, const std::string& b, auto&& test) {
      try {
        row(a, b, test());
      } catch (const SingularCovarianceError& e) {
        row(a, b, {std::nan(""), static_cast<int>(cfg.queries), std::nan(""), e.condition_number(), false});
      }
    };
    for (const auto& [a, b] : cfg.pairs) {
      guarded(a, b, [&] {
        const ModelPtr ma = make_fitter(a, cfg)(t.data, model_seed(root, a + "|" + b, 0));
        const ModelPtr mb = make_fitter(b, cfg)(t.data, model_seed(root, a + "|" + b, 1));
        return compare_models(ma->predict(queries.Q), mb->predict(queries.Q),
                              cov_blocks(ma->derivatives(queries, cfg.correction),
                                         mb->derivatives(queries, cfg.correction)));
      });
    }
    for (const auto& spec : cfg.boost_tests) {
      guarded(spec, "stage2", [&] {
        const ModelPtr m = make_fitter(spec, cfg)(t.data, model_seed(root, spec));
        const auto* two = dynamic_cast<const TwoStageModel*>(m.get());
        if (two == nullptr) throw Error(ErrorKind::config, "boost test needs a two-stage spec");
        return compare_boost_stage(*two, queries, cfg.correction);
      });
    }
  });
  write_manifest(dir, "compare-csv", cfg,
                 {{"outputs", {"comparison.csv"}}, {"data", tabular_summary(t)}});
  return 0;
}

void error_record(std::ostream& err, std::string_view kind, const std::string& message) {
  err << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Infinitesimal jackknife variances, model comparison tests and coverage experiments",
               "ijcomb"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Flags f;

  auto* coverage = app.add_subcommand("simulate-coverage", "coverage of IJ confidence intervals (CoE, CoT)");
  add_experiment_flags(coverage, f);

  auto* power = app.add_subcommand("power", "rejection rates of model comparison tests");
  add_experiment_flags(power, f);
  power->add_option("--pair", f.pairs, "model pair a,b (repeatable)");
  power->add_option("--boost-test", f.boost_tests, "two-stage spec for a boost-stage test (repeatable)");

  auto* repro = app.add_subcommand("reproduction", "coverage of reproduction intervals (CoR) and test MSE");
  add_experiment_flags(repro, f);
  repro->add_option("--splits", f.splits, "disjoint training splits");
  repro->add_option("--test-size", f.test_size, "simulated test rows");
  repro->add_option("--test-fraction", f.test_fraction, "held-out fraction of a CSV");
  add_data_flags(repro, f, false);

  auto* fit = app.add_subcommand("fit-csv", "fit models to a CSV and report IJ variances");
  add_experiment_flags(fit, f);
  add_data_flags(fit, f, true);

  auto* cmp = app.add_subcommand("compare-csv", "chi-square model comparison on a CSV");
  add_experiment_flags(cmp, f);
  add_data_flags(cmp, f, true);
  cmp->add_option("--pair", f.pairs, "model pair a,b (repeatable)");
  cmp->add_option("--boost-test", f.boost_tests, "two-stage spec for a boost-stage test (repeatable)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    error_record(err, "usage", e.what());
    return 2;
  }

  try {
    if (coverage->parsed()) return cmd_coverage(f);
    if (power->parsed()) return cmd_power(f);
    if (repro->parsed()) return cmd_reproduction(f);
    if (fit->parsed()) return cmd_fit_csv(f);
    if (cmp->parsed()) return cmd_compare_csv(f);
  } catch (const Error& e) {
    error_record(err, to_string(e.kind()), e.what());
    return 1;
  } catch (const std::exception& e) {
    error_record(err, "internal", e.what());
    return 1;
  }
  return 1;
}

}  // namespace ijcomb
