#include "doctest.h"

#include <numeric>

#include "ijcomb/error.hpp"
#include "ijcomb/forest.hpp"
#include "oracles.hpp"

using namespace ijcomb;

namespace {

// Random small inbag matrix with columns summing to k, and member predictions.
struct Small {
  InbagMatrix inbag;
  Matrix T;
};

Small random_small(SeedSpec seed, int n, int B, int k, int m) {
  Small s;
  s.inbag.counts.resize(n, B);
  for (int b = 0; b < B; ++b) {
    const auto col = draw_subsample(n, k, seed.derive(static_cast<std::uint64_t>(b)));
    for (int i = 0; i < n; ++i) s.inbag.counts(i, b) = col[static_cast<std::size_t>(i)];
  }
  Engine e = make_engine(seed.derive(999));
  std::normal_distribution<double> g;
  s.T.resize(B, m);
  for (int b = 0; b < B; ++b)
    for (int j = 0; j < m; ++j) s.T(b, j) = g(e);
  return s;
}

}  // namespace

TEST_CASE("raw IJ two-point example") {
  InbagMatrix N;
  N.counts.resize(2, 2);
  N.counts << 2, 0, 0, 2;
  Matrix T(2, 1);
  T << 0, 2;
  const Matrix U = raw_ij_derivatives(N, T);
  CHECK(U(0, 0) == doctest::Approx(-2.0).epsilon(1e-15));
  CHECK(U(1, 0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(oracle::raw_ij(N.counts, T)(0, 0) == doctest::Approx(-2.0));
}

TEST_CASE("between member variance") {
  Matrix T(2, 1);
  T << 0, 2;
  CHECK(between_member_variance(T, 0) == doctest::Approx(1.0));
  Matrix same = Matrix::Constant(5, 2, 3.0);
  CHECK(between_member_variance(same, 1) == 0.0);
}

TEST_CASE("constant member predictions give zero everything") {
  const Small s = random_small({1, 0}, 6, 5, 6, 2);
  const Matrix T = Matrix::Constant(5, 2, 1.7);
  CHECK(raw_ij_derivatives(s.inbag, T).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(ranger_corrected_cov(s.inbag, T).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(vstat_anova_cov(s.inbag, T).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(vstat_corrected_cov(s.inbag, T).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("corrections match literal transcriptions") {
  for (int rep = 0; rep < 20; ++rep) {
    const SeedSpec seed{2024, static_cast<std::uint64_t>(rep)};
    Engine e = make_engine(seed.derive(5));
    const int n = 3 + static_cast<int>(e() % 8);   // 3..10
    const int B = 2 + static_cast<int>(e() % 7);   // 2..8
    const int m = 1 + static_cast<int>(e() % 3);   // 1..3
    const int k = n + 1 + static_cast<int>(e() % n);  // C = Bk > n
    const Small s = random_small(seed, n, B, k, m);
    const Matrix U = raw_ij_derivatives(s.inbag, s.T);
    const Matrix Uo = oracle::raw_ij(s.inbag.counts, s.T);
    CHECK((U - Uo).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + Uo.cwiseAbs().maxCoeff()));
    const Matrix r = ranger_corrected_cov(s.inbag, s.T);
    const Matrix ro = oracle::ranger(s.inbag.counts, s.T);
    CHECK((r - ro).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + ro.cwiseAbs().maxCoeff()));
    const Matrix v = vstat_anova_cov(s.inbag, s.T);
    const Matrix vo = oracle::vstat_anova(s.inbag.counts, s.T);
    CHECK((v - vo).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + vo.cwiseAbs().maxCoeff()));
    CHECK((v - v.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * (1.0 + v.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("vstat handles rows never drawn") {
  Small s = random_small({3, 0}, 8, 6, 12, 2);
  s.inbag.counts.row(2).setZero();
  // keep column sums equal by moving row 2's draws to row 3
  const Small fresh = random_small({3, 0}, 8, 6, 12, 2);
  s.inbag.counts.row(3) += fresh.inbag.counts.row(2);
  const Matrix v = vstat_anova_cov(s.inbag, s.T);
  const Matrix vo = oracle::vstat_anova(s.inbag.counts, s.T);
  CHECK((v - vo).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + vo.cwiseAbs().maxCoeff()));
}

TEST_CASE("vstat degenerate denominators") {
  InbagMatrix N;
  N.counts = Eigen::MatrixXi::Zero(4, 3);
  Matrix T(3, 1);
  T << 1, 2, 4;
  N.counts.row(0).setConstant(1);  // C = 3 <= n = 4
  CHECK_THROWS_AS(vstat_anova_cov(N, T), Error);
}

TEST_CASE("ranger equals raw when members agree at a query") {
  const Small s = random_small({4, 0}, 7, 6, 7, 2);
  Matrix T = s.T;
  T.col(1).setConstant(0.5);
  const Matrix r = ranger_corrected_cov(s.inbag, T);
  const Matrix raw = raw_ij_cov(s.inbag, T);
  CHECK(r(1, 1) == doctest::Approx(raw(1, 1)));
}

TEST_CASE("ranger below raw when inbag variance is large") {
  const Small s = random_small({5, 0}, 6, 8, 12, 3);
  double sum_var = 0;
  for (Eigen::Index i = 0; i < s.inbag.rows(); ++i) {
    const auto row = oracle::inbag_row(s.inbag.counts, i);
    sum_var += oracle::cov_b(row, row);
  }
  REQUIRE(sum_var >= 1.0);
  const Matrix r = ranger_corrected_cov(s.inbag, s.T);
  const Matrix raw = raw_ij_cov(s.inbag, s.T);
  for (int j = 0; j < 3; ++j) CHECK(r(j, j) <= raw(j, j) + 1e-15);
}

TEST_CASE("corrections are invariant to member order") {
  const Small s = random_small({6, 0}, 9, 7, 11, 3);
  std::vector<int> perm(7);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  std::swap(perm[1], perm[4]);
  InbagMatrix N2;
  N2.counts.resize(9, 7);
  Matrix T2(7, 3);
  for (int b = 0; b < 7; ++b) {
    N2.counts.col(b) = s.inbag.counts.col(perm[static_cast<std::size_t>(b)]);
    T2.row(b) = s.T.row(perm[static_cast<std::size_t>(b)]);
  }
  CHECK((ranger_corrected_cov(s.inbag, s.T) - ranger_corrected_cov(N2, T2)).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((vstat_corrected_cov(s.inbag, s.T) - vstat_corrected_cov(N2, T2)).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("forest fitting bookkeeping") {
  const auto d = gen_dataset(SignalKind::friedman, 300, 6, {7, 0});
  ForestConfig cfg;
  cfg.ensemble.n_members = 20;
  cfg.ensemble.subsample_size = 200;
  const Forest f = fit_forest(d, cfg, {7, 1});
  CHECK(f.size() == 20);
  for (Eigen::Index b = 0; b < 20; ++b) CHECK(f.inbag.counts.col(b).sum() == 200);
  CHECK(f.inbag.counts.minCoeff() >= 0);
  const Forest g = fit_forest(d, cfg, {7, 1});
  const auto q = gen_queries(SignalKind::friedman, 4, 6, {7, 2});
  CHECK(f.inbag.counts == g.inbag.counts);
  CHECK(f.member_predictions(q.Q) == g.member_predictions(q.Q));
  cfg.ensemble.threads = 4;
  const Forest h = fit_forest(d, cfg, {7, 1});
  CHECK(f.member_predictions(q.Q) == h.member_predictions(q.Q));
}

TEST_CASE("tiny ensemble support") {
  const auto d = gen_dataset(SignalKind::friedman, 2, 6, {8, 0});
  ForestConfig cfg;
  cfg.ensemble.n_members = 2;
  cfg.ensemble.subsample_size = 2;
  const Forest f = fit_forest(d, cfg, {8, 1});
  for (Eigen::Index b = 0; b < 2; ++b) {
    CHECK(f.inbag.counts.col(b).sum() == 2);
    CHECK(f.inbag.counts.col(b).maxCoeff() <= 2);
  }
  cfg.ensemble.n_members = 1;
  CHECK_THROWS_AS(fit_forest(d, cfg, {8, 1}), Error);
  cfg.ensemble.n_members = 2;
  cfg.ensemble.subsample_size = 3;
  CHECK_THROWS_AS(fit_forest(d, cfg, {8, 1}), Error);
}

TEST_CASE("ensemble prediction is the member mean") {
  const auto d = gen_dataset(SignalKind::friedman, 100, 6, {9, 0});
  ForestConfig cfg;
  cfg.ensemble.n_members = 10;
  cfg.ensemble.subsample_size = 50;
  const Forest f = fit_forest(d, cfg, {9, 1});
  const auto q = gen_queries(SignalKind::friedman, 3, 6, {9, 2});
  const Matrix T = f.member_predictions(q.Q);
  const Vector p = f.predict(q.Q);
  for (int j = 0; j < 3; ++j) CHECK(p[j] == doctest::Approx(T.col(j).mean()).epsilon(1e-14));
}

TEST_CASE("raw IJ sums to zero and its Gram form is PSD") {
  const auto d = gen_dataset(SignalKind::friedman, 200, 6, {10, 0});
  ForestConfig cfg;
  cfg.ensemble.n_members = 100;
  cfg.ensemble.subsample_size = 100;
  const Forest f = fit_forest(d, cfg, {10, 1});
  const auto q = gen_queries(SignalKind::friedman, 6, 6, {10, 2});
  const Matrix T = f.member_predictions(q.Q);
  const Matrix U = raw_ij_derivatives(f.inbag, T);
  for (int j = 0; j < 6; ++j)
    CHECK(std::abs(U.col(j).sum()) <= 1e-8 * U.col(j).cwiseAbs().sum());
  const Matrix V = raw_ij_cov(f.inbag, T);
  Eigen::SelfAdjointEigenSolver<Matrix> es(V);
  CHECK(es.eigenvalues().minCoeff() >= -1e-10 * V.trace());
}

TEST_CASE("gbt ensemble shares the inbag machinery") {
  const auto d = gen_dataset(SignalKind::linear, 150, 6, {11, 0});
  GbtEnsembleConfig cfg;
  cfg.ensemble.n_members = 6;
  cfg.ensemble.subsample_size = 100;
  cfg.gbt.n_rounds = 5;
  const GbtEnsemble g = fit_gbt_ensemble(d, cfg, {11, 1});
  CHECK(g.size() == 6);
  for (Eigen::Index b = 0; b < 6; ++b) CHECK(g.inbag.counts.col(b).sum() == 100);
  const auto q = gen_queries(SignalKind::linear, 2, 6, {11, 2});
  const Matrix T = g.member_predictions(q.Q);
  const Matrix U = raw_ij_derivatives(g.inbag, T);
  CHECK((U - oracle::raw_ij(g.inbag.counts, T)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("correction names") {
  CHECK(parse_correction("vstat") == Correction::vstat);
  CHECK(parse_correction("ranger") == Correction::ranger);
  CHECK(parse_correction("raw") == Correction::raw);
  CHECK_THROWS_AS(parse_correction("jackknife"), Error);
  CHECK(to_string(Correction::ranger) == "ranger");
}

TEST_CASE("vstat is unbiased for the large-ensemble IJ over redraws") {
  // Training data fixed; only the subsamples are redrawn. The reference is
  // the raw IJ of one forest with 50x the members, whose own Monte Carlo
  // bias k var(T) / B stays well under 1% at this size.
  const int n = 60, k = 30, B0 = 2000, redraws = 100;
  const Dataset d = gen_dataset(SignalKind::friedman, n, 6, {31, 0});
  const QuerySet q = gen_queries(SignalKind::friedman, 3, 6, {31, 1});
  ForestConfig cfg;
  cfg.ensemble.n_members = B0;
  cfg.ensemble.subsample_size = k;
  Vector mean = Vector::Zero(3);
  for (int r = 0; r < redraws; ++r) {
    const Forest f = fit_forest(d, cfg, {32, static_cast<std::uint64_t>(r)});
    mean += vstat_ij_cov(f.inbag, f.member_predictions(q.Q)).diagonal() / redraws;
  }
  cfg.ensemble.n_members = 50 * B0;
  const Forest big = fit_forest(d, cfg, {33, 0});
  const Vector reference = raw_ij_cov(big.inbag, big.member_predictions(q.Q)).diagonal();
  for (Eigen::Index j = 0; j < 3; ++j) CHECK(std::abs(mean[j] / reference[j] - 1.0) <= 0.05);
}
