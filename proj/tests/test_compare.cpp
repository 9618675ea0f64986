#include "doctest.h"

#include <cmath>

#include "ijcomb/error.hpp"
#include "ijcomb/model.hpp"
#include "ijcomb/stats.hpp"

using namespace ijcomb;

namespace {

Matrix random_matrix(SeedSpec seed, Eigen::Index r, Eigen::Index c) {
  Engine e = make_engine(seed);
  std::normal_distribution<double> g;
  Matrix M(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) M(i, j) = g(e);
  return M;
}

Fitter forest_fitter(std::optional<int> depth, int B, int k) {
  return [=](const Dataset& d, SeedSpec s) -> ModelPtr {
    ForestConfig cfg;
    cfg.ensemble.n_members = B;
    cfg.ensemble.subsample_size = k;
    cfg.tree.max_depth = depth;
    return std::make_shared<ForestModel>("rf", fit_forest(d, cfg, s));
  };
}

Fitter linear_fitter() {
  return [](const Dataset& d, SeedSpec) -> ModelPtr {
    return std::make_shared<MEstimatorModel>("lm", fit_linear(d));
  };
}

double train_mse(const Model& m, const Dataset& d) {
  return (m.predict(d.X) - d.y).squaredNorm() / d.size();
}

}  // namespace

TEST_CASE("identical plain fields cancel") {
  const Matrix U = random_matrix({1, 0}, 30, 3);
  const DerivativeField f{U, "a", std::nullopt};
  const CovBlocks b = cov_blocks(f, f);
  CHECK(b.s11 == b.s22);
  CHECK((b.s11 - b.s12).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(b.difference().cwiseAbs().maxCoeff() < 1e-15);
  CHECK(b.s21 == b.s12.transpose());
}

TEST_CASE("zero second field") {
  const DerivativeField f1{random_matrix({2, 0}, 20, 2), "a", std::nullopt};
  const DerivativeField f2{Matrix::Zero(20, 2), "b", std::nullopt};
  const CovBlocks b = cov_blocks(f1, f2);
  CHECK(b.s22.cwiseAbs().maxCoeff() == 0.0);
  CHECK(b.s12.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cross block of two forests is the literal sum") {
  const Dataset d = gen_dataset(SignalKind::friedman, 150, 6, {3, 0});
  const QuerySet q = gen_queries(SignalKind::friedman, 1, 6, {3, 1});
  const auto fit = forest_fitter(std::nullopt, 60, 80);
  const ModelPtr a = fit(d, {3, 2});
  const ModelPtr b = fit(d, {3, 3});
  const DerivativeField fa = a->derivatives(q, Correction::vstat);
  const DerivativeField fb = b->derivatives(q, Correction::vstat);
  const CovBlocks blocks = cov_blocks(fa, fb);
  double s = 0;
  for (Eigen::Index k = 0; k < d.size(); ++k) s += fa.U(k, 0) * fb.U(k, 0);
  CHECK(blocks.s12(0, 0) == doctest::Approx(s / (150.0 * 150.0)).epsilon(1e-13));
  CHECK(fa.corrected());
  CHECK(blocks.s11(0, 0) == doctest::Approx((*fa.self_cov)(0, 0)));
}

TEST_CASE("difference covariance of plain models is PSD") {
  for (int rep = 0; rep < 5; ++rep) {
    const DerivativeField f1{random_matrix({4, static_cast<std::uint64_t>(rep)}, 40, 5), "a", std::nullopt};
    const DerivativeField f2{random_matrix({5, static_cast<std::uint64_t>(rep)}, 40, 5), "b", std::nullopt};
    const Matrix diff = cov_blocks(f1, f2).difference();
    const Matrix direct = gram_cov(f1.U - f2.U, f1.U - f2.U);
    CHECK((diff - direct).cwiseAbs().maxCoeff() < 1e-14);
    Eigen::SelfAdjointEigenSolver<Matrix> es(diff);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10 * diff.trace());
  }
}

TEST_CASE("intervals") {
  const Interval ci = confidence_interval(1.0, 4.0, 0.95);
  CHECK(ci.lower == doctest::Approx(1.0 - 1.959964 * 2.0).epsilon(1e-6));
  CHECK(ci.upper == doctest::Approx(1.0 + 1.959964 * 2.0).epsilon(1e-6));
  CHECK(confidence_interval(0.0, 16.0, 0.95).width() == doctest::Approx(2.0 * ci.width()));
  const Interval ri = reproduction_interval(1.0, 4.0, 0.95);
  CHECK(ri.width() == doctest::Approx(std::sqrt(2.0) * ci.width()));
  const Interval point = reproduction_interval(3.0, 0.0, 0.95);
  CHECK(point.lower == 3.0);
  CHECK(point.upper == 3.0);
  CHECK(point.contains(3.0));
  try {
    confidence_interval(0.0, -1e-3, 0.95);
    FAIL("expected refusal");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::negative_variance);
  }
  CHECK_THROWS_AS(reproduction_interval(0.0, -1.0, 0.95), Error);
}

TEST_CASE("chi-square statistic") {
  Matrix cov(1, 1);
  cov << 4.0;
  Vector F1(1), F2(1);
  F1 << 3.0;
  F2 << 1.0;
  const auto r = chi_square_test(F1 - F2, cov);
  CHECK(r.statistic == doctest::Approx(1.0));
  CHECK(r.df == 1);
  CHECK(r.p_value == doctest::Approx(1.0 - chisq_cdf(1.0, 1)));
  const Matrix S = random_matrix({6, 0}, 10, 3);
  const Matrix spd = S.transpose() * S / 10.0;
  const Vector F = random_matrix({6, 1}, 3, 1).col(0);
  const auto zero = chi_square_test(Vector::Zero(3), spd);
  CHECK(zero.statistic == 0.0);
  CHECK(zero.p_value == 1.0);
  const auto full = chi_square_test(F, spd);
  CHECK(full.statistic == doctest::Approx(F.dot(spd.ldlt().solve(F))).epsilon(1e-12));
}

TEST_CASE("comparison is symmetric and permutation invariant") {
  const DerivativeField f1{random_matrix({7, 0}, 50, 4), "a", std::nullopt};
  DerivativeField f2{random_matrix({7, 1}, 50, 4), "b", std::nullopt};
  const Matrix S = random_matrix({7, 2}, 10, 4);
  f2.self_cov = S.transpose() * S / 10.0;  // pretend f2 is corrected
  const Vector F1 = random_matrix({7, 3}, 4, 1).col(0);
  const Vector F2 = random_matrix({7, 4}, 4, 1).col(0);
  const auto ab = compare_models(F1, F2, cov_blocks(f1, f2));
  const auto ba = compare_models(F2, F1, cov_blocks(f2, f1));
  CHECK(ab.statistic == doctest::Approx(ba.statistic).epsilon(1e-12));
  Eigen::PermutationMatrix<Eigen::Dynamic> P(4);
  P.indices() << 2, 0, 3, 1;
  DerivativeField g1{f1.U * P, "a", std::nullopt};
  DerivativeField g2{f2.U * P, "b", Matrix(P.transpose() * (*f2.self_cov) * P)};
  const auto perm = compare_models(P.transpose() * F1, P.transpose() * F2, cov_blocks(g1, g2));
  CHECK(perm.statistic == doctest::Approx(ab.statistic).epsilon(1e-12));
}

TEST_CASE("singular covariance is refused with its condition number") {
  Matrix cov = Matrix::Zero(2, 2);
  cov(0, 0) = 1.0;
  try {
    chi_square_test(Vector::Ones(2), cov);
    FAIL("expected singular covariance");
  } catch (const SingularCovarianceError& e) {
    CHECK(e.kind() == ErrorKind::singular_covariance);
    CHECK(std::isinf(e.condition_number()));
  }
  cov(1, 1) = 1e-13;
  CHECK_THROWS_AS(chi_square_test(Vector::Ones(2), cov), SingularCovarianceError);
}

TEST_CASE("indefinite covariance keeps its positive part") {
  Matrix cov = Matrix::Zero(3, 3);
  cov(0, 0) = 1.0;
  cov(1, 1) = -0.5;
  cov(2, 2) = 4.0;
  const auto r = chi_square_test(Vector{{3.0, 2.0, 2.0}}, cov);
  CHECK(r.indefinite);
  CHECK(r.df == 2);
  CHECK(r.statistic == doctest::Approx(9.0 + 1.0).epsilon(1e-12));
  CHECK(r.p_value == doctest::Approx(chisq_sf(10.0, 2)).epsilon(1e-12));
  CHECK(r.condition_number == doctest::Approx(8.0));
  // rotating the problem changes nothing
  const Matrix R = Eigen::HouseholderQR<Matrix>(Matrix::Random(3, 3)).householderQ();
  const auto rot = chi_square_test(R * Vector{{3.0, 2.0, 2.0}}, R * cov * R.transpose());
  CHECK(rot.df == 2);
  CHECK(rot.statistic == doctest::Approx(10.0).epsilon(1e-10));
  CHECK_THROWS_AS(chi_square_test(Vector::Ones(2), -Matrix::Identity(2, 2)), SingularCovarianceError);
}

TEST_CASE("boosting a perfect fit trains on zeros") {
  Dataset d = gen_dataset(SignalKind::linear, 60, 6, {8, 0});
  for (Eigen::Index i = 0; i < d.size(); ++i) d.y[i] = 1.0 + d.X(i, 0) - 2.0 * d.X(i, 2);
  const TwoStageModel m = fit_boost(d, linear_fitter(), forest_fitter(std::nullopt, 20, 40), {8, 1});
  const QuerySet q = gen_queries(SignalKind::linear, 4, 6, {8, 2});
  CHECK(m.boost().predict(q.Q).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((m.predict(q.Q) - m.base().predict(q.Q)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("boosting lowers training error") {
  const Dataset d = gen_dataset(SignalKind::constant, 200, 6, {9, 0});
  const auto base = forest_fitter(3, 30, 100);
  const TwoStageModel m = fit_boost(d, base, forest_fitter(std::nullopt, 30, 100), {9, 1});
  CHECK(train_mse(m, d) <= train_mse(m.base(), d));
  CHECK(m.name() == "rf+rf");
}

TEST_CASE("two-stage derivatives and covariance") {
  const Dataset d = gen_dataset(SignalKind::friedman, 120, 6, {10, 0});
  const QuerySet q = gen_queries(SignalKind::friedman, 3, 6, {10, 1});
  const TwoStageModel m = fit_boost(d, linear_fitter(), forest_fitter(std::nullopt, 40, 60), {10, 2});
  const DerivativeField f1 = m.base().derivatives(q, Correction::vstat);
  const DerivativeField f2 = m.boost().derivatives(q, Correction::vstat);
  const DerivativeField f = m.derivatives(q, Correction::vstat);
  CHECK((f.U - (f1.U + f2.U)).cwiseAbs().maxCoeff() < 1e-14);
  const CovBlocks b = cov_blocks(f1, f2);
  CHECK((self_covariance(f) - (b.s11 + b.s22 + b.s12 + b.s21)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(!f1.corrected());
  CHECK(f2.corrected());
  const auto intervals = combined_interval(m, q, 0.95);
  const Vector pred = m.predict(q.Q);
  for (Eigen::Index j = 0; j < 3; ++j) {
    const double half = 1.959963984540054 * std::sqrt(self_covariance(f)(j, j));
    CHECK(intervals[static_cast<std::size_t>(j)].lower == doctest::Approx(pred[j] - half));
  }
}

namespace {

class ZeroModel final : public Model {
 public:
  explicit ZeroModel(Eigen::Index n) : n_(n) {}
  std::string name() const override { return "zero"; }
  Vector predict(const RowMatrix& X) const override { return Vector::Zero(X.rows()); }
  DerivativeField derivatives(const QuerySet& q, Correction) const override {
    return {Matrix::Zero(n_, q.size()), "zero", std::nullopt};
  }

 private:
  Eigen::Index n_;
};

}  // namespace

TEST_CASE("zero boosting stage leaves stage-1 intervals") {
  const Dataset d = gen_dataset(SignalKind::linear, 50, 6, {11, 0});
  const TwoStageModel m(std::make_shared<MEstimatorModel>("lm", fit_linear(d)),
                        std::make_shared<ZeroModel>(50));
  const QuerySet q = gen_queries(SignalKind::linear, 3, 6, {11, 2});
  const auto combined = combined_interval(m, q, 0.95);
  const auto base = confidence_intervals(m.base().predict(q.Q),
                                         self_covariance(m.base().derivatives(q, Correction::vstat)), 0.95);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(combined[j].lower == doctest::Approx(base[j].lower).epsilon(1e-12));
    CHECK(combined[j].upper == doctest::Approx(base[j].upper).epsilon(1e-12));
  }
}

TEST_CASE("linear boost on linear residuals predicts zero") {
  const Dataset d = gen_dataset(SignalKind::linear, 50, 6, {11, 0});
  const TwoStageModel m = fit_boost(d, linear_fitter(), linear_fitter(), {11, 1});
  const QuerySet q = gen_queries(SignalKind::linear, 3, 6, {11, 2});
  CHECK(m.boost().predict(q.Q).cwiseAbs().maxCoeff() < 1e-12);
  // derivatives hold the stage-1 residuals fixed, so stage 2 repeats stage 1
  const Matrix U1 = m.base().derivatives(q, Correction::vstat).U;
  const Matrix U2 = m.boost().derivatives(q, Correction::vstat).U;
  CHECK((U1 - U2).cwiseAbs().maxCoeff() < 1e-10 * U1.cwiseAbs().maxCoeff());
}

TEST_CASE("boost-stage test short-circuits an exactly zero stage") {
  const Dataset d = gen_dataset(SignalKind::constant, 30, 6, {12, 0});
  const TwoStageModel m(std::make_shared<MEstimatorModel>("lm", fit_linear(d)),
                        std::make_shared<ZeroModel>(30));
  const QuerySet q = gen_queries(SignalKind::constant, 3, 6, {12, 1});
  const auto r = compare_boost_stage(m, q);
  CHECK(r.statistic == 0.0);
  CHECK(r.p_value == 1.0);
}

TEST_CASE("local modification blocks agree with the block assembly") {
  const Dataset d = gen_dataset(SignalKind::friedman, 80, 6, {13, 0});
  ForestConfig cfg;
  cfg.ensemble.n_members = 40;
  cfg.ensemble.subsample_size = 50;
  cfg.tree.max_depth = 3;
  const Forest forest = fit_forest(d, cfg, {13, 1});
  const LocallyModifiedForest mod("rfmod", forest, d);
  const QuerySet q = gen_queries(SignalKind::friedman, 2, 6, {13, 2});
  const Matrix T = forest.member_predictions(q.Q);
  const Matrix Uf = raw_ij_derivatives(forest.inbag, T);
  Matrix Ub(80, 2);
  for (Eigen::Index j = 0; j < 2; ++j) Ub.col(j) = local_bias_derivatives(forest, d, row_span(q.Q, j));
  // raw correction: the combined covariance is the Gram form of U' + U
  const DerivativeField raw = mod.derivatives(q, Correction::raw);
  for (Eigen::Index j = 0; j < 2; ++j)
    CHECK(self_covariance(raw)(j, j) ==
          doctest::Approx(modified_variance(forest, d, row_span(q.Q, j))).epsilon(1e-12));
  // corrected: forest diagonal replaced, the rest unchanged
  const DerivativeField corr = mod.derivatives(q, Correction::vstat);
  const Matrix expected = vstat_corrected_cov(forest.inbag, T) + gram_cov(Ub, Ub) +
                          gram_cov(Uf, Ub) + gram_cov(Ub, Uf);
  CHECK((self_covariance(corr) - expected).cwiseAbs().maxCoeff() < 1e-12);
  // zero bias derivatives would leave the forest term alone
  CHECK(gram_cov(Uf, Uf)(0, 0) == doctest::Approx(raw_ij_cov(forest.inbag, T)(0, 0)));
  const Vector pred = mod.predict(q.Q);
  CHECK(pred[0] == doctest::Approx(forest.predict(q.Q)[0] + local_bias(forest, d, row_span(q.Q, 0))));
}
