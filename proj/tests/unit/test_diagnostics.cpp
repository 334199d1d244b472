#include <random>

#include "asca/diagnostics.hpp"
#include "asca/error.hpp"
#include "asca/factorization.hpp"
#include "asca/sca.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace asca;

TEST_CASE("Q statistic") {
  Eigen::MatrixXd e(2, 2);
  e << 3, 4, 0, 0;
  const auto q = q_statistic(e);
  CHECK(q(0) == 25.0);
  CHECK(q(1) == 0.0);
  const auto r = support::random_matrix(7, 9, 4);
  const auto qr = q_statistic(r);
  for (Eigen::Index i = 0; i < 7; ++i) {
    double naive = 0.0;
    for (Eigen::Index j = 0; j < 9; ++j) naive += r(i, j) * r(i, j);
    CHECK(qr(i) == doctest::Approx(naive).epsilon(1e-14));
  }
}

TEST_CASE("Q sums to the residual SS of the table") {
  const auto c = support::crossed(3, 2, 4);
  const std::vector<FactorSpec> fs = {c.a, c.b};
  const auto d = assemble_design(fs, {}, c.n);
  const auto dec = fit(support::random_matrix(c.n, 5, 6), d);
  CHECK(q_statistic(dec.residuals).sum() == doctest::Approx(anova_table(dec, d).residual.ss).epsilon(1e-14));
}

TEST_CASE("D statistic") {
  CHECK(d_statistic(Eigen::MatrixXd::Zero(4, 2), Eigen::Vector2d(1.0, 2.0)).isZero());
  Eigen::MatrixXd t(3, 1);
  t << 1, -2, 1;
  const double sigma = t.norm();
  const double lambda = sigma * sigma / 2.0;
  const auto d = d_statistic(t, Eigen::VectorXd::Constant(1, sigma));
  CHECK(d(1) == doctest::Approx(4.0 / lambda));
  try {
    d_statistic(t, Eigen::VectorXd::Zero(1));
    FAIL("zero singular value accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroSingularValue);
  }
}

TEST_CASE("D matches Hotelling with an explicit covariance inverse") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Eigen::Index n = 5 + static_cast<Eigen::Index>(seed % 4);
    Eigen::MatrixXd x = support::random_matrix(n, 4, seed);
    x = x.rowwise() - x.colwise().mean();
    const auto v = pca_effect(x, 2);
    const auto d = d_statistic(v.scores_effect, v.singular_values);
    const Eigen::MatrixXd cov = v.scores_effect.transpose() * v.scores_effect / static_cast<double>(n - 1);
    const Eigen::MatrixXd inv = cov.inverse();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double t2 = v.scores_effect.row(i) * inv * v.scores_effect.row(i).transpose();
      CHECK(support::rel_diff(d(i), t2) < 1e-8);
    }
    // Rotating the discarded subspace leaves D alone.
    const auto v3 = pca_effect(x, 3);
    CHECK((d_statistic(v3.scores_effect.leftCols(2), v3.singular_values.head(2)) - d).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("type-7 control limits") {
  std::vector<double> v(100);
  for (int i = 0; i < 100; ++i) v[static_cast<std::size_t>(i)] = 100 - i;
  CHECK(control_limit(v, 99.0) == doctest::Approx(99.01));
  CHECK(control_limit(v, 50.0) == doctest::Approx(50.5));
  CHECK(control_limit(std::vector<double>{4.2}, 37.0) == 4.2);
  CHECK(control_limit(std::vector<double>(5, 3.0), 99.0) == 3.0);
  double prev = -1.0;
  for (double p = 1.0; p < 100.0; p += 7.0) {
    const double lim = control_limit(v, p);
    CHECK(lim >= prev);
    prev = lim;
  }
  try {
    control_limit(std::vector<double>{}, 99.0);
    FAIL("empty input accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyInput);
  }
}

TEST_CASE("MSPC chart bundles statistics and limits") {
  const auto e = support::random_matrix(30, 4, 1);
  const auto v = pca_effect(support::random_matrix(30, 4, 2), 2);
  const auto chart = mspc_chart(e, v.scores_effect, v.singular_values, 95.0);
  CHECK(chart.percentile == 95.0);
  CHECK((chart.q.array() >= 0).all());
  CHECK((chart.d.array() >= 0).all());
  CHECK(chart.q_limit == control_limit(std::span<const double>(chart.q.data(), 30), 95.0));
  CHECK(chart.d_limit == control_limit(std::span<const double>(chart.d.data(), 30), 95.0));
}

TEST_CASE("sample ACF") {
  std::vector<double> alt(100);
  for (std::size_t i = 0; i < 100; ++i) alt[i] = i % 2 ? -1.0 : 1.0;
  const auto r = sample_acf(alt, 3);
  REQUIRE(r.size() == 4);
  CHECK(r[0] == 1.0);
  CHECK(std::abs(r[1] + 1.0) < 0.03);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  int inside = 0, total = 0;
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> w(1000);
    for (auto& x : w) x = normal(rng);
    const auto acf = sample_acf(w, 10);
    std::vector<double> neg(w);
    for (auto& x : neg) x = -x;
    CHECK(sample_acf(neg, 10) == acf);
    for (std::size_t k = 1; k <= 10; ++k) {
      CHECK(std::abs(acf[k]) <= 1.0);
      inside += std::abs(acf[k]) < 0.1;
      ++total;
    }
  }
  CHECK(inside >= total * 95 / 100);

  try {
    sample_acf(std::vector<double>(5, 2.0), 2);
    FAIL("constant series accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConstantSeries);
  }
  try {
    sample_acf(std::vector<double>{1, 2, 3}, 3);
    FAIL("short series accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SeriesTooShort);
  }
}

TEST_CASE("Tukey box summaries") {
  const auto b = box_summary(std::vector<double>{5, 1, 4, 2, 3}, "L");
  CHECK(b.level == "L");
  CHECK(b.count == 5);
  CHECK(b.median == 3.0);
  CHECK(b.q1 == 2.0);
  CHECK(b.q3 == 4.0);
  CHECK(b.whisker_low == 1.0);
  CHECK(b.whisker_high == 5.0);
  CHECK(b.outliers.empty());

  const auto one = box_summary(std::vector<double>{7.0});
  CHECK(one.median == 7.0);
  CHECK(one.whisker_low == 7.0);
  CHECK(one.whisker_high == 7.0);

  const auto sym = box_summary(std::vector<double>{-3, -1, 0, 1, 3});
  CHECK(sym.median == 0.0);
  CHECK(sym.q1 == -sym.q3);

  const auto out = box_summary(std::vector<double>{1, 2, 3, 4, 100});
  CHECK(out.outliers == std::vector<double>{100.0});
  CHECK(out.whisker_high == 4.0);
}

TEST_CASE("residual dispersion groups rows by level") {
  Eigen::MatrixXd e(3, 2);
  e << 1, 2, 3, 4, 5, 6;
  const auto boxes = residual_dispersion(e, {"b", "a", "b"});
  REQUIRE(boxes.size() == 2);
  CHECK(boxes[0].level == "b");
  CHECK(boxes[0].count == 4);
  CHECK(boxes[1].count == 2);
  CHECK(boxes[1].median == 3.5);
  CHECK_THROWS_AS(residual_dispersion(e, {"a"}), Error);
}
