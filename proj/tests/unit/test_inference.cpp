#include <algorithm>
#include <numeric>
#include <map>
#include <set>
#include <sstream>

#include "asca/error.hpp"
#include "asca/factorization.hpp"
#include "asca/inference.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace asca;
using support::factor;

namespace {

DesignMatrix one_way(int groups, int reps) {
  const std::vector<FactorSpec> fs = {factor("g", support::blocked_levels(groups, reps), groups)};
  return assemble_design(fs, {}, groups * reps);
}

std::vector<PermutationResult> test_all(const Eigen::MatrixXd& x, const DesignMatrix& d, std::size_t k,
                                        std::uint64_t seed, unsigned workers = 1) {
  std::vector<std::string> terms;
  for (const auto& b : d.terms()) terms.push_back(b.name);
  PermutationOptions o;
  o.permutations = k;
  o.seed = seed;
  o.workers = workers;
  return permutation_test(x, d, terms, o);
}

}  // namespace

TEST_CASE("p-value counts ties and the observed statistic") {
  std::vector<double> below(999, 1.0);
  CHECK(permutation_p_value(5.0, below) == doctest::Approx(0.001));
  CHECK(permutation_p_value(0.0, std::vector<double>{0.5, 2.0, 0.1}) == 1.0);
  CHECK(permutation_p_value(2.0, std::vector<double>{1.0, 2.0, 3.0}) == 0.75);
  // A rounding-level shortfall still counts as a tie.
  CHECK(permutation_p_value(2.0, std::vector<double>{2.0 * (1 - 1e-14)}) == 1.0);
  CHECK(std::isnan(permutation_p_value(std::nan(""), std::vector<double>{1.0})));
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(permutation_p_value(inf, std::vector<double>{inf, 1.0}) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("f ratio edge cases") {
  CHECK(f_ratio(4.0, 2.0) == 2.0);
  CHECK(std::isinf(f_ratio(1.0, 0.0)));
  CHECK(std::isnan(f_ratio(0.0, 0.0)));
}

TEST_CASE("permutations are valid, seeded and order independent") {
  const auto p = permutation_for(42, 3, 10);
  std::vector<std::size_t> sorted = p;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> iota(10);
  std::iota(iota.begin(), iota.end(), 0);
  CHECK(sorted == iota);
  CHECK(permutation_for(42, 3, 10) == p);
  CHECK(permutation_for(42, 4, 10) != p);
  CHECK(permutation_for(43, 3, 10) != p);
  // All 24 orderings of 4 rows show up with roughly equal frequency.
  std::map<std::vector<std::size_t>, int> seen;
  for (std::size_t k = 0; k < 24000; ++k) ++seen[permutation_for(1, k, 4)];
  CHECK(seen.size() == 24);
  for (const auto& [perm, count] : seen) CHECK(std::abs(count - 1000) < 150);
}

TEST_CASE("an overwhelming effect reaches the p floor") {
  auto x = support::random_matrix(12, 3, 2);
  x.topRows(6).array() += 10.0;
  const auto d = one_way(2, 6);
  const auto r = test_all(x, d, 999, 3);
  CHECK(r[0].p == doctest::Approx(1.0 / 1000.0));
  CHECK(r[0].f_null.size() == 999);
  CHECK(r[0].permutations == 999);
  CHECK(r[0].seed == 3);
}

TEST_CASE("observed F agrees with the ANOVA table") {
  const auto c = support::crossed(3, 2, 3);
  const std::vector<FactorSpec> fs = {c.a, c.b};
  const std::vector<std::pair<std::string, std::string>> ab = {{"A", "B"}};
  const auto d = assemble_design(fs, ab, c.n);
  const auto x = support::random_matrix(c.n, 4, 17) * 3.0;
  const auto table = anova_table(fit(x, d), d);
  for (const auto& r : test_all(x, d, 19, 1)) CHECK(support::rel_diff(r.f_observed, *table.row(r.term).f) < 1e-9);
}

TEST_CASE("random permutations approach the exhaustive 4! p-value") {
  Eigen::MatrixXd x(4, 1);
  x << 0.3, 1.1, 2.0, 2.9;
  const auto d = one_way(2, 2);
  const double f = test_all(x, d, 1, 0)[0].f_observed;
  std::vector<std::size_t> perm = {0, 1, 2, 3};
  int at_least = 0;
  do {
    Eigen::MatrixXd xp(4, 1);
    for (int i = 0; i < 4; ++i) xp(i, 0) = x(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]), 0);
    if (test_all(xp, d, 1, 0)[0].f_observed >= f * (1 - 1e-10)) ++at_least;
  } while (std::next_permutation(perm.begin(), perm.end()));
  const double exact = at_least / 24.0;
  CHECK(exact == doctest::Approx(8.0 / 24.0));
  // With K = 23 the count of F* >= F is Binomial(23, exact), so the 2/24 band
  // holds for most seeds but not all: P(5 <= count <= 9) is about 0.72.
  int within = 0;
  double mean_p = 0.0;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    const double p = test_all(x, d, 23, seed)[0].p;
    mean_p += p / 400.0;
    if (std::abs(p - exact) <= 2.0 / 24.0 + 1e-12) ++within;
  }
  CHECK(within >= 240);
  CHECK(mean_p == doctest::Approx((23.0 * exact + 1.0) / 24.0).epsilon(0.05));
  CHECK(std::abs(test_all(x, d, 10000, 5)[0].p - exact) < 0.02);
}

TEST_CASE("results are bit-identical across runs and worker counts") {
  const auto x = support::random_matrix(18, 6, 4);
  const auto d = one_way(3, 6);
  const auto a = test_all(x, d, 200, 9, 1);
  const auto b = test_all(x, d, 200, 9, 1);
  const auto c = test_all(x, d, 200, 9, 3);
  const auto e = test_all(x, d, 200, 9, 16);
  CHECK(a[0].f_null == b[0].f_null);
  CHECK(a[0].f_null == c[0].f_null);
  CHECK(a[0].f_null == e[0].f_null);
  CHECK(a[0].p == c[0].p);
  CHECK(test_all(x, d, 200, 10)[0].f_null != a[0].f_null);
}

TEST_CASE("row permutation keeps the centered total") {
  const auto x = support::random_matrix(10, 3, 5);
  const auto perm = permutation_for(7, 0, 10);
  Eigen::MatrixXd xp(10, 3);
  for (int i = 0; i < 10; ++i) xp.row(i) = x.row(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]));
  const auto centered = [](const Eigen::MatrixXd& m) { return (m.rowwise() - m.colwise().mean()).squaredNorm(); };
  CHECK(centered(xp) == doctest::Approx(centered(x)).epsilon(1e-12));
}

TEST_CASE("null data gives roughly uniform p-values") {
  const auto d = one_way(2, 5);
  int small = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    if (test_all(support::random_matrix(10, 4, 1000 + s), d, 199, s)[0].p <= 0.05) ++small;
  }
  CHECK(small >= 2);
  CHECK(small <= 20);
}

TEST_CASE("a 3-SD shift reaches the floor for nearly every seed") {
  const auto d = one_way(2, 8);
  int floor_hits = 0;
  for (std::uint64_t s = 0; s < 40; ++s) {
    auto x = support::random_matrix(16, 1, 500 + s);
    x.topRows(8).array() += 3.0;
    if (test_all(x, d, 99, s)[0].p == doctest::Approx(0.01)) ++floor_hits;
  }
  CHECK(floor_hits >= 38);
}

TEST_CASE("p-values land in the table and nulls dump one column per term") {
  const auto c = support::crossed(2, 3, 2);
  const std::vector<FactorSpec> fs = {c.a, c.b};
  const auto d = assemble_design(fs, {}, c.n);
  const auto x = support::random_matrix(c.n, 2, 6);
  auto table = anova_table(fit(x, d), d);
  const auto r = test_all(x, d, 5, 2);
  apply_p_values(table, r);
  CHECK(*table.row("A").p == r[0].p);
  CHECK(*table.row("B").p == r[1].p);
  std::ostringstream out;
  write_null_distribution(r, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "A,B");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 5);
}

TEST_CASE("permutation test preconditions") {
  const auto d = one_way(2, 3);
  const auto x = support::random_matrix(6, 2, 1);
  try {
    test_all(x, d, 0, 1);
    FAIL("K = 0 accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::KZero);
  }
  CHECK_THROWS_AS(test_all(support::random_matrix(5, 2, 1), d, 3, 1), Error);
  std::vector<std::string> bogus = {"zz"};
  CHECK_THROWS_AS(permutation_test(x, d, bogus, {}), Error);
}
