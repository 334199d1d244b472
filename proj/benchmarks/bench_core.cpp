#include <random>

#include <benchmark/benchmark.h>

#include "asca/calendar.hpp"
#include "asca/design.hpp"
#include "asca/factorization.hpp"
#include "asca/inference.hpp"
#include "asca/sca.hpp"
#include "asca/tensor.hpp"

using namespace asca;

namespace {

Eigen::MatrixXd noise(Eigen::Index n, Eigen::Index m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(n, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < n; ++i) x(i, j) = normal(rng);
  return x;
}

// 8 years x 8 sensors, ordinal year crossed with nominal sensor.
DesignMatrix lakes_like_design() {
  FactorSpec year{"year", {}, 8, FactorKind::Ordinal, {}};
  FactorSpec sensor{"sensor", {}, 8, FactorKind::Nominal, {}};
  for (int y = 0; y < 8; ++y) {
    for (int s = 0; s < 8; ++s) {
      year.levels.push_back(y);
      sensor.levels.push_back(s);
    }
  }
  const std::vector<FactorSpec> factors{year, sensor};
  const std::vector<std::pair<std::string, std::string>> interactions{{"year", "sensor"}};
  return assemble_design(factors, interactions, 64);
}

void BM_PermutationTest(benchmark::State& state) {
  const auto design = lakes_like_design();
  const auto x = noise(64, state.range(0), 1);
  const std::vector<std::string> terms{"year", "sensor", "year:sensor"};
  PermutationOptions o;
  o.permutations = static_cast<std::size_t>(state.range(1));
  o.seed = 42;
  for (auto _ : state) benchmark::DoNotOptimize(permutation_test(x, design, terms, o));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}
BENCHMARK(BM_PermutationTest)->Args({365, 199})->Args({2920, 199})->Args({2920, 999})->Unit(benchmark::kMillisecond);

void BM_FitAndTable(benchmark::State& state) {
  const auto design = lakes_like_design();
  const auto x = noise(64, state.range(0), 2);
  for (auto _ : state) {
    const auto dec = fit(x, design);
    benchmark::DoNotOptimize(anova_table(dec, design));
  }
}
BENCHMARK(BM_FitAndTable)->Arg(365)->Arg(2920)->Unit(benchmark::kMillisecond);

void BM_EffectPca(benchmark::State& state) {
  const auto x = noise(64, state.range(0), 3);
  for (auto _ : state) benchmark::DoNotOptimize(pca_effect(x, 2, "bench"));
}
BENCHMARK(BM_EffectPca)->Arg(365)->Arg(2920)->Unit(benchmark::kMillisecond);

// Three years of 3-hourly readings from 8 series, unfolded to (series, year) x (day, hour).
void BM_BuildAndUnfold(benchmark::State& state) {
  std::vector<Record> records;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  for (std::int64_t t = noleap_seconds({2015, 1, 1}); t < noleap_seconds({2018, 1, 1}); t += 3 * 3600) {
    for (int s = 0; s < 8; ++s) records.push_back({from_noleap_seconds(t), "S" + std::to_string(s), normal(rng)});
  }
  const std::vector<CalendarModeSpec> modes{{"series", "", "", 8, ModeKind::NonTemporal},
                                            {"year", "year", "span", 3, ModeKind::Evolution},
                                            {"day", "day", "year", 365, ModeKind::Cyclostationary},
                                            {"hour", "3hour", "day", 8, ModeKind::Cyclostationary}};
  const std::vector<std::string> rows{"series", "year"}, cols{"day", "hour"};
  CalendarOptions options;
  options.series_mode = "series";
  for (auto _ : state) {
    const auto tensor = build_tensor(records, modes, options);
    benchmark::DoNotOptimize(unfold(tensor, rows, cols));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(records.size()));
}
BENCHMARK(BM_BuildAndUnfold)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
