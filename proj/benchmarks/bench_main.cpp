#include <benchmark/benchmark.h>

#include "mcboost/corrective.hpp"
#include "mcboost/simplex.hpp"
#include "mcboost/stagewise.hpp"
#include "support.hpp"

using namespace mcboost;

namespace {

void BM_TrainStump(benchmark::State& state) {
  Rng rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const Dataset d = testing::random_dataset(rng, n, 8, 2, 3.0);
  std::vector<int> y(n);
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = d.label(i) == 1 ? 1 : -1;
    w[i] = rng.uniform();
  }
  const Learner learner(LearnerKind::Stump, d.features());
  for (auto _ : state) benchmark::DoNotOptimize(learner.train(y, w));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TrainStump)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

void BM_SolveMasterExp(benchmark::State& state) {
  Rng rng(2);
  const auto cols = static_cast<std::size_t>(state.range(0));
  const MarginMatrix p = testing::random_margin_matrix(rng, true, 150, 3, cols);
  for (auto _ : state) benchmark::DoNotOptimize(solve_master_exp(p, 20.0));
}
BENCHMARK(BM_SolveMasterExp)->RangeMultiplier(2)->Range(8, 128);

void BM_SolveHingeLp(benchmark::State& state) {
  Rng rng(3);
  const auto cols = static_cast<std::size_t>(state.range(0));
  const MarginMatrix p = testing::random_margin_matrix(rng, true, 60, 3, cols);
  for (auto _ : state) benchmark::DoNotOptimize(solve_master_hinge(p, 2, 5.0));
}
BENCHMARK(BM_SolveHingeLp)->RangeMultiplier(2)->Range(4, 32);

void BM_MultiBoostIris(benchmark::State& state) {
  const Dataset iris = load_dataset(testing::data_file("iris.csv"), DataFormat::Csv);
  MultiBoostOptions o;
  o.theta = 30.0;
  o.force_rounds = true;
  for (auto _ : state)
    benchmark::DoNotOptimize(multiboost(iris, Variant::ECC, ColumnStream(3, 1), LearnerKind::Stump,
                                        static_cast<std::size_t>(state.range(0)), o));
}
BENCHMARK(BM_MultiBoostIris)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
