#include <benchmark/benchmark.h>

#include <random>

#include "lossmoe/games.hpp"
#include "lossmoe/npa.hpp"
#include "lossmoe/sdp.hpp"

using namespace lossmoe;

namespace {

void BM_Canonicalize(benchmark::State& state) {
  std::mt19937 rng(1);
  std::uniform_int_distribution<int> party(0, 1), input(0, 4), outcome(0, 2);
  std::vector<Monomial> words;
  for (int i = 0; i < 256; ++i) {
    std::vector<OperatorSymbol> w;
    for (int j = 0; j < 6; ++j)
      w.push_back({static_cast<Party>(party(rng)), static_cast<std::uint16_t>(input(rng)),
                   static_cast<std::uint8_t>(outcome(rng))});
    words.emplace_back(std::move(w));
  }
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(canonicalize(words[i++ % words.size()]));
}
BENCHMARK(BM_Canonicalize);

void BM_Assemble(benchmark::State& state) {
  const GameSpec spec{discretize_bases(2, 2), Variant::QpvRelaxed, 0.05, 0.005};
  for (auto _ : state) benchmark::DoNotOptimize(assemble(spec, Level::L2));
}
BENCHMARK(BM_Assemble)->Unit(benchmark::kMillisecond);

void BM_Solve(benchmark::State& state, int mt, int mp, Level level) {
  const auto problem =
      assemble(GameSpec{discretize_bases(mt, mp), Variant::QpvStrict, 0.05}, level);
  for (auto _ : state) benchmark::DoNotOptimize(solve(problem).value);
}
BENCHMARK_CAPTURE(BM_Solve, bb84_L1, 2, 1, Level::L1)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Solve, bb84_L2, 2, 1, Level::L2)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Solve, three_L2, 2, 2, Level::L2)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Solve, five_L1AB, 3, 2, Level::L1AB)->Unit(benchmark::kSecond)->Iterations(1);

}  // namespace
BENCHMARK_MAIN();
