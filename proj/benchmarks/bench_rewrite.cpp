#include <benchmark/benchmark.h>

#include "support.hpp"

using namespace qpa;
using namespace qpa::testing;

static void BM_NormalForm(benchmark::State& state) {
  Model m = harness_model();
  Rng rng(1);
  std::vector<TermPtr> corpus;
  for (int i = 0; i < 256; ++i)
    corpus.push_back(random_closed_term(rng, static_cast<int>(state.range(0))));
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(normal_form(corpus[i++ % corpus.size()], m));
  }
}
// Depth 5 and beyond is off desk scale: the expansion of nested merge
// towers grows factorially in the number of parallel components.
BENCHMARK(BM_NormalForm)->Arg(3)->Arg(4);

static void BM_AcCanonical(benchmark::State& state) {
  Rng rng(2);
  std::vector<TermPtr> corpus;
  for (int i = 0; i < 256; ++i) corpus.push_back(random_closed_term(rng, 6));
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ac_canonical(corpus[i++ % corpus.size()]));
  }
}
BENCHMARK(BM_AcCanonical);

static void BM_Weight(benchmark::State& state) {
  Rng rng(3);
  std::vector<TermPtr> corpus;
  for (int i = 0; i < 256; ++i) corpus.push_back(random_closed_term(rng, 4));
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(weight(corpus[i++ % corpus.size()]));
  }
}
BENCHMARK(BM_Weight);
