#include <benchmark/benchmark.h>

#include "support.hpp"

using namespace qpa;
using namespace qpa::testing;

static void BM_BuildLts(benchmark::State& state) {
  Model m = harness_model();
  Rng rng(7);
  std::vector<TermPtr> corpus;
  for (int i = 0; i < 128; ++i)
    corpus.push_back(random_closed_term(rng, static_cast<int>(state.range(0))));
  DensityMatrix rho = DensityMatrix::zero_state({"q1", "q2"});
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_lts({corpus[i++ % corpus.size()], rho}, m));
  }
}
BENCHMARK(BM_BuildLts)->Arg(3)->Arg(4);

static void BM_E91System(benchmark::State& state) {
  E91Options o;
  o.pairs = static_cast<int>(state.range(0));
  E91Model em = build_e91(o);
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_lts({em.system, em.initial}, em.model));
  }
}
BENCHMARK(BM_E91System)->Arg(1)->Arg(2)->Arg(3);

static void BM_E91Verify(benchmark::State& state) {
  E91Model em = build_e91();
  for (auto _ : state) {
    benchmark::DoNotOptimize(verify_e91(em));
  }
}
BENCHMARK(BM_E91Verify);
