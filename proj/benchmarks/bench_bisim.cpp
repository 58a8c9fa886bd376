#include <benchmark/benchmark.h>

#include "support.hpp"

using namespace qpa;
using namespace qpa::testing;

namespace {

// A pair of bisimilar systems of configurable size: a chain of choices
// against its AC-reshuffled double.
std::pair<Lts, Lts> related_pair(int depth, const Model& m) {
  Rng rng(11 + depth);
  TermPtr t = random_closed_term(rng, depth);
  TermPtr t2 = Term::choice(ac_shuffle(rng, t), t);  // x + x collapses
  DensityMatrix rho = DensityMatrix::zero_state({"q1", "q2"});
  return {build_lts({t, rho}, m), build_lts({t2, rho}, m)};
}

}  // namespace

static void BM_StrongBisim(benchmark::State& state) {
  Model m = harness_model();
  auto [a, b] = related_pair(static_cast<int>(state.range(0)), m);
  for (auto _ : state) {
    benchmark::DoNotOptimize(strong_bisim(a, b));
  }
}
BENCHMARK(BM_StrongBisim)->Arg(3)->Arg(4);

static void BM_BranchingBisim(benchmark::State& state) {
  Model m = harness_model();
  auto [a, b] = related_pair(static_cast<int>(state.range(0)), m);
  for (auto _ : state) {
    benchmark::DoNotOptimize(branching_bisim(a, b));
  }
}
BENCHMARK(BM_BranchingBisim)->Arg(3)->Arg(4);

static void BM_RootedBranchingE91(benchmark::State& state) {
  E91Model em = build_e91();
  Lts sys = build_lts({em.system, em.initial}, em.model);
  Lts spec = build_lts({em.spec_loop, em.initial}, em.model);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rooted_branching_bisim(sys, spec));
  }
}
BENCHMARK(BM_RootedBranchingE91);
