#include <benchmark/benchmark.h>

#include "findex/rng.hpp"
#include "findex/suite.hpp"

using namespace findex;

namespace {

CondExp make_trace(std::uint64_t seed) {
  return make_condexp(random_scenario(seed));
}

void bm_apply(benchmark::State& state) {
  CondExp ce = make_trace(7);
  Rng rng(1);
  Element x = Element::zero(ce.amb_shape());
  for (int b = 0; b < x.num_blocks(); ++b)
    x.block(b) = rng.gauss_matrix(x.shape().block_dim(b), x.shape().block_dim(b));
  for (auto _ : state) benchmark::DoNotOptimize(ce.apply(x));
}
BENCHMARK(bm_apply);

void bm_compute_K(benchmark::State& state) {
  CondExp ce = make_trace(7);
  for (auto _ : state)
    benchmark::DoNotOptimize(compute_K(ce, {}, static_cast<int>(state.range(0))));
}
BENCHMARK(bm_compute_K)->Arg(8)->Arg(32);

void bm_compute_L(benchmark::State& state) {
  CondExp ce = make_trace(7);
  for (auto _ : state) benchmark::DoNotOptimize(compute_L(ce));
}
BENCHMARK(bm_compute_L);

void bm_quasi_basis(benchmark::State& state) {
  CondExp ce = make_trace(7);
  for (auto _ : state) benchmark::DoNotOptimize(quasi_basis(ce));
}
BENCHMARK(bm_quasi_basis);

void bm_basic_construction(benchmark::State& state) {
  AlgebraShape sub({1}), amb({2});
  Eigen::MatrixXi lam(1, 1);
  lam << 2;
  CondExp ce = trace_ce(Embedding(sub, amb, lam));
  for (auto _ : state) {
    BasicConstruction bc(ce);
    benchmark::DoNotOptimize(bc.jones_projection());
  }
}
BENCHMARK(bm_basic_construction);

void bm_validate(benchmark::State& state) {
  CondExp ce = make_trace(7);
  for (auto _ : state) benchmark::DoNotOptimize(validate_ce(ce));
}
BENCHMARK(bm_validate);

}  // namespace

BENCHMARK_MAIN();
