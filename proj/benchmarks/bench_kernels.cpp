#include <benchmark/benchmark.h>

#include "lcr/numerics/ops.hpp"
#include "lcr/numerics/random.hpp"

namespace {

using lcr::numerics::Graph;
using lcr::numerics::Parameter;
using lcr::numerics::Tensor;

Tensor random_tensor(lcr::numerics::Shape shape, lcr::Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = 2.0 * lcr::uniform01(rng) - 1.0;
  return t;
}

void BM_DenseForward(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  lcr::Rng rng(1);
  const Tensor x = random_tensor({batch, 64}, rng);
  const Tensor w = random_tensor({64, 64}, rng);
  const Tensor b = random_tensor({64}, rng);
  Tensor out;
  for (auto _ : state) {
    lcr::numerics::kernels::dense_forward(x, w, b, out);
    benchmark::DoNotOptimize(out.raw());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(batch));
}
BENCHMARK(BM_DenseForward)->Arg(1)->Arg(32)->Arg(256);

// First layer of the grid encoder: 4x10x10 observation, 16 filters of 3x3.
void BM_Conv2dForward(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  lcr::Rng rng(2);
  const Tensor x = random_tensor({batch, 4, 10, 10}, rng);
  const Tensor k = random_tensor({16, 4, 3, 3}, rng);
  const Tensor b = random_tensor({16}, rng);
  Tensor out;
  for (auto _ : state) {
    lcr::numerics::kernels::conv2d_forward(x, k, b, out);
    benchmark::DoNotOptimize(out.raw());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(batch));
}
BENCHMARK(BM_Conv2dForward)->Arg(1)->Arg(32)->Arg(1024);

void BM_Conv2dBackward(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  lcr::Rng rng(3);
  const Tensor x = random_tensor({batch, 16, 4, 4}, rng);
  Parameter k("k", random_tensor({32, 16, 3, 3}, rng));
  Parameter b("b", random_tensor({32}, rng));
  for (auto _ : state) {
    Graph graph;
    auto loss = lcr::numerics::sum(lcr::numerics::conv2d(graph.constant(x), graph.parameter(k), graph.parameter(b)));
    graph.backward(loss);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(batch));
}
BENCHMARK(BM_Conv2dBackward)->Arg(32)->Arg(1024);

}  // namespace
