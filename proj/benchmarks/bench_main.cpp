#include <benchmark/benchmark.h>

#include "ghr/batch.hpp"
#include "ghr/baselines.hpp"
#include "ghr/rgg.hpp"
#include "ghr/tensor.hpp"
#include "ghr/training.hpp"

using namespace ghr;

namespace {

struct Fixture {
  std::vector<SSSPInstance> instances;
  std::vector<Hierarchy> hierarchies;
  Batch batch;
};

// A batch of small-preset training graphs prepared for `model`.
Fixture make_fixture(const Model& model, std::size_t graphs) {
  RGGConfig c;
  c.train_size = graphs;
  c.val_size = 1;
  c.test_size = 1;
  Fixture f;
  f.instances = build_splits(c).train;
  Rng rng = make_rng(0, "bench");
  std::vector<const SSSPInstance*> ip;
  std::vector<const Hierarchy*> hp;
  for (const auto& inst : f.instances) f.hierarchies.push_back(model.prepare(inst.graph, rng));
  for (std::size_t i = 0; i < graphs; ++i) {
    ip.push_back(&f.instances[i]);
    hp.push_back(&f.hierarchies[i]);
  }
  f.batch = make_batch(ip, hp);
  return f;
}

GHRConfig small_ghr() {
  GHRConfig c;
  c.low_iters = 4;
  return c;
}

void run_step(benchmark::State& state, Model& model, bool backward) {
  const Fixture f = make_fixture(model, static_cast<std::size_t>(state.range(0)));
  TrainConfig cfg;
  for (auto _ : state) {
    Tape tape;
    const auto preds = model.forward(tape, f.batch.hierarchy, false);
    const Var loss = discounted_loss(tape, preds, tape.constant(f.batch.targets),
                                     tape.constant(f.batch.weights), model.gamma(), cfg.loss);
    if (backward) tape.backward(loss, model.params());
    benchmark::DoNotOptimize(tape.value(loss)[0]);
  }
  model.params().zero_grad();
  state.counters["graphs/s"] =
      benchmark::Counter(static_cast<double>(state.iterations() * state.range(0)), benchmark::Counter::kIsRate);
}

void BM_GhrForward(benchmark::State& state) {
  GhrModel m(small_ghr(), 0);
  run_step(state, m, false);
}

void BM_GhrForwardBackward(benchmark::State& state) {
  GhrModel m(small_ghr(), 0);
  run_step(state, m, true);
}

void BM_DeepGineForwardBackward(benchmark::State& state) {
  FlatConfig c;
  c.depth = 10;
  FlatModel m(c, 0);
  run_step(state, m, true);
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Tensor a(n, 32, 0.5), b(32, 32, 0.25), out(n, 32);
  for (auto _ : state) {
    matmul_into(a, false, b, false, out, false);
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(BM_GhrForward)->Arg(1)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GhrForwardBackward)->Arg(1)->Arg(4)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DeepGineForwardBackward)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Matmul)->Arg(64)->Arg(1600);
int main(int argc, char** argv) {
  configure_allocator();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
