#include <benchmark/benchmark.h>

#include "rulex/analysis.hpp"
#include "rulex/dataset.hpp"
#include "rulex/extraction.hpp"
#include "rulex/network.hpp"
#include "rulex/program.hpp"
#include "rulex/tree.hpp"

namespace {

rulex::TreeData activation_table(std::size_t rows, std::size_t attrs) {
  auto ds = rulex::gen_xor(rows, 4, 1);
  auto model = rulex::init_mlp({{attrs, rulex::ActivationKind::tanh_fn},
                                {1, rulex::ActivationKind::sigmoid}},
                               4, 2);
  auto trace = rulex::capture_activations(model, ds);
  rulex::TreeData data;
  for (std::size_t j = 0; j < attrs; ++j) {
    data.attribute_names.push_back("h_1_n_" + std::to_string(j));
  }
  data.rows = trace.layers[0];
  for (const auto& inst : ds.instances) data.labels.push_back(inst.label);
  data.class_count = 2;
  return data;
}

struct Extracted {
  rulex::Mlp model;
  rulex::Dataset data;
  rulex::Program program;
};

Extracted trained_setup() {
  Extracted setup;
  setup.data = rulex::gen_xor(800, 10, 3);
  setup.model = rulex::init_mlp({{32, rulex::ActivationKind::tanh_fn},
                                 {1, rulex::ActivationKind::sigmoid}},
                                10, 4);
  rulex::TrainConfig config;
  config.epochs = 30;
  config.batch_size = 32;
  config.learning_rate = 0.005;
  config.optimizer = rulex::Optimizer::adam;
  config.seed = 5;
  rulex::train(setup.model, setup.data, config);
  setup.program = rulex::extract(setup.model, setup.data, {});
  return setup;
}

void bm_tree_fit(benchmark::State& state) {
  auto data = activation_table(static_cast<std::size_t>(state.range(0)),
                               static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) {
    auto tree = rulex::DecisionTree::fit(data);
    benchmark::DoNotOptimize(tree.leaf_count());
  }
}

void bm_extract(benchmark::State& state) {
  static const Extracted setup = trained_setup();
  for (auto _ : state) {
    auto program = rulex::extract(setup.model, setup.data, {});
    benchmark::DoNotOptimize(program.rules.size());
  }
}

void bm_evaluate(benchmark::State& state) {
  static const Extracted setup = trained_setup();
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& inst = setup.data.instances[i++ % setup.data.size()];
    auto pred = rulex::predict(setup.program, inst.features);
    benchmark::DoNotOptimize(pred.class_id);
  }
}

}  // namespace

BENCHMARK(bm_tree_fit)->Args({800, 16})->Args({800, 128});
BENCHMARK(bm_extract);
BENCHMARK(bm_evaluate);

BENCHMARK_MAIN();
