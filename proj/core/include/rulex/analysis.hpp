#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rulex/dataset.hpp"
#include "rulex/extraction.hpp"
#include "rulex/network.hpp"
#include "rulex/program.hpp"

namespace rulex {

struct FeatureImportanceRow {
  std::string feature;
  std::size_t count = 0;  // input(feature,_) occurrences in rule bodies
  double share = 0.0;     // percent of all feature occurrences
};

struct FeatureImportance {
  std::vector<FeatureImportanceRow> rows;  // one per metadata feature
  std::size_t total = 0;
};

struct NodeImpactRow {
  int level = 0;
  int node = 0;
  std::size_t head_count = 0;
  std::size_t body_count = 0;  // positive and negated occurrences
  std::size_t impact = 0;      // head_count * body_count
  double share = 0.0;          // percent of the layer's impact sum
};

// Percent of instances where predict() matches the label; abstentions fall
// back to the majority class recorded in the program metadata.
double program_accuracy(const Program& program, const Dataset& dataset);

// program_acc / model_acc * 100; model_acc must be positive.
double fidelity(double model_acc, double program_acc);

FeatureImportance feature_importance(const Program& program);

std::vector<NodeImpactRow> hidden_node_impact(const Program& program);

struct ExperimentDesign {
  std::string name;
  std::vector<std::size_t> hidden_widths;
  ActivationKind hidden_activation = ActivationKind::tanh_fn;
  ActivationKind output_activation = ActivationKind::sigmoid;
  TrainConfig train;
};

struct FoldResult {
  int fold_index = 0;
  double model_accuracy = 0.0;
  double program_accuracy = 0.0;
  double fidelity = 0.0;
  double abstention_rate = 0.0;
  std::size_t program_rule_count = 0;
  FeatureImportance importance;
  std::vector<NodeImpactRow> impact;
};

struct DesignResult {
  ExperimentDesign design;
  std::vector<FoldResult> folds;
  double mean_model_accuracy = 0.0;
  double stddev_model_accuracy = 0.0;
  double mean_program_accuracy = 0.0;
  double stddev_program_accuracy = 0.0;
  double mean_fidelity = 0.0;
};

struct ExperimentReport {
  std::string dataset_name;
  int k = 5;
  std::uint64_t seed = 0;
  std::vector<DesignResult> designs;
};

// For each design and fold: train on the train split, extract from the train
// split, score model and program on the test split. Test folds never reach
// train() or extract(). Per-fold train seed = design seed + fold index.
ExperimentReport run_cv_experiment(const Dataset& dataset,
                                   const std::vector<ExperimentDesign>& designs,
                                   const ExtractionConfig& extraction, int k,
                                   std::uint64_t seed);

// Cross-validated accuracy of the tree learner fit directly on the inputs.
double baseline_tree_accuracy(const Dataset& dataset, int k, std::uint64_t seed,
                              const TreeParams& params = {});

std::string report_to_json(const ExperimentReport& report);

}  // namespace rulex
