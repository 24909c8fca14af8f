#include "rulex/analysis.hpp"

#include <cmath>
#include <map>

#include <json.hpp>

#include "rulex/errors.hpp"

namespace rulex {

double program_accuracy(const Program& program, const Dataset& dataset) {
  if (dataset.instances.empty())
    throw validation_error("program_accuracy: empty dataset");
  std::size_t correct = 0;
  for (const auto& inst : dataset.instances) {
    if (predict(program, inst.features).class_id == inst.label) ++correct;
  }
  return 100.0 * static_cast<double>(correct) /
         static_cast<double>(dataset.size());
}

double fidelity(double model_acc, double program_acc) {
  if (model_acc <= 0.0)
    throw validation_error("fidelity undefined: model accuracy is 0");
  return program_acc / model_acc * 100.0;
}

FeatureImportance feature_importance(const Program& program) {
  FeatureImportance fi;
  const auto& names = program.metadata.feature_names;
  fi.rows.resize(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) fi.rows[i].feature = names[i];

  for (const auto& rule : program.rules) {
    for (const auto& elem : rule.body) {
      if (elem.kind == BodyElement::Kind::input_test) {
        fi.rows[elem.feature_index].count++;
        fi.total++;
      }
    }
  }
  if (fi.total > 0) {
    for (auto& row : fi.rows) {
      row.share = 100.0 * static_cast<double>(row.count) /
                  static_cast<double>(fi.total);
    }
  }
  return fi;
}

std::vector<NodeImpactRow> hidden_node_impact(const Program& program) {
  std::map<std::pair<int, int>, NodeImpactRow> table;
  auto row_for = [&](int level, int node) -> NodeImpactRow& {
    auto& row = table[{level, node}];
    row.level = level;
    row.node = node;
    return row;
  };

  for (const auto& rule : program.rules) {
    if (std::holds_alternative<HiddenAtom>(rule.head)) {
      const auto& h = std::get<HiddenAtom>(rule.head);
      row_for(h.level, h.node).head_count++;
    }
    for (const auto& elem : rule.body) {
      if (elem.kind == BodyElement::Kind::pos_hidden ||
          elem.kind == BodyElement::Kind::neg_hidden) {
        row_for(elem.hidden.level, elem.hidden.node).body_count++;
      }
    }
  }

  std::map<int, std::size_t> layer_total;
  for (auto& [key, row] : table) {
    row.impact = row.head_count * row.body_count;
    layer_total[row.level] += row.impact;
  }
  std::vector<NodeImpactRow> rows;
  rows.reserve(table.size());
  for (auto& [key, row] : table) {
    std::size_t total = layer_total[row.level];
    row.share = total > 0 ? 100.0 * static_cast<double>(row.impact) /
                                static_cast<double>(total)
                          : 0.0;
    rows.push_back(row);
  }
  return rows;
}

namespace {

std::pair<double, double> mean_stddev(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size());
  return {mean, std::sqrt(var)};
}

}  // namespace

ExperimentReport run_cv_experiment(const Dataset& dataset,
                                   const std::vector<ExperimentDesign>& designs,
                                   const ExtractionConfig& extraction, int k,
                                   std::uint64_t seed) {
  ExperimentReport report;
  report.k = k;
  report.seed = seed;

  auto folds = stratified_kfold(dataset, k, seed);

  for (const auto& design : designs) {
    DesignResult result;
    result.design = design;
    std::vector<double> model_accs, program_accs, fidelities;

    for (const auto& fold : folds) {
      std::vector<LayerArch> arch;
      for (std::size_t w : design.hidden_widths) {
        arch.push_back({w, design.hidden_activation});
      }
      std::size_t out_nodes =
          dataset.class_count == 2 ? 1 : static_cast<std::size_t>(dataset.class_count);
      arch.push_back({out_nodes, design.output_activation});

      TrainConfig tc = design.train;
      tc.seed = design.train.seed + static_cast<std::uint64_t>(fold.fold_index);
      Mlp model = init_mlp(arch, dataset.feature_count(), tc.seed);
      train(model, fold.train, tc);

      Program program = extract(model, fold.train, extraction);

      FoldResult fr;
      fr.fold_index = fold.fold_index;
      fr.model_accuracy = model_accuracy(model, fold.test);
      std::size_t abstained = 0, correct = 0;
      for (const auto& inst : fold.test.instances) {
        Prediction p = predict(program, inst.features);
        if (p.abstained) ++abstained;
        if (p.class_id == inst.label) ++correct;
      }
      fr.program_accuracy = 100.0 * static_cast<double>(correct) /
                            static_cast<double>(fold.test.size());
      fr.abstention_rate = 100.0 * static_cast<double>(abstained) /
                           static_cast<double>(fold.test.size());
      fr.fidelity = fidelity(fr.model_accuracy, fr.program_accuracy);
      fr.program_rule_count = program.rules.size();
      fr.importance = feature_importance(program);
      fr.impact = hidden_node_impact(program);

      model_accs.push_back(fr.model_accuracy);
      program_accs.push_back(fr.program_accuracy);
      fidelities.push_back(fr.fidelity);
      result.folds.push_back(std::move(fr));
    }

    auto [mm, sm] = mean_stddev(model_accs);
    auto [mp, sp] = mean_stddev(program_accs);
    auto [mf, sf] = mean_stddev(fidelities);
    result.mean_model_accuracy = mm;
    result.stddev_model_accuracy = sm;
    result.mean_program_accuracy = mp;
    result.stddev_program_accuracy = sp;
    result.mean_fidelity = mf;
    report.designs.push_back(std::move(result));
  }
  return report;
}

double baseline_tree_accuracy(const Dataset& dataset, int k, std::uint64_t seed,
                              const TreeParams& params) {
  auto folds = stratified_kfold(dataset, k, seed);
  std::size_t correct = 0, total = 0;
  for (const auto& fold : folds) {
    TreeData data;
    data.attribute_names = fold.train.feature_names;
    data.class_count = fold.train.class_count;
    for (const auto& inst : fold.train.instances) {
      data.rows.push_back(inst.features);
      data.labels.push_back(inst.label);
    }
    auto tree = DecisionTree::fit(data, params);
    for (const auto& inst : fold.test.instances) {
      if (tree.classify(inst.features) == inst.label) ++correct;
      ++total;
    }
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(total);
}

std::string report_to_json(const ExperimentReport& report) {
  nlohmann::json doc;
  doc["dataset"] = report.dataset_name;
  doc["k"] = report.k;
  doc["seed"] = report.seed;
  doc["designs"] = nlohmann::json::array();
  for (const auto& design : report.designs) {
    nlohmann::json d;
    d["name"] = design.design.name;
    d["hidden_widths"] = design.design.hidden_widths;
    d["hidden_activation"] = activation_name(design.design.hidden_activation);
    d["output_activation"] = activation_name(design.design.output_activation);
    d["epochs"] = design.design.train.epochs;
    d["batch_size"] = design.design.train.batch_size;
    d["learning_rate"] = design.design.train.learning_rate;
    d["optimizer"] =
        design.design.train.optimizer == Optimizer::adam ? "adam" : "sgd";
    d["train_seed"] = design.design.train.seed;
    d["mean_model_accuracy"] = design.mean_model_accuracy;
    d["stddev_model_accuracy"] = design.stddev_model_accuracy;
    d["mean_program_accuracy"] = design.mean_program_accuracy;
    d["stddev_program_accuracy"] = design.stddev_program_accuracy;
    d["mean_fidelity"] = design.mean_fidelity;
    d["folds"] = nlohmann::json::array();
    for (const auto& fold : design.folds) {
      nlohmann::json f;
      f["fold"] = fold.fold_index;
      f["model_accuracy"] = fold.model_accuracy;
      f["program_accuracy"] = fold.program_accuracy;
      f["fidelity"] = fold.fidelity;
      f["abstention_rate"] = fold.abstention_rate;
      f["program_rule_count"] = fold.program_rule_count;
      f["feature_importance"] = nlohmann::json::array();
      for (const auto& row : fold.importance.rows) {
        f["feature_importance"].push_back(
            {{"feature", row.feature}, {"count", row.count}, {"share", row.share}});
      }
      f["hidden_node_impact"] = nlohmann::json::array();
      for (const auto& row : fold.impact) {
        f["hidden_node_impact"].push_back({{"level", row.level},
                                           {"node", row.node},
                                           {"head_count", row.head_count},
                                           {"body_count", row.body_count},
                                           {"impact", row.impact},
                                           {"share", row.share}});
      }
      d["folds"].push_back(std::move(f));
    }
    doc["designs"].push_back(std::move(d));
  }
  return doc.dump(1);
}

}  // namespace rulex
