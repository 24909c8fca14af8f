// Command-line front end: gen-data, train, extract, predict, analyze,
// run-experiment. Exit codes: 0 ok, 2 usage, 3 I/O, 4 divergence,
// 5 arity/validation.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rulex/analysis.hpp"
#include "rulex/dataset.hpp"
#include "rulex/errors.hpp"
#include "rulex/extraction.hpp"
#include "rulex/network.hpp"
#include "rulex/program.hpp"
#include "rulex/tree.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitDivergence = 4;
constexpr int kExitValidation = 5;

std::vector<std::size_t> parse_widths(const std::string& spec) {
  std::vector<std::size_t> widths;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    widths.push_back(std::stoul(tok));
  }
  if (widths.empty()) throw rulex::validation_error("empty architecture spec");
  return widths;
}

rulex::Mlp build_model(const rulex::Dataset& data, const std::string& arch,
                       const std::string& hidden_act,
                       const std::string& output_act, std::uint64_t seed) {
  std::vector<rulex::LayerArch> layers;
  for (std::size_t w : parse_widths(arch)) {
    layers.push_back({w, rulex::activation_from_name(hidden_act)});
  }
  std::size_t out_nodes = data.class_count == 2
                              ? 1
                              : static_cast<std::size_t>(data.class_count);
  layers.push_back({out_nodes, rulex::activation_from_name(output_act)});
  return rulex::init_mlp(layers, data.feature_count(), seed);
}

rulex::Optimizer optimizer_from_name(const std::string& name) {
  if (name == "sgd") return rulex::Optimizer::sgd;
  if (name == "adam") return rulex::Optimizer::adam;
  throw rulex::validation_error("unknown optimizer '" + name +
                                "' (valid: sgd, adam)");
}

int run(int argc, char** argv) {
  CLI::App app{"Rule extraction from feed-forward networks into stratified logic programs"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset");
  std::string gen_kind, gen_out;
  std::size_t gen_n = 1000, gen_d = 10;
  std::uint64_t gen_seed = 0;
  gen->add_option("kind", gen_kind, "xor or modified-xor")->required();
  gen->add_option("--n", gen_n, "instance count");
  gen->add_option("--d", gen_d, "feature count");
  gen->add_option("--seed", gen_seed, "generator seed")->required();
  gen->add_option("--out", gen_out, "output CSV path")->required();

  // train
  auto* tr = app.add_subcommand("train", "Train a network on a CSV dataset");
  std::string tr_data, tr_arch = "128", tr_hidden_act = "tanh",
              tr_output_act = "sigmoid", tr_optimizer = "sgd", tr_out;
  std::size_t tr_epochs = 100, tr_batch = 32;
  double tr_lr = 0.05;
  std::uint64_t tr_seed = 0;
  tr->add_option("--data", tr_data)->required();
  tr->add_option("--arch", tr_arch, "hidden widths, comma separated");
  tr->add_option("--hidden-activation", tr_hidden_act);
  tr->add_option("--output-activation", tr_output_act);
  tr->add_option("--epochs", tr_epochs);
  tr->add_option("--batch-size", tr_batch);
  tr->add_option("--lr", tr_lr);
  tr->add_option("--optimizer", tr_optimizer, "sgd or adam");
  tr->add_option("--seed", tr_seed)->required();
  tr->add_option("--out-model", tr_out)->required();

  // extract
  auto* ex = app.add_subcommand("extract", "Extract a logic program from a model");
  std::string ex_model, ex_data, ex_out, ex_out_json;
  std::size_t ex_min_leaf = 2, ex_max_depth = 10;
  ex->add_option("--model", ex_model)->required();
  ex->add_option("--data", ex_data, "training data CSV")->required();
  ex->add_option("--out-program", ex_out, ".lp output path")->required();
  ex->add_option("--out-json", ex_out_json, "also write the program as JSON");
  ex->add_option("--min-leaf", ex_min_leaf);
  ex->add_option("--max-depth", ex_max_depth);

  // predict
  auto* pr = app.add_subcommand("predict", "Per-instance predictions CSV");
  std::string pr_model, pr_program, pr_data, pr_out;
  pr->add_option("--model", pr_model, "model JSON (network predictions)");
  pr->add_option("--program", pr_program, "program JSON (surrogate predictions)");
  pr->add_option("--data", pr_data)->required();
  pr->add_option("--out", pr_out)->required();

  // analyze
  auto* an = app.add_subcommand("analyze", "Importance, impact and accuracy report");
  std::string an_program, an_data, an_out;
  an->add_option("--program", an_program, "program JSON")->required();
  an->add_option("--data", an_data)->required();
  an->add_option("--out-report", an_out)->required();

  // run-experiment
  auto* rx = app.add_subcommand("run-experiment", "Cross-validated experiment from a config file");
  std::string rx_config;
  rx->add_option("config", rx_config, "experiment config JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (gen->parsed()) {
    rulex::Dataset ds;
    if (gen_kind == "xor") {
      ds = rulex::gen_xor(gen_n, gen_d, gen_seed);
    } else if (gen_kind == "modified-xor") {
      ds = rulex::gen_modified_xor(gen_n, gen_d, gen_seed);
    } else {
      throw rulex::validation_error("unknown dataset kind '" + gen_kind +
                                    "' (valid: xor, modified-xor)");
    }
    rulex::save_csv(ds, gen_out);
    std::cerr << "wrote " << ds.size() << " instances to " << gen_out << "\n";
  } else if (tr->parsed()) {
    auto data = rulex::load_csv(tr_data);
    auto model = build_model(data, tr_arch, tr_hidden_act, tr_output_act, tr_seed);
    rulex::TrainConfig config;
    config.epochs = tr_epochs;
    config.batch_size = tr_batch;
    config.learning_rate = tr_lr;
    config.seed = tr_seed;
    config.optimizer = optimizer_from_name(tr_optimizer);
    auto history = rulex::train(model, data, config);
    rulex::save_model(model, tr_out);
    std::cerr << "final loss " << (history.empty() ? 0.0 : history.back())
              << "\n";
    std::cout << "training_accuracy " << rulex::model_accuracy(model, data)
              << "\n";
  } else if (ex->parsed()) {
    auto model = rulex::load_model(ex_model);
    auto data = rulex::load_csv(ex_data);
    rulex::ExtractionConfig config;
    config.tree.min_leaf = ex_min_leaf;
    config.tree.max_depth = ex_max_depth;
    rulex::ExtractionStats stats;
    auto program = rulex::extract(model, data, config, &stats);
    std::ofstream out(ex_out);
    if (!out) throw rulex::io_error("cannot open for writing: " + ex_out);
    out << rulex::emit_text(program);
    if (!ex_out_json.empty()) rulex::save_program_json(program, ex_out_json);
    std::cout << "rules " << program.rules.size() << "\n"
              << "registered_conditions " << stats.registered_conditions << "\n"
              << "distinct_hidden_heads " << stats.distinct_hidden_heads << "\n";
  } else if (pr->parsed()) {
    if (pr_model.empty() == pr_program.empty())
      throw CLI::ValidationError("predict", "give exactly one of --model / --program");
    auto data = rulex::load_csv(pr_data);
    std::ofstream out(pr_out);
    if (!out) throw rulex::io_error("cannot open for writing: " + pr_out);
    out << "index,label,prediction\n";
    if (!pr_model.empty()) {
      auto model = rulex::load_model(pr_model);
      for (std::size_t i = 0; i < data.size(); ++i) {
        out << i << ',' << data.instances[i].label << ','
            << rulex::predict_class(model, data.instances[i].features) << '\n';
      }
    } else {
      auto program = rulex::load_program_json(pr_program);
      for (std::size_t i = 0; i < data.size(); ++i) {
        out << i << ',' << data.instances[i].label << ','
            << rulex::predict(program, data.instances[i].features).class_id
            << '\n';
      }
    }
  } else if (an->parsed()) {
    auto program = rulex::load_program_json(an_program);
    auto data = rulex::load_csv(an_data);
    nlohmann::json doc;
    doc["program_accuracy"] = rulex::program_accuracy(program, data);
    auto fi = rulex::feature_importance(program);
    doc["feature_importance"] = nlohmann::json::array();
    for (const auto& row : fi.rows) {
      doc["feature_importance"].push_back(
          {{"feature", row.feature}, {"count", row.count}, {"share", row.share}});
    }
    doc["hidden_node_impact"] = nlohmann::json::array();
    for (const auto& row : rulex::hidden_node_impact(program)) {
      doc["hidden_node_impact"].push_back({{"level", row.level},
                                           {"node", row.node},
                                           {"head_count", row.head_count},
                                           {"body_count", row.body_count},
                                           {"impact", row.impact},
                                           {"share", row.share}});
    }
    std::ofstream out(an_out);
    if (!out) throw rulex::io_error("cannot open for writing: " + an_out);
    out << doc.dump(1) << '\n';
  } else if (rx->parsed()) {
    std::ifstream in(rx_config);
    if (!in) throw rulex::io_error("cannot open: " + rx_config);
    nlohmann::json cfg;
    try {
      in >> cfg;
    } catch (const nlohmann::json::exception& e) {
      throw rulex::parse_error(rx_config + ": " + e.what());
    }

    auto data = rulex::load_csv(cfg.at("dataset").get<std::string>());
    int k = cfg.value("k", 5);
    if (!cfg.contains("seed"))
      throw rulex::validation_error(rx_config + ": seed is mandatory");
    std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();

    rulex::ExtractionConfig extraction;
    if (cfg.contains("extraction")) {
      extraction.tree.min_leaf = cfg["extraction"].value("min_leaf", 2);
      extraction.tree.max_depth = cfg["extraction"].value("max_depth", 10);
    }

    std::vector<rulex::ExperimentDesign> designs;
    for (const auto& d : cfg.at("designs")) {
      rulex::ExperimentDesign design;
      design.name = d.value("name", "design" + std::to_string(designs.size()));
      design.hidden_widths = d.at("hidden").get<std::vector<std::size_t>>();
      design.hidden_activation =
          rulex::activation_from_name(d.value("hidden_activation", "tanh"));
      design.output_activation =
          rulex::activation_from_name(d.value("output_activation", "sigmoid"));
      design.train.epochs = d.at("epochs").get<std::size_t>();
      design.train.batch_size = d.at("batch_size").get<std::size_t>();
      design.train.learning_rate = d.value("learning_rate", 0.05);
      design.train.optimizer = optimizer_from_name(d.value("optimizer", "sgd"));
      if (!d.contains("seed"))
        throw rulex::validation_error(rx_config + ": design seed is mandatory");
      design.train.seed = d.at("seed").get<std::uint64_t>();
      designs.push_back(std::move(design));
    }

    auto report = rulex::run_cv_experiment(data, designs, extraction, k, seed);
    report.dataset_name = cfg.at("dataset").get<std::string>();
    std::string json = rulex::report_to_json(report);
    if (cfg.contains("out")) {
      std::string path = cfg.at("out").get<std::string>();
      std::ofstream out(path);
      if (!out) throw rulex::io_error("cannot open for writing: " + path);
      out << json << '\n';
      for (const auto& dr : report.designs) {
        std::cerr << dr.design.name << ": model " << dr.mean_model_accuracy
                  << " program " << dr.mean_program_accuracy << "\n";
      }
    } else {
      std::cout << json << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const rulex::divergence_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const rulex::validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const rulex::io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const rulex::parse_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
