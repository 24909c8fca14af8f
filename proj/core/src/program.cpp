#include "rulex/program.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rulex/errors.hpp"

namespace rulex {

std::int64_t fixed_point(double value, std::int64_t scale) {
  return static_cast<std::int64_t>(
      std::trunc(value * static_cast<double>(scale)));
}

namespace {

std::string key_term(std::int64_t key, int disc) {
  if (disc == 0) return std::to_string(key);
  // rare fixed-point collision: keep atom identity injective via a quoted term
  return "\"" + std::to_string(key) + "#" + std::to_string(disc) + "\"";
}

}  // namespace

std::string HiddenAtom::text() const {
  std::ostringstream out;
  out << "h(" << level << ',' << node << ",\"" << cmp_op_name(op) << "\","
      << key_term(threshold_key, key_disc) << ",true)";
  return out.str();
}

std::string OutputAtom::text() const {
  std::ostringstream out;
  out << "potential_predict_output(" << class_id << ',' << rule_index << ','
      << fixed_point(confidence) << ')';
  return out.str();
}

namespace {

int head_level(const LogicRule& rule, int hidden_layer_count) {
  if (std::holds_alternative<OutputAtom>(rule.head)) {
    return hidden_layer_count + 1;
  }
  return std::get<HiddenAtom>(rule.head).level;
}

bool body_satisfied(const LogicRule& rule, const AnswerSet& as,
                    const std::vector<std::string>& feature_names) {
  for (const auto& elem : rule.body) {
    switch (elem.kind) {
      case BodyElement::Kind::pos_hidden:
        if (!as.hidden.contains(elem.hidden)) return false;
        break;
      case BodyElement::Kind::neg_hidden:
        if (as.hidden.contains(elem.hidden)) return false;
        break;
      case BodyElement::Kind::input_test: {
        double v = as.inputs.at(feature_names[elem.feature_index]);
        bool ok = elem.op == CmpOp::leq ? v <= elem.threshold
                                        : v > elem.threshold;
        if (!ok) return false;
        break;
      }
    }
  }
  return true;
}

AnswerSet evaluate_ordered(const Program& program,
                           const std::map<std::string, double>& inputs,
                           bool reversed) {
  const auto& meta = program.metadata;
  if (inputs.size() != meta.feature_names.size())
    throw validation_error("evaluate: expected " +
                           std::to_string(meta.feature_names.size()) +
                           " input facts, got " + std::to_string(inputs.size()));
  for (const auto& name : meta.feature_names) {
    if (!inputs.contains(name))
      throw validation_error("evaluate: missing input fact for " + name);
  }

  AnswerSet as;
  as.inputs = inputs;

  // group rules by stratum (head level; output = k+1)
  std::vector<std::vector<const LogicRule*>> strata(
      static_cast<std::size_t>(meta.hidden_layer_count) + 2);
  for (const auto& rule : program.rules) {
    strata[static_cast<std::size_t>(head_level(rule, meta.hidden_layer_count))]
        .push_back(&rule);
  }

  for (auto& stratum : strata) {
    if (reversed) std::reverse(stratum.begin(), stratum.end());
    // negation refers only to completed lower strata, so one pass per
    // stratum reaches the fixpoint
    bool changed = true;
    while (changed) {
      changed = false;
      for (const LogicRule* rule : stratum) {
        if (!body_satisfied(*rule, as, meta.feature_names)) continue;
        if (std::holds_alternative<HiddenAtom>(rule->head)) {
          if (as.hidden.insert(std::get<HiddenAtom>(rule->head)).second)
            changed = true;
        } else {
          if (as.outputs.insert(std::get<OutputAtom>(rule->head)).second)
            changed = true;
        }
      }
    }
  }
  return as;
}

}  // namespace

AnswerSet evaluate(const Program& program,
                   const std::map<std::string, double>& inputs) {
  return evaluate_ordered(program, inputs, false);
}

Prediction predict(const Program& program,
                   const std::vector<double>& features) {
  const auto& meta = program.metadata;
  if (features.size() != meta.feature_names.size())
    throw validation_error("predict: feature arity " +
                           std::to_string(features.size()) +
                           " does not match program arity " +
                           std::to_string(meta.feature_names.size()));
  std::map<std::string, double> inputs;
  for (std::size_t i = 0; i < features.size(); ++i) {
    inputs[meta.feature_names[i]] = features[i];
  }
  AnswerSet as = evaluate(program, inputs);

  Prediction pred;
  if (as.outputs.empty()) {
    pred.class_id = meta.majority_class;
    pred.abstained = true;
    return pred;
  }

  std::vector<int> counts(static_cast<std::size_t>(meta.class_count), 0);
  std::vector<double> best_conf(static_cast<std::size_t>(meta.class_count), 0.0);
  for (const auto& atom : as.outputs) {
    auto c = static_cast<std::size_t>(atom.class_id);
    counts[c]++;
    best_conf[c] = std::max(best_conf[c], atom.confidence);
  }
  std::size_t best = 0;
  bool have = false;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) continue;
    if (!have || counts[c] > counts[best] ||
        (counts[c] == counts[best] && best_conf[c] > best_conf[best])) {
      best = c;
      have = true;
    }
  }
  pred.class_id = static_cast<int>(best);
  pred.support_count = counts[best];
  pred.best_confidence = best_conf[best];
  return pred;
}

namespace {

std::string body_text(const LogicRule& rule,
                      const std::vector<std::string>& feature_names) {
  std::ostringstream out;
  bool first = true;
  std::set<std::size_t> bound;
  for (const auto& elem : rule.body) {
    switch (elem.kind) {
      case BodyElement::Kind::pos_hidden:
        if (!first) out << ", ";
        out << elem.hidden.text();
        first = false;
        break;
      case BodyElement::Kind::neg_hidden:
        if (!first) out << ", ";
        out << "not " << elem.hidden.text();
        first = false;
        break;
      case BodyElement::Kind::input_test: {
        std::string var = "V" + std::to_string(elem.feature_index);
        if (bound.insert(elem.feature_index).second) {
          if (!first) out << ", ";
          out << "input(" << feature_names[elem.feature_index] << ',' << var
              << ')';
          first = false;
        }
        out << ", " << var << ' '
            << (elem.op == CmpOp::leq ? "<=" : ">") << ' ' << elem.fp_bound;
        break;
      }
    }
  }
  return out.str();
}

}  // namespace

std::string emit_text(const Program& program) {
  std::ostringstream out;
  for (const auto& rule : program.rules) {
    if (rule.source_rule_index >= 0) {
      out << "% rule " << rule.source_rule_index << " cover=" << rule.cover
          << " ok=" << rule.ok << '\n';
    }
    std::string head = std::holds_alternative<HiddenAtom>(rule.head)
                           ? std::get<HiddenAtom>(rule.head).text()
                           : std::get<OutputAtom>(rule.head).text();
    if (rule.is_fact()) {
      out << head << ".\n";
    } else {
      out << head << " :- " << body_text(rule, program.metadata.feature_names)
          << ".\n";
    }
  }
  return out.str();
}

bool double_evaluate_check(const Program& program,
                           const std::vector<double>& features) {
  std::map<std::string, double> inputs;
  for (std::size_t i = 0; i < features.size(); ++i) {
    inputs[program.metadata.feature_names[i]] = features[i];
  }
  AnswerSet a = evaluate_ordered(program, inputs, false);
  AnswerSet b = evaluate_ordered(program, inputs, true);
  return a == b;
}

namespace {

nlohmann::json hidden_to_json(const HiddenAtom& h) {
  return {{"level", h.level},
          {"node", h.node},
          {"op", cmp_op_name(h.op)},
          {"key", h.threshold_key},
          {"disc", h.key_disc}};
}

HiddenAtom hidden_from_json(const nlohmann::json& j) {
  HiddenAtom h;
  h.level = j.at("level").get<int>();
  h.node = j.at("node").get<int>();
  h.op = j.at("op").get<std::string>() == "leq" ? CmpOp::leq : CmpOp::gt;
  h.threshold_key = j.at("key").get<std::int64_t>();
  h.key_disc = j.at("disc").get<int>();
  return h;
}

}  // namespace

std::string program_to_json(const Program& program) {
  nlohmann::json doc;
  doc["metadata"] = {{"hidden_layer_count", program.metadata.hidden_layer_count},
                     {"feature_names", program.metadata.feature_names},
                     {"class_count", program.metadata.class_count},
                     {"majority_class", program.metadata.majority_class}};
  doc["rules"] = nlohmann::json::array();
  for (const auto& rule : program.rules) {
    nlohmann::json r;
    if (std::holds_alternative<HiddenAtom>(rule.head)) {
      r["head"] = hidden_to_json(std::get<HiddenAtom>(rule.head));
      r["head"]["type"] = "hidden";
    } else {
      const auto& o = std::get<OutputAtom>(rule.head);
      r["head"] = {{"type", "output"},
                   {"class", o.class_id},
                   {"rule_index", o.rule_index},
                   {"confidence", o.confidence}};
    }
    r["cover"] = rule.cover;
    r["ok"] = rule.ok;
    r["source_rule_index"] = rule.source_rule_index;
    r["body"] = nlohmann::json::array();
    for (const auto& elem : rule.body) {
      nlohmann::json e;
      switch (elem.kind) {
        case BodyElement::Kind::pos_hidden:
          e = hidden_to_json(elem.hidden);
          e["type"] = "pos";
          break;
        case BodyElement::Kind::neg_hidden:
          e = hidden_to_json(elem.hidden);
          e["type"] = "neg";
          break;
        case BodyElement::Kind::input_test:
          e = {{"type", "input"},
               {"feature_index", elem.feature_index},
               {"op", cmp_op_name(elem.op)},
               {"threshold", elem.threshold},
               {"fp_bound", elem.fp_bound}};
          break;
      }
      r["body"].push_back(std::move(e));
    }
    doc["rules"].push_back(std::move(r));
  }
  return doc.dump(1);
}

Program program_from_json(const std::string& text) {
  Program program;
  try {
    nlohmann::json doc = nlohmann::json::parse(text);
    const auto& meta = doc.at("metadata");
    program.metadata.hidden_layer_count = meta.at("hidden_layer_count").get<int>();
    program.metadata.feature_names =
        meta.at("feature_names").get<std::vector<std::string>>();
    program.metadata.class_count = meta.at("class_count").get<int>();
    program.metadata.majority_class = meta.at("majority_class").get<int>();
    for (const auto& r : doc.at("rules")) {
      LogicRule rule;
      const auto& head = r.at("head");
      if (head.at("type").get<std::string>() == "hidden") {
        rule.head = hidden_from_json(head);
      } else {
        rule.head = OutputAtom{head.at("class").get<int>(),
                               head.at("rule_index").get<int>(),
                               head.at("confidence").get<double>()};
      }
      rule.cover = r.at("cover").get<std::size_t>();
      rule.ok = r.at("ok").get<std::size_t>();
      rule.source_rule_index = r.at("source_rule_index").get<int>();
      for (const auto& e : r.at("body")) {
        BodyElement elem;
        std::string type = e.at("type").get<std::string>();
        if (type == "input") {
          elem.kind = BodyElement::Kind::input_test;
          elem.feature_index = e.at("feature_index").get<std::size_t>();
          elem.op = e.at("op").get<std::string>() == "leq" ? CmpOp::leq : CmpOp::gt;
          elem.threshold = e.at("threshold").get<double>();
          elem.fp_bound = e.at("fp_bound").get<std::int64_t>();
        } else {
          elem.kind = type == "pos" ? BodyElement::Kind::pos_hidden
                                    : BodyElement::Kind::neg_hidden;
          elem.hidden = hidden_from_json(e);
        }
        rule.body.push_back(std::move(elem));
      }
      program.rules.push_back(std::move(rule));
    }
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("program JSON: ") + e.what());
  }
  return program;
}

void save_program_json(const Program& program, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open for writing: " + path);
  out << program_to_json(program) << '\n';
}

Program load_program_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return program_from_json(buf.str());
}

}  // namespace rulex
