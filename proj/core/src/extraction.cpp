#include "rulex/extraction.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rulex/errors.hpp"

namespace rulex {

Condition KeyAssigner::make(int level, int node, CmpOp op, double threshold) {
  Condition c;
  c.level = level;
  c.node = node;
  c.op = op;
  c.threshold = threshold;
  c.threshold_key = fixed_point(threshold, scale_);

  auto& thresholds = seen_[{level, node, c.threshold_key}];
  auto it = std::find(thresholds.begin(), thresholds.end(), threshold);
  if (it == thresholds.end()) {
    thresholds.push_back(threshold);
    it = thresholds.end() - 1;
  }
  c.key_disc = static_cast<int>(it - thresholds.begin());
  return c;
}

bool ConditionRegistry::contains(const Condition& c) const {
  return map_.contains(key_of(c));
}

void ConditionRegistry::insert(const Condition& c) {
  map_.emplace(key_of(c), c);
}

std::vector<Condition> ConditionRegistry::sorted() const {
  std::vector<Condition> out;
  out.reserve(map_.size());
  for (const auto& [key, cond] : map_) out.push_back(cond);
  return out;
}

ParsedAttr parse_attribute(const std::string& attribute) {
  ParsedAttr parsed;
  if (attribute.rfind("input_feat_", 0) == 0) {
    parsed.is_hidden = false;
    parsed.index = std::stoi(attribute.substr(11));
    return parsed;
  }
  // h_<level>_n_<index>
  if (attribute.rfind("h_", 0) == 0) {
    std::size_t sep = attribute.find("_n_", 2);
    if (sep != std::string::npos) {
      parsed.is_hidden = true;
      parsed.level = std::stoi(attribute.substr(2, sep - 2));
      parsed.index = std::stoi(attribute.substr(sep + 3));
      return parsed;
    }
  }
  throw validation_error("unrecognized attribute name: " + attribute);
}

BodyElement process_condition(const AttrCondition& t,
                              ConditionRegistry& registry, KeyAssigner& keys) {
  ParsedAttr parsed = parse_attribute(t.attribute);
  if (!parsed.is_hidden)
    throw validation_error("process_condition: not a hidden-node attribute: " +
                           t.attribute);
  Condition cond = keys.make(parsed.level, parsed.index, t.op, t.threshold);

  if (!registry.contains(cond) && !registry.contains_opposite(cond)) {
    registry.insert(cond);
  }
  BodyElement elem;
  if (registry.contains_opposite(cond)) {
    elem.kind = BodyElement::Kind::neg_hidden;
    elem.hidden = cond.opposite_condition().atom();
  } else {
    elem.kind = BodyElement::Kind::pos_hidden;
    elem.hidden = cond.atom();
  }
  return elem;
}

std::pair<std::vector<LogicRule>, ConditionRegistry> extract_top_level(
    const TreeData& data_top, const ExtractionConfig& config,
    KeyAssigner& keys) {
  auto tree = DecisionTree::fit(data_top, config.tree);
  auto if_then = tree.to_rules(data_top);

  std::vector<LogicRule> rules;
  ConditionRegistry registry;
  int index = 0;
  for (const auto& r : if_then) {
    LogicRule rule;
    rule.head = OutputAtom{r.class_label, index, confidence(r)};
    for (const auto& t : r.conditions) {
      rule.body.push_back(process_condition(t, registry, keys));
    }
    rule.cover = r.cover;
    rule.ok = r.ok;
    rule.source_rule_index = index;
    rules.push_back(std::move(rule));
    ++index;
  }
  return {std::move(rules), std::move(registry)};
}

std::vector<char> evaluate_condition(const Condition& t,
                                     const ActivationTrace& trace) {
  if (t.level < 1 || static_cast<std::size_t>(t.level) > trace.layers.size())
    throw validation_error("evaluate_condition: layer " +
                           std::to_string(t.level) + " out of range");
  const auto& layer = trace.layers[static_cast<std::size_t>(t.level - 1)];
  std::vector<char> labels;
  labels.reserve(layer.size());
  for (const auto& row : layer) {
    if (static_cast<std::size_t>(t.node) >= row.size())
      throw validation_error("evaluate_condition: node " +
                             std::to_string(t.node) + " out of range");
    double v = row[static_cast<std::size_t>(t.node)];
    bool value = t.op == CmpOp::leq ? v <= t.threshold : v > t.threshold;
    labels.push_back(value ? 1 : 0);
  }
  return labels;
}

std::pair<std::vector<LogicRule>, ConditionRegistry> extract_intermediate_level(
    const TreeData& data, const Condition& t, const ExtractionConfig& config,
    KeyAssigner& keys) {
  auto tree = DecisionTree::fit(data, config.tree);
  auto if_then = tree.to_rules(data);

  std::vector<LogicRule> rules;
  ConditionRegistry registry;
  for (const auto& r : if_then) {
    if (r.class_label != 1) continue;  // only True-class rules
    LogicRule rule;
    rule.head = t.atom();
    for (const auto& cond : r.conditions) {
      rule.body.push_back(process_condition(cond, registry, keys));
    }
    rule.cover = r.cover;
    rule.ok = r.ok;
    rules.push_back(std::move(rule));
  }
  return {std::move(rules), std::move(registry)};
}

std::vector<LogicRule> extract_bottom_level(const TreeData& data,
                                            const Condition& t,
                                            const ExtractionConfig& config,
                                            KeyAssigner& keys) {
  (void)keys;
  if (t.level != 1)
    throw validation_error("extract_bottom_level: condition level must be 1");
  auto tree = DecisionTree::fit(data, config.tree);
  auto if_then = tree.to_rules(data);

  std::vector<LogicRule> rules;
  for (const auto& r : if_then) {
    if (r.class_label != 1) continue;
    LogicRule rule;
    rule.head = t.atom();
    for (const auto& cond : r.conditions) {
      ParsedAttr parsed = parse_attribute(cond.attribute);
      if (parsed.is_hidden)
        throw validation_error(
            "extract_bottom_level: expected input attribute, got " +
            cond.attribute);
      BodyElement elem;
      elem.kind = BodyElement::Kind::input_test;
      elem.feature_index = static_cast<std::size_t>(parsed.index);
      elem.op = cond.op;
      elem.threshold = cond.threshold;
      elem.fp_bound = fixed_point(cond.threshold, config.scale);
      rule.body.push_back(elem);
    }
    rule.cover = r.cover;
    rule.ok = r.ok;
    rules.push_back(std::move(rule));
  }
  return rules;
}

namespace {

std::vector<std::string> hidden_attr_names(int level, std::size_t width) {
  std::vector<std::string> names;
  names.reserve(width);
  for (std::size_t j = 0; j < width; ++j) {
    names.push_back("h_" + std::to_string(level) + "_n_" + std::to_string(j));
  }
  return names;
}

void append_unique(std::vector<LogicRule>& rules, std::vector<LogicRule> more) {
  for (auto& rule : more) {
    bool dup = false;
    for (const auto& existing : rules) {
      if (existing.same_clause(rule)) {
        dup = true;
        break;
      }
    }
    if (!dup) rules.push_back(std::move(rule));
  }
}

std::size_t count_rule_conditions(const std::vector<LogicRule>& rules) {
  std::size_t n = 0;
  for (const auto& r : rules) n += r.body.size();
  return n;
}

}  // namespace

Program extract(const Mlp& model, const Dataset& dataset,
                const ExtractionConfig& config, ExtractionStats* stats) {
  if (model.layers.size() < 2)
    throw validation_error("extract: model needs at least one hidden layer");
  if (dataset.instances.empty())
    throw validation_error("extract: empty dataset");
  if (dataset.feature_count() != model.input_dim)
    throw validation_error("extract: dataset arity " +
                           std::to_string(dataset.feature_count()) +
                           " does not match model input_dim " +
                           std::to_string(model.input_dim));

  int k = static_cast<int>(model.hidden_layer_count());
  ActivationTrace trace = capture_activations(model, dataset);
  KeyAssigner keys(config.scale);

  Program program;
  program.metadata.hidden_layer_count = k;
  program.metadata.feature_names = dataset.feature_names;
  program.metadata.class_count = dataset.class_count;
  program.metadata.majority_class = dataset.majority_class();

  // top level on layer k
  TreeData data_top;
  data_top.attribute_names =
      hidden_attr_names(k, model.layers[static_cast<std::size_t>(k - 1)].out_dim());
  data_top.rows = trace.layers[static_cast<std::size_t>(k - 1)];
  data_top.labels.reserve(dataset.size());
  for (const auto& inst : dataset.instances) data_top.labels.push_back(inst.label);
  data_top.class_count = dataset.class_count;

  auto [top_rules, registry] = extract_top_level(data_top, config, keys);
  program.rules = std::move(top_rules);

  ExtractionStats local;
  local.conditions_per_layer[k] = registry.size();
  local.tree_rule_conditions_per_layer[k + 1] =
      count_rule_conditions(program.rules);

  std::vector<Condition> conditions = registry.sorted();
  local.registered_conditions = conditions.size();

  // intermediate levels, layer k-1 down to 1
  for (int i = k - 1; i >= 1; --i) {
    // worklist for the next layer, keyed like the registry but allowed to
    // hold a condition and its opposite when different parents produced them
    std::map<std::tuple<int, int, CmpOp, std::int64_t, int>, Condition> next;
    std::size_t layer_rule_conditions = 0;
    for (const auto& t : conditions) {
      TreeData data;
      data.attribute_names = hidden_attr_names(
          i, model.layers[static_cast<std::size_t>(i - 1)].out_dim());
      data.rows = trace.layers[static_cast<std::size_t>(i - 1)];
      auto labels = evaluate_condition(t, trace);
      data.labels.assign(labels.begin(), labels.end());
      data.class_count = 2;

      auto [rules, conds] = extract_intermediate_level(data, t, config, keys);
      layer_rule_conditions += count_rule_conditions(rules);
      append_unique(program.rules, std::move(rules));
      for (const auto& c : conds.sorted()) {
        next.emplace(std::tuple{c.level, c.node, c.op, c.threshold_key,
                                c.key_disc},
                     c);
      }
    }
    conditions.clear();
    for (const auto& [key, c] : next) conditions.push_back(c);
    local.registered_conditions += conditions.size();
    local.conditions_per_layer[i] = conditions.size();
    local.tree_rule_conditions_per_layer[i + 1] = layer_rule_conditions;
  }

  // bottom level on the raw inputs
  TreeData input_data;
  input_data.attribute_names = dataset.feature_names;
  input_data.rows.reserve(dataset.size());
  for (const auto& inst : dataset.instances)
    input_data.rows.push_back(inst.features);
  for (const auto& t : conditions) {
    TreeData data = input_data;
    auto labels = evaluate_condition(t, trace);
    data.labels.assign(labels.begin(), labels.end());
    data.class_count = 2;
    append_unique(program.rules,
                  extract_bottom_level(data, t, config, keys));
  }

  if (stats) {
    std::set<HiddenAtom> heads;
    for (const auto& rule : program.rules) {
      if (std::holds_alternative<HiddenAtom>(rule.head))
        heads.insert(std::get<HiddenAtom>(rule.head));
    }
    local.distinct_hidden_heads = heads.size();
    *stats = local;
  }
  return program;
}

}  // namespace rulex
