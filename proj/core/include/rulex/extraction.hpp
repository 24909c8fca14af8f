#pragma once

#include <cstdint>
#include <map>
#include <tuple>
#include <utility>
#include <vector>

#include "rulex/network.hpp"
#include "rulex/program.hpp"
#include "rulex/tree.hpp"

namespace rulex {

struct Condition {
  int level = 0;  // hidden layer index, 1-based
  int node = 0;
  CmpOp op = CmpOp::leq;
  double threshold = 0.0;
  std::int64_t threshold_key = 0;
  int key_disc = 0;

  HiddenAtom atom() const {
    return HiddenAtom{level, node, op, threshold_key, key_disc};
  }
  Condition opposite_condition() const {
    Condition c = *this;
    c.op = opposite(op);
    return c;
  }
};

// Assigns fixed-point keys to thresholds. Two distinct thresholds that
// truncate to the same key on the same node get distinct discriminators, so
// atom identity stays injective.
class KeyAssigner {
 public:
  explicit KeyAssigner(std::int64_t scale = kFixedPointScale) : scale_(scale) {}

  Condition make(int level, int node, CmpOp op, double threshold);

 private:
  std::int64_t scale_;
  std::map<std::tuple<int, int, std::int64_t>, std::vector<double>> seen_;
};

// Set of conditions keyed by (level, node, op, key, disc). Never holds both
// a condition and its opposite.
class ConditionRegistry {
 public:
  bool contains(const Condition& c) const;
  bool contains_opposite(const Condition& c) const {
    return contains(c.opposite_condition());
  }
  void insert(const Condition& c);
  std::size_t size() const { return map_.size(); }
  // Deterministic order by key.
  std::vector<Condition> sorted() const;

 private:
  using Key = std::tuple<int, int, CmpOp, std::int64_t, int>;
  static Key key_of(const Condition& c) {
    return {c.level, c.node, c.op, c.threshold_key, c.key_disc};
  }
  std::map<Key, Condition> map_;
};

struct ExtractionConfig {
  TreeParams tree;
  std::int64_t scale = kFixedPointScale;
};

struct ExtractionStats {
  std::size_t registered_conditions = 0;
  std::size_t distinct_hidden_heads = 0;
  // per hidden layer (1-based index -> count)
  std::map<int, std::size_t> conditions_per_layer;
  std::map<int, std::size_t> tree_rule_conditions_per_layer;
};

// Parsed form of a tree attribute name.
struct ParsedAttr {
  bool is_hidden = false;
  int level = 0;  // hidden: layer index; input: unused
  int index = 0;  // hidden: node; input: feature index
};
ParsedAttr parse_attribute(const std::string& attribute);

// Registers t unless t or its opposite is present; returns the body literal:
// positive over t, or negated over the registered opposite.
BodyElement process_condition(const AttrCondition& t, ConditionRegistry& registry,
                              KeyAssigner& keys);

// Tree on last-hidden-layer activations; every rule becomes a top-level
// logic rule with a potential_predict_output head.
std::pair<std::vector<LogicRule>, ConditionRegistry> extract_top_level(
    const TreeData& data_top, const ExtractionConfig& config, KeyAssigner& keys);

// Boolean labels of condition t over the trace (exact real threshold).
std::vector<char> evaluate_condition(const Condition& t,
                                     const ActivationTrace& trace);

// Tree on layer-(t.level - 1) activations labeled by t; only True-class
// rules become logic rules with head t.atom(). Fresh registry per call.
std::pair<std::vector<LogicRule>, ConditionRegistry> extract_intermediate_level(
    const TreeData& data, const Condition& t, const ExtractionConfig& config,
    KeyAssigner& keys);

// Tree on raw input features labeled by t (t.level must be 1); True-class
// rules become rules whose bodies bind input atoms and compare their values.
std::vector<LogicRule> extract_bottom_level(const TreeData& data,
                                            const Condition& t,
                                            const ExtractionConfig& config,
                                            KeyAssigner& keys);

// Full pipeline: top level on layer k, intermediate levels down to layer 1,
// bottom level on the inputs. Duplicate clauses are emitted once.
Program extract(const Mlp& model, const Dataset& dataset,
                const ExtractionConfig& config = {},
                ExtractionStats* stats = nullptr);

}  // namespace rulex
