#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "rulex/tree.hpp"

namespace rulex {

inline constexpr std::int64_t kFixedPointScale = 1000000;

// trunc(value * scale) toward zero.
std::int64_t fixed_point(double value, std::int64_t scale = kFixedPointScale);

struct HiddenAtom {
  int level = 0;
  int node = 0;
  CmpOp op = CmpOp::leq;
  std::int64_t threshold_key = 0;
  int key_disc = 0;  // discriminator for thresholds sharing a fixed-point key

  auto operator<=>(const HiddenAtom&) const = default;
  std::string text() const;  // h(L,N,"leq"|"gt",KEY,true)
};

struct OutputAtom {
  int class_id = 0;
  int rule_index = 0;
  double confidence = 0.0;

  auto operator<=>(const OutputAtom&) const = default;
  std::string text() const;
};

struct BodyElement {
  enum class Kind { pos_hidden, neg_hidden, input_test };
  Kind kind = Kind::pos_hidden;

  HiddenAtom hidden;  // pos_hidden / neg_hidden

  // input_test: an input-binding atom plus an arithmetic comparison on its
  // variable. Internal evaluation compares against the exact real threshold;
  // emitted text uses the fixed-point bound.
  std::size_t feature_index = 0;
  CmpOp op = CmpOp::leq;
  double threshold = 0.0;
  std::int64_t fp_bound = 0;

  auto operator<=>(const BodyElement&) const = default;
};

struct LogicRule {
  std::variant<HiddenAtom, OutputAtom> head;
  std::vector<BodyElement> body;

  // provenance for .lp comments
  std::size_t cover = 0;
  std::size_t ok = 0;
  int source_rule_index = -1;

  bool is_fact() const { return body.empty(); }
  bool same_clause(const LogicRule& other) const {
    return head == other.head && body == other.body;
  }
};

struct ProgramMetadata {
  int hidden_layer_count = 0;
  std::vector<std::string> feature_names;
  int class_count = 2;
  int majority_class = 0;
};

struct Program {
  std::vector<LogicRule> rules;
  ProgramMetadata metadata;
};

struct AnswerSet {
  std::map<std::string, double> inputs;  // feature name -> value
  std::set<HiddenAtom> hidden;
  std::set<OutputAtom> outputs;

  bool operator==(const AnswerSet&) const = default;
};

struct Prediction {
  int class_id = 0;
  int support_count = 0;
  double best_confidence = 0.0;
  bool abstained = false;
};

// Stratified bottom-up fixpoint; the unique answer set of program + facts.
// `inputs` must bind exactly the features named in the metadata.
AnswerSet evaluate(const Program& program,
                   const std::map<std::string, double>& inputs);

// Most-appropriate-class: rank by output-atom count, then best confidence,
// then smaller class id. No output atom derived -> majority class, abstained.
Prediction predict(const Program& program, const std::vector<double>& features);

// Solver-compatible program text, one rule per line, deterministic order.
std::string emit_text(const Program& program);

// Evaluates with rule order reversed within each stratum and compares.
bool double_evaluate_check(const Program& program,
                           const std::vector<double>& features);

// JSON round-trip for programs (.lp emission is one-way; this is the
// machine-readable form predict/analyze reload).
std::string program_to_json(const Program& program);
Program program_from_json(const std::string& text);
void save_program_json(const Program& program, const std::string& path);
Program load_program_json(const std::string& path);

}  // namespace rulex
