#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace rulex {

enum class CmpOp { leq, gt };

inline const char* cmp_op_name(CmpOp op) { return op == CmpOp::leq ? "leq" : "gt"; }
inline CmpOp opposite(CmpOp op) { return op == CmpOp::leq ? CmpOp::gt : CmpOp::leq; }

struct AttrCondition {
  std::string attribute;  // "h_<level>_n_<index>" or "input_feat_<i>"
  CmpOp op = CmpOp::leq;
  double threshold = 0.0;

  bool operator==(const AttrCondition&) const = default;
};

struct IfThenRule {
  std::vector<AttrCondition> conditions;  // conjunctive
  int class_label = 0;
  std::size_t cover = 0;  // instances satisfying all conditions
  std::size_t ok = 0;     // of those, instances with matching class
};

// confidence = ok/cover as a fraction in [0,1]; cover must be positive.
double confidence(const IfThenRule& rule);

struct TreeNode {
  bool is_leaf = true;
  // internal node
  std::size_t attribute = 0;
  double threshold = 0.0;
  std::unique_ptr<TreeNode> left;   // <= branch
  std::unique_ptr<TreeNode> right;  // > branch
  // leaf
  int class_label = 0;
  std::vector<std::size_t> class_histogram;
};

struct TreeParams {
  std::size_t min_leaf = 2;
  std::size_t max_depth = 10;
};

struct TreeData {
  std::vector<std::string> attribute_names;
  std::vector<std::vector<double>> rows;  // rows[i][attr]
  std::vector<int> labels;
  int class_count = 2;
};

// Information gain and gain ratio for a binary split, entropies base 2.
// Gain ratio is 0 when the split information is 0.
double information_gain(const std::vector<std::size_t>& left_counts,
                        const std::vector<std::size_t>& right_counts);
double gain_ratio(const std::vector<std::size_t>& left_counts,
                  const std::vector<std::size_t>& right_counts);

class DecisionTree {
 public:
  // Greedy top-down induction. Candidate thresholds are the observed
  // attribute values in each node's partition; among splits whose
  // information gain reaches the mean gain of all candidates, the one
  // with the highest gain ratio wins. Ties break to the lowest attribute
  // index, then the smallest threshold.
  static DecisionTree fit(const TreeData& data, const TreeParams& params = {});

  int classify(const std::vector<double>& row) const;
  const TreeNode& root() const { return *root_; }
  std::size_t leaf_count() const;

  // One rule per leaf in left-to-right order; conditions on the same
  // attribute and op merged to the tightest bound; cover/ok against `data`.
  std::vector<IfThenRule> to_rules(const TreeData& data) const;

 private:
  std::unique_ptr<TreeNode> root_;
};

}  // namespace rulex
