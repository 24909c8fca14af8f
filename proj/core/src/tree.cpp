#include "rulex/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "rulex/errors.hpp"

namespace rulex {

namespace {

double entropy(const std::vector<std::size_t>& counts, std::size_t total) {
  if (total == 0) return 0.0;
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

std::size_t sum(const std::vector<std::size_t>& counts) {
  std::size_t t = 0;
  for (std::size_t c : counts) t += c;
  return t;
}

constexpr double kTieEps = 1e-12;

struct SplitChoice {
  bool found = false;
  std::size_t attribute = 0;
  double threshold = 0.0;
  double gain = 0.0;
  double ratio = 0.0;
};

}  // namespace

double information_gain(const std::vector<std::size_t>& left_counts,
                        const std::vector<std::size_t>& right_counts) {
  std::size_t nl = sum(left_counts), nr = sum(right_counts);
  std::size_t n = nl + nr;
  if (n == 0) return 0.0;
  std::vector<std::size_t> parent(left_counts.size(), 0);
  for (std::size_t c = 0; c < parent.size(); ++c) {
    parent[c] = left_counts[c] + right_counts[c];
  }
  double h = entropy(parent, n);
  double hl = entropy(left_counts, nl);
  double hr = entropy(right_counts, nr);
  return h - (static_cast<double>(nl) / n) * hl -
         (static_cast<double>(nr) / n) * hr;
}

double gain_ratio(const std::vector<std::size_t>& left_counts,
                  const std::vector<std::size_t>& right_counts) {
  std::size_t nl = sum(left_counts), nr = sum(right_counts);
  std::size_t n = nl + nr;
  if (n == 0) return 0.0;
  double split_info = entropy({nl, nr}, n);
  if (split_info <= 0.0) return 0.0;
  return information_gain(left_counts, right_counts) / split_info;
}

double confidence(const IfThenRule& rule) {
  if (rule.cover == 0)
    throw validation_error("confidence undefined: rule covers no instances");
  return static_cast<double>(rule.ok) / static_cast<double>(rule.cover);
}

namespace {

struct Builder {
  const TreeData& data;
  const TreeParams& params;

  std::unique_ptr<TreeNode> build(const std::vector<std::size_t>& indices,
                                  std::size_t depth) {
    auto node = std::make_unique<TreeNode>();
    node->class_histogram.assign(static_cast<std::size_t>(data.class_count), 0);
    for (std::size_t i : indices) {
      node->class_histogram[static_cast<std::size_t>(data.labels[i])]++;
    }
    node->class_label = majority(node->class_histogram);

    bool pure = false;
    for (std::size_t c : node->class_histogram) {
      if (c == indices.size()) pure = true;
    }
    if (pure || depth >= params.max_depth) return node;

    SplitChoice best = choose_split(indices);
    if (!best.found) return node;

    std::vector<std::size_t> left, right;
    for (std::size_t i : indices) {
      (data.rows[i][best.attribute] <= best.threshold ? left : right)
          .push_back(i);
    }
    node->is_leaf = false;
    node->attribute = best.attribute;
    node->threshold = best.threshold;
    node->left = build(left, depth + 1);
    node->right = build(right, depth + 1);
    return node;
  }

  static int majority(const std::vector<std::size_t>& hist) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < hist.size(); ++c) {
      if (hist[c] > hist[best]) best = c;
    }
    return static_cast<int>(best);
  }

  // Sorted sweep per attribute: each distinct observed value (except the
  // largest) is a candidate threshold. The mean-gain guard keeps only
  // splits whose information gain reaches the mean gain of all candidates;
  // gain ratio decides among those.
  SplitChoice choose_split(const std::vector<std::size_t>& indices) {
    struct Candidate {
      std::size_t attribute;
      double threshold;
      double gain;
      double ratio;
    };
    std::vector<Candidate> candidates;

    std::size_t n = indices.size();
    std::size_t classes = static_cast<std::size_t>(data.class_count);
    std::vector<std::pair<double, int>> column(n);
    std::vector<std::size_t> total(classes, 0);
    for (std::size_t i : indices) {
      total[static_cast<std::size_t>(data.labels[i])]++;
    }

    for (std::size_t attr = 0; attr < data.attribute_names.size(); ++attr) {
      for (std::size_t p = 0; p < n; ++p) {
        column[p] = {data.rows[indices[p]][attr], data.labels[indices[p]]};
      }
      std::sort(column.begin(), column.end());

      std::vector<std::size_t> left(classes, 0);
      std::size_t nl = 0;
      for (std::size_t p = 0; p < n; ++p) {
        left[static_cast<std::size_t>(column[p].second)]++;
        ++nl;
        if (p + 1 < n && column[p + 1].first == column[p].first) continue;
        if (p + 1 == n) break;  // right side would be empty
        std::size_t nr = n - nl;
        if (nl < params.min_leaf || nr < params.min_leaf) continue;
        std::vector<std::size_t> right(classes, 0);
        for (std::size_t c = 0; c < classes; ++c) right[c] = total[c] - left[c];
        double gain = information_gain(left, right);
        double ratio = gain_ratio(left, right);
        candidates.push_back({attr, column[p].first, gain, ratio});
      }
    }

    SplitChoice best;
    if (candidates.empty()) return best;
    double mean_gain = 0.0;
    for (const auto& c : candidates) mean_gain += c.gain;
    mean_gain /= static_cast<double>(candidates.size());

    for (const auto& c : candidates) {
      if (c.gain + kTieEps < mean_gain) continue;
      if (!best.found || c.ratio > best.ratio + kTieEps) {
        best = {true, c.attribute, c.threshold, c.gain, c.ratio};
      }
      // candidates are generated in (attribute, threshold) order, so the
      // first of any ratio tie already wins
    }
    if (best.found && best.gain <= kTieEps) best.found = false;
    return best;
  }
};

void collect_rules(const TreeNode& node, std::vector<AttrCondition>& path,
                   const TreeData& data, std::vector<IfThenRule>& out) {
  if (node.is_leaf) {
    // merge conditions on the same attribute and op to the tightest bound
    std::map<std::pair<std::string, CmpOp>, double> merged;
    std::vector<std::pair<std::string, CmpOp>> order;
    for (const auto& cond : path) {
      auto key = std::make_pair(cond.attribute, cond.op);
      auto it = merged.find(key);
      if (it == merged.end()) {
        merged[key] = cond.threshold;
        order.push_back(key);
      } else if (cond.op == CmpOp::leq) {
        it->second = std::min(it->second, cond.threshold);
      } else {
        it->second = std::max(it->second, cond.threshold);
      }
    }
    IfThenRule rule;
    for (const auto& key : order) {
      rule.conditions.push_back({key.first, key.second, merged[key]});
    }
    rule.class_label = node.class_label;
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
      bool covered = true;
      for (const auto& cond : rule.conditions) {
        auto attr_it = std::find(data.attribute_names.begin(),
                                 data.attribute_names.end(), cond.attribute);
        std::size_t attr =
            static_cast<std::size_t>(attr_it - data.attribute_names.begin());
        double v = data.rows[i][attr];
        bool ok = cond.op == CmpOp::leq ? v <= cond.threshold : v > cond.threshold;
        if (!ok) {
          covered = false;
          break;
        }
      }
      if (covered) {
        rule.cover++;
        if (data.labels[i] == rule.class_label) rule.ok++;
      }
    }
    out.push_back(std::move(rule));
    return;
  }
  path.push_back({data.attribute_names[node.attribute], CmpOp::leq, node.threshold});
  collect_rules(*node.left, path, data, out);
  path.back().op = CmpOp::gt;
  collect_rules(*node.right, path, data, out);
  path.pop_back();
}

std::size_t count_leaves(const TreeNode& node) {
  if (node.is_leaf) return 1;
  return count_leaves(*node.left) + count_leaves(*node.right);
}

}  // namespace

DecisionTree DecisionTree::fit(const TreeData& data, const TreeParams& params) {
  if (data.rows.empty()) throw validation_error("DecisionTree::fit: empty data");
  if (data.rows.size() != data.labels.size())
    throw validation_error("DecisionTree::fit: rows/labels size mismatch");
  for (const auto& row : data.rows) {
    if (row.size() != data.attribute_names.size())
      throw validation_error("DecisionTree::fit: ragged attribute matrix");
  }

  std::vector<std::size_t> all(data.rows.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

  DecisionTree tree;
  Builder builder{data, params};
  tree.root_ = builder.build(all, 0);
  return tree;
}

int DecisionTree::classify(const std::vector<double>& row) const {
  const TreeNode* node = root_.get();
  while (!node->is_leaf) {
    node = row[node->attribute] <= node->threshold ? node->left.get()
                                                   : node->right.get();
  }
  return node->class_label;
}

std::size_t DecisionTree::leaf_count() const { return count_leaves(*root_); }

std::vector<IfThenRule> DecisionTree::to_rules(const TreeData& data) const {
  std::vector<IfThenRule> rules;
  std::vector<AttrCondition> path;
  collect_rules(*root_, path, data, rules);
  return rules;
}

}  // namespace rulex
