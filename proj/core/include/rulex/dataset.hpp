#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace rulex {

struct Instance {
  std::vector<double> features;
  int label = 0;

  bool operator==(const Instance&) const = default;
};

struct Dataset {
  std::vector<std::string> feature_names;
  std::string label_name = "label";
  int class_count = 2;
  std::vector<Instance> instances;

  std::size_t feature_count() const { return feature_names.size(); }
  std::size_t size() const { return instances.size(); }

  // Most frequent class; ties go to the smaller class id.
  int majority_class() const;

  bool operator==(const Dataset&) const = default;
};

struct FoldSplit {
  int fold_index = 0;
  Dataset train;
  Dataset test;
};

// Uniform features on [0,1], label = round(x0) XOR round(x1).
// round(x) = 1 iff x >= 0.5.
Dataset gen_xor(std::size_t n, std::size_t d, std::uint64_t seed);

// Label = (round(x0) XOR round(x1)) XOR round(x2). Requires d >= 3.
Dataset gen_modified_xor(std::size_t n, std::size_t d, std::uint64_t seed);

// CSV: header row (feature names then label name), one instance per row,
// reals printed with up to 17 significant digits, label column last.
Dataset load_csv(const std::string& path);
void save_csv(const Dataset& dataset, const std::string& path);

// Per-class shuffle with the seeded generator, round-robin fold assignment.
// Requires every class to have at least k instances.
std::vector<FoldSplit> stratified_kfold(const Dataset& dataset, int k,
                                        std::uint64_t seed);

}  // namespace rulex
