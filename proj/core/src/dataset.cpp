#include "rulex/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "rulex/errors.hpp"

namespace rulex {

namespace {

int round_bit(double x) { return x >= 0.5 ? 1 : 0; }

std::vector<std::string> default_feature_names(std::size_t d) {
  std::vector<std::string> names;
  names.reserve(d);
  for (std::size_t i = 0; i < d; ++i) {
    names.push_back("input_feat_" + std::to_string(i));
  }
  return names;
}

Dataset gen_uniform(std::size_t n, std::size_t d, std::uint64_t seed,
                    const std::string& label_name, bool three_way) {
  Dataset ds;
  ds.feature_names = default_feature_names(d);
  ds.label_name = label_name;
  ds.class_count = 2;
  ds.instances.reserve(n);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    Instance inst;
    inst.features.reserve(d);
    for (std::size_t j = 0; j < d; ++j) inst.features.push_back(unit(rng));
    int label = round_bit(inst.features[0]) ^ round_bit(inst.features[1]);
    if (three_way) label ^= round_bit(inst.features[2]);
    inst.label = label;
    ds.instances.push_back(std::move(inst));
  }
  return ds;
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

int Dataset::majority_class() const {
  std::vector<std::size_t> counts(static_cast<std::size_t>(class_count), 0);
  for (const auto& inst : instances) {
    counts[static_cast<std::size_t>(inst.label)]++;
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < counts.size(); ++c) {
    if (counts[c] > counts[best]) best = c;
  }
  return static_cast<int>(best);
}

Dataset gen_xor(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (d < 2) throw validation_error("gen_xor: need at least 2 features, got " +
                                    std::to_string(d));
  return gen_uniform(n, d, seed, "xor", false);
}

Dataset gen_modified_xor(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (d < 3)
    throw validation_error("gen_modified_xor: need at least 3 features, got " +
                           std::to_string(d));
  return gen_uniform(n, d, seed, "xor", true);
}

void save_csv(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open for writing: " + path);
  for (std::size_t i = 0; i < dataset.feature_names.size(); ++i) {
    out << dataset.feature_names[i] << ',';
  }
  out << dataset.label_name << '\n';
  for (const auto& inst : dataset.instances) {
    for (double f : inst.features) out << format_real(f) << ',';
    out << inst.label << '\n';
  }
  if (!out) throw io_error("write failed: " + path);
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open: " + path);

  std::string line;
  if (!std::getline(in, line)) throw parse_error(path + ": empty file");

  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.push_back("");
    return cells;
  };

  auto header = split(line);
  if (header.size() < 2) throw parse_error(path + ": header needs at least one feature and a label column");

  Dataset ds;
  ds.feature_names.assign(header.begin(), header.end() - 1);
  ds.label_name = header.back();

  int max_label = 0;
  std::size_t row_number = 1;
  while (std::getline(in, line)) {
    ++row_number;
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != header.size()) {
      throw parse_error(path + ": row " + std::to_string(row_number) + " has " +
                        std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(header.size()));
    }
    Instance inst;
    inst.features.reserve(cells.size() - 1);
    for (std::size_t i = 0; i + 1 < cells.size(); ++i) {
      try {
        std::size_t pos = 0;
        double v = std::stod(cells[i], &pos);
        if (pos != cells[i].size()) throw std::invalid_argument(cells[i]);
        inst.features.push_back(v);
      } catch (const std::exception&) {
        throw parse_error(path + ": row " + std::to_string(row_number) +
                          ": non-numeric feature cell '" + cells[i] + "'");
      }
    }
    try {
      std::size_t pos = 0;
      int label = std::stoi(cells.back(), &pos);
      if (pos != cells.back().size() || label < 0)
        throw std::invalid_argument(cells.back());
      inst.label = label;
    } catch (const std::exception&) {
      throw parse_error(path + ": row " + std::to_string(row_number) +
                        ": unknown label value '" + cells.back() + "'");
    }
    max_label = std::max(max_label, inst.label);
    ds.instances.push_back(std::move(inst));
  }
  ds.class_count = std::max(2, max_label + 1);
  return ds;
}

std::vector<FoldSplit> stratified_kfold(const Dataset& dataset, int k,
                                        std::uint64_t seed) {
  if (k < 2) throw validation_error("stratified_kfold: k must be >= 2");

  std::vector<std::vector<std::size_t>> by_class(
      static_cast<std::size_t>(dataset.class_count));
  for (std::size_t i = 0; i < dataset.instances.size(); ++i) {
    by_class[static_cast<std::size_t>(dataset.instances[i].label)].push_back(i);
  }
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    if (!by_class[c].empty() && by_class[c].size() < static_cast<std::size_t>(k)) {
      throw validation_error("stratified_kfold: class " + std::to_string(c) +
                             " has only " + std::to_string(by_class[c].size()) +
                             " instances for k=" + std::to_string(k));
    }
  }

  std::mt19937_64 rng(seed);
  std::vector<int> fold_of(dataset.instances.size(), 0);
  // the round-robin counter carries across classes so fold totals stay as
  // even as possible, while each class is still spread within +-1 per fold
  std::size_t next_fold = 0;
  for (auto& indices : by_class) {
    std::shuffle(indices.begin(), indices.end(), rng);
    for (std::size_t index : indices) {
      fold_of[index] = static_cast<int>(next_fold++ % static_cast<std::size_t>(k));
    }
  }

  std::vector<FoldSplit> folds(static_cast<std::size_t>(k));
  for (int f = 0; f < k; ++f) {
    auto& split = folds[static_cast<std::size_t>(f)];
    split.fold_index = f;
    split.train.feature_names = dataset.feature_names;
    split.train.label_name = dataset.label_name;
    split.train.class_count = dataset.class_count;
    split.test = split.train;
    for (std::size_t i = 0; i < dataset.instances.size(); ++i) {
      (fold_of[i] == f ? split.test : split.train)
          .instances.push_back(dataset.instances[i]);
    }
  }
  return folds;
}

}  // namespace rulex
