#include "rulex/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <json.hpp>

#include "rulex/errors.hpp"

namespace rulex {

double activate(ActivationKind kind, double x) {
  switch (kind) {
    case ActivationKind::tanh_fn: return std::tanh(x);
    case ActivationKind::relu: return x > 0.0 ? x : 0.0;
    case ActivationKind::elu: return x > 0.0 ? x : std::expm1(x);
    case ActivationKind::sigmoid: return 1.0 / (1.0 + std::exp(-x));
    case ActivationKind::identity: return x;
  }
  return x;
}

double activate_derivative(ActivationKind kind, double x) {
  switch (kind) {
    case ActivationKind::tanh_fn: {
      double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case ActivationKind::relu: return x > 0.0 ? 1.0 : 0.0;
    case ActivationKind::elu: return x > 0.0 ? 1.0 : std::exp(x);
    case ActivationKind::sigmoid: {
      double s = 1.0 / (1.0 + std::exp(-x));
      return s * (1.0 - s);
    }
    case ActivationKind::identity: return 1.0;
  }
  return 1.0;
}

ActivationKind activation_from_name(const std::string& name) {
  if (name == "tanh") return ActivationKind::tanh_fn;
  if (name == "relu") return ActivationKind::relu;
  if (name == "elu") return ActivationKind::elu;
  if (name == "sigmoid") return ActivationKind::sigmoid;
  if (name == "identity") return ActivationKind::identity;
  throw parse_error("unknown activation '" + name +
                    "' (valid: tanh, relu, elu, sigmoid, identity)");
}

const char* activation_name(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::tanh_fn: return "tanh";
    case ActivationKind::relu: return "relu";
    case ActivationKind::elu: return "elu";
    case ActivationKind::sigmoid: return "sigmoid";
    case ActivationKind::identity: return "identity";
  }
  return "tanh";
}

Mlp init_mlp(const std::vector<LayerArch>& arch, std::size_t input_dim,
             std::uint64_t seed) {
  if (arch.empty()) throw validation_error("init_mlp: empty architecture");
  if (input_dim == 0) throw validation_error("init_mlp: input_dim must be positive");
  for (const auto& layer : arch) {
    if (layer.width == 0) throw validation_error("init_mlp: layer width 0");
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  Mlp model;
  model.input_dim = input_dim;
  std::size_t prev = input_dim;
  for (const auto& spec : arch) {
    LayerSpec layer;
    layer.activation = spec.activation;
    layer.biases.assign(spec.width, 0.0);
    layer.weights.resize(spec.width);
    double scale = 1.0 / std::sqrt(static_cast<double>(prev));
    for (auto& row : layer.weights) {
      row.resize(prev);
      for (double& w : row) w = unit(rng) * scale;
    }
    model.layers.push_back(std::move(layer));
    prev = spec.width;
  }
  return model;
}

namespace {

// Forward pass keeping pre-activations, for backprop.
struct FullForward {
  std::vector<std::vector<double>> pre;  // per layer
  std::vector<std::vector<double>> act;  // per layer
};

FullForward forward_full(const Mlp& model, const std::vector<double>& features) {
  FullForward f;
  const std::vector<double>* prev = &features;
  for (const auto& layer : model.layers) {
    std::vector<double> z(layer.out_dim());
    std::vector<double> a(layer.out_dim());
    for (std::size_t i = 0; i < layer.out_dim(); ++i) {
      double sum = layer.biases[i];
      const auto& row = layer.weights[i];
      for (std::size_t j = 0; j < row.size(); ++j) sum += row[j] * (*prev)[j];
      z[i] = sum;
      a[i] = activate(layer.activation, sum);
    }
    f.pre.push_back(std::move(z));
    f.act.push_back(std::move(a));
    prev = &f.act.back();
  }
  return f;
}

void check_arity(const Mlp& model, const std::vector<double>& features) {
  if (features.size() != model.input_dim) {
    throw validation_error("feature arity " + std::to_string(features.size()) +
                           " does not match model input_dim " +
                           std::to_string(model.input_dim));
  }
}

}  // namespace

ForwardResult forward(const Mlp& model, const std::vector<double>& features) {
  check_arity(model, features);
  ForwardResult result;
  result.activations = forward_full(model, features).act;
  return result;
}

std::vector<double> target_for_label(const Mlp& model, int label,
                                     int class_count) {
  std::size_t out = model.output_dim();
  bool tanh_head = model.layers.back().activation == ActivationKind::tanh_fn;
  double lo = tanh_head ? -1.0 : 0.0;
  std::vector<double> target(out, lo);
  if (out == 1) {
    target[0] = label != 0 ? 1.0 : lo;
  } else {
    (void)class_count;
    target[static_cast<std::size_t>(label)] = 1.0;
  }
  return target;
}

double dataset_loss(const Mlp& model, const Dataset& dataset) {
  double loss = 0.0;
  for (const auto& inst : dataset.instances) {
    auto f = forward_full(model, inst.features);
    auto target = target_for_label(model, inst.label, dataset.class_count);
    const auto& out = f.act.back();
    for (std::size_t i = 0; i < out.size(); ++i) {
      double diff = target[i] - out[i];
      loss += 0.5 * diff * diff;
    }
  }
  return loss;
}

Gradients loss_gradient(const Mlp& model, const Dataset& dataset,
                        const std::vector<std::size_t>& indices) {
  Gradients g;
  g.weights.resize(model.layers.size());
  g.biases.resize(model.layers.size());
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto& layer = model.layers[l];
    g.weights[l].assign(layer.out_dim(),
                        std::vector<double>(layer.in_dim(), 0.0));
    g.biases[l].assign(layer.out_dim(), 0.0);
  }

  for (std::size_t idx : indices) {
    const auto& inst = dataset.instances[idx];
    auto f = forward_full(model, inst.features);
    auto target = target_for_label(model, inst.label, dataset.class_count);

    // delta at the output layer for 0.5*||target - a||^2
    std::size_t last = model.layers.size() - 1;
    std::vector<double> delta(model.layers[last].out_dim());
    for (std::size_t i = 0; i < delta.size(); ++i) {
      delta[i] = (f.act[last][i] - target[i]) *
                 activate_derivative(model.layers[last].activation, f.pre[last][i]);
    }

    for (std::size_t l = last + 1; l-- > 0;) {
      const auto& layer = model.layers[l];
      const std::vector<double>& input =
          l == 0 ? inst.features : f.act[l - 1];
      for (std::size_t i = 0; i < layer.out_dim(); ++i) {
        g.biases[l][i] += delta[i];
        for (std::size_t j = 0; j < layer.in_dim(); ++j) {
          g.weights[l][i][j] += delta[i] * input[j];
        }
      }
      if (l == 0) break;
      const auto& below = model.layers[l - 1];
      std::vector<double> next_delta(below.out_dim(), 0.0);
      for (std::size_t j = 0; j < below.out_dim(); ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < layer.out_dim(); ++i) {
          sum += layer.weights[i][j] * delta[i];
        }
        next_delta[j] =
            sum * activate_derivative(below.activation, f.pre[l - 1][j]);
      }
      delta = std::move(next_delta);
    }
  }
  return g;
}

std::vector<double> train(Mlp& model, const Dataset& dataset,
                          const TrainConfig& config) {
  if (dataset.instances.empty())
    throw validation_error("train: empty dataset");
  if (config.batch_size == 0 || config.batch_size > dataset.size())
    throw validation_error("train: batch_size must be in [1, dataset size]");

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);

  // Adam state (allocated lazily)
  Gradients m, v;
  bool adam = config.optimizer == Optimizer::adam;
  if (adam) {
    m = loss_gradient(model, dataset, {});  // zero-shaped
    v = m;
  }
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::size_t step = 0;

  std::vector<double> history;
  history.reserve(config.epochs);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size();
         start += config.batch_size) {
      std::size_t end = std::min(start + config.batch_size, order.size());
      std::vector<std::size_t> batch(order.begin() + static_cast<long>(start),
                                     order.begin() + static_cast<long>(end));
      Gradients g = loss_gradient(model, dataset, batch);
      double inv = 1.0 / static_cast<double>(batch.size());
      ++step;
      for (std::size_t l = 0; l < model.layers.size(); ++l) {
        auto& layer = model.layers[l];
        for (std::size_t i = 0; i < layer.out_dim(); ++i) {
          for (std::size_t j = 0; j <= layer.in_dim(); ++j) {
            double& param = j < layer.in_dim() ? layer.weights[i][j]
                                               : layer.biases[i];
            double grad = (j < layer.in_dim() ? g.weights[l][i][j]
                                              : g.biases[l][i]) *
                          inv;
            if (adam) {
              double& mi = j < layer.in_dim() ? m.weights[l][i][j] : m.biases[l][i];
              double& vi = j < layer.in_dim() ? v.weights[l][i][j] : v.biases[l][i];
              mi = beta1 * mi + (1.0 - beta1) * grad;
              vi = beta2 * vi + (1.0 - beta2) * grad * grad;
              double mhat = mi / (1.0 - std::pow(beta1, static_cast<double>(step)));
              double vhat = vi / (1.0 - std::pow(beta2, static_cast<double>(step)));
              param -= config.learning_rate * mhat / (std::sqrt(vhat) + eps);
            } else {
              param -= config.learning_rate * grad;
            }
          }
        }
      }
    }
    double loss = dataset_loss(model, dataset);
    if (!std::isfinite(loss)) {
      throw divergence_error("training diverged at epoch " +
                             std::to_string(epoch + 1));
    }
    history.push_back(loss);
  }
  return history;
}

int predict_class(const Mlp& model, const std::vector<double>& features) {
  auto result = forward(model, features);
  const auto& out = result.output();
  if (out.size() == 1) {
    bool tanh_head = model.layers.back().activation == ActivationKind::tanh_fn;
    double boundary = tanh_head ? 0.0 : 0.5;
    return out[0] >= boundary ? 1 : 0;
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i] > out[best]) best = i;
  }
  return static_cast<int>(best);
}

double model_accuracy(const Mlp& model, const Dataset& dataset) {
  if (dataset.instances.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& inst : dataset.instances) {
    if (predict_class(model, inst.features) == inst.label) ++correct;
  }
  return 100.0 * static_cast<double>(correct) /
         static_cast<double>(dataset.size());
}

ActivationTrace capture_activations(const Mlp& model, const Dataset& dataset) {
  ActivationTrace trace;
  trace.layers.resize(model.hidden_layer_count());
  for (auto& layer : trace.layers) layer.reserve(dataset.size());
  for (const auto& inst : dataset.instances) {
    auto result = forward(model, inst.features);
    for (std::size_t l = 0; l < model.hidden_layer_count(); ++l) {
      trace.layers[l].push_back(result.activations[l]);
    }
  }
  return trace;
}

void save_model(const Mlp& model, const std::string& path) {
  nlohmann::json doc;
  doc["input_dim"] = model.input_dim;
  doc["layers"] = nlohmann::json::array();
  for (const auto& layer : model.layers) {
    doc["layers"].push_back({{"weights", layer.weights},
                             {"biases", layer.biases},
                             {"activation", activation_name(layer.activation)}});
  }
  std::ofstream out(path);
  if (!out) throw io_error("cannot open for writing: " + path);
  out << doc.dump(1) << '\n';
}

Mlp load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(path + ": " + e.what());
  }

  Mlp model;
  try {
    model.input_dim = doc.at("input_dim").get<std::size_t>();
    for (const auto& entry : doc.at("layers")) {
      LayerSpec layer;
      layer.weights = entry.at("weights").get<std::vector<std::vector<double>>>();
      layer.biases = entry.at("biases").get<std::vector<double>>();
      layer.activation =
          activation_from_name(entry.at("activation").get<std::string>());
      model.layers.push_back(std::move(layer));
    }
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(path + ": " + e.what());
  }

  if (model.layers.empty()) throw parse_error(path + ": no layers");
  std::size_t prev = model.input_dim;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto& layer = model.layers[l];
    if (layer.weights.empty() || layer.biases.size() != layer.out_dim())
      throw parse_error(path + ": layer " + std::to_string(l) +
                        " has inconsistent dimensions");
    for (const auto& row : layer.weights) {
      if (row.size() != prev)
        throw parse_error(path + ": layer " + std::to_string(l) +
                          " weight row size " + std::to_string(row.size()) +
                          " does not match previous width " +
                          std::to_string(prev));
    }
    prev = layer.out_dim();
  }
  return model;
}

}  // namespace rulex
