#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rulex/dataset.hpp"

namespace rulex {

enum class ActivationKind { tanh_fn, relu, elu, sigmoid, identity };

double activate(ActivationKind kind, double x);
// Derivative with respect to the pre-activation x.
double activate_derivative(ActivationKind kind, double x);
ActivationKind activation_from_name(const std::string& name);
const char* activation_name(ActivationKind kind);

struct LayerSpec {
  // weights[i][j]: weight from previous-layer node j into node i.
  std::vector<std::vector<double>> weights;
  std::vector<double> biases;
  ActivationKind activation = ActivationKind::tanh_fn;

  std::size_t out_dim() const { return weights.size(); }
  std::size_t in_dim() const { return weights.empty() ? 0 : weights[0].size(); }
};

struct Mlp {
  std::size_t input_dim = 0;
  // Hidden layers 1..k followed by the output layer.
  std::vector<LayerSpec> layers;

  std::size_t hidden_layer_count() const { return layers.size() - 1; }
  std::size_t output_dim() const { return layers.back().out_dim(); }
};

struct LayerArch {
  std::size_t width = 0;
  ActivationKind activation = ActivationKind::tanh_fn;
};

enum class Optimizer { sgd, adam };

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  double learning_rate = 0.05;
  std::uint64_t seed = 0;
  Optimizer optimizer = Optimizer::sgd;
};

struct ForwardResult {
  // One vector per layer of the network (hidden layers then output layer).
  std::vector<std::vector<double>> activations;
  const std::vector<double>& output() const { return activations.back(); }
};

struct ActivationTrace {
  // layers[i][row][node] for hidden layer i+1, row order matching the dataset.
  std::vector<std::vector<std::vector<double>>> layers;
};

// Weights uniform(-1,1)/sqrt(fan_in) from the seeded generator, biases zero.
Mlp init_mlp(const std::vector<LayerArch>& arch, std::size_t input_dim,
             std::uint64_t seed);

ForwardResult forward(const Mlp& model, const std::vector<double>& features);

// Mini-batch gradient descent on the squared-error loss; returns the
// full-dataset loss after each epoch. Deterministic for a fixed seed.
std::vector<double> train(Mlp& model, const Dataset& dataset,
                          const TrainConfig& config);

// Single output node: class 1 iff output >= 0.5 (sigmoid/identity) or
// >= 0.0 (tanh). Multiple output nodes: argmax, ties to the smaller id.
int predict_class(const Mlp& model, const std::vector<double>& features);

double model_accuracy(const Mlp& model, const Dataset& dataset);  // percent

ActivationTrace capture_activations(const Mlp& model, const Dataset& dataset);

// Target vector used by the loss for a class label (tanh head -> {-1,+1}).
std::vector<double> target_for_label(const Mlp& model, int label,
                                     int class_count);

// Sum over the given instances of 0.5*||y - yhat||^2.
double dataset_loss(const Mlp& model, const Dataset& dataset);

// Gradient of dataset_loss over `indices` with respect to every weight and
// bias, laid out like the model. Exposed for the finite-difference check.
struct Gradients {
  std::vector<std::vector<std::vector<double>>> weights;
  std::vector<std::vector<double>> biases;
};
Gradients loss_gradient(const Mlp& model, const Dataset& dataset,
                        const std::vector<std::size_t>& indices);

void save_model(const Mlp& model, const std::string& path);
Mlp load_model(const std::string& path);

}  // namespace rulex
