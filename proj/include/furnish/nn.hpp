#pragma once

#include <Eigen/Dense>
#include <json.hpp>
#include <memory>
#include <random>
#include <vector>

namespace furnish::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct NetworkSpec {
  int input_dim = 1;
  std::vector<int> hidden{64, 64};
  int output_dim = 1;
};

struct Layer {
  Matrix weight;  // out x in
  Vector bias;
};

/// Gradient buffers shaped like an Mlp's layers.
struct Gradients {
  std::vector<Layer> layers;

  void scale(double factor);
  void add(const Gradients& other);
  double squared_norm() const;
};

/// Cached activations from a forward pass, consumed by backward().
struct Tape {
  std::vector<Matrix> inputs;  // input to each layer
  std::vector<Matrix> pre;     // pre-activation of each hidden layer
};

/// Fully connected network with softplus hidden units and a linear output.
/// Batches are column-major: one sample per column.
class Mlp {
 public:
  Mlp() = default;
  Mlp(const NetworkSpec& spec, std::mt19937_64& rng);

  const NetworkSpec& spec() const { return spec_; }
  bool empty() const { return layers_.empty(); }
  int input_dim() const { return spec_.input_dim; }
  int output_dim() const { return spec_.output_dim; }

  Matrix forward(const Matrix& inputs) const;
  Matrix forward(const Matrix& inputs, Tape& tape) const;

  /// Gradient of a scalar loss given dLoss/dOutput (same shape as output).
  Gradients backward(const Tape& tape, const Matrix& d_output) const;

  Gradients zero_gradients() const;

  std::size_t parameter_count() const;
  std::vector<double> flat_parameters() const;
  void set_flat_parameters(const std::vector<double>& values);
  static std::vector<double> flatten(const Gradients& grads);

  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

  nlohmann::json to_json() const;
  static Mlp from_json(const nlohmann::json& j);

  friend bool operator==(const Mlp& a, const Mlp& b);

 private:
  NetworkSpec spec_;
  std::vector<Layer> layers_;
};

double softplus(double x);
double sigmoid(double x);

enum class OptimizerKind { sgd, adam };

class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual void apply(Mlp& net, const Gradients& grads) = 0;
};

std::unique_ptr<Optimizer> make_optimizer(OptimizerKind kind, double learning_rate);

}  // namespace furnish::nn
