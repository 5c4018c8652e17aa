#include "furnish/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace furnish::nn {

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void Gradients::scale(double factor) {
  for (auto& l : layers) {
    l.weight *= factor;
    l.bias *= factor;
  }
}

void Gradients::add(const Gradients& other) {
  for (std::size_t k = 0; k < layers.size(); ++k) {
    layers[k].weight += other.layers[k].weight;
    layers[k].bias += other.layers[k].bias;
  }
}

double Gradients::squared_norm() const {
  double s = 0;
  for (const auto& l : layers) s += l.weight.squaredNorm() + l.bias.squaredNorm();
  return s;
}

Mlp::Mlp(const NetworkSpec& spec, std::mt19937_64& rng) : spec_(spec) {
  if (spec.input_dim <= 0 || spec.output_dim <= 0) {
    throw std::invalid_argument("network dimensions must be positive");
  }
  std::vector<int> dims{spec.input_dim};
  for (int h : spec.hidden) {
    if (h <= 0) throw std::invalid_argument("hidden widths must be positive");
    dims.push_back(h);
  }
  dims.push_back(spec.output_dim);

  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    const int in = dims[k];
    const int out = dims[k + 1];
    // Uniform Glorot-style init; the output layer starts small.
    double limit = std::sqrt(6.0 / (in + out));
    if (k + 2 == dims.size()) limit *= 0.1;
    std::uniform_real_distribution<double> dist(-limit, limit);
    Layer layer{Matrix(out, in), Vector::Zero(out)};
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c) layer.weight(r, c) = dist(rng);
    layers_.push_back(std::move(layer));
  }
}

Matrix Mlp::forward(const Matrix& inputs) const {
  Matrix x = inputs;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    Matrix z = layers_[k].weight * x;
    z.colwise() += layers_[k].bias;
    if (k + 1 < layers_.size()) {
      x = z.unaryExpr([](double v) { return softplus(v); });
    } else {
      x = std::move(z);
    }
  }
  return x;
}

Matrix Mlp::forward(const Matrix& inputs, Tape& tape) const {
  tape.inputs.clear();
  tape.pre.clear();
  Matrix x = inputs;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    tape.inputs.push_back(x);
    Matrix z = layers_[k].weight * x;
    z.colwise() += layers_[k].bias;
    if (k + 1 < layers_.size()) {
      x = z.unaryExpr([](double v) { return softplus(v); });
      tape.pre.push_back(std::move(z));
    } else {
      x = std::move(z);
    }
  }
  return x;
}

Gradients Mlp::backward(const Tape& tape, const Matrix& d_output) const {
  Gradients g;
  g.layers.resize(layers_.size());
  Matrix delta = d_output;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    g.layers[k].weight = delta * tape.inputs[k].transpose();
    g.layers[k].bias = delta.rowwise().sum();
    if (k == 0) break;
    Matrix back = layers_[k].weight.transpose() * delta;
    delta = back.cwiseProduct(tape.pre[k - 1].unaryExpr([](double v) { return sigmoid(v); }));
  }
  return g;
}

Gradients Mlp::zero_gradients() const {
  Gradients g;
  for (const auto& l : layers_) {
    g.layers.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())});
  }
  return g;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

std::vector<double> Mlp::flat_parameters() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const auto& l : layers_) {
    out.insert(out.end(), l.weight.data(), l.weight.data() + l.weight.size());
    out.insert(out.end(), l.bias.data(), l.bias.data() + l.bias.size());
  }
  return out;
}

void Mlp::set_flat_parameters(const std::vector<double>& values) {
  if (values.size() != parameter_count()) throw std::invalid_argument("parameter count mismatch");
  std::size_t at = 0;
  for (auto& l : layers_) {
    std::copy(values.begin() + at, values.begin() + at + l.weight.size(), l.weight.data());
    at += l.weight.size();
    std::copy(values.begin() + at, values.begin() + at + l.bias.size(), l.bias.data());
    at += l.bias.size();
  }
}

std::vector<double> Mlp::flatten(const Gradients& grads) {
  std::vector<double> out;
  for (const auto& l : grads.layers) {
    out.insert(out.end(), l.weight.data(), l.weight.data() + l.weight.size());
    out.insert(out.end(), l.bias.data(), l.bias.data() + l.bias.size());
  }
  return out;
}

nlohmann::json Mlp::to_json() const {
  nlohmann::json j;
  j["input_dim"] = spec_.input_dim;
  j["hidden"] = spec_.hidden;
  j["output_dim"] = spec_.output_dim;
  j["layers"] = nlohmann::json::array();
  for (const auto& l : layers_) {
    nlohmann::json lj;
    lj["rows"] = l.weight.rows();
    lj["cols"] = l.weight.cols();
    lj["weight"] = std::vector<double>(l.weight.data(), l.weight.data() + l.weight.size());
    lj["bias"] = std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size());
    j["layers"].push_back(std::move(lj));
  }
  return j;
}

Mlp Mlp::from_json(const nlohmann::json& j) {
  Mlp net;
  net.spec_.input_dim = j.at("input_dim").get<int>();
  net.spec_.hidden = j.at("hidden").get<std::vector<int>>();
  net.spec_.output_dim = j.at("output_dim").get<int>();
  std::vector<int> dims{net.spec_.input_dim};
  dims.insert(dims.end(), net.spec_.hidden.begin(), net.spec_.hidden.end());
  dims.push_back(net.spec_.output_dim);
  const auto& layers = j.at("layers");
  if (layers.size() + 1 != dims.size()) throw std::invalid_argument("layer count mismatch");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& lj = layers[k];
    const int rows = lj.at("rows").get<int>();
    const int cols = lj.at("cols").get<int>();
    if (rows != dims[k + 1] || cols != dims[k]) throw std::invalid_argument("layer shape mismatch");
    const auto w = lj.at("weight").get<std::vector<double>>();
    const auto b = lj.at("bias").get<std::vector<double>>();
    if (w.size() != static_cast<std::size_t>(rows * cols) || b.size() != static_cast<std::size_t>(rows)) {
      throw std::invalid_argument("layer data size mismatch");
    }
    Layer layer{Matrix(rows, cols), Vector(rows)};
    std::copy(w.begin(), w.end(), layer.weight.data());
    std::copy(b.begin(), b.end(), layer.bias.data());
    net.layers_.push_back(std::move(layer));
  }
  return net;
}

bool operator==(const Mlp& a, const Mlp& b) {
  return a.spec_.input_dim == b.spec_.input_dim && a.spec_.hidden == b.spec_.hidden &&
         a.spec_.output_dim == b.spec_.output_dim && a.flat_parameters() == b.flat_parameters();
}

namespace {

class Sgd final : public Optimizer {
 public:
  explicit Sgd(double lr) : lr_(lr) {}
  void apply(Mlp& net, const Gradients& grads) override {
    auto& layers = net.layers();
    for (std::size_t k = 0; k < layers.size(); ++k) {
      layers[k].weight -= lr_ * grads.layers[k].weight;
      layers[k].bias -= lr_ * grads.layers[k].bias;
    }
  }

 private:
  double lr_;
};

class Adam final : public Optimizer {
 public:
  explicit Adam(double lr) : lr_(lr) {}
  void apply(Mlp& net, const Gradients& grads) override {
    auto& layers = net.layers();
    if (m_.layers.empty()) {
      m_ = net.zero_gradients();
      v_ = net.zero_gradients();
    }
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, t_);
    const double c2 = 1.0 - std::pow(kBeta2, t_);
    for (std::size_t k = 0; k < layers.size(); ++k) {
      step(layers[k].weight, grads.layers[k].weight, m_.layers[k].weight, v_.layers[k].weight, c1, c2);
      step(layers[k].bias, grads.layers[k].bias, m_.layers[k].bias, v_.layers[k].bias, c1, c2);
    }
  }

 private:
  template <class P, class G>
  void step(P& param, const G& grad, G& m, G& v, double c1, double c2) {
    m = kBeta1 * m + (1.0 - kBeta1) * grad;
    v = kBeta2 * v + (1.0 - kBeta2) * grad.cwiseProduct(grad);
    param.array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + kEps);
  }

  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;
  double lr_;
  int t_ = 0;
  Gradients m_, v_;
};

}  // namespace

std::unique_ptr<Optimizer> make_optimizer(OptimizerKind kind, double learning_rate) {
  if (!(learning_rate > 0)) throw std::invalid_argument("learning rate must be positive");
  if (kind == OptimizerKind::adam) return std::make_unique<Adam>(learning_rate);
  return std::make_unique<Sgd>(learning_rate);
}

}  // namespace furnish::nn
