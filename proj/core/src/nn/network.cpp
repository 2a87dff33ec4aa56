#include "mgs/nn/network.hpp"

#include <atomic>
#include <cmath>
#include <string>

namespace mgs::nn {
namespace {

std::atomic<std::uint64_t> g_next_tag{1};

Matrix activate(const Matrix& a, Activation act) {
  switch (act) {
    case Activation::identity:
      return a;
    case Activation::tanh:
      return a.array().tanh().matrix();
    case Activation::relu:
      return a.cwiseMax(0.0);
    case Activation::sigmoid:
      return (1.0 / (1.0 + (-a.array()).exp())).matrix();
  }
  throw ContractError("unknown activation");
}

// Derivative expressed through the pre-activation; relu'(0) := 0.
Matrix activation_derivative(const Matrix& pre, Activation act) {
  switch (act) {
    case Activation::identity:
      return Matrix::Ones(pre.rows(), pre.cols());
    case Activation::tanh: {
      Eigen::ArrayXXd t = pre.array().tanh();
      return (1.0 - t * t).matrix();
    }
    case Activation::relu:
      return (pre.array() > 0.0).cast<double>().matrix();
    case Activation::sigmoid: {
      Eigen::ArrayXXd s = 1.0 / (1.0 + (-pre.array()).exp());
      return (s * (1.0 - s)).matrix();
    }
  }
  throw ContractError("unknown activation");
}

}  // namespace

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::tanh: return "tanh";
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
  }
  return "?";
}

Activation activation_from_string(std::string_view s) {
  if (s == "identity") return Activation::identity;
  if (s == "tanh") return Activation::tanh;
  if (s == "relu") return Activation::relu;
  if (s == "sigmoid") return Activation::sigmoid;
  throw ContractError("unknown activation '" + std::string(s) + "'");
}

ParamGrads& ParamGrads::operator+=(const ParamGrads& other) {
  require(weights.size() == other.weights.size(), "ParamGrads: layer count mismatch");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l] += other.weights[l];
    bias[l] += other.bias[l];
  }
  return *this;
}

Vector ParamGrads::flatten() const {
  Eigen::Index total = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) total += weights[l].size() + bias[l].size();
  Vector flat(total);
  Eigen::Index pos = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    for (Eigen::Index i = 0; i < weights[l].rows(); ++i)
      for (Eigen::Index j = 0; j < weights[l].cols(); ++j) flat(pos++) = weights[l](i, j);
    flat.segment(pos, bias[l].size()) = bias[l];
    pos += bias[l].size();
  }
  return flat;
}

FeedforwardNet::FeedforwardNet(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  validate();
  bump_tag();
}

FeedforwardNet FeedforwardNet::make(const std::vector<Eigen::Index>& dims,
                                    const std::vector<Activation>& activations, Pcg32& rng) {
  require(dims.size() >= 2, "FeedforwardNet::make: need at least input and output dims");
  require(activations.size() == dims.size() - 1, "FeedforwardNet::make: one activation per layer");
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    require(dims[l] > 0 && dims[l + 1] > 0, "FeedforwardNet::make: dims must be positive");
    DenseLayer layer;
    double limit = std::sqrt(6.0 / static_cast<double>(dims[l] + dims[l + 1]));
    layer.weights.resize(dims[l + 1], dims[l]);
    for (Eigen::Index i = 0; i < layer.weights.rows(); ++i)
      for (Eigen::Index j = 0; j < layer.weights.cols(); ++j)
        layer.weights(i, j) = rng.uniform(-limit, limit);
    layer.bias = Vector::Zero(dims[l + 1]);
    layer.activation = activations[l];
    layers.push_back(std::move(layer));
  }
  return FeedforwardNet(std::move(layers));
}

void FeedforwardNet::validate() const {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    require(layer.weights.rows() > 0 && layer.weights.cols() > 0, "DenseLayer: empty weights");
    require(layer.bias.size() == layer.weights.rows(), "DenseLayer: bias/weight mismatch");
    if (l > 0)
      require(layers_[l - 1].out_dim() == layer.in_dim(), "FeedforwardNet: layer dims do not chain");
  }
}

void FeedforwardNet::bump_tag() { tag_ = g_next_tag.fetch_add(1); }

Eigen::Index FeedforwardNet::input_dim() const { return layers_.empty() ? 0 : layers_.front().in_dim(); }
Eigen::Index FeedforwardNet::output_dim() const { return layers_.empty() ? 0 : layers_.back().out_dim(); }

Matrix FeedforwardNet::forward(const Matrix& x) const {
  require(!layers_.empty(), "forward: empty network");
  if (x.cols() != input_dim())
    throw ContractError("forward: input has " + std::to_string(x.cols()) + " columns, network expects " +
                        std::to_string(input_dim()));
  Matrix h = x;
  for (const auto& layer : layers_) {
    Matrix a = h * layer.weights.transpose();
    a.rowwise() += layer.bias.transpose();
    h = activate(a, layer.activation);
  }
  return h;
}

ForwardCache FeedforwardNet::forward_cached(const Matrix& x) const {
  require(!layers_.empty(), "forward: empty network");
  if (x.cols() != input_dim())
    throw ContractError("forward: input has " + std::to_string(x.cols()) + " columns, network expects " +
                        std::to_string(input_dim()));
  ForwardCache cache;
  cache.net_tag = tag_;
  Matrix h = x;
  for (const auto& layer : layers_) {
    cache.inputs.push_back(h);
    Matrix a = h * layer.weights.transpose();
    a.rowwise() += layer.bias.transpose();
    h = activate(a, layer.activation);
    cache.pre.push_back(std::move(a));
  }
  cache.outputs = std::move(h);
  return cache;
}

BackwardResult FeedforwardNet::backward(const ForwardCache& cache, const Matrix& output_grad) const {
  if (cache.net_tag != tag_ || cache.inputs.size() != layers_.size())
    throw ContractError("backward: cache does not belong to this network state");
  if (output_grad.rows() != cache.outputs.rows() || output_grad.cols() != cache.outputs.cols())
    throw ContractError("backward: output gradient shape does not match forward output");
  BackwardResult result;
  result.params.weights.resize(layers_.size());
  result.params.bias.resize(layers_.size());
  Matrix grad = output_grad;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    const auto& layer = layers_[k];
    Matrix delta = grad.cwiseProduct(activation_derivative(cache.pre[k], layer.activation));
    result.params.weights[k] = delta.transpose() * cache.inputs[k];
    result.params.bias[k] = delta.colwise().sum().transpose();
    grad = delta * layer.weights;
  }
  result.input_grad = std::move(grad);
  return result;
}

Eigen::Index FeedforwardNet::parameter_count() const {
  Eigen::Index n = 0;
  for (const auto& layer : layers_) n += layer.weights.size() + layer.bias.size();
  return n;
}

Vector FeedforwardNet::parameters() const {
  ParamGrads view;
  for (const auto& layer : layers_) {
    view.weights.push_back(layer.weights);
    view.bias.push_back(layer.bias);
  }
  return view.flatten();
}

void FeedforwardNet::set_parameters(const Vector& flat) {
  require(flat.size() == parameter_count(), "set_parameters: size mismatch");
  Eigen::Index pos = 0;
  for (auto& layer : layers_) {
    for (Eigen::Index i = 0; i < layer.weights.rows(); ++i)
      for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) layer.weights(i, j) = flat(pos++);
    layer.bias = flat.segment(pos, layer.bias.size());
    pos += layer.bias.size();
  }
  bump_tag();
}

ParamGrads FeedforwardNet::zero_grads() const {
  ParamGrads g;
  for (const auto& layer : layers_) {
    g.weights.push_back(Matrix::Zero(layer.weights.rows(), layer.weights.cols()));
    g.bias.push_back(Vector::Zero(layer.bias.size()));
  }
  return g;
}

}  // namespace mgs::nn
