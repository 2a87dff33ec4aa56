#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "mgs/common.hpp"
#include "mgs/rng.hpp"

namespace mgs::nn {

enum class Activation : std::uint32_t { identity = 0, tanh = 1, relu = 2, sigmoid = 3 };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view s);

struct DenseLayer {
  Matrix weights;  // out x in
  Vector bias;     // out
  Activation activation = Activation::identity;

  Eigen::Index in_dim() const { return weights.cols(); }
  Eigen::Index out_dim() const { return weights.rows(); }
};

/// Per-layer values recorded by a forward pass. `inputs[l]` is the input to
/// layer l and `pre[l]` its pre-activation. `outputs` is the network output.
struct ForwardCache {
  std::vector<Matrix> inputs;
  std::vector<Matrix> pre;
  Matrix outputs;
  std::uint64_t net_tag = 0;
};

struct ParamGrads {
  std::vector<Matrix> weights;
  std::vector<Vector> bias;

  ParamGrads& operator+=(const ParamGrads& other);
  Vector flatten() const;
};

struct BackwardResult {
  ParamGrads params;
  Matrix input_grad;
};

/// Dense feedforward network acting on row-stacked samples.
///
/// A finished network is immutable from the point of view of forward/backward:
/// both take `const` access and allocate their own cache, so concurrent
/// evaluation from several threads is safe.
class FeedforwardNet {
 public:
  FeedforwardNet() = default;
  explicit FeedforwardNet(std::vector<DenseLayer> layers);

  /// Glorot-uniform weights in +-sqrt(6/(fan_in+fan_out)), zero bias.
  static FeedforwardNet make(const std::vector<Eigen::Index>& dims,
                             const std::vector<Activation>& activations, Pcg32& rng);

  Eigen::Index input_dim() const;
  Eigen::Index output_dim() const;
  const std::vector<DenseLayer>& layers() const { return layers_; }
  bool empty() const { return layers_.empty(); }

  Matrix forward(const Matrix& x) const;
  ForwardCache forward_cached(const Matrix& x) const;
  BackwardResult backward(const ForwardCache& cache, const Matrix& output_grad) const;

  Eigen::Index parameter_count() const;
  Vector parameters() const;
  void set_parameters(const Vector& flat);
  ParamGrads zero_grads() const;

  /// Identity of the parameter set; changes whenever parameters are replaced.
  std::uint64_t tag() const { return tag_; }

 private:
  void validate() const;
  void bump_tag();

  std::vector<DenseLayer> layers_;
  std::uint64_t tag_ = 0;
};

}  // namespace mgs::nn
