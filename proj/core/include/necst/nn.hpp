#pragma once

#include <cstdint>
#include <vector>

#include "necst/matrix.hpp"

namespace necst::nn {

enum class Activation { kRelu, kSigmoid, kIdentity };

// Numerically stable scalar helpers.
double sigmoid(double z);
double softplus(double z);
// log σ(z) computed as -softplus(-z), never as log(sigmoid(z)).
double log_sigmoid(double z);

struct Layer {
  Matrix weights;  // [out × in]
  std::vector<double> bias;
  Activation activation = Activation::kIdentity;

  std::size_t in_dim() const { return weights.cols(); }
  std::size_t out_dim() const { return weights.rows(); }
};

struct MlpParams {
  std::vector<Layer> layers;

  std::size_t input_dim() const { return layers.front().in_dim(); }
  std::size_t output_dim() const { return layers.back().out_dim(); }
  std::size_t parameter_count() const;
};

// Per-layer gradient (or moment) buffers, shape-congruent with MlpParams.
struct LayerGrads {
  Matrix weights;
  std::vector<double> bias;
};

struct ParamGrads {
  std::vector<LayerGrads> layers;

  void add_scaled(const ParamGrads& other, double scale);
  void scale(double factor);
  bool all_finite() const;
};

ParamGrads zero_grads_like(const MlpParams& params);

// Activations cached by a forward pass; consumed by mlp_backward. Only
// post-activations are kept: the ReLU mask is recoverable from post > 0 and
// the sigmoid derivative from post alone.
struct ForwardTape {
  Matrix input;
  std::vector<Matrix> post_activations;  // one per layer
};

// Gaussian init: stddev √(2/fan_in) for ReLU layers, √(1/fan_in) for
// sigmoid/identity; biases zero. Deterministic given seed.
MlpParams mlp_init(const std::vector<std::size_t>& layer_dims,
                   const std::vector<Activation>& activations, std::uint64_t seed);

// Batched forward pass; one input per row. Pass a tape to enable backward.
Matrix mlp_forward(const MlpParams& params, const Matrix& inputs, ForwardTape* tape = nullptr);
std::vector<double> mlp_forward(const MlpParams& params, const std::vector<double>& input);

struct BackwardResult {
  ParamGrads grads;    // d(Σ_rows output·grad_output)/d(params)
  Matrix input_grads;  // same shape as the forward inputs
};

// Exact reverse-mode gradients of output·grad_output, summed over batch rows.
BackwardResult mlp_backward(const MlpParams& params, const ForwardTape& tape,
                            const Matrix& output_grads);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  ParamGrads first_moment;
  ParamGrads second_moment;
  std::uint64_t step_count = 0;
  AdamConfig config;
};

AdamState adam_init(const MlpParams& params, const AdamConfig& config);

// One bias-corrected Adam step along -grads (grads = gradient of the loss
// being minimized). Any regularization term is the caller's to add.
void adam_step(MlpParams& params, const ParamGrads& grads, AdamState& state);

}  // namespace necst::nn
