#include "necst/nn.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "necst/parallel.hpp"
#include "necst/rng.hpp"

namespace necst::nn {
namespace {

void apply_activation_in_place(Activation act, Matrix& values) {
  switch (act) {
    case Activation::kIdentity:
      return;
    case Activation::kRelu:
      for (double& v : values.storage())
        if (v < 0.0) v = 0.0;
      return;
    case Activation::kSigmoid:
      for (double& v : values.storage()) v = sigmoid(v);
      return;
  }
}

// dL/dpre from dL/dpost, elementwise in place, using post-activations only.
void activation_backward(Activation act, const Matrix& post, Matrix& grad) {
  switch (act) {
    case Activation::kIdentity:
      return;
    case Activation::kRelu:
      for (std::size_t i = 0; i < grad.size(); ++i)
        if (post.storage()[i] <= 0.0) grad.storage()[i] = 0.0;
      return;
    case Activation::kSigmoid:
      for (std::size_t i = 0; i < grad.size(); ++i) {
        const double s = post.storage()[i];
        grad.storage()[i] *= s * (1.0 - s);
      }
      return;
  }
}

void check_congruent(const MlpParams& params, const ParamGrads& grads, const char* what) {
  if (grads.layers.size() != params.layers.size())
    throw std::invalid_argument(std::string(what) + ": layer count mismatch");
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& p = params.layers[l];
    const auto& g = grads.layers[l];
    if (g.weights.rows() != p.weights.rows() || g.weights.cols() != p.weights.cols() ||
        g.bias.size() != p.bias.size())
      throw std::invalid_argument(std::string(what) + ": shape mismatch at layer " +
                                  std::to_string(l));
  }
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) {
  if (z > 30.0) return z;
  if (z < -30.0) return std::exp(z);
  return std::log1p(std::exp(z));
}

double log_sigmoid(double z) { return -softplus(-z); }

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += layer.weights.size() + layer.bias.size();
  return n;
}

void ParamGrads::add_scaled(const ParamGrads& other, double scale) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto& dst = layers[l];
    const auto& src = other.layers[l];
    for (std::size_t i = 0; i < dst.weights.size(); ++i)
      dst.weights.storage()[i] += scale * src.weights.storage()[i];
    for (std::size_t i = 0; i < dst.bias.size(); ++i) dst.bias[i] += scale * src.bias[i];
  }
}

void ParamGrads::scale(double factor) {
  for (auto& layer : layers) {
    for (double& v : layer.weights.storage()) v *= factor;
    for (double& v : layer.bias) v *= factor;
  }
}

bool ParamGrads::all_finite() const {
  for (const auto& layer : layers) {
    for (double v : layer.weights.storage())
      if (!std::isfinite(v)) return false;
    for (double v : layer.bias)
      if (!std::isfinite(v)) return false;
  }
  return true;
}

ParamGrads zero_grads_like(const MlpParams& params) {
  ParamGrads grads;
  grads.layers.reserve(params.layers.size());
  for (const auto& layer : params.layers) {
    grads.layers.push_back({Matrix(layer.weights.rows(), layer.weights.cols()),
                            std::vector<double>(layer.bias.size(), 0.0)});
  }
  return grads;
}

MlpParams mlp_init(const std::vector<std::size_t>& layer_dims,
                   const std::vector<Activation>& activations, std::uint64_t seed) {
  if (layer_dims.size() < 2) throw std::invalid_argument("mlp_init: need at least two dims");
  for (std::size_t d : layer_dims)
    if (d == 0) throw std::invalid_argument("mlp_init: zero-size layer");
  if (activations.size() != layer_dims.size() - 1)
    throw std::invalid_argument("mlp_init: one activation per layer required");

  MlpParams params;
  params.layers.resize(layer_dims.size() - 1);
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const std::size_t fan_in = layer_dims[l];
    const std::size_t fan_out = layer_dims[l + 1];
    Layer& layer = params.layers[l];
    layer.activation = activations[l];
    layer.weights = Matrix(fan_out, fan_in);
    layer.bias.assign(fan_out, 0.0);

    const double gain = activations[l] == Activation::kRelu ? 2.0 : 1.0;
    const double stddev = std::sqrt(gain / static_cast<double>(fan_in));
    auto stream = rng::substream(seed, {0x696e6974ULL /*"init"*/, l});
    for (double& w : layer.weights.storage()) w = stddev * stream.normal();
  }
  return params;
}

Matrix mlp_forward(const MlpParams& params, const Matrix& inputs, ForwardTape* tape) {
  if (params.layers.empty()) throw std::invalid_argument("mlp_forward: empty network");
  if (inputs.cols() != params.input_dim())
    throw std::invalid_argument("mlp_forward: input dim " + std::to_string(inputs.cols()) +
                                " != expected " + std::to_string(params.input_dim()));
  if (tape) {
    tape->input = inputs;
    tape->post_activations.clear();
  }

  const Matrix* current = &inputs;
  Matrix local;
  for (const Layer& layer : params.layers) {
    Matrix values;
    matmul_a_bt(*current, layer.weights, values);
    parallel_for(values.rows(), [&](std::size_t begin, std::size_t end) {
      for (std::size_t r = begin; r < end; ++r) {
        double* row = values.row(r);
        for (std::size_t c = 0; c < values.cols(); ++c) row[c] += layer.bias[c];
      }
    });
    apply_activation_in_place(layer.activation, values);
    if (tape) {
      tape->post_activations.push_back(std::move(values));
      current = &tape->post_activations.back();
    } else {
      local = std::move(values);
      current = &local;
    }
  }
  return *current;
}

std::vector<double> mlp_forward(const MlpParams& params, const std::vector<double>& input) {
  Matrix row(1, input.size());
  std::copy(input.begin(), input.end(), row.row(0));
  Matrix out = mlp_forward(params, row);
  return {out.row(0), out.row(0) + out.cols()};
}

BackwardResult mlp_backward(const MlpParams& params, const ForwardTape& tape,
                            const Matrix& output_grads) {
  const std::size_t n_layers = params.layers.size();
  if (tape.post_activations.size() != n_layers)
    throw std::invalid_argument("mlp_backward: tape does not match network depth");
  if (tape.input.cols() != params.input_dim())
    throw std::invalid_argument("mlp_backward: tape input dim mismatch");
  if (output_grads.rows() != tape.input.rows() || output_grads.cols() != params.output_dim())
    throw std::invalid_argument("mlp_backward: output_grads shape mismatch");
  for (std::size_t l = 0; l < n_layers; ++l) {
    if (tape.post_activations[l].cols() != params.layers[l].out_dim() ||
        tape.post_activations[l].rows() != tape.input.rows())
      throw std::invalid_argument("mlp_backward: stale tape at layer " + std::to_string(l));
  }

  BackwardResult result;
  result.grads.layers.resize(n_layers);

  Matrix grad = output_grads;  // dL/d(post-activation of current layer)
  for (std::size_t l = n_layers; l-- > 0;) {
    const Layer& layer = params.layers[l];
    activation_backward(layer.activation, tape.post_activations[l], grad);

    const Matrix& layer_input = l == 0 ? tape.input : tape.post_activations[l - 1];
    LayerGrads& lg = result.grads.layers[l];
    matmul_at_b(grad, layer_input, lg.weights);  // [out × in]
    lg.bias.assign(layer.out_dim(), 0.0);
    for (std::size_t r = 0; r < grad.rows(); ++r) {
      const double* row = grad.row(r);
      for (std::size_t c = 0; c < grad.cols(); ++c) lg.bias[c] += row[c];
    }

    Matrix next_grad;
    matmul(grad, layer.weights, next_grad);  // dL/d(layer input)
    grad = std::move(next_grad);
  }
  result.input_grads = std::move(grad);
  return result;
}

AdamState adam_init(const MlpParams& params, const AdamConfig& config) {
  AdamState state;
  state.first_moment = zero_grads_like(params);
  state.second_moment = zero_grads_like(params);
  state.step_count = 0;
  state.config = config;
  return state;
}

void adam_step(MlpParams& params, const ParamGrads& grads, AdamState& state) {
  check_congruent(params, grads, "adam_step");
  if (!grads.all_finite()) throw std::invalid_argument("adam_step: non-finite gradient");

  state.step_count += 1;
  const AdamConfig& cfg = state.config;
  const double bias1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step_count));
  const double bias2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step_count));

  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto update = [&](double* w, const double* g, double* m, double* v, std::size_t n) {
      for (std::size_t i = 0; i < n; ++i) {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
        const double m_hat = m[i] / bias1;
        const double v_hat = v[i] / bias2;
        w[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
      }
    };
    update(params.layers[l].weights.data(), grads.layers[l].weights.data(),
           state.first_moment.layers[l].weights.data(),
           state.second_moment.layers[l].weights.data(), params.layers[l].weights.size());
    update(params.layers[l].bias.data(), grads.layers[l].bias.data(),
           state.first_moment.layers[l].bias.data(), state.second_moment.layers[l].bias.data(),
           params.layers[l].bias.size());
  }
}

}  // namespace necst::nn
