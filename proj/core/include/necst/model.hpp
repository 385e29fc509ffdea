#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "necst/channel.hpp"
#include "necst/matrix.hpp"
#include "necst/nn.hpp"
#include "necst/rng.hpp"

namespace necst::data {
struct Dataset;
}

namespace necst {

enum class DecoderFamily { kBernoulli, kGaussian };

// Encoder/decoder pair trained end-to-end through a simulated discrete
// channel. The encoder maps an input to per-bit code logits; the decoder
// maps (possibly corrupted) code symbols back to the input space. Both
// networks end in an identity head; the decoder family fixes how the head
// is read (Bernoulli logits vs. Gaussian mean).
struct NecstModel {
  nn::MlpParams encoder;
  nn::MlpParams decoder;
  std::size_t input_dim = 0;
  std::size_t code_length = 0;
  channel::ChannelModel channel;
  DecoderFamily decoder_family = DecoderFamily::kBernoulli;
  double gaussian_variance = 1.0;
};

NecstModel make_model(std::size_t input_dim, std::size_t code_length,
                      const channel::ChannelModel& channel, DecoderFamily family,
                      const std::vector<std::size_t>& encoder_hidden,
                      const std::vector<std::size_t>& decoder_hidden, std::uint64_t seed,
                      double gaussian_variance = 1.0);

void validate_model(const NecstModel& model);

struct TrainConfig {
  std::size_t sample_count = 5;  // K of the multi-sample objective
  std::size_t epochs = 1;
  std::size_t batch_size = 100;
  double lr = 1e-3;
  double l2_encoder = 1e-3;
  std::uint64_t seed = 0;
  std::size_t eval_every = 1;
};

void validate_train_config(const TrainConfig& config);

struct TrainReport {
  std::vector<double> objective;       // per epoch, batch-averaged
  std::vector<double> val_distortion;  // per epoch, mean L1 on validation split
  std::vector<double> epoch_seconds;
};

// Per-bit P(code bit = 1), clamped away from exactly 0/1.
std::vector<double> encode_probs(const NecstModel& model, std::span<const double> x);

// Batched variant; one input per row, one probability row per input.
Matrix encode_prob_matrix(const NecstModel& model, const Matrix& inputs,
                          nn::ForwardTape* tape = nullptr);

// `count` i.i.d. draws from the marginal received-symbol distribution.
std::vector<channel::NoisySymbols> sample_noisy_codes(const channel::NoisyBitDistribution& dist,
                                                      std::size_t count, rng::Stream& stream);

// log p_dec(x | code) for the model's decoder family.
double decoder_loglik(const NecstModel& model, const channel::NoisySymbols& code,
                      std::span<const double> x);

// Decoder read-out: Bernoulli probabilities or Gaussian mean.
std::vector<double> decode_reconstruction(const NecstModel& model,
                                          const channel::NoisySymbols& code);

struct GradEstimate {
  double objective = 0.0;
  nn::ParamGrads encoder;  // ascent direction on the objective
  nn::ParamGrads decoder;
};

// One multi-sample score-function gradient estimate, batch-averaged.
// Decoder: Σ_j ω_j ∇ log w_j with ω = softmax of the log-weights.
// Encoder: Σ_j (L̂ - L̂_{-j}) ∇ log q(y_j | x) with leave-one-out baselines
// that impute the held-out log-weight by the mean of the others.
GradEstimate vimco_step(const NecstModel& model, const Matrix& batch, const TrainConfig& config,
                        std::uint64_t step_key);

// Same estimator on caller-provided samples (samples[row][j]); used to pin
// the estimator to a fixed draw in tests.
GradEstimate vimco_with_samples(const NecstModel& model, const Matrix& batch,
                                const std::vector<std::vector<channel::NoisySymbols>>& samples);

// Exact value and gradients of the K-sample objective by enumerating the
// received-symbol space (K taken from config.sample_count; K=1 gives
// Σ_y q(y|x)·log p_dec(x|y)). Test oracle; cost grows as |Y|^K.
GradEstimate exact_objective_grad(const NecstModel& model, std::span<const double> x,
                                  const TrainConfig& config);

// Minibatch training with Adam on both networks; deterministic given the
// config seed (independently of the worker-pool size).
TrainReport train(NecstModel& model, const data::Dataset& dataset, const TrainConfig& config);

struct TransmitResult {
  channel::Codeword sent;
  channel::NoisySymbols received;
  std::vector<double> reconstruction;
};

// Full pipeline for one input: form the code (thresholded at 0.5 when
// deterministic, sampled otherwise), corrupt it, decode.
TransmitResult transmit_reconstruct(const NecstModel& model, std::span<const double> x,
                                    rng::Stream& stream, bool deterministic_code = true);

}  // namespace necst
