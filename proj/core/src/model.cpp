#include "necst/model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "necst/data.hpp"
#include "necst/parallel.hpp"

namespace necst {
namespace {

constexpr double kProbClamp = 1e-12;
constexpr double kLogWeightFloor = -1e10;

double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

double logsumexp(std::span<const double> values) {
  double hi = values[0];
  for (double v : values) hi = std::max(hi, v);
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - hi);
  return hi + std::log(acc);
}

// log p_dec(x|code) for one decoder output row, plus optionally the gradient
// of it w.r.t. the decoder head, scaled by `grad_scale`.
double row_loglik(const NecstModel& model, const double* head, const double* x, std::size_t n,
                  double grad_scale, double* grad_out) {
  double ll = 0.0;
  if (model.decoder_family == DecoderFamily::kBernoulli) {
    for (std::size_t i = 0; i < n; ++i) {
      const double z = head[i];
      ll += x[i] * nn::log_sigmoid(z) + (1.0 - x[i]) * nn::log_sigmoid(-z);
      if (grad_out) grad_out[i] = grad_scale * (x[i] - nn::sigmoid(z));
    }
  } else {
    const double var = model.gaussian_variance;
    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = x[i] - head[i];
      sq += r * r;
      if (grad_out) grad_out[i] = grad_scale * r / var;
    }
    ll = -0.5 * sq / var -
         0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi * var);
  }
  return std::max(ll, kLogWeightFloor);
}

// d log q(y|x) / d(encoder logit), per bit, added into `out` scaled by coef.
void add_scaled_logit_score(const NecstModel& model, const channel::NoisySymbols& symbols,
                            const double* probs, double coef, double* out) {
  const double eps = model.channel.noise;
  const std::size_t m = model.code_length;
  for (std::size_t i = 0; i < m; ++i) {
    const double p = probs[i];
    const double dp_dz = p * (1.0 - p);
    const std::uint8_t s = symbols.symbols[i];
    double dlogq_dp = 0.0;
    if (model.channel.kind == channel::Kind::kBsc) {
      const double r = p - 2.0 * p * eps + eps;  // P(y=1)
      dlogq_dp = (s == 1) ? (1.0 - 2.0 * eps) / r : -(1.0 - 2.0 * eps) / (1.0 - r);
    } else {
      if (s == 1) {
        dlogq_dp = 1.0 / p;
      } else if (s == 0) {
        dlogq_dp = -1.0 / (1.0 - p);
      }  // erased: log ε does not depend on the encoder
    }
    out[i] += coef * dlogq_dp * dp_dz;
  }
}

struct VimcoSignals {
  double objective;                     // L̂
  std::vector<double> weight_softmax;   // ω_j
  std::vector<double> learning_signal;  // L̂ - L̂_{-j}
};

VimcoSignals vimco_signals(std::span<const double> log_w) {
  const std::size_t k = log_w.size();
  VimcoSignals out;
  const double lse = logsumexp(log_w);
  out.objective = lse - std::log(static_cast<double>(k));
  out.weight_softmax.resize(k);
  for (std::size_t j = 0; j < k; ++j) out.weight_softmax[j] = std::exp(log_w[j] - lse);

  out.learning_signal.resize(k);
  double total = 0.0;
  for (double v : log_w) total += v;
  std::vector<double> held(log_w.begin(), log_w.end());
  for (std::size_t j = 0; j < k; ++j) {
    const double imputed = (total - log_w[j]) / static_cast<double>(k - 1);
    held[j] = imputed;
    out.learning_signal[j] = lse - logsumexp(held);
    held[j] = log_w[j];
  }
  return out;
}

// Shared estimator body. When `fixed_samples` is null, draws K codes per row
// from per-row substreams of `step_key`.
GradEstimate vimco_core(const NecstModel& model, const Matrix& batch, std::size_t k,
                        const std::vector<std::vector<channel::NoisySymbols>>* fixed_samples,
                        std::uint64_t step_key) {
  const std::size_t rows = batch.rows();
  const std::size_t n = model.input_dim;
  const std::size_t m = model.code_length;

  nn::ForwardTape enc_tape;
  Matrix probs = encode_prob_matrix(model, batch, &enc_tape);

  std::vector<std::vector<channel::NoisySymbols>> drawn;
  if (!fixed_samples) {
    drawn.resize(rows);
    parallel_for(rows, [&](std::size_t begin, std::size_t end) {
      for (std::size_t b = begin; b < end; ++b) {
        const std::vector<double> row_probs(probs.row(b), probs.row(b) + probs.cols());
        const auto dist = channel::noisy_enc_distribution(row_probs, model.channel);
        auto stream = rng::Stream(rng::derive_key(step_key, {0x79ULL, b}));
        drawn[b] = sample_noisy_codes(dist, k, stream);
      }
    });
  }
  const auto& samples = fixed_samples ? *fixed_samples : drawn;

  // Decoder forward over every sample at once.
  Matrix dec_in(rows * k, m);
  for (std::size_t b = 0; b < rows; ++b) {
    if (samples[b].size() != k)
      throw std::invalid_argument("vimco: sample count mismatch for row " + std::to_string(b));
    for (std::size_t j = 0; j < k; ++j) {
      if (samples[b][j].size() != m)
        throw std::invalid_argument("vimco: sample length mismatch");
      channel::decoder_embedding_into(samples[b][j], dec_in.row(b * k + j));
    }
  }
  nn::ForwardTape dec_tape;
  Matrix dec_out = mlp_forward(model.decoder, dec_in, &dec_tape);

  Matrix log_w(rows, k);
  parallel_for(rows, [&](std::size_t begin, std::size_t end) {
    for (std::size_t b = begin; b < end; ++b)
      for (std::size_t j = 0; j < k; ++j)
        log_w(b, j) = row_loglik(model, dec_out.row(b * k + j), batch.row(b), n, 0.0, nullptr);
  });
  for (double v : log_w.storage())
    if (!std::isfinite(v)) throw std::runtime_error("vimco: non-finite log-weight");

  Matrix dec_grad(rows * k, n);
  Matrix enc_logit_grad(rows, m);
  std::vector<double> objective_by_row(rows, 0.0);
  const double inv_rows = 1.0 / static_cast<double>(rows);

  parallel_for(rows, [&](std::size_t begin, std::size_t end) {
    for (std::size_t b = begin; b < end; ++b) {
      const VimcoSignals sig = vimco_signals({log_w.row(b), k});
      objective_by_row[b] = sig.objective;
      for (std::size_t j = 0; j < k; ++j) {
        row_loglik(model, dec_out.row(b * k + j), batch.row(b), n,
                   sig.weight_softmax[j] * inv_rows, dec_grad.row(b * k + j));
        add_scaled_logit_score(model, samples[b][j], probs.row(b),
                               sig.learning_signal[j] * inv_rows, enc_logit_grad.row(b));
      }
    }
  });

  GradEstimate result;
  result.objective = 0.0;
  for (double v : objective_by_row) result.objective += v;
  result.objective *= inv_rows;
  result.decoder = nn::mlp_backward(model.decoder, dec_tape, dec_grad).grads;
  result.encoder = nn::mlp_backward(model.encoder, enc_tape, enc_logit_grad).grads;
  return result;
}

// All symbol vectors with positive probability under the channel.
std::vector<channel::NoisySymbols> enumerate_support(const NecstModel& model) {
  const std::size_t m = model.code_length;
  const bool erasures = model.channel.kind == channel::Kind::kBec && model.channel.noise > 0.0;
  if (erasures ? m > 8 : m > 12)
    throw std::invalid_argument("exact_objective_grad: code length too large to enumerate");
  const std::size_t arity = erasures ? 3 : 2;
  const double count = std::pow(static_cast<double>(arity), static_cast<double>(m));
  std::vector<channel::NoisySymbols> out;
  out.reserve(static_cast<std::size_t>(count));
  channel::NoisySymbols current;
  current.symbols.assign(m, 0);
  for (;;) {
    out.push_back(current);
    std::size_t i = 0;
    for (; i < m; ++i) {
      std::uint8_t next = current.symbols[i] + 1;
      if (next == 2 && !erasures) next = 3;  // skip the erasure value under BSC
      if (next <= 2) {
        current.symbols[i] = next;
        break;
      }
      current.symbols[i] = 0;
    }
    if (i == m) break;
  }
  return out;
}

double elapsed_seconds(std::chrono::steady_clock::time_point from) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - from).count();
}

}  // namespace

NecstModel make_model(std::size_t input_dim, std::size_t code_length,
                      const channel::ChannelModel& channel, DecoderFamily family,
                      const std::vector<std::size_t>& encoder_hidden,
                      const std::vector<std::size_t>& decoder_hidden, std::uint64_t seed,
                      double gaussian_variance) {
  NecstModel model;
  model.input_dim = input_dim;
  model.code_length = code_length;
  model.channel = channel;
  model.decoder_family = family;
  model.gaussian_variance = gaussian_variance;

  std::vector<std::size_t> enc_dims{input_dim};
  enc_dims.insert(enc_dims.end(), encoder_hidden.begin(), encoder_hidden.end());
  enc_dims.push_back(code_length);
  std::vector<nn::Activation> enc_acts(enc_dims.size() - 1, nn::Activation::kRelu);
  enc_acts.back() = nn::Activation::kIdentity;
  model.encoder = nn::mlp_init(enc_dims, enc_acts, rng::derive_key(seed, {0x656e63ULL}));

  std::vector<std::size_t> dec_dims{code_length};
  dec_dims.insert(dec_dims.end(), decoder_hidden.begin(), decoder_hidden.end());
  dec_dims.push_back(input_dim);
  std::vector<nn::Activation> dec_acts(dec_dims.size() - 1, nn::Activation::kRelu);
  dec_acts.back() = nn::Activation::kIdentity;
  model.decoder = nn::mlp_init(dec_dims, dec_acts, rng::derive_key(seed, {0x646563ULL}));

  validate_model(model);
  return model;
}

void validate_model(const NecstModel& model) {
  if (model.input_dim == 0 || model.code_length == 0)
    throw std::invalid_argument("model: zero input_dim or code_length");
  if (model.encoder.input_dim() != model.input_dim ||
      model.encoder.output_dim() != model.code_length)
    throw std::invalid_argument("model: encoder dims do not match (input_dim -> code_length)");
  if (model.decoder.input_dim() != model.code_length ||
      model.decoder.output_dim() != model.input_dim)
    throw std::invalid_argument("model: decoder dims do not match (code_length -> input_dim)");
  if (model.decoder_family == DecoderFamily::kGaussian && !(model.gaussian_variance > 0.0))
    throw std::invalid_argument("model: gaussian variance must be positive");
  channel::validate_channel(model.channel);
}

void validate_train_config(const TrainConfig& config) {
  if (config.sample_count < 2)
    throw std::invalid_argument("train config: sample_count must be at least 2");
  if (config.batch_size < 1) throw std::invalid_argument("train config: batch_size must be >= 1");
  if (config.l2_encoder < 0.0) throw std::invalid_argument("train config: l2_encoder must be >= 0");
  if (config.eval_every < 1) throw std::invalid_argument("train config: eval_every must be >= 1");
}

Matrix encode_prob_matrix(const NecstModel& model, const Matrix& inputs, nn::ForwardTape* tape) {
  Matrix logits = mlp_forward(model.encoder, inputs, tape);
  for (double& v : logits.storage()) v = clamp_prob(nn::sigmoid(v));
  return logits;
}

std::vector<double> encode_probs(const NecstModel& model, std::span<const double> x) {
  if (x.size() != model.input_dim) throw std::invalid_argument("encode_probs: input dim mismatch");
  Matrix row(1, x.size());
  std::copy(x.begin(), x.end(), row.row(0));
  Matrix probs = encode_prob_matrix(model, row);
  return {probs.row(0), probs.row(0) + probs.cols()};
}

std::vector<channel::NoisySymbols> sample_noisy_codes(const channel::NoisyBitDistribution& dist,
                                                      std::size_t count, rng::Stream& stream) {
  if (count < 1) throw std::invalid_argument("sample_noisy_codes: count must be >= 1");
  std::vector<channel::NoisySymbols> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(channel::sample_symbols(dist, stream));
  return out;
}

double decoder_loglik(const NecstModel& model, const channel::NoisySymbols& code,
                      std::span<const double> x) {
  if (code.size() != model.code_length)
    throw std::invalid_argument("decoder_loglik: code length mismatch");
  if (x.size() != model.input_dim)
    throw std::invalid_argument("decoder_loglik: input dim mismatch");
  const std::vector<double> head = mlp_forward(model.decoder, channel::decoder_embedding(code));
  return row_loglik(model, head.data(), x.data(), x.size(), 0.0, nullptr);
}

std::vector<double> decode_reconstruction(const NecstModel& model,
                                          const channel::NoisySymbols& code) {
  std::vector<double> head = mlp_forward(model.decoder, channel::decoder_embedding(code));
  if (model.decoder_family == DecoderFamily::kBernoulli)
    for (double& v : head) v = nn::sigmoid(v);
  return head;
}

GradEstimate vimco_step(const NecstModel& model, const Matrix& batch, const TrainConfig& config,
                        std::uint64_t step_key) {
  validate_model(model);
  validate_train_config(config);
  if (batch.cols() != model.input_dim) throw std::invalid_argument("vimco_step: batch dim");
  if (batch.rows() == 0) throw std::invalid_argument("vimco_step: empty batch");
  return vimco_core(model, batch, config.sample_count, nullptr, step_key);
}

GradEstimate vimco_with_samples(const NecstModel& model, const Matrix& batch,
                                const std::vector<std::vector<channel::NoisySymbols>>& samples) {
  validate_model(model);
  if (batch.cols() != model.input_dim)
    throw std::invalid_argument("vimco_with_samples: batch dim");
  if (batch.rows() == 0 || samples.size() != batch.rows())
    throw std::invalid_argument("vimco_with_samples: one sample set per row required");
  const std::size_t k = samples.front().size();
  if (k < 2) throw std::invalid_argument("vimco_with_samples: need at least 2 samples");
  return vimco_core(model, batch, k, &samples, 0);
}

GradEstimate exact_objective_grad(const NecstModel& model, std::span<const double> x,
                                  const TrainConfig& config) {
  validate_model(model);
  if (x.size() != model.input_dim)
    throw std::invalid_argument("exact_objective_grad: input dim mismatch");
  const std::size_t k = config.sample_count;
  if (k < 1) throw std::invalid_argument("exact_objective_grad: sample_count must be >= 1");

  Matrix row(1, x.size());
  std::copy(x.begin(), x.end(), row.row(0));
  nn::ForwardTape enc_tape;
  Matrix probs = encode_prob_matrix(model, row, &enc_tape);
  const std::vector<double> prob_vec(probs.row(0), probs.row(0) + probs.cols());
  const auto dist = channel::noisy_enc_distribution(prob_vec, model.channel);

  const auto support = enumerate_support(model);
  const std::size_t sym_count = support.size();
  const double tuple_work =
      std::pow(static_cast<double>(sym_count), static_cast<double>(k));
  if (tuple_work > 2e7)
    throw std::invalid_argument("exact_objective_grad: |support|^K too large to enumerate");

  // Per-symbol probability and decoder log-likelihood.
  std::vector<double> q(sym_count);
  for (std::size_t s = 0; s < sym_count; ++s)
    q[s] = std::exp(channel::noisy_loglik(dist, support[s]));

  Matrix dec_in(sym_count, model.code_length);
  for (std::size_t s = 0; s < sym_count; ++s)
    channel::decoder_embedding_into(support[s], dec_in.row(s));
  nn::ForwardTape dec_tape;
  Matrix dec_out = mlp_forward(model.decoder, dec_in, &dec_tape);
  std::vector<double> log_w(sym_count);
  for (std::size_t s = 0; s < sym_count; ++s)
    log_w[s] = row_loglik(model, dec_out.row(s), x.data(), x.size(), 0.0, nullptr);

  // Expected softmax mass (decoder) and expected learning signal mass
  // (encoder) per symbol.
  std::vector<double> coef_decoder(sym_count, 0.0);
  std::vector<double> coef_encoder(sym_count, 0.0);
  double objective = 0.0;

  if (k == 1) {
    for (std::size_t s = 0; s < sym_count; ++s) {
      objective += q[s] * log_w[s];
      coef_decoder[s] = q[s];
      coef_encoder[s] = q[s] * log_w[s];
    }
  } else {
    std::vector<std::size_t> idx(k, 0);
    std::vector<double> tuple_logw(k, log_w[0]);
    const double log_k = std::log(static_cast<double>(k));
    for (;;) {
      double prob = 1.0;
      for (std::size_t j = 0; j < k; ++j) prob *= q[idx[j]];
      if (prob > 0.0) {
        const double lse = logsumexp(tuple_logw);
        const double objective_hat = lse - log_k;
        objective += prob * objective_hat;
        for (std::size_t j = 0; j < k; ++j) {
          coef_decoder[idx[j]] += prob * std::exp(tuple_logw[j] - lse);
          coef_encoder[idx[j]] += prob * objective_hat;
        }
      }
      std::size_t j = 0;
      for (; j < k; ++j) {
        if (++idx[j] < sym_count) {
          tuple_logw[j] = log_w[idx[j]];
          break;
        }
        idx[j] = 0;
        tuple_logw[j] = log_w[0];
      }
      if (j == k) break;
    }
    // coef_encoder currently holds Σ_t prob·L̂ per symbol occurrence; the
    // score-function identity needs exactly that (q's own factor is part of
    // prob, so the per-symbol score multiplies it directly).
  }

  GradEstimate result;
  result.objective = objective;

  Matrix dec_grad(sym_count, model.input_dim);
  for (std::size_t s = 0; s < sym_count; ++s)
    row_loglik(model, dec_out.row(s), x.data(), x.size(), coef_decoder[s], dec_grad.row(s));
  result.decoder = nn::mlp_backward(model.decoder, dec_tape, dec_grad).grads;

  Matrix enc_logit_grad(1, model.code_length);
  for (std::size_t s = 0; s < sym_count; ++s)
    add_scaled_logit_score(model, support[s], probs.row(0), coef_encoder[s],
                           enc_logit_grad.row(0));
  result.encoder = nn::mlp_backward(model.encoder, enc_tape, enc_logit_grad).grads;
  return result;
}

TrainReport train(NecstModel& model, const data::Dataset& dataset, const TrainConfig& config) {
  validate_model(model);
  validate_train_config(config);
  if (dataset.train_indices.empty()) throw std::invalid_argument("train: empty training split");
  if (dataset.dim != model.input_dim)
    throw std::invalid_argument("train: dataset dim " + std::to_string(dataset.dim) +
                                " != model input_dim " + std::to_string(model.input_dim));

  nn::AdamConfig adam_cfg;
  adam_cfg.lr = config.lr;
  auto enc_state = nn::adam_init(model.encoder, adam_cfg);
  auto dec_state = nn::adam_init(model.decoder, adam_cfg);

  TrainReport report;
  std::vector<std::size_t> order = dataset.train_indices;
  std::uint64_t global_step = 0;
  double last_val = std::numeric_limits<double>::quiet_NaN();

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    auto shuffle_stream = rng::substream(config.seed, {0x73687566ULL /*"shuf"*/, epoch});
    std::shuffle(order.begin(), order.end(), shuffle_stream);

    double objective_sum = 0.0;
    std::size_t steps = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t rows = std::min(config.batch_size, order.size() - start);
      Matrix batch(rows, dataset.dim);
      for (std::size_t r = 0; r < rows; ++r) dataset.copy_item(order[start + r], batch.row(r));

      GradEstimate est = vimco_step(model, batch, config,
                                    rng::derive_key(config.seed, {0x73746570ULL, global_step}));
      if (!std::isfinite(est.objective))
        throw std::runtime_error("train: non-finite objective at epoch " + std::to_string(epoch) +
                                 ", step " + std::to_string(global_step));

      // Descent gradients: negate the ascent estimate, add the encoder
      // weight penalty (weights only, not biases).
      est.encoder.scale(-1.0);
      est.decoder.scale(-1.0);
      for (std::size_t l = 0; l < model.encoder.layers.size(); ++l) {
        const auto& w = model.encoder.layers[l].weights.storage();
        auto& g = est.encoder.layers[l].weights.storage();
        for (std::size_t i = 0; i < w.size(); ++i) g[i] += config.l2_encoder * w[i];
      }
      nn::adam_step(model.encoder, est.encoder, enc_state);
      nn::adam_step(model.decoder, est.decoder, dec_state);

      objective_sum += est.objective;
      ++steps;
      ++global_step;
    }
    report.objective.push_back(objective_sum / static_cast<double>(steps));

    const bool eval_now = (epoch % config.eval_every == 0) || (epoch + 1 == config.epochs);
    if (eval_now && !dataset.val_indices.empty()) {
      // Mean L1 distortion on (up to) 1000 validation items, deterministic
      // codes, one channel draw per item keyed by (seed, epoch, item).
      const std::size_t count = std::min<std::size_t>(dataset.val_indices.size(), 1000);
      std::vector<double> item_dist(count, 0.0);
      parallel_for(count, [&](std::size_t begin, std::size_t end) {
        std::vector<double> x(dataset.dim);
        for (std::size_t i = begin; i < end; ++i) {
          dataset.copy_item(dataset.val_indices[i], x.data());
          auto stream = rng::substream(config.seed, {0x76616cULL /*"val"*/, epoch, i});
          const auto res = transmit_reconstruct(model, x, stream, true);
          double acc = 0.0;
          for (std::size_t d = 0; d < x.size(); ++d) acc += std::abs(x[d] - res.reconstruction[d]);
          item_dist[i] = acc / static_cast<double>(x.size());
        }
      });
      double total = 0.0;
      for (double v : item_dist) total += v;
      last_val = total / static_cast<double>(count);
    }
    report.val_distortion.push_back(last_val);
    report.epoch_seconds.push_back(elapsed_seconds(started));
  }
  return report;
}

TransmitResult transmit_reconstruct(const NecstModel& model, std::span<const double> x,
                                    rng::Stream& stream, bool deterministic_code) {
  const std::vector<double> probs = encode_probs(model, x);
  TransmitResult result;
  result.sent.bits.resize(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    result.sent.bits[i] =
        deterministic_code ? (probs[i] >= 0.5 ? 1 : 0) : (stream.bernoulli(probs[i]) ? 1 : 0);
  }
  result.received = channel::corrupt(result.sent, model.channel, stream);
  result.reconstruction = decode_reconstruction(model, result.received);
  return result;
}

}  // namespace necst
