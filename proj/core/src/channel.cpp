#include "necst/channel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace necst::channel {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

void check_bits(const Codeword& code) {
  for (std::uint8_t b : code.bits)
    if (b > 1) throw std::invalid_argument("codeword bit outside {0,1}");
}

}  // namespace

void validate_channel(const ChannelModel& channel) {
  if (!(channel.noise >= 0.0 && channel.noise <= 1.0))
    throw std::invalid_argument("channel noise must lie in [0,1]");
}

NoisySymbols corrupt(const Codeword& code, const ChannelModel& channel, rng::Stream& stream) {
  validate_channel(channel);
  check_bits(code);
  NoisySymbols out;
  out.symbols.resize(code.size());
  for (std::size_t i = 0; i < code.size(); ++i) {
    const bool hit = stream.bernoulli(channel.noise);
    if (channel.kind == Kind::kBsc) {
      out.symbols[i] = hit ? static_cast<std::uint8_t>(1 - code.bits[i]) : code.bits[i];
    } else {
      out.symbols[i] = hit ? kErased : code.bits[i];
    }
  }
  return out;
}

double channel_loglik(const NoisySymbols& received, const Codeword& sent,
                      const ChannelModel& channel) {
  validate_channel(channel);
  if (received.size() != sent.size())
    throw std::invalid_argument("channel_loglik: length mismatch");
  const double eps = channel.noise;
  double total = 0.0;
  for (std::size_t i = 0; i < sent.size(); ++i) {
    const std::uint8_t s = sent.bits[i];
    const std::uint8_t r = received.symbols[i];
    if (s > 1) throw std::invalid_argument("channel_loglik: sent bit outside {0,1}");
    if (channel.kind == Kind::kBsc) {
      if (r > 1) throw std::invalid_argument("channel_loglik: erased symbol under BSC");
      total += (r == s) ? safe_log(1.0 - eps) : safe_log(eps);
    } else {
      if (r == kErased) {
        total += safe_log(eps);
      } else if (r == s) {
        total += safe_log(1.0 - eps);
      } else if (r <= 1) {
        total += kNegInf;  // BEC never flips
      } else {
        throw std::invalid_argument("channel_loglik: symbol outside {0,1,erased}");
      }
    }
    if (total == kNegInf) return kNegInf;
  }
  return total;
}

NoisyBitDistribution noisy_enc_distribution(const std::vector<double>& bit_probs,
                                            const ChannelModel& channel) {
  validate_channel(channel);
  NoisyBitDistribution dist;
  dist.kind = channel.kind;
  dist.prob_one.resize(bit_probs.size());
  const double eps = channel.noise;
  for (std::size_t i = 0; i < bit_probs.size(); ++i) {
    const double p = bit_probs[i];
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("noisy_enc_distribution: probability outside [0,1]");
    if (channel.kind == Kind::kBsc) {
      dist.prob_one[i] = p - 2.0 * p * eps + eps;
    } else {
      dist.prob_one[i] = p * (1.0 - eps);
    }
  }
  if (channel.kind == Kind::kBec) dist.prob_erased.assign(bit_probs.size(), eps);
  return dist;
}

double noisy_loglik(const NoisyBitDistribution& dist, const NoisySymbols& symbols) {
  if (dist.size() != symbols.size()) throw std::invalid_argument("noisy_loglik: length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    const std::uint8_t s = symbols.symbols[i];
    if (s == kErased) {
      if (dist.kind != Kind::kBec)
        throw std::invalid_argument("noisy_loglik: erased symbol under BSC");
      total += safe_log(dist.prob_erased[i]);
    } else if (s == 1) {
      total += safe_log(dist.prob_one[i]);
    } else if (s == 0) {
      total += safe_log(dist.prob_zero(i));
    } else {
      throw std::invalid_argument("noisy_loglik: symbol outside {0,1,erased}");
    }
  }
  return total;
}

NoisySymbols sample_symbols(const NoisyBitDistribution& dist, rng::Stream& stream) {
  NoisySymbols out;
  out.symbols.resize(dist.size());
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const double u = stream.uniform();
    if (dist.kind == Kind::kBsc) {
      out.symbols[i] = u < dist.prob_one[i] ? 1 : 0;
    } else {
      if (u < dist.prob_one[i]) {
        out.symbols[i] = 1;
      } else if (u < dist.prob_one[i] + dist.prob_erased[i]) {
        out.symbols[i] = kErased;
      } else {
        out.symbols[i] = 0;
      }
    }
  }
  return out;
}

std::vector<double> decoder_embedding(const NoisySymbols& symbols) {
  std::vector<double> out(symbols.size());
  decoder_embedding_into(symbols, out.data());
  return out;
}

void decoder_embedding_into(const NoisySymbols& symbols, double* out) {
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    const std::uint8_t s = symbols.symbols[i];
    out[i] = s == kErased ? 0.5 : static_cast<double>(s);
  }
}

double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binary_entropy: p outside [0,1]");
  double h = 0.0;
  if (p > 0.0) h -= p * std::log2(p);
  if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
  return h;
}

double bsc_capacity(double noise) { return 1.0 - binary_entropy(noise); }

}  // namespace necst::channel
