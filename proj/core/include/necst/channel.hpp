#pragma once

#include <cstdint>
#include <vector>

#include "necst/rng.hpp"

namespace necst::channel {

enum class Kind { kBsc, kBec };

// Per-bit i.i.d. discrete channel: BSC flips a bit with probability `noise`,
// BEC erases it with probability `noise`.
struct ChannelModel {
  Kind kind = Kind::kBsc;
  double noise = 0.0;
};

void validate_channel(const ChannelModel& channel);

inline constexpr std::uint8_t kErased = 2;

struct Codeword {
  std::vector<std::uint8_t> bits;  // values in {0,1}

  std::size_t size() const { return bits.size(); }
  bool operator==(const Codeword&) const = default;
};

struct NoisySymbols {
  std::vector<std::uint8_t> symbols;  // values in {0,1,kErased}

  std::size_t size() const { return symbols.size(); }
  bool operator==(const NoisySymbols&) const = default;
};

// Per-bit categorical distribution of the received symbol after the encoder
// marginal has been pushed through the channel.
struct NoisyBitDistribution {
  Kind kind = Kind::kBsc;
  std::vector<double> prob_one;
  std::vector<double> prob_erased;  // all zero for BSC

  std::size_t size() const { return prob_one.size(); }
  double prob_zero(std::size_t i) const {
    return 1.0 - prob_one[i] - (prob_erased.empty() ? 0.0 : prob_erased[i]);
  }
};

// I.i.d. per-bit corruption of a codeword.
NoisySymbols corrupt(const Codeword& code, const ChannelModel& channel, rng::Stream& stream);

// Natural-log transition probability of receiving `received` given `sent`.
// Impossible transitions (e.g. a flip at noise 0, or any flip under the BEC)
// return -infinity rather than throwing.
double channel_loglik(const NoisySymbols& received, const Codeword& sent,
                      const ChannelModel& channel);

// Closed-form per-bit marginal of (sample code bit, corrupt it):
//   BSC:  P(y=1) = p - 2pε + ε
//   BEC:  (P0, P1, P?) = ((1-p)(1-ε), p(1-ε), ε)
// where p is the encoder's per-bit P(code bit = 1).
NoisyBitDistribution noisy_enc_distribution(const std::vector<double>& bit_probs,
                                            const ChannelModel& channel);

// log q(y) under a NoisyBitDistribution.
double noisy_loglik(const NoisyBitDistribution& dist, const NoisySymbols& symbols);

// One i.i.d. draw per bit from the marginal distribution.
NoisySymbols sample_symbols(const NoisyBitDistribution& dist, rng::Stream& stream);

// Real-valued view fed to the decoder network: 0 -> 0, 1 -> 1, erased -> 0.5.
std::vector<double> decoder_embedding(const NoisySymbols& symbols);
void decoder_embedding_into(const NoisySymbols& symbols, double* out);

// Binary entropy in bits, with 0·log0 := 0.
double binary_entropy(double p);

// BSC capacity 1 - H_b(noise), in bits per channel use.
double bsc_capacity(double noise);

}  // namespace necst::channel
