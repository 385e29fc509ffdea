#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "necst/channel.hpp"
#include "necst/data.hpp"
#include "necst/ldpc.hpp"
#include "necst/model.hpp"

namespace necst::eval {

enum class Metric { kL1, kL2 };

Metric metric_from_string(const std::string& name);
std::string metric_name(Metric metric);

// Mean per-dimension error: |x-x̂| for L1, (x-x̂)² for L2.
double distortion(std::span<const double> x, std::span<const double> x_hat, Metric metric);

struct DistortionRow {
  double noise = 0.0;
  double mean = 0.0;
  double stddev = 0.0;  // across per-item means
  std::size_t n_items = 0;
};

struct DistortionReport {
  Metric metric = Metric::kL1;
  std::size_t draws_per_item = 1;
  std::vector<DistortionRow> rows;
};

// Evaluates a trained model over the dataset's test split at each noise
// level (overriding the training-time channel noise), averaging
// `draws_per_item` channel draws per item. Deterministic given seed.
DistortionReport evaluate_distortion(const NecstModel& model, const data::Dataset& dataset,
                                     const std::vector<double>& noise_levels,
                                     std::size_t draws_per_item, std::uint64_t seed,
                                     Metric metric = Metric::kL1,
                                     std::size_t max_items = 0 /* 0 = whole split */);

// compressed_bits / bsc_capacity(noise): the bit cost of an ideal channel
// code delivering the same payload. Errors out at zero capacity.
double ideal_code_bits(double compressed_bits, double noise);

// Shortest bit-flip path from a to b, flipping differing positions in
// ascending index order. Length is Hamming(a,b) + 1.
std::vector<channel::Codeword> bit_flip_path(const channel::Codeword& a,
                                             const channel::Codeword& b);

struct ChainState {
  std::vector<double> x;
  channel::NoisySymbols code;
};

// Alternates code ~ q_noisy_enc(·|x) and x ~ p_dec(·|code), returning the
// full trajectory. With sample_x false the x-update uses the decoder mean
// (visualization only; the sampled chain is the one with the stationarity
// guarantee).
std::vector<ChainState> markov_chain_sample(const NecstModel& model, std::span<const double> x0,
                                            std::size_t steps, rng::Stream& stream,
                                            bool sample_x = true);

// Thresholded encoder probabilities for every item, row-major [items × m].
std::vector<std::uint8_t> extract_features(const NecstModel& model, const data::Dataset& dataset);

struct TimingReport {
  std::string method;
  double mean_seconds = 0.0;    // per decoded word
  double stddev_seconds = 0.0;  // across trials
  std::size_t batch_size = 0;
  std::size_t trials = 0;
  unsigned threads = 1;
};

struct DecodeBenchResult {
  TimingReport neural_batched;
  TimingReport neural_unbatched;
  TimingReport classical;  // belief propagation at fixed iteration budget
};

// Wall-clock comparison of the amortized decoder against BP at a matched
// transmitted-bit count. Single-threaded for both sides; model setup, H
// construction and RNG are excluded from the timed region; both decoders
// are warmed up first.
DecodeBenchResult bench_decode(const NecstModel& model, const ldpc::ParityCheckMatrix& h,
                               double noise, std::size_t bp_iters, std::size_t batch_size,
                               std::size_t trials, std::uint64_t seed);

// Line-oriented table and key=value serializations.
void write_distortion_table(std::ostream& out, const DistortionReport& report);
void write_distortion_kv(std::ostream& out, const DistortionReport& report);
void write_timing_kv(std::ostream& out, const DecodeBenchResult& result);

}  // namespace necst::eval
