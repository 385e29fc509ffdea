#include "necst/eval.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "necst/parallel.hpp"

namespace necst::eval {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point from) {
  return std::chrono::duration<double>(Clock::now() - from).count();
}

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;
};

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) return out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double acc = 0.0;
    for (double v : values) acc += (v - out.mean) * (v - out.mean);
    out.stddev = std::sqrt(acc / static_cast<double>(values.size() - 1));
  }
  return out;
}

}  // namespace

Metric metric_from_string(const std::string& name) {
  if (name == "l1" || name == "L1") return Metric::kL1;
  if (name == "l2" || name == "L2") return Metric::kL2;
  throw std::invalid_argument("unknown metric: " + name);
}

std::string metric_name(Metric metric) { return metric == Metric::kL1 ? "l1" : "l2"; }

double distortion(std::span<const double> x, std::span<const double> x_hat, Metric metric) {
  if (x.size() != x_hat.size()) throw std::invalid_argument("distortion: length mismatch");
  if (x.empty()) throw std::invalid_argument("distortion: empty vectors");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - x_hat[i];
    acc += metric == Metric::kL1 ? std::abs(d) : d * d;
  }
  return acc / static_cast<double>(x.size());
}

DistortionReport evaluate_distortion(const NecstModel& model, const data::Dataset& dataset,
                                     const std::vector<double>& noise_levels,
                                     std::size_t draws_per_item, std::uint64_t seed,
                                     Metric metric, std::size_t max_items) {
  if (noise_levels.empty()) throw std::invalid_argument("evaluate_distortion: empty noise list");
  if (draws_per_item == 0)
    throw std::invalid_argument("evaluate_distortion: draws_per_item must be >= 1");
  if (dataset.test_indices.empty())
    throw std::invalid_argument("evaluate_distortion: dataset has no test split");
  if (dataset.dim != model.input_dim)
    throw std::invalid_argument("evaluate_distortion: dataset dim != model input_dim");

  std::size_t count = dataset.test_indices.size();
  if (max_items > 0) count = std::min(count, max_items);

  DistortionReport report;
  report.metric = metric;
  report.draws_per_item = draws_per_item;

  for (std::size_t level = 0; level < noise_levels.size(); ++level) {
    NecstModel eval_model = model;
    eval_model.channel.noise = noise_levels[level];
    channel::validate_channel(eval_model.channel);

    std::vector<double> per_item(count, 0.0);
    parallel_for(count, [&](std::size_t begin, std::size_t end) {
      std::vector<double> x(dataset.dim);
      for (std::size_t i = begin; i < end; ++i) {
        dataset.copy_item(dataset.test_indices[i], x.data());
        double acc = 0.0;
        for (std::size_t draw = 0; draw < draws_per_item; ++draw) {
          auto stream = rng::substream(seed, {0x6576616cULL /*"eval"*/, level, i, draw});
          const auto res = transmit_reconstruct(eval_model, x, stream, true);
          acc += distortion(x, res.reconstruction, metric);
        }
        per_item[i] = acc / static_cast<double>(draws_per_item);
      }
    });

    const MeanStd stats = mean_std(per_item);
    report.rows.push_back({noise_levels[level], stats.mean, stats.stddev, count});
  }
  return report;
}

double ideal_code_bits(double compressed_bits, double noise) {
  if (compressed_bits < 0.0) throw std::invalid_argument("ideal_code_bits: negative bit count");
  const double capacity = channel::bsc_capacity(noise);
  if (capacity <= 0.0)
    throw std::domain_error("ideal_code_bits: channel capacity is zero at noise " +
                            std::to_string(noise));
  return compressed_bits / capacity;
}

std::vector<channel::Codeword> bit_flip_path(const channel::Codeword& a,
                                             const channel::Codeword& b) {
  if (a.size() != b.size()) throw std::invalid_argument("bit_flip_path: length mismatch");
  std::vector<channel::Codeword> path{a};
  channel::Codeword current = a;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (current.bits[i] != b.bits[i]) {
      current.bits[i] = b.bits[i];
      path.push_back(current);
    }
  }
  return path;
}

std::vector<ChainState> markov_chain_sample(const NecstModel& model, std::span<const double> x0,
                                            std::size_t steps, rng::Stream& stream,
                                            bool sample_x) {
  if (steps < 1) throw std::invalid_argument("markov_chain_sample: steps must be >= 1");
  if (x0.size() != model.input_dim)
    throw std::invalid_argument("markov_chain_sample: x0 dim mismatch");

  std::vector<ChainState> trajectory;
  trajectory.reserve(steps);
  std::vector<double> x(x0.begin(), x0.end());
  for (std::size_t t = 0; t < steps; ++t) {
    const auto probs = encode_probs(model, x);
    const auto dist = channel::noisy_enc_distribution(probs, model.channel);
    ChainState state;
    state.code = channel::sample_symbols(dist, stream);
    std::vector<double> readout = decode_reconstruction(model, state.code);
    if (sample_x) {
      if (model.decoder_family == DecoderFamily::kBernoulli) {
        for (double& v : readout) v = stream.bernoulli(v) ? 1.0 : 0.0;
      } else {
        const double sigma = std::sqrt(model.gaussian_variance);
        for (double& v : readout) v += sigma * stream.normal();
      }
    }
    state.x = readout;
    trajectory.push_back(state);
    x = std::move(readout);
  }
  return trajectory;
}

std::vector<std::uint8_t> extract_features(const NecstModel& model, const data::Dataset& dataset) {
  if (dataset.dim != model.input_dim)
    throw std::invalid_argument("extract_features: dataset dim != model input_dim");
  const std::size_t n = dataset.size();
  const std::size_t m = model.code_length;
  std::vector<std::uint8_t> features(n * m, 0);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    std::vector<double> x(dataset.dim);
    for (std::size_t i = begin; i < end; ++i) {
      dataset.copy_item(i, x.data());
      const auto probs = encode_probs(model, x);
      for (std::size_t j = 0; j < m; ++j) features[i * m + j] = probs[j] >= 0.5 ? 1 : 0;
    }
  });
  return features;
}

DecodeBenchResult bench_decode(const NecstModel& model, const ldpc::ParityCheckMatrix& h,
                               double noise, std::size_t bp_iters, std::size_t batch_size,
                               std::size_t trials, std::uint64_t seed) {
  if (model.code_length != h.n)
    throw std::invalid_argument("bench_decode: model code length != LDPC block length");
  if (trials < 10) throw std::invalid_argument("bench_decode: need at least 10 trials");
  if (batch_size == 0) throw std::invalid_argument("bench_decode: empty batch");

  ThreadCountGuard single_thread(1);

  // Fixed set of received words, shared by both decoders.
  const auto g = ldpc::make_generator(h);
  std::vector<channel::Codeword> received(batch_size);
  auto stream = rng::substream(seed, {0x62656e63ULL /*"benc"*/});
  const channel::ChannelModel bsc{channel::Kind::kBsc, noise};
  for (auto& word : received) {
    std::vector<std::uint8_t> message(g.k);
    for (auto& bit : message) bit = stream.bernoulli(0.5) ? 1 : 0;
    const auto sent = ldpc_encode(g, message);
    const auto symbols = channel::corrupt(sent, bsc, stream);
    word.bits = symbols.symbols;  // BSC never erases
  }

  Matrix neural_in(batch_size, h.n);
  for (std::size_t i = 0; i < batch_size; ++i) {
    channel::NoisySymbols symbols{received[i].bits};
    channel::decoder_embedding_into(symbols, neural_in.row(i));
  }

  auto time_trials = [&](auto&& body, const char* method) {
    // One untimed warm-up pass.
    body();
    std::vector<double> per_word(trials);
    for (std::size_t t = 0; t < trials; ++t) {
      const auto started = Clock::now();
      body();
      per_word[t] = seconds_since(started) / static_cast<double>(batch_size);
    }
    const MeanStd stats = mean_std(per_word);
    return TimingReport{method, stats.mean, stats.stddev, batch_size, trials, 1};
  };

  DecodeBenchResult result;
  result.neural_batched = time_trials(
      [&] {
        volatile double sink = mlp_forward(model.decoder, neural_in)(0, 0);
        (void)sink;
      },
      "neural_batched");
  result.neural_unbatched = time_trials(
      [&] {
        double acc = 0.0;
        Matrix one(1, h.n);
        for (std::size_t i = 0; i < batch_size; ++i) {
          std::copy(neural_in.row(i), neural_in.row(i) + h.n, one.row(0));
          acc += mlp_forward(model.decoder, one)(0, 0);
        }
        volatile double sink = acc;
        (void)sink;
      },
      "neural_unbatched");
  result.classical = time_trials(
      [&] {
        std::size_t acc = 0;
        for (std::size_t i = 0; i < batch_size; ++i)
          acc += ldpc::bp_decode(h, received[i], noise, bp_iters).iterations;
        volatile std::size_t sink = acc;
        (void)sink;
      },
      "ldpc_bp");
  return result;
}

void write_distortion_table(std::ostream& out, const DistortionReport& report) {
  out << "# noise  mean_distortion  stddev  n_items  metric=" << metric_name(report.metric)
      << " draws_per_item=" << report.draws_per_item << '\n';
  char line[128];
  for (const auto& row : report.rows) {
    std::snprintf(line, sizeof(line), "%-7.4f %-16.6f %-8.6f %zu\n", row.noise, row.mean,
                  row.stddev, row.n_items);
    out << line;
  }
}

void write_distortion_kv(std::ostream& out, const DistortionReport& report) {
  for (const auto& row : report.rows) {
    out << "noise=" << row.noise << " metric=" << metric_name(report.metric)
        << " value=" << row.mean << " stddev=" << row.stddev << " n=" << row.n_items
        << " draws=" << report.draws_per_item << '\n';
  }
}

void write_timing_kv(std::ostream& out, const DecodeBenchResult& result) {
  for (const TimingReport* r :
       {&result.neural_batched, &result.neural_unbatched, &result.classical}) {
    out << "method=" << r->method << " mean_seconds_per_word=" << r->mean_seconds
        << " stddev=" << r->stddev_seconds << " batch=" << r->batch_size
        << " trials=" << r->trials << " threads=" << r->threads << '\n';
  }
  out << "speedup_batched=" << result.classical.mean_seconds / result.neural_batched.mean_seconds
      << " speedup_unbatched="
      << result.classical.mean_seconds / result.neural_unbatched.mean_seconds << '\n';
}

}  // namespace necst::eval
