// Command-line front end: train/evaluate NECST models, run the classical
// LDPC pipeline, and drive the post-training analyses.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "necst/checkpoint.hpp"
#include "necst/data.hpp"
#include "necst/eval.hpp"
#include "necst/ldpc.hpp"
#include "necst/model.hpp"
#include "necst/parallel.hpp"
#include "necst/run_config.hpp"

namespace {

using namespace necst;

constexpr int kExitUsage = 2;

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp);
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::vector<double> parse_noise_list(const std::string& csv) {
  std::vector<double> out;
  std::istringstream in(csv);
  std::string part;
  while (std::getline(in, part, ',')) {
    if (part.empty()) continue;
    out.push_back(std::stod(part));
  }
  return out;
}

std::vector<channel::Codeword> read_bit_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<channel::Codeword> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    channel::Codeword word;
    for (char c : line) {
      if (c != '0' && c != '1')
        throw std::runtime_error(path + ": non-bit character '" + std::string(1, c) + "'");
      word.bits.push_back(c == '1');
    }
    out.push_back(std::move(word));
  }
  if (out.empty()) throw std::runtime_error(path + ": no bit lines");
  return out;
}

std::string bit_lines(const std::vector<channel::Codeword>& words) {
  std::string out;
  for (const auto& word : words) {
    for (auto b : word.bits) out.push_back(b ? '1' : '0');
    out.push_back('\n');
  }
  return out;
}

std::string format_row(const std::vector<double>& values) {
  std::string line;
  char buf[32];
  for (double v : values) {
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    if (!line.empty()) line.push_back(' ');
    line += buf;
  }
  return line;
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
  std::string config_path;
  std::map<std::string, std::string> overrides;
};

int cmd_train(const TrainArgs& args) {
  std::map<std::string, std::string> kv;
  if (!args.config_path.empty()) kv = io::parse_key_value_file(args.config_path);
  for (const auto& [k, v] : args.overrides) kv[k] = v;  // flag wins over file

  io::RunConfig config = io::RunConfig::from_map(kv);
  try {
    config.validate();
  } catch (const io::ConfigError& err) {
    std::cerr << err.what() << "\n";
    return kExitUsage;
  }
  if (config.threads > 0) set_thread_count(config.threads);

  const std::string ckpt_path =
      config.out_checkpoint.empty() ? "necst.ckpt" : config.out_checkpoint;
  const std::string report_path =
      config.out_report.empty() ? "train_report.txt" : config.out_report;

  auto dataset = config.load_dataset();
  auto model = make_model(dataset.dim, config.n_bits, config.channel_model(),
                          config.decoder_family(), config.encoder_hidden, config.decoder_hidden,
                          config.seed, config.gaussian_variance);
  const TrainConfig tc = config.train_config();

  std::cout << "training: " << dataset.train_indices.size() << " items, dim " << dataset.dim
            << ", code bits " << config.n_bits << ", noise " << config.noise << ", epochs "
            << tc.epochs << ", threads " << thread_count() << "\n";
  const TrainReport report = train(model, dataset, tc);

  io::Checkpoint ckpt;
  ckpt.model = model;
  ckpt.config_echo = tc;
  ckpt.seed_lineage = config.seed;
  io::save_checkpoint(ckpt, ckpt_path);

  std::ostringstream text;
  text << "# epoch objective val_distortion seconds  (threads=" << thread_count() << ")\n";
  char buf[160];
  for (std::size_t e = 0; e < report.objective.size(); ++e) {
    std::snprintf(buf, sizeof(buf), "%zu %.10f %.6f %.3f\n", e, report.objective[e],
                  report.val_distortion[e], report.epoch_seconds[e]);
    text << buf;
  }
  write_text_atomic(report_path, text.str());

  std::cout << "final objective " << report.objective.back() << ", val distortion "
            << report.val_distortion.back() << "\n"
            << "wrote " << ckpt_path << " and " << report_path << "\n";
  return 0;
}

// ---- evaluate ---------------------------------------------------------------

int cmd_evaluate(const std::string& ckpt_path, const std::string& dataset_spec,
                 const std::string& noise_csv, std::size_t draws, const std::string& metric_name,
                 std::size_t max_items, std::uint64_t seed, const std::string& out_path) {
  const auto noise_levels = parse_noise_list(noise_csv);
  if (noise_levels.empty()) {
    std::cerr << "evaluate: empty noise list\n";
    return kExitUsage;
  }
  for (double noise : noise_levels)
    if (!(noise >= 0.0 && noise <= 1.0)) {
      std::cerr << "evaluate: noise " << noise << " outside [0,1]\n";
      return kExitUsage;
    }

  const auto ckpt = io::load_checkpoint(ckpt_path);
  io::RunConfig ds_config;
  ds_config.dataset = dataset_spec;
  ds_config.seed = seed;
  ds_config.input_bits = ckpt.model.input_dim;
  try {
    ds_config.validate();
  } catch (const io::ConfigError& err) {
    std::cerr << err.what() << "\n";
    return kExitUsage;
  }
  const auto dataset = ds_config.load_dataset();
  const auto metric = eval::metric_from_string(metric_name);

  const auto report =
      eval::evaluate_distortion(ckpt.model, dataset, noise_levels, draws, seed, metric, max_items);

  std::ostringstream table, kv;
  eval::write_distortion_table(table, report);
  eval::write_distortion_kv(kv, report);
  write_text_atomic(out_path, table.str());
  write_text_atomic(out_path + ".kv", kv.str());
  std::cout << table.str() << "wrote " << out_path << " and " << out_path << ".kv\n";
  return 0;
}

// ---- ldpc pipeline ----------------------------------------------------------

int cmd_ldpc_make(std::size_t n, std::size_t checks, std::uint64_t seed,
                  const std::string& out_path) {
  const auto h = ldpc::make_parity_check(n, checks, seed);
  std::ostringstream text;
  ldpc::export_parity_check(h, text);
  write_text_atomic(out_path, text.str());
  std::cout << "wrote " << out_path << " (" << h.nnz() << " nonzeros)\n";
  return 0;
}

int cmd_ldpc_encode(const std::string& h_path, const std::string& in_path,
                    const std::string& out_path) {
  const auto h = ldpc::import_parity_check(h_path);
  const auto g = ldpc::make_generator(h);
  const auto messages = read_bit_lines(in_path);
  std::vector<channel::Codeword> codes;
  for (const auto& msg : messages) codes.push_back(ldpc::ldpc_encode(g, msg.bits));
  write_text_atomic(out_path, bit_lines(codes));
  std::cout << "encoded " << codes.size() << " messages (k=" << g.k << ", n=" << g.n << ")\n";
  return 0;
}

int cmd_ldpc_transmit(const std::string& in_path, double noise, std::uint64_t seed,
                      const std::string& out_path) {
  const auto codes = read_bit_lines(in_path);
  auto stream = rng::substream(seed, {0x74786d74ULL});
  const channel::ChannelModel bsc{channel::Kind::kBsc, noise};
  std::vector<channel::Codeword> received;
  for (const auto& code : codes) {
    const auto symbols = channel::corrupt(code, bsc, stream);
    received.push_back(channel::Codeword{symbols.symbols});
  }
  write_text_atomic(out_path, bit_lines(received));
  std::cout << "transmitted " << codes.size() << " words through BSC(" << noise << ")\n";
  return 0;
}

int cmd_ldpc_decode(const std::string& h_path, const std::string& in_path, double noise,
                    std::size_t iters, const std::string& out_path,
                    const std::string& truth_path) {
  const auto h = ldpc::import_parity_check(h_path);
  const auto received = read_bit_lines(in_path);
  std::vector<channel::Codeword> decoded;
  std::size_t converged = 0, iterations = 0;
  for (const auto& word : received) {
    const auto result = ldpc::bp_decode(h, word, noise, iters);
    converged += result.converged;
    iterations += result.iterations;
    decoded.push_back(channel::Codeword{result.decoded});
  }
  write_text_atomic(out_path, bit_lines(decoded));
  std::cout << "decoded " << decoded.size() << " words: " << converged << " converged, "
            << static_cast<double>(iterations) / decoded.size() << " mean iterations\n";

  if (!truth_path.empty()) {
    const auto truth = read_bit_lines(truth_path);
    if (truth.size() != decoded.size())
      throw std::runtime_error("truth file has a different number of words");
    std::size_t errors = 0, total = 0;
    for (std::size_t i = 0; i < decoded.size(); ++i) {
      for (std::size_t b = 0; b < decoded[i].size(); ++b)
        errors += decoded[i].bits[b] != truth[i].bits[b];
      total += decoded[i].size();
    }
    std::cout << "bit error rate vs truth: " << static_cast<double>(errors) / total << "\n";
  }
  return 0;
}

// ---- post-training analyses --------------------------------------------------

int cmd_sample(const std::string& ckpt_path, const std::string& dataset_spec, std::size_t index,
               std::size_t steps, bool mean_trajectory, std::uint64_t seed,
               const std::string& out_path) {
  const auto ckpt = io::load_checkpoint(ckpt_path);
  std::vector<double> x0(ckpt.model.input_dim, 0.0);
  if (!dataset_spec.empty()) {
    io::RunConfig ds_config;
    ds_config.dataset = dataset_spec;
    ds_config.seed = seed;
    ds_config.input_bits = ckpt.model.input_dim;
    ds_config.validate();
    const auto dataset = ds_config.load_dataset();
    if (index >= dataset.size()) throw std::runtime_error("sample: --index out of range");
    dataset.copy_item(index, x0.data());
  } else {
    auto stream = rng::substream(seed, {0x78307830ULL});
    for (double& v : x0) v = stream.bernoulli(0.5) ? 1.0 : 0.0;
  }

  auto stream = rng::substream(seed, {0x636861696eULL});
  const auto chain =
      eval::markov_chain_sample(ckpt.model, x0, steps, stream, !mean_trajectory);

  std::ostringstream text;
  text << "# markov chain states, one x per line (" << steps << " steps"
       << (mean_trajectory ? ", mean trajectory" : "") << ")\n";
  for (const auto& state : chain) text << format_row(state.x) << "\n";
  write_text_atomic(out_path, text.str());
  std::cout << "wrote " << steps << " chain states to " << out_path << "\n";
  return 0;
}

int cmd_interpolate(const std::string& ckpt_path, const std::string& dataset_spec,
                    std::size_t from_index, std::size_t to_index, std::uint64_t seed,
                    const std::string& out_path) {
  const auto ckpt = io::load_checkpoint(ckpt_path);
  io::RunConfig ds_config;
  ds_config.dataset = dataset_spec;
  ds_config.seed = seed;
  ds_config.input_bits = ckpt.model.input_dim;
  ds_config.validate();
  const auto dataset = ds_config.load_dataset();
  if (from_index >= dataset.size() || to_index >= dataset.size())
    throw std::runtime_error("interpolate: index out of range");

  auto code_of = [&](std::size_t idx) {
    std::vector<double> x(dataset.dim);
    dataset.copy_item(idx, x.data());
    const auto probs = encode_probs(ckpt.model, x);
    channel::Codeword code;
    for (double p : probs) code.bits.push_back(p >= 0.5 ? 1 : 0);
    return code;
  };
  const auto path = eval::bit_flip_path(code_of(from_index), code_of(to_index));

  std::ostringstream text;
  text << "# " << path.size() << " frames, one reconstruction per line\n";
  for (const auto& code : path) {
    const auto recon = decode_reconstruction(ckpt.model, channel::NoisySymbols{code.bits});
    text << format_row(recon) << "\n";
  }
  write_text_atomic(out_path, text.str());
  std::cout << "wrote " << path.size() << " interpolation frames to " << out_path << "\n";
  return 0;
}

int cmd_features(const std::string& ckpt_path, const std::string& dataset_spec,
                 std::uint64_t seed, const std::string& out_path) {
  const auto ckpt = io::load_checkpoint(ckpt_path);
  io::RunConfig ds_config;
  ds_config.dataset = dataset_spec;
  ds_config.seed = seed;
  ds_config.input_bits = ckpt.model.input_dim;
  ds_config.validate();
  const auto dataset = ds_config.load_dataset();

  const auto features = eval::extract_features(ckpt.model, dataset);
  const std::size_t m = ckpt.model.code_length;
  std::string text;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (std::size_t j = 0; j < m; ++j) text.push_back(features[i * m + j] ? '1' : '0');
    text.push_back('\n');
  }
  write_text_atomic(out_path, text);
  std::cout << "wrote " << dataset.size() << " feature rows to " << out_path << "\n";
  return 0;
}

int cmd_bench(std::size_t bits, std::size_t checks, std::size_t out_dim, double noise,
              std::size_t iters, std::size_t batch, std::size_t trials, std::uint64_t seed,
              const std::string& out_path) {
  const auto h = ldpc::make_parity_check(bits, checks, seed);
  const auto model = make_model(out_dim, bits, {channel::Kind::kBsc, noise},
                                DecoderFamily::kBernoulli, {500}, {500, 500}, seed);
  const auto result = eval::bench_decode(model, h, noise, iters, batch, trials, seed);

  std::ostringstream kv;
  eval::write_timing_kv(kv, result);
  if (!out_path.empty()) write_text_atomic(out_path, kv.str());
  std::cout << kv.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"learned joint source-channel coding over discrete noisy channels"};
  app.require_subcommand(1);

  // train
  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "train an encoder/decoder pair");
  train_cmd->add_option("--config", train_args.config_path, "key-value config file");
  const std::vector<std::string> override_keys = {
      "dataset",       "n_items",   "input_bits", "bern_p",     "binarize_threshold",
      "max_train_items", "n_bits",  "channel",    "noise",      "decoder",
      "gaussian_variance", "encoder_hidden", "decoder_hidden",  "n_epochs", "batch_size",
      "lr",            "l2_enc",    "k_samples",  "eval_every", "seed",
      "threads",       "out_checkpoint", "out_report"};
  auto override_values = std::make_shared<std::map<std::string, std::string>>();
  for (const auto& key : override_keys) {
    train_cmd->add_option_function<std::string>(
        "--" + key, [override_values, key](const std::string& v) { (*override_values)[key] = v; },
        "override config key '" + key + "'");
  }

  // evaluate
  std::string eval_ckpt, eval_dataset = "random_bits", eval_noise, eval_metric = "l1";
  std::string eval_out = "distortion_report.txt";
  std::size_t eval_draws = 10, eval_max_items = 0;
  std::uint64_t eval_seed = 0;
  auto* eval_cmd = app.add_subcommand("evaluate", "distortion vs noise for a trained model");
  eval_cmd->add_option("--checkpoint", eval_ckpt)->required();
  eval_cmd->add_option("--dataset", eval_dataset, "dataset spec (default random_bits)");
  eval_cmd->add_option("--noise", eval_noise, "comma-separated noise levels")->required();
  eval_cmd->add_option("--draws", eval_draws, "channel draws per item (default 10)");
  eval_cmd->add_option("--metric", eval_metric, "l1 or l2");
  eval_cmd->add_option("--max-items", eval_max_items, "cap on test items (0 = all)");
  eval_cmd->add_option("--seed", eval_seed);
  eval_cmd->add_option("--out", eval_out);

  // ldpc
  auto* ldpc_cmd = app.add_subcommand("ldpc", "classical LDPC pipeline");
  ldpc_cmd->require_subcommand(1);
  std::size_t ldpc_n = 200, ldpc_checks = 100, ldpc_iters = 50;
  double ldpc_noise = 0.1;
  std::uint64_t ldpc_seed = 0;
  std::string ldpc_h = "H.txt", ldpc_in, ldpc_out, ldpc_truth;

  auto* make_cmd = ldpc_cmd->add_subcommand("make", "construct a parity-check matrix");
  make_cmd->add_option("--n", ldpc_n, "codeword length");
  make_cmd->add_option("--checks", ldpc_checks, "number of parity checks");
  make_cmd->add_option("--seed", ldpc_seed);
  make_cmd->add_option("--out", ldpc_h, "output coordinate-list file");

  auto* encode_cmd = ldpc_cmd->add_subcommand("encode", "encode message bit lines");
  encode_cmd->add_option("--pchk", ldpc_h)->required();
  encode_cmd->add_option("--in", ldpc_in)->required();
  encode_cmd->add_option("--out", ldpc_out)->required();

  auto* transmit_cmd = ldpc_cmd->add_subcommand("transmit", "corrupt codewords through a BSC");
  transmit_cmd->add_option("--in", ldpc_in)->required();
  transmit_cmd->add_option("--noise", ldpc_noise)->required();
  transmit_cmd->add_option("--seed", ldpc_seed);
  transmit_cmd->add_option("--out", ldpc_out)->required();

  auto* decode_cmd = ldpc_cmd->add_subcommand("decode", "sum-product decode received words");
  decode_cmd->add_option("--pchk", ldpc_h)->required();
  decode_cmd->add_option("--in", ldpc_in)->required();
  decode_cmd->add_option("--noise", ldpc_noise)->required();
  decode_cmd->add_option("--iters", ldpc_iters, "BP iteration budget (default 50)");
  decode_cmd->add_option("--out", ldpc_out)->required();
  decode_cmd->add_option("--truth", ldpc_truth, "original codewords for a BER report");

  // sample / interpolate / features / bench
  std::string post_ckpt, post_dataset, post_out;
  std::size_t post_steps = 100, post_index = 0, post_to_index = 0;
  bool post_mean = false;
  std::uint64_t post_seed = 0;

  auto* sample_cmd = app.add_subcommand("sample", "run the generative Markov chain");
  sample_cmd->add_option("--checkpoint", post_ckpt)->required();
  sample_cmd->add_option("--dataset", post_dataset, "initialize from --index of this dataset");
  sample_cmd->add_option("--index", post_index);
  sample_cmd->add_option("--steps", post_steps);
  sample_cmd->add_flag("--mean-trajectory", post_mean,
                       "decode to the mean instead of sampling x");
  sample_cmd->add_option("--seed", post_seed);
  sample_cmd->add_option("--out", post_out)->required();

  auto* interp_cmd = app.add_subcommand("interpolate", "bit-flip path between two codes");
  interp_cmd->add_option("--checkpoint", post_ckpt)->required();
  interp_cmd->add_option("--dataset", post_dataset)->required();
  interp_cmd->add_option("--from-index", post_index)->required();
  interp_cmd->add_option("--to-index", post_to_index)->required();
  interp_cmd->add_option("--seed", post_seed);
  interp_cmd->add_option("--out", post_out)->required();

  auto* features_cmd = app.add_subcommand("features", "binary features for every item");
  features_cmd->add_option("--checkpoint", post_ckpt)->required();
  features_cmd->add_option("--dataset", post_dataset)->required();
  features_cmd->add_option("--seed", post_seed);
  features_cmd->add_option("--out", post_out)->required();

  std::size_t bench_bits = 200, bench_checks = 100, bench_out_dim = 784, bench_iters = 50;
  std::size_t bench_batch = 100, bench_trials = 10;
  double bench_noise = 0.1;
  std::uint64_t bench_seed = 0;
  std::string bench_out;
  auto* bench_cmd = app.add_subcommand("bench", "decode-time comparison vs 50-iteration BP");
  bench_cmd->add_option("--bits", bench_bits, "transmitted bits (default 200)");
  bench_cmd->add_option("--checks", bench_checks);
  bench_cmd->add_option("--out-dim", bench_out_dim, "decoder output dimension (default 784)");
  bench_cmd->add_option("--noise", bench_noise);
  bench_cmd->add_option("--iters", bench_iters);
  bench_cmd->add_option("--batch", bench_batch);
  bench_cmd->add_option("--trials", bench_trials);
  bench_cmd->add_option("--seed", bench_seed);
  bench_cmd->add_option("--out", bench_out);

  unsigned threads = 0;
  app.add_option("--threads", threads, "worker threads (0 = hardware default)");

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) set_thread_count(threads);

  try {
    if (*train_cmd) {
      train_args.overrides = *override_values;
      return cmd_train(train_args);
    }
    if (*eval_cmd)
      return cmd_evaluate(eval_ckpt, eval_dataset, eval_noise, eval_draws, eval_metric,
                          eval_max_items, eval_seed, eval_out);
    if (*make_cmd) return cmd_ldpc_make(ldpc_n, ldpc_checks, ldpc_seed, ldpc_h);
    if (*encode_cmd) return cmd_ldpc_encode(ldpc_h, ldpc_in, ldpc_out);
    if (*transmit_cmd) return cmd_ldpc_transmit(ldpc_in, ldpc_noise, ldpc_seed, ldpc_out);
    if (*decode_cmd)
      return cmd_ldpc_decode(ldpc_h, ldpc_in, ldpc_noise, ldpc_iters, ldpc_out, ldpc_truth);
    if (*sample_cmd)
      return cmd_sample(post_ckpt, post_dataset, post_index, post_steps, post_mean, post_seed,
                        post_out);
    if (*interp_cmd)
      return cmd_interpolate(post_ckpt, post_dataset, post_index, post_to_index, post_seed,
                             post_out);
    if (*features_cmd) return cmd_features(post_ckpt, post_dataset, post_seed, post_out);
    if (*bench_cmd)
      return cmd_bench(bench_bits, bench_checks, bench_out_dim, bench_noise, bench_iters,
                       bench_batch, bench_trials, bench_seed, bench_out);
  } catch (const io::ConfigError& err) {
    std::cerr << err.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return kExitUsage;
}
