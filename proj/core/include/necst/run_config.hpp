#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "necst/data.hpp"
#include "necst/model.hpp"

namespace necst::io {

// Flat key-value config file: one "key value" (or "key = value") pair per
// line, '#' comments. Command-line overrides are applied on top by the CLI.
std::map<std::string, std::string> parse_key_value_file(const std::string& path);

// Thrown by RunConfig::validate with one line per offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

// Everything cmd_train needs: n_bits, n_epochs, batch_size, lr, l2_enc,
// noise, plus dataset/model/output settings.
struct RunConfig {
  // dataset
  std::string dataset;  // "random_bits", "corpus:<path>", or "idx:<path>"
  std::size_t n_items = 7000;      // random_bits item count (5:1:1 split)
  std::size_t input_bits = 100;    // random_bits item length
  double bern_p = 0.5;             // random_bits bit probability
  double binarize_threshold = 0.5; // idx pipelines
  std::size_t max_train_items = 0; // 0 = whole split

  // model
  std::size_t n_bits = 100;  // code length m
  std::string channel = "bsc";
  double noise = 0.0;
  std::string decoder = "bernoulli";
  double gaussian_variance = 1.0;
  std::vector<std::size_t> encoder_hidden{500};
  std::vector<std::size_t> decoder_hidden{500, 500};

  // training
  std::size_t n_epochs = 200;
  std::size_t batch_size = 100;
  double lr = 1e-3;
  double l2_enc = 1e-3;
  std::size_t k_samples = 5;
  std::size_t eval_every = 1;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0 = hardware default

  // outputs
  std::string out_checkpoint;
  std::string out_report;

  static RunConfig from_map(const std::map<std::string, std::string>& kv);
  void apply(const std::map<std::string, std::string>& kv);

  // Throws ConfigError naming every invalid field; never partially applies.
  void validate() const;

  channel::ChannelModel channel_model() const;
  DecoderFamily decoder_family() const;
  TrainConfig train_config() const;

  // Loads or synthesizes the configured dataset.
  data::Dataset load_dataset() const;
};

}  // namespace necst::io
