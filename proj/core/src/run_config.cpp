#include "necst/run_config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace necst::io {
namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::string join_issues(const std::vector<std::string>& issues) {
  std::string out = "invalid configuration:";
  for (const auto& issue : issues) out += "\n  - " + issue;
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value, std::vector<std::string>* issues) {
  std::istringstream in(value);
  T out{};
  in >> out;
  if (!in || !in.eof()) {
    if (issues) issues->push_back(key + ": cannot parse '" + value + "'");
    return T{};
  }
  return out;
}

std::vector<std::size_t> parse_size_list(const std::string& key, const std::string& value,
                                         std::vector<std::string>* issues) {
  std::vector<std::size_t> out;
  std::istringstream in(value);
  std::string part;
  while (std::getline(in, part, ',')) {
    part = trim(part);
    if (part.empty()) continue;
    out.push_back(parse_number<std::size_t>(key, part, issues));
  }
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

std::map<std::string, std::string> parse_key_value_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;

    std::string key, value;
    const auto eq = line.find('=');
    if (eq != std::string::npos) {
      key = trim(line.substr(0, eq));
      value = trim(line.substr(eq + 1));
    } else {
      const auto space = line.find_first_of(" \t");
      if (space == std::string::npos)
        throw std::runtime_error("config: " + path + ":" + std::to_string(line_no) +
                                 ": expected 'key value'");
      key = trim(line.substr(0, space));
      value = trim(line.substr(space + 1));
    }
    if (key.empty())
      throw std::runtime_error("config: " + path + ":" + std::to_string(line_no) + ": empty key");
    kv[key] = value;
  }
  return kv;
}

RunConfig RunConfig::from_map(const std::map<std::string, std::string>& kv) {
  RunConfig config;
  config.apply(kv);
  return config;
}

void RunConfig::apply(const std::map<std::string, std::string>& kv) {
  std::vector<std::string> issues;
  for (const auto& [key, value] : kv) {
    if (key == "dataset") dataset = value;
    else if (key == "n_items") n_items = parse_number<std::size_t>(key, value, &issues);
    else if (key == "input_bits") input_bits = parse_number<std::size_t>(key, value, &issues);
    else if (key == "bern_p") bern_p = parse_number<double>(key, value, &issues);
    else if (key == "binarize_threshold")
      binarize_threshold = parse_number<double>(key, value, &issues);
    else if (key == "max_train_items")
      max_train_items = parse_number<std::size_t>(key, value, &issues);
    else if (key == "n_bits") n_bits = parse_number<std::size_t>(key, value, &issues);
    else if (key == "channel") channel = value;
    else if (key == "noise") noise = parse_number<double>(key, value, &issues);
    else if (key == "decoder") decoder = value;
    else if (key == "gaussian_variance")
      gaussian_variance = parse_number<double>(key, value, &issues);
    else if (key == "encoder_hidden") encoder_hidden = parse_size_list(key, value, &issues);
    else if (key == "decoder_hidden") decoder_hidden = parse_size_list(key, value, &issues);
    else if (key == "n_epochs") n_epochs = parse_number<std::size_t>(key, value, &issues);
    else if (key == "batch_size") batch_size = parse_number<std::size_t>(key, value, &issues);
    else if (key == "lr") lr = parse_number<double>(key, value, &issues);
    else if (key == "l2_enc") l2_enc = parse_number<double>(key, value, &issues);
    else if (key == "k_samples") k_samples = parse_number<std::size_t>(key, value, &issues);
    else if (key == "eval_every") eval_every = parse_number<std::size_t>(key, value, &issues);
    else if (key == "seed") seed = parse_number<std::uint64_t>(key, value, &issues);
    else if (key == "threads") threads = parse_number<unsigned>(key, value, &issues);
    else if (key == "out_checkpoint") out_checkpoint = value;
    else if (key == "out_report") out_report = value;
    else issues.push_back(key + ": unknown key");
  }
  if (!issues.empty()) throw ConfigError(std::move(issues));
}

void RunConfig::validate() const {
  std::vector<std::string> issues;
  if (dataset.empty()) {
    issues.push_back(
        "dataset: missing (use 'random_bits', 'corpus:<path>', 'idx:<path>' or 'mnist:<dir>')");
  } else if (dataset != "random_bits") {
    const auto colon = dataset.find(':');
    const std::string scheme = dataset.substr(0, colon);
    if (colon == std::string::npos || (scheme != "corpus" && scheme != "idx" && scheme != "mnist")) {
      issues.push_back("dataset: unknown spec '" + dataset + "'");
    } else {
      const std::string path = dataset.substr(colon + 1);
      if (path.empty() || !std::filesystem::exists(path)) {
        issues.push_back("dataset: path does not exist: '" + path + "'");
      } else if (scheme == "mnist") {
        for (const char* name : {"train-images-idx3-ubyte", "t10k-images-idx3-ubyte"}) {
          if (!std::filesystem::exists(std::filesystem::path(path) / name))
            issues.push_back("dataset: missing " + std::string(name) + " under '" + path + "'");
        }
      }
    }
  }
  if (n_bits == 0) issues.push_back("n_bits: must be >= 1");
  if (dataset == "random_bits") {
    if (n_items < 7) issues.push_back("n_items: must be >= 7 for a 5:1:1 split");
    if (input_bits == 0) issues.push_back("input_bits: must be >= 1");
    if (!(bern_p >= 0.0 && bern_p <= 1.0)) issues.push_back("bern_p: must lie in [0,1]");
  }
  if (channel != "bsc" && channel != "bec") issues.push_back("channel: must be 'bsc' or 'bec'");
  if (!(noise >= 0.0 && noise <= 1.0)) issues.push_back("noise: must lie in [0,1]");
  if (decoder != "bernoulli" && decoder != "gaussian")
    issues.push_back("decoder: must be 'bernoulli' or 'gaussian'");
  if (decoder == "gaussian" && !(gaussian_variance > 0.0))
    issues.push_back("gaussian_variance: must be > 0");
  if (n_epochs == 0) issues.push_back("n_epochs: must be >= 1");
  if (batch_size == 0) issues.push_back("batch_size: must be >= 1");
  if (!(lr > 0.0)) issues.push_back("lr: must be > 0");
  if (l2_enc < 0.0) issues.push_back("l2_enc: must be >= 0");
  if (k_samples < 2) issues.push_back("k_samples: must be >= 2");
  if (eval_every == 0) issues.push_back("eval_every: must be >= 1");
  for (auto [name, dims] : {std::pair<const char*, const std::vector<std::size_t>*>{
                                "encoder_hidden", &encoder_hidden},
                            {"decoder_hidden", &decoder_hidden}}) {
    for (std::size_t d : *dims)
      if (d == 0) issues.push_back(std::string(name) + ": zero-size layer");
  }
  if (!issues.empty()) throw ConfigError(std::move(issues));
}

channel::ChannelModel RunConfig::channel_model() const {
  return {channel == "bsc" ? channel::Kind::kBsc : channel::Kind::kBec, noise};
}

DecoderFamily RunConfig::decoder_family() const {
  return decoder == "bernoulli" ? DecoderFamily::kBernoulli : DecoderFamily::kGaussian;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig config;
  config.sample_count = k_samples;
  config.epochs = n_epochs;
  config.batch_size = batch_size;
  config.lr = lr;
  config.l2_encoder = l2_enc;
  config.seed = seed;
  config.eval_every = eval_every;
  return config;
}

data::Dataset RunConfig::load_dataset() const {
  data::Dataset ds;
  if (dataset == "random_bits") {
    ds = data::gen_random_bits(n_items, input_bits, bern_p, seed);
  } else if (dataset.rfind("corpus:", 0) == 0) {
    ds = data::load_bit_corpus(dataset.substr(7));
  } else if (dataset.rfind("idx:", 0) == 0) {
    const auto idx = data::load_idx(dataset.substr(4));
    ds = data::binarize(data::dataset_from_idx(idx), binarize_threshold);
    // 5:1:1 carve in file order when no explicit split is known.
    const std::size_t n = ds.size();
    const std::size_t val = n / 7;
    const std::size_t test = n / 7;
    data::assign_splits(ds, n - val - test, val, test);
  } else if (dataset.rfind("mnist:", 0) == 0) {
    ds = data::load_mnist_dir(dataset.substr(6), binarize_threshold);
  } else {
    throw std::runtime_error("load_dataset: unknown dataset spec '" + dataset + "'");
  }
  if (max_train_items > 0 && ds.train_indices.size() > max_train_items)
    ds.train_indices.resize(max_train_items);
  return ds;
}

}  // namespace necst::io
