#include "necst/data.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include "necst/rng.hpp"

namespace necst::data {
namespace {

constexpr std::uint32_t kLabelMagic = 0x00000801;
constexpr std::uint32_t kImageMagic = 0x00000803;

std::uint32_t read_be_u32(std::istream& in, const std::string& path, const char* what) {
  unsigned char bytes[4];
  in.read(reinterpret_cast<char*>(bytes), 4);
  if (!in)
    throw std::runtime_error("load_idx: " + path + ": truncated while reading " + what);
  return (std::uint32_t(bytes[0]) << 24) | (std::uint32_t(bytes[1]) << 16) |
         (std::uint32_t(bytes[2]) << 8) | std::uint32_t(bytes[3]);
}

}  // namespace

void validate_dataset(const Dataset& dataset) {
  if (dataset.dim == 0) throw std::invalid_argument("dataset: zero dim");
  if (dataset.storage.size() % dataset.dim != 0)
    throw std::invalid_argument("dataset: storage not a multiple of dim");
  const std::size_t n = dataset.size();
  std::vector<std::uint8_t> seen(n, 0);
  auto check = [&](const std::vector<std::size_t>& idx, const char* name) {
    for (std::size_t i : idx) {
      if (i >= n) throw std::invalid_argument(std::string("dataset: ") + name + " index range");
      if (seen[i]++) throw std::invalid_argument(std::string("dataset: overlapping splits"));
    }
  };
  check(dataset.train_indices, "train");
  check(dataset.val_indices, "val");
  check(dataset.test_indices, "test");
  for (float v : dataset.storage) {
    if (dataset.kind == Kind::kBinary) {
      if (v != 0.0f && v != 1.0f) throw std::invalid_argument("dataset: non-binary entry");
    } else if (!(v >= 0.0f && v <= 1.0f)) {
      throw std::invalid_argument("dataset: real entry outside [0,1]");
    }
  }
}

void assign_splits(Dataset& dataset, std::size_t train, std::size_t val, std::size_t test) {
  if (train + val + test > dataset.size())
    throw std::invalid_argument("assign_splits: splits exceed dataset size");
  dataset.train_indices.clear();
  dataset.val_indices.clear();
  dataset.test_indices.clear();
  std::size_t next = 0;
  for (std::size_t i = 0; i < train; ++i) dataset.train_indices.push_back(next++);
  for (std::size_t i = 0; i < val; ++i) dataset.val_indices.push_back(next++);
  for (std::size_t i = 0; i < test; ++i) dataset.test_indices.push_back(next++);
}

IdxFile load_idx(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_idx: cannot open " + path);

  IdxFile file;
  file.magic = read_be_u32(in, path, "magic");
  if (file.magic != kLabelMagic && file.magic != kImageMagic)
    throw std::runtime_error("load_idx: " + path + ": bad magic 0x" + [&] {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%08x", file.magic);
      return std::string(buf);
    }());

  const std::size_t n_dims = file.magic & 0xff;  // low byte of the magic
  std::size_t total = 1;
  for (std::size_t d = 0; d < n_dims; ++d) {
    const std::uint32_t v = read_be_u32(in, path, "dimension header");
    file.dims.push_back(v);
    total *= v;
  }

  file.payload.resize(total);
  in.read(reinterpret_cast<char*>(file.payload.data()), static_cast<std::streamsize>(total));
  const std::size_t got = static_cast<std::size_t>(in.gcount());
  if (got != total)
    throw std::runtime_error("load_idx: " + path + ": truncated payload, missing " +
                             std::to_string(total - got) + " bytes");
  return file;
}

Dataset dataset_from_idx(const IdxFile& file) {
  if (file.magic != kImageMagic || file.dims.size() != 3)
    throw std::invalid_argument("dataset_from_idx: not an image IDX file");
  Dataset out;
  out.kind = Kind::kReal;
  out.dim = file.dims[1] * file.dims[2];
  out.storage.resize(file.payload.size());
  for (std::size_t i = 0; i < file.payload.size(); ++i)
    out.storage[i] = static_cast<float>(file.payload[i]) / 255.0f;
  return out;
}

Dataset binarize(const Dataset& dataset, double threshold) {
  Dataset out = dataset;
  out.kind = Kind::kBinary;
  for (float& v : out.storage) v = v >= static_cast<float>(threshold) ? 1.0f : 0.0f;
  return out;
}

Dataset gen_random_bits(std::size_t count, std::size_t length, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("gen_random_bits: p outside [0,1]");
  Dataset out;
  out.kind = Kind::kBinary;
  out.dim = length;
  out.storage.resize(count * length);
  auto stream = rng::substream(seed, {0x62697473ULL /*"bits"*/});
  for (float& v : out.storage) v = stream.bernoulli(p) ? 1.0f : 0.0f;

  // 5:1:1 split in generation order.
  const std::size_t val = count / 7;
  const std::size_t test = count / 7;
  assign_splits(out, count - val - test, val, test);
  return out;
}

void save_bit_corpus(const Dataset& dataset, const std::string& path) {
  if (dataset.kind != Kind::kBinary)
    throw std::invalid_argument("save_bit_corpus: dataset is not binary");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_bit_corpus: cannot open " + path);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const float* row = dataset.item(i);
    std::string line(dataset.dim, '0');
    for (std::size_t d = 0; d < dataset.dim; ++d)
      if (row[d] != 0.0f) line[d] = '1';
    out << line << '\n';
  }
  if (!out) throw std::runtime_error("save_bit_corpus: write failed for " + path);
}

Dataset load_mnist_dir(const std::string& dir, double threshold) {
  const auto train = dataset_from_idx(load_idx(dir + "/train-images-idx3-ubyte"));
  const auto test = dataset_from_idx(load_idx(dir + "/t10k-images-idx3-ubyte"));
  if (train.dim != test.dim)
    throw std::runtime_error("load_mnist_dir: train/test image shapes differ");

  Dataset all;
  all.kind = Kind::kReal;
  all.dim = train.dim;
  all.storage = train.storage;
  all.storage.insert(all.storage.end(), test.storage.begin(), test.storage.end());

  const std::size_t n_train_file = train.size();
  const std::size_t n_val = n_train_file / 6;  // 10K of the official 60K
  assign_splits(all, n_train_file - n_val, n_val, test.size());
  return binarize(all, threshold);
}

Dataset load_bit_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_bit_corpus: cannot open " + path);
  Dataset out;
  out.kind = Kind::kBinary;
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (out.dim == 0) out.dim = line.size();
    if (line.size() != out.dim)
      throw std::runtime_error("load_bit_corpus: ragged line " + std::to_string(rows + 1) +
                               " in " + path);
    for (char c : line) {
      if (c != '0' && c != '1')
        throw std::runtime_error("load_bit_corpus: non-bit character in " + path);
      out.storage.push_back(c == '1' ? 1.0f : 0.0f);
    }
    ++rows;
  }
  if (rows == 0) throw std::runtime_error("load_bit_corpus: empty corpus " + path);
  const std::size_t val = rows / 7;
  const std::size_t test = rows / 7;
  assign_splits(out, rows - val - test, val, test);
  return out;
}

}  // namespace necst::data
