#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace necst::data {

enum class Kind { kBinary, kReal };

// Flat item store with disjoint train/validation/test index sets. Binary
// datasets hold exact {0,1} values; real datasets hold values in [0,1].
struct Dataset {
  std::size_t dim = 0;
  Kind kind = Kind::kBinary;
  std::vector<float> storage;  // size() == item count × dim
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> val_indices;
  std::vector<std::size_t> test_indices;

  std::size_t size() const { return dim == 0 ? 0 : storage.size() / dim; }
  const float* item(std::size_t i) const { return storage.data() + i * dim; }
  void copy_item(std::size_t i, double* out) const {
    const float* src = item(i);
    for (std::size_t d = 0; d < dim; ++d) out[d] = static_cast<double>(src[d]);
  }
  std::vector<double> item_vector(std::size_t i) const {
    std::vector<double> out(dim);
    copy_item(i, out.data());
    return out;
  }
};

void validate_dataset(const Dataset& dataset);

// Assigns the first `train`, next `val`, next `test` items (in file order).
void assign_splits(Dataset& dataset, std::size_t train, std::size_t val, std::size_t test);

// Raw IDX file: big-endian header (magic, one u32 per dimension), then the
// unsigned-byte payload. Magic 0x00000801 for label files, 0x00000803 for
// image files.
struct IdxFile {
  std::uint32_t magic = 0;
  std::vector<std::size_t> dims;
  std::vector<std::uint8_t> payload;
};

IdxFile load_idx(const std::string& path);

// Flattens an image IDX file into items with pixel values scaled to [0,1].
Dataset dataset_from_idx(const IdxFile& file);

// Fixed thresholding; values >= threshold map to 1 (ties included).
Dataset binarize(const Dataset& dataset, double threshold = 0.5);

// `count` i.i.d. Bernoulli(p) bit vectors split 5:1:1 train/val/test.
Dataset gen_random_bits(std::size_t count, std::size_t length, double p, std::uint64_t seed);

// One ASCII bitstring per line.
void save_bit_corpus(const Dataset& dataset, const std::string& path);
Dataset load_bit_corpus(const std::string& path);

// Loads train-images-idx3-ubyte and t10k-images-idx3-ubyte from `dir`,
// binarizes at `threshold`, and splits 50K/10K/10K by carving validation
// from the tail of the train file in file order.
Dataset load_mnist_dir(const std::string& dir, double threshold = 0.5);

}  // namespace necst::data
