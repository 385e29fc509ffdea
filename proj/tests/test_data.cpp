#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "necst/data.hpp"
#include "necst/rng.hpp"

using namespace necst;

namespace {

// Minimal big-endian IDX writer for fixture files.
void write_be(std::ofstream& out, std::uint32_t v) {
  const unsigned char bytes[4] = {static_cast<unsigned char>(v >> 24),
                                  static_cast<unsigned char>(v >> 16),
                                  static_cast<unsigned char>(v >> 8),
                                  static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

std::string fixture_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "necst_data_tests";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

std::string write_idx_images(const std::string& name, std::uint32_t count, std::uint32_t rows,
                             std::uint32_t cols, bool truncate = false) {
  const std::string path = fixture_path(name);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  write_be(out, 0x00000803);
  write_be(out, count);
  write_be(out, rows);
  write_be(out, cols);
  std::size_t total = std::size_t(count) * rows * cols;
  if (truncate) total -= 7;
  for (std::size_t i = 0; i < total; ++i) {
    const unsigned char v = static_cast<unsigned char>((i * 37) % 256);
    out.write(reinterpret_cast<const char*>(&v), 1);
  }
  return path;
}

}  // namespace

TEST_SUITE_BEGIN("data");

TEST_CASE("idx: header and payload round trip with [0,1] scaling") {
  const auto path = write_idx_images("ok-images", 4, 5, 6);
  const auto file = data::load_idx(path);
  CHECK(file.magic == 0x00000803);
  REQUIRE(file.dims == std::vector<std::size_t>{4, 5, 6});
  CHECK(file.payload.size() == 4 * 5 * 6);
  CHECK(file.payload[1] == 37);

  const auto ds = data::dataset_from_idx(file);
  CHECK(ds.dim == 30);
  CHECK(ds.size() == 4);
  CHECK(ds.kind == data::Kind::kReal);
  for (float v : ds.storage) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }
  CHECK(ds.storage[1] == doctest::Approx(37.0f / 255.0f));

  // Loading is bit-reproducible.
  const auto again = data::load_idx(path);
  CHECK(again.payload == file.payload);
}

TEST_CASE("idx: bad magic and truncation are structured errors") {
  const std::string bad_path = fixture_path("bad-magic");
  {
    std::ofstream out(bad_path, std::ios::binary | std::ios::trunc);
    write_be(out, 0xdeadbeef);
  }
  CHECK_THROWS_WITH_AS(data::load_idx(bad_path), doctest::Contains("bad magic"),
                       std::runtime_error);

  const auto truncated = write_idx_images("truncated", 3, 4, 4, /*truncate=*/true);
  CHECK_THROWS_WITH_AS(data::load_idx(truncated), doctest::Contains("missing 7 bytes"),
                       std::runtime_error);

  CHECK_THROWS(data::load_idx(fixture_path("does-not-exist")));
}

TEST_CASE("binarize: thresholding, tie rule, idempotence") {
  data::Dataset ds;
  ds.kind = data::Kind::kReal;
  ds.dim = 4;
  ds.storage = {0.6f, 0.6f, 0.6f, 0.6f, 0.2f, 0.5f, 0.49f, 1.0f};

  const auto bin = data::binarize(ds, 0.5);
  CHECK(bin.kind == data::Kind::kBinary);
  CHECK(bin.storage == std::vector<float>{1, 1, 1, 1, 0, 1 /* tie -> 1 */, 0, 1});

  const auto twice = data::binarize(bin, 0.5);
  CHECK(twice.storage == bin.storage);
}

TEST_CASE("gen_random_bits: degenerate p, determinism, split sizes") {
  const auto zeros = data::gen_random_bits(70, 8, 0.0, 1);
  for (float v : zeros.storage) CHECK(v == 0.0f);

  const auto a = data::gen_random_bits(700, 20, 0.5, 9);
  const auto b = data::gen_random_bits(700, 20, 0.5, 9);
  CHECK(a.storage == b.storage);

  CHECK(a.train_indices.size() == 500);
  CHECK(a.val_indices.size() == 100);
  CHECK(a.test_indices.size() == 100);
  CHECK_NOTHROW(data::validate_dataset(a));
}

TEST_CASE("gen_random_bits: global mean near p") {
  const auto ds = data::gen_random_bits(5000, 100, 0.5, 3);
  double mean = 0.0;
  for (float v : ds.storage) mean += v;
  mean /= static_cast<double>(ds.storage.size());
  CHECK(mean > 0.495);
  CHECK(mean < 0.505);
}

TEST_CASE("dataset validation catches overlaps and bad values") {
  auto ds = data::gen_random_bits(70, 4, 0.5, 4);
  ds.val_indices[0] = ds.train_indices[0];
  CHECK_THROWS(data::validate_dataset(ds));

  auto ds2 = data::gen_random_bits(70, 4, 0.5, 4);
  ds2.storage[0] = 0.5f;  // not binary
  CHECK_THROWS(data::validate_dataset(ds2));
}

TEST_CASE("bit corpus round trips through the ASCII format") {
  const auto ds = data::gen_random_bits(140, 33, 0.4, 5);
  const auto path = fixture_path("corpus.txt");
  data::save_bit_corpus(ds, path);

  const auto back = data::load_bit_corpus(path);
  CHECK(back.dim == ds.dim);
  CHECK(back.storage == ds.storage);
  CHECK(back.train_indices.size() == 100);
  CHECK(back.val_indices.size() == 20);
  CHECK(back.test_indices.size() == 20);

  std::ofstream ragged(fixture_path("ragged.txt"), std::ios::trunc);
  ragged << "0101\n011\n";
  ragged.close();
  CHECK_THROWS(data::load_bit_corpus(fixture_path("ragged.txt")));
}

TEST_CASE("mnist loader reports missing files") {
  CHECK_THROWS(data::load_mnist_dir(fixture_path("no-such-dir")));
}

TEST_SUITE_END();
