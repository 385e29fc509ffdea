#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "necst/eval.hpp"
#include "necst/rng.hpp"

using namespace necst;
using channel::Codeword;

namespace {

Codeword bits(std::initializer_list<int> values) {
  Codeword code;
  for (int v : values) code.bits.push_back(static_cast<std::uint8_t>(v));
  return code;
}

std::size_t hamming(const Codeword& a, const Codeword& b) {
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a.bits[i] != b.bits[i];
  return d;
}

// A small model trained on a Bernoulli(0.5) corpus; shared across the cases
// that need non-trivial weights.
struct TrainedFixture {
  NecstModel model;
  data::Dataset dataset;
};

const TrainedFixture& trained_bits_model() {
  static const TrainedFixture fixture = [] {
    TrainedFixture f{make_model(16, 8, {channel::Kind::kBsc, 0.1}, DecoderFamily::kBernoulli,
                                {24}, {24}, 12345),
                     data::gen_random_bits(700, 16, 0.5, 7)};
    TrainConfig cfg;
    cfg.sample_count = 5;
    cfg.epochs = 12;
    cfg.batch_size = 25;
    cfg.seed = 77;
    train(f.model, f.dataset, cfg);
    return f;
  }();
  return fixture;
}

}  // namespace

TEST_SUITE_BEGIN("eval");

TEST_CASE("distortion: exact cases and error paths") {
  const std::vector<double> x{1, 0, 1, 1};
  CHECK(eval::distortion(x, x, eval::Metric::kL1) == 0.0);
  CHECK(eval::distortion(x, x, eval::Metric::kL2) == 0.0);

  const std::vector<double> complement{0, 1, 0, 0};
  CHECK(eval::distortion(x, complement, eval::Metric::kL1) == 1.0);

  const std::vector<double> shorter{0, 1};
  CHECK_THROWS(eval::distortion(x, shorter, eval::Metric::kL1));
}

TEST_CASE("distortion: permutation invariance over dimensions") {
  auto stream = rng::Stream(1);
  std::vector<double> x(20), y(20);
  for (std::size_t i = 0; i < 20; ++i) {
    x[i] = stream.uniform();
    y[i] = stream.uniform();
  }
  const double base = eval::distortion(x, y, eval::Metric::kL2);

  std::vector<std::size_t> perm(20);
  for (std::size_t i = 0; i < 20; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), stream);
  std::vector<double> xp(20), yp(20);
  for (std::size_t i = 0; i < 20; ++i) {
    xp[i] = x[perm[i]];
    yp[i] = y[perm[i]];
  }
  CHECK(eval::distortion(xp, yp, eval::Metric::kL2) == doctest::Approx(base).epsilon(1e-12));

  // The mean is per-dimension: duplicating every dimension leaves it alone.
  std::vector<double> xx(x), yy(y);
  xx.insert(xx.end(), x.begin(), x.end());
  yy.insert(yy.end(), y.begin(), y.end());
  CHECK(eval::distortion(xx, yy, eval::Metric::kL2) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("ideal_code_bits: unit capacity, closed form, zero-capacity error") {
  CHECK(eval::ideal_code_bits(500.0, 0.0) == 500.0);
  CHECK(std::abs(eval::ideal_code_bits(500.0, 0.1) - 941.6) < 0.2);
  CHECK_THROWS(eval::ideal_code_bits(500.0, 0.5));
  CHECK_THROWS(eval::ideal_code_bits(-1.0, 0.1));

  double prev = eval::ideal_code_bits(500.0, 0.0);
  for (int i = 1; i <= 9; ++i) {
    const double bits_needed = eval::ideal_code_bits(500.0, 0.05 * i);
    CHECK(bits_needed > prev);
    prev = bits_needed;
  }
}

TEST_CASE("bit_flip_path: endpoints, step size, length") {
  const auto a = bits({0, 0, 0});
  const auto b = bits({1, 1, 1});
  const auto path = eval::bit_flip_path(a, b);
  REQUIRE(path.size() == 4);
  CHECK(path.front() == a);
  CHECK(path.back() == b);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) CHECK(hamming(path[i], path[i + 1]) == 1);

  const auto single = eval::bit_flip_path(a, a);
  REQUIRE(single.size() == 1);
  CHECK(single.front() == a);

  CHECK_THROWS(eval::bit_flip_path(a, bits({0, 1})));
}

TEST_CASE("bit_flip_path: property over random pairs") {
  auto stream = rng::Stream(2);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 1 + stream.uniform_int(24);
    Codeword a, b;
    for (std::size_t i = 0; i < m; ++i) {
      a.bits.push_back(stream.bernoulli(0.5));
      b.bits.push_back(stream.bernoulli(0.5));
    }
    const auto path = eval::bit_flip_path(a, b);
    CHECK(path.size() == hamming(a, b) + 1);
    CHECK(path.front() == a);
    CHECK(path.back() == b);
    for (std::size_t i = 0; i + 1 < path.size(); ++i) CHECK(hamming(path[i], path[i + 1]) == 1);
  }
}

TEST_CASE("markov chain: trajectory shape and state validity") {
  const auto& model = trained_bits_model().model;
  auto stream = rng::Stream(3);
  std::vector<double> x0(16, 0.0);
  const auto chain = eval::markov_chain_sample(model, x0, 25, stream);
  REQUIRE(chain.size() == 25);
  for (const auto& state : chain) {
    CHECK(state.code.size() == 8);
    for (auto s : state.code.symbols) CHECK(s <= 1);  // BSC: never erased
    REQUIRE(state.x.size() == 16);
    for (double v : state.x) CHECK((v == 0.0 || v == 1.0));  // Bernoulli decoder samples bits
  }
  CHECK_THROWS(eval::markov_chain_sample(model, x0, 0, stream));
}

TEST_CASE("markov chain: long-run mean stays near the training-set mean") {
  const auto& [model, dataset] = trained_bits_model();
  auto stream = rng::Stream(4);
  std::vector<double> x0(16, 0.0);
  const auto chain = eval::markov_chain_sample(model, x0, 10000, stream);

  std::vector<double> chain_mean(16, 0.0);
  for (const auto& state : chain)
    for (std::size_t d = 0; d < 16; ++d) chain_mean[d] += state.x[d];
  for (double& v : chain_mean) v /= static_cast<double>(chain.size());

  std::vector<double> train_mean(16, 0.0);
  for (std::size_t i : dataset.train_indices)
    for (std::size_t d = 0; d < 16; ++d) train_mean[d] += dataset.item(i)[d];
  for (double& v : train_mean) v /= static_cast<double>(dataset.train_indices.size());

  for (std::size_t d = 0; d < 16; ++d) CHECK(std::abs(chain_mean[d] - train_mean[d]) < 0.05);
}

TEST_CASE("extract_features: binary, right shape, deterministic") {
  const auto& model = trained_bits_model().model;
  const auto ds = data::gen_random_bits(70, 16, 0.5, 21);
  const auto f1 = eval::extract_features(model, ds);
  const auto f2 = eval::extract_features(model, ds);
  CHECK(f1.size() == 70 * 8);
  CHECK(f1 == f2);
  for (auto b : f1) CHECK(b <= 1);
}

TEST_CASE("evaluate_distortion: monotone in channel noise for a trained model") {
  const auto& model = trained_bits_model().model;
  const auto ds = data::gen_random_bits(700, 16, 0.5, 22);
  const auto report =
      eval::evaluate_distortion(model, ds, {0.0, 0.25, 0.5}, 10, 5, eval::Metric::kL1);
  REQUIRE(report.rows.size() == 3);
  CHECK(report.rows[0].mean < report.rows[1].mean);
  CHECK(report.rows[1].mean < report.rows[2].mean);
  CHECK(report.rows[0].n_items == ds.test_indices.size());

  CHECK_THROWS(eval::evaluate_distortion(model, ds, {}, 10, 5));
}

TEST_CASE("evaluate_distortion is deterministic given a seed") {
  const auto& model = trained_bits_model().model;
  const auto ds = data::gen_random_bits(140, 16, 0.5, 23);
  const auto a = eval::evaluate_distortion(model, ds, {0.1}, 5, 99);
  const auto b = eval::evaluate_distortion(model, ds, {0.1}, 5, 99);
  CHECK(a.rows[0].mean == b.rows[0].mean);
  CHECK(a.rows[0].stddev == b.rows[0].stddev);
}

TEST_CASE("report serialization carries the documented columns") {
  eval::DistortionReport report;
  report.metric = eval::Metric::kL1;
  report.draws_per_item = 10;
  report.rows = {{0.1, 0.052, 0.003, 1000}};

  std::ostringstream table;
  eval::write_distortion_table(table, report);
  CHECK(table.str().find("noise") != std::string::npos);
  CHECK(table.str().find("0.052") != std::string::npos);

  std::ostringstream kv;
  eval::write_distortion_kv(kv, report);
  CHECK(kv.str().find("noise=0.1") != std::string::npos);
  CHECK(kv.str().find("metric=l1") != std::string::npos);
  CHECK(kv.str().find("value=0.052") != std::string::npos);
  CHECK(kv.str().find("n=1000") != std::string::npos);
}

TEST_CASE("bench_decode: sane timings on a small matched pair") {
  const std::size_t n_bits = 48;
  const auto h = ldpc::make_parity_check(n_bits, 24, 31);
  const auto model = make_model(36, n_bits, {channel::Kind::kBsc, 0.08},
                                DecoderFamily::kBernoulli, {32}, {32}, 32);
  const auto result = eval::bench_decode(model, h, 0.08, 50, 8, 10, 33);
  CHECK(result.neural_batched.mean_seconds > 0.0);
  CHECK(result.neural_unbatched.mean_seconds > 0.0);
  CHECK(result.classical.mean_seconds > 0.0);
  CHECK(result.classical.trials == 10);
  CHECK(result.classical.threads == 1);

  std::ostringstream kv;
  eval::write_timing_kv(kv, result);
  CHECK(kv.str().find("method=ldpc_bp") != std::string::npos);
  CHECK(kv.str().find("speedup_unbatched=") != std::string::npos);

  CHECK_THROWS(eval::bench_decode(model, h, 0.08, 50, 8, 5, 33));  // trials < 10
}

TEST_SUITE_END();
