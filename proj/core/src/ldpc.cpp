#include "necst/ldpc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace necst::ldpc {
namespace {

constexpr std::size_t kColumnWeight = 3;
constexpr double kLlrClamp = 30.0;
constexpr std::size_t kColumnRetries = 200;
constexpr std::size_t kRestartLimit = 64;

std::uint64_t pair_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

// One construction attempt; empty result on failure.
bool try_construct(std::size_t n, std::size_t n_checks, rng::Stream& stream,
                   ParityCheckMatrix& out) {
  out.n = n;
  out.n_checks = n_checks;
  out.rows.assign(n_checks, {});
  out.cols.assign(n, {});
  std::vector<std::size_t> row_weight(n_checks, 0);
  std::set<std::uint64_t> used_pairs;

  for (std::uint32_t col = 0; col < n; ++col) {
    bool placed = false;
    for (std::size_t attempt = 0; attempt < kColumnRetries && !placed; ++attempt) {
      // Pick rows one at a time, uniformly among the lightest rows that do
      // not close a 4-cycle with the rows already picked for this column.
      std::vector<std::uint32_t> picked;
      while (picked.size() < kColumnWeight) {
        std::vector<std::uint32_t> candidates;
        std::size_t best = SIZE_MAX;
        for (std::uint32_t r = 0; r < n_checks; ++r) {
          if (std::find(picked.begin(), picked.end(), r) != picked.end()) continue;
          bool ok = true;
          for (std::uint32_t p : picked)
            if (used_pairs.count(pair_key(r, p))) {
              ok = false;
              break;
            }
          if (!ok) continue;
          if (row_weight[r] < best) {
            best = row_weight[r];
            candidates.clear();
          }
          if (row_weight[r] == best) candidates.push_back(r);
        }
        if (candidates.empty()) break;
        picked.push_back(candidates[stream.uniform_int(candidates.size())]);
      }
      if (picked.size() == kColumnWeight) {
        for (std::size_t a = 0; a < picked.size(); ++a)
          for (std::size_t b = a + 1; b < picked.size(); ++b)
            used_pairs.insert(pair_key(picked[a], picked[b]));
        for (std::uint32_t r : picked) {
          out.rows[r].push_back(col);
          out.cols[col].push_back(r);
          ++row_weight[r];
        }
        placed = true;
      }
    }
    if (!placed) return false;
  }
  for (const auto& row : out.rows)
    if (row.empty()) return false;  // no zero rows
  return true;
}

struct BitRow {
  std::vector<std::uint64_t> words;

  explicit BitRow(std::size_t bits) : words((bits + 63) / 64, 0) {}
  void set(std::size_t i) { words[i >> 6] |= 1ULL << (i & 63); }
  bool get(std::size_t i) const { return (words[i >> 6] >> (i & 63)) & 1; }
  void operator^=(const BitRow& other) {
    for (std::size_t w = 0; w < words.size(); ++w) words[w] ^= other.words[w];
  }
};

double clamp_llr(double v) { return std::clamp(v, -kLlrClamp, kLlrClamp); }

}  // namespace

std::size_t ParityCheckMatrix::nnz() const {
  std::size_t total = 0;
  for (const auto& row : rows) total += row.size();
  return total;
}

ParityCheckMatrix make_parity_check(std::size_t n, std::size_t n_checks, std::uint64_t seed) {
  if (n_checks >= n) throw std::invalid_argument("make_parity_check: need n_checks < n");
  if (n_checks < kColumnWeight)
    throw std::invalid_argument("make_parity_check: need at least 3 check rows");
  for (std::size_t restart = 0; restart < kRestartLimit; ++restart) {
    auto stream = rng::substream(seed, {0x70636872ULL /*"pchk"*/, restart});
    ParityCheckMatrix h;
    if (try_construct(n, n_checks, stream, h)) {
      for (auto& row : h.rows) std::sort(row.begin(), row.end());
      for (auto& col : h.cols) std::sort(col.begin(), col.end());
      return h;
    }
  }
  throw std::runtime_error("make_parity_check: construction failed after bounded restarts");
}

GeneratorMatrix make_generator(const ParityCheckMatrix& h) {
  const std::size_t n = h.n;
  const std::size_t rows = h.n_checks;

  std::vector<BitRow> mat(rows, BitRow(n));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::uint32_t c : h.rows[r]) mat[r].set(c);

  // Row-reduce; record the pivot column of every independent row.
  std::vector<std::uint32_t> pivot_cols;
  std::size_t rank = 0;
  for (std::size_t col = 0; col < n && rank < rows; ++col) {
    std::size_t pivot = SIZE_MAX;
    for (std::size_t r = rank; r < rows; ++r)
      if (mat[r].get(col)) {
        pivot = r;
        break;
      }
    if (pivot == SIZE_MAX) continue;
    std::swap(mat[rank], mat[pivot]);
    for (std::size_t r = 0; r < rows; ++r)
      if (r != rank && mat[r].get(col)) mat[r] ^= mat[rank];
    pivot_cols.push_back(static_cast<std::uint32_t>(col));
    ++rank;
  }
  if (rank == 0) throw std::invalid_argument("make_generator: zero-rank parity-check matrix");

  std::vector<bool> is_pivot(n, false);
  for (std::uint32_t c : pivot_cols) is_pivot[c] = true;

  GeneratorMatrix g;
  g.n = n;
  g.k = n - rank;
  for (std::uint32_t c = 0; c < n; ++c)
    if (!is_pivot[c]) g.message_positions.push_back(c);

  // Codeword for unit message e_i: free column set to 1, each pivot column
  // set to that row's coefficient on the free column.
  g.row_bits.assign(g.k, std::vector<std::uint64_t>((n + 63) / 64, 0));
  for (std::size_t i = 0; i < g.k; ++i) {
    const std::uint32_t free_col = g.message_positions[i];
    auto& bits = g.row_bits[i];
    bits[free_col >> 6] |= 1ULL << (free_col & 63);
    for (std::size_t r = 0; r < rank; ++r) {
      if (mat[r].get(free_col)) {
        const std::uint32_t pc = pivot_cols[r];
        bits[pc >> 6] |= 1ULL << (pc & 63);
      }
    }
  }
  return g;
}

channel::Codeword ldpc_encode(const GeneratorMatrix& g, const std::vector<std::uint8_t>& message) {
  if (message.size() != g.k) throw std::invalid_argument("ldpc_encode: message length != k");
  std::vector<std::uint64_t> acc((g.n + 63) / 64, 0);
  for (std::size_t i = 0; i < g.k; ++i) {
    if (message[i] > 1) throw std::invalid_argument("ldpc_encode: message bit outside {0,1}");
    if (message[i])
      for (std::size_t w = 0; w < acc.size(); ++w) acc[w] ^= g.row_bits[i][w];
  }
  channel::Codeword out;
  out.bits.resize(g.n);
  for (std::size_t c = 0; c < g.n; ++c) out.bits[c] = (acc[c >> 6] >> (c & 63)) & 1;
  return out;
}

std::vector<std::uint8_t> extract_message(const GeneratorMatrix& g, const channel::Codeword& code) {
  if (code.size() != g.n) throw std::invalid_argument("extract_message: codeword length != n");
  std::vector<std::uint8_t> message(g.k);
  for (std::size_t i = 0; i < g.k; ++i) message[i] = code.bits[g.message_positions[i]];
  return message;
}

bool syndrome_zero(const ParityCheckMatrix& h, const std::vector<std::uint8_t>& bits) {
  for (const auto& row : h.rows) {
    unsigned parity = 0;
    for (std::uint32_t c : row) parity ^= bits[c];
    if (parity) return false;
  }
  return true;
}

BpResult bp_decode(const ParityCheckMatrix& h, const channel::Codeword& received, double noise,
                   std::size_t max_iters) {
  if (received.size() != h.n) throw std::invalid_argument("bp_decode: length mismatch");
  if (!(noise >= 0.0 && noise <= 0.5))
    throw std::invalid_argument("bp_decode: noise must lie in [0, 0.5]");
  if (max_iters == 0) throw std::invalid_argument("bp_decode: max_iters must be >= 1");

  BpResult result;
  if (noise == 0.0) {
    result.decoded = received.bits;
    result.converged = syndrome_zero(h, result.decoded);
    result.iterations = 1;
    result.posterior_llr.assign(h.n, 0.0);
    for (std::size_t i = 0; i < h.n; ++i)
      result.posterior_llr[i] = received.bits[i] ? -kLlrClamp : kLlrClamp;
    return result;
  }

  // LLR convention: log P(bit=0)/P(bit=1); a received 0 pushes positive.
  const double channel_mag = std::log((1.0 - noise) / noise);
  std::vector<double> channel_llr(h.n);
  for (std::size_t i = 0; i < h.n; ++i)
    channel_llr[i] = received.bits[i] ? -channel_mag : channel_mag;

  // Edge storage: per check row, messages aligned with h.rows[r].
  std::vector<std::vector<double>> var_to_check(h.n_checks);
  std::vector<std::vector<double>> check_to_var(h.n_checks);
  for (std::size_t r = 0; r < h.n_checks; ++r) {
    var_to_check[r].assign(h.rows[r].size(), 0.0);
    check_to_var[r].assign(h.rows[r].size(), 0.0);
    for (std::size_t e = 0; e < h.rows[r].size(); ++e)
      var_to_check[r][e] = channel_llr[h.rows[r][e]];
  }

  std::vector<double> posterior = channel_llr;
  auto hard_decide = [&](std::vector<std::uint8_t>& bits) {
    bits.resize(h.n);
    for (std::size_t i = 0; i < h.n; ++i) {
      // Ties keep the received bit; at noise 0.5 every LLR is exactly 0 and
      // the decoder passes the word through.
      bits[i] = posterior[i] > 0.0 ? 0 : (posterior[i] < 0.0 ? 1 : received.bits[i]);
    }
  };

  std::vector<double> fwd, bwd;
  for (std::size_t iter = 1; iter <= max_iters; ++iter) {
    hard_decide(result.decoded);
    if (syndrome_zero(h, result.decoded)) {
      result.converged = true;
      result.iterations = iter;
      result.posterior_llr = std::move(posterior);
      return result;
    }

    // Check update: tanh-product rule via forward/backward partial products.
    for (std::size_t r = 0; r < h.n_checks; ++r) {
      const std::size_t deg = h.rows[r].size();
      fwd.assign(deg, 1.0);
      bwd.assign(deg, 1.0);
      for (std::size_t e = 1; e < deg; ++e)
        fwd[e] = fwd[e - 1] * std::tanh(0.5 * var_to_check[r][e - 1]);
      for (std::size_t e = deg - 1; e-- > 0;)
        bwd[e] = bwd[e + 1] * std::tanh(0.5 * var_to_check[r][e + 1]);
      for (std::size_t e = 0; e < deg; ++e) {
        const double t = std::clamp(fwd[e] * bwd[e], -0.9999999999999, 0.9999999999999);
        check_to_var[r][e] = clamp_llr(2.0 * std::atanh(t));
      }
    }

    // Variable update and posterior.
    posterior = channel_llr;
    for (std::size_t r = 0; r < h.n_checks; ++r)
      for (std::size_t e = 0; e < h.rows[r].size(); ++e)
        posterior[h.rows[r][e]] += check_to_var[r][e];
    for (std::size_t r = 0; r < h.n_checks; ++r)
      for (std::size_t e = 0; e < h.rows[r].size(); ++e)
        var_to_check[r][e] = clamp_llr(posterior[h.rows[r][e]] - check_to_var[r][e]);
  }

  hard_decide(result.decoded);
  result.converged = syndrome_zero(h, result.decoded);
  result.iterations = max_iters;
  result.posterior_llr = std::move(posterior);
  return result;
}

void export_parity_check(const ParityCheckMatrix& h, std::ostream& out) {
  out << h.n << ' ' << h.n_checks << ' ' << h.nnz() << '\n';
  for (std::size_t r = 0; r < h.n_checks; ++r)
    for (std::uint32_t c : h.rows[r]) out << r << ' ' << c << '\n';
}

void export_parity_check(const ParityCheckMatrix& h, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export_parity_check: cannot open " + path);
  export_parity_check(h, out);
  if (!out) throw std::runtime_error("export_parity_check: write failed for " + path);
}

ParityCheckMatrix import_parity_check(std::istream& in) {
  ParityCheckMatrix h;
  std::size_t nnz = 0;
  if (!(in >> h.n >> h.n_checks >> nnz))
    throw std::runtime_error("import_parity_check: bad header (want: n n_checks nnz)");
  h.rows.assign(h.n_checks, {});
  h.cols.assign(h.n, {});
  for (std::size_t i = 0; i < nnz; ++i) {
    std::size_t r = 0, c = 0;
    if (!(in >> r >> c))
      throw std::runtime_error("import_parity_check: truncated at entry " + std::to_string(i));
    if (r >= h.n_checks || c >= h.n)
      throw std::runtime_error("import_parity_check: entry out of range");
    h.rows[r].push_back(static_cast<std::uint32_t>(c));
    h.cols[c].push_back(static_cast<std::uint32_t>(r));
  }
  return h;
}

ParityCheckMatrix import_parity_check(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("import_parity_check: cannot open " + path);
  return import_parity_check(in);
}

}  // namespace necst::ldpc
