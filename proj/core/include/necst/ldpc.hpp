#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "necst/channel.hpp"
#include "necst/rng.hpp"

namespace necst::ldpc {

// Sparse parity-check matrix of a regular column-weight-3 code with no
// 4-cycles (any two columns share at most one row).
struct ParityCheckMatrix {
  std::size_t n = 0;         // codeword length (columns)
  std::size_t n_checks = 0;  // rows
  std::vector<std::vector<std::uint32_t>> rows;  // column indices per check
  std::vector<std::vector<std::uint32_t>> cols;  // check indices per column

  std::size_t nnz() const;
};

// Dense systematic generator. Row i is the codeword of unit message e_i;
// message bit i lands at codeword position message_positions[i].
struct GeneratorMatrix {
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<std::vector<std::uint64_t>> row_bits;  // k packed n-bit rows
  std::vector<std::uint32_t> message_positions;

  bool bit(std::size_t row, std::size_t col) const {
    return (row_bits[row][col >> 6] >> (col & 63)) & 1;
  }
};

struct BpResult {
  std::vector<std::uint8_t> decoded;
  bool converged = false;
  std::size_t iterations = 0;
  std::vector<double> posterior_llr;  // log P(bit=0)/P(bit=1)
};

// Column weight 3, near-uniform row weights, girth >= 6. Places each column
// on the lightest rows available; resamples a column whose placement would
// close a 4-cycle, restarting the construction on a fresh substream if a
// column cannot be placed.
ParityCheckMatrix make_parity_check(std::size_t n, std::size_t n_checks, std::uint64_t seed);

// Systematic generator via GF(2) Gaussian elimination. Dependent rows of H
// are dropped, so k = n - rank(H).
GeneratorMatrix make_generator(const ParityCheckMatrix& h);

channel::Codeword ldpc_encode(const GeneratorMatrix& g, const std::vector<std::uint8_t>& message);

std::vector<std::uint8_t> extract_message(const GeneratorMatrix& g, const channel::Codeword& code);

bool syndrome_zero(const ParityCheckMatrix& h, const std::vector<std::uint8_t>& bits);

// Flooding sum-product decoder over the BSC. Message passing runs in the
// tanh/atanh domain with values clamped to |LLR| <= 30; stops as soon as the
// hard decision satisfies every check. noise == 0 is a hard pass-through.
BpResult bp_decode(const ParityCheckMatrix& h, const channel::Codeword& received, double noise,
                   std::size_t max_iters);

// Coordinate-list interop: header "n n_checks nnz", then one "row col" pair
// per line, 0-indexed.
void export_parity_check(const ParityCheckMatrix& h, std::ostream& out);
void export_parity_check(const ParityCheckMatrix& h, const std::string& path);
ParityCheckMatrix import_parity_check(std::istream& in);
ParityCheckMatrix import_parity_check(const std::string& path);

}  // namespace necst::ldpc
