#include "necst/matrix.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>

#include "necst/parallel.hpp"

namespace necst {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

// Panel widths chosen so the streamed operand stays L2-resident while a
// whole chunk of output rows sweeps over it.
constexpr std::size_t kColPanel = 96;  // columns of B per pass (matmul, at_b)
constexpr std::size_t kRowPanel = 32;  // rows of B per pass (a_bt)

}  // namespace

// All kernels parallelize over rows of `out`, process four output rows per
// register block and tile the streamed operand; every output element is
// accumulated in a fixed k-order by a single thread, so results do not
// depend on the worker-pool size.

void matmul(const Matrix& a, const Matrix& b, Matrix& out) {
  require(a.cols() == b.rows(), "matmul: inner dimensions differ");
  out = Matrix(a.rows(), b.cols());
  const std::size_t k_dim = a.cols();
  const std::size_t n = b.cols();
  parallel_for(a.rows(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t jb = 0; jb < n; jb += kColPanel) {
      const std::size_t je = std::min(jb + kColPanel, n);
      std::size_t i = begin;
      for (; i + 4 <= end; i += 4) {
        double* o0 = out.row(i);
        double* o1 = out.row(i + 1);
        double* o2 = out.row(i + 2);
        double* o3 = out.row(i + 3);
        for (std::size_t k = 0; k < k_dim; ++k) {
          const double* b_row = b.row(k);
          const double a0 = a(i, k), a1 = a(i + 1, k), a2 = a(i + 2, k), a3 = a(i + 3, k);
          for (std::size_t j = jb; j < je; ++j) {
            const double bj = b_row[j];
            o0[j] += a0 * bj;
            o1[j] += a1 * bj;
            o2[j] += a2 * bj;
            o3[j] += a3 * bj;
          }
        }
      }
      for (; i < end; ++i) {
        double* out_row = out.row(i);
        const double* a_row = a.row(i);
        for (std::size_t k = 0; k < k_dim; ++k) {
          const double aik = a_row[k];
          const double* b_row = b.row(k);
          for (std::size_t j = jb; j < je; ++j) out_row[j] += aik * b_row[j];
        }
      }
    }
  });
}

void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out) {
  require(a.rows() == b.rows(), "matmul_at_b: contraction dimensions differ");
  out = Matrix(a.cols(), b.cols());
  const std::size_t k_dim = a.rows();
  const std::size_t n = b.cols();
  parallel_for(a.cols(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t jb = 0; jb < n; jb += kColPanel) {
      const std::size_t je = std::min(jb + kColPanel, n);
      std::size_t i = begin;
      for (; i + 4 <= end; i += 4) {
        double* o0 = out.row(i);
        double* o1 = out.row(i + 1);
        double* o2 = out.row(i + 2);
        double* o3 = out.row(i + 3);
        for (std::size_t k = 0; k < k_dim; ++k) {
          const double* a_row = a.row(k);
          const double* b_row = b.row(k);
          const double a0 = a_row[i], a1 = a_row[i + 1], a2 = a_row[i + 2], a3 = a_row[i + 3];
          for (std::size_t j = jb; j < je; ++j) {
            const double bj = b_row[j];
            o0[j] += a0 * bj;
            o1[j] += a1 * bj;
            o2[j] += a2 * bj;
            o3[j] += a3 * bj;
          }
        }
      }
      for (; i < end; ++i) {
        double* out_row = out.row(i);
        for (std::size_t k = 0; k < k_dim; ++k) {
          const double aki = a(k, i);
          const double* b_row = b.row(k);
          for (std::size_t j = jb; j < je; ++j) out_row[j] += aki * b_row[j];
        }
      }
    }
  });
}

void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out) {
  require(a.cols() == b.cols(), "matmul_a_bt: contraction dimensions differ");
  out = Matrix(a.rows(), b.rows());
  const std::size_t k_dim = a.cols();
  const std::size_t n = b.rows();
  parallel_for(a.rows(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t jb = 0; jb < n; jb += kRowPanel) {
      const std::size_t je = std::min(jb + kRowPanel, n);
      std::size_t i = begin;
      for (; i + 4 <= end; i += 4) {
        const double* a0 = a.row(i);
        const double* a1 = a.row(i + 1);
        const double* a2 = a.row(i + 2);
        const double* a3 = a.row(i + 3);
        for (std::size_t j = jb; j < je; ++j) {
          const double* b_row = b.row(j);
          double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
          for (std::size_t k = 0; k < k_dim; ++k) {
            const double bk = b_row[k];
            s0 += a0[k] * bk;
            s1 += a1[k] * bk;
            s2 += a2[k] * bk;
            s3 += a3[k] * bk;
          }
          out(i, j) = s0;
          out(i + 1, j) = s1;
          out(i + 2, j) = s2;
          out(i + 3, j) = s3;
        }
      }
      for (; i < end; ++i) {
        const double* a_row = a.row(i);
        double* out_row = out.row(i);
        for (std::size_t j = jb; j < je; ++j) {
          const double* b_row = b.row(j);
          double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
          std::size_t k = 0;
          for (; k + 4 <= k_dim; k += 4) {
            s0 += a_row[k] * b_row[k];
            s1 += a_row[k + 1] * b_row[k + 1];
            s2 += a_row[k + 2] * b_row[k + 2];
            s3 += a_row[k + 3] * b_row[k + 3];
          }
          double s = (s0 + s1) + (s2 + s3);
          for (; k < k_dim; ++k) s += a_row[k] * b_row[k];
          out_row[j] = s;
        }
      }
    }
  });
}

}  // namespace necst
