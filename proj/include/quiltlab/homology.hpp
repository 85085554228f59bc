// Integer linear algebra (Smith normal form over int64) and Z_N-graded chain
// complexes with integer coefficients: validation of degree-1 square-zero
// differentials, homology with torsion, and tensor products.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace quiltlab {

using MatrixXl = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;
using VectorXl = Eigen::Matrix<long long, Eigen::Dynamic, 1>;

struct SmithForm {
  MatrixXl U, S, V;  // U * A * V = S, U and V unimodular, S diagonal with d_i | d_{i+1}
  std::vector<long long> divisors() const {
    std::vector<long long> d;
    for (int i = 0; i < std::min(S.rows(), S.cols()); ++i)
      if (S(i, i) != 0) d.push_back(S(i, i));
    return d;
  }
  int rank() const { return static_cast<int>(divisors().size()); }
};

// Classical elimination with minimal-pivot selection. Inputs in this library
// stay tiny (lattice direction matrices, oracle differentials), so int64
// without overflow tracking is adequate.
inline SmithForm smith_normal_form(MatrixXl A) {
  const int m = static_cast<int>(A.rows()), n = static_cast<int>(A.cols());
  SmithForm out;
  out.U = MatrixXl::Identity(m, m);
  out.V = MatrixXl::Identity(n, n);

  auto swap_rows = [&](int i, int j) { A.row(i).swap(A.row(j)); out.U.row(i).swap(out.U.row(j)); };
  auto swap_cols = [&](int i, int j) { A.col(i).swap(A.col(j)); out.V.col(i).swap(out.V.col(j)); };
  auto add_row = [&](int dst, int src, long long c) {
    A.row(dst) += c * A.row(src);
    out.U.row(dst) += c * out.U.row(src);
  };
  auto add_col = [&](int dst, int src, long long c) {
    A.col(dst) += c * A.col(src);
    out.V.col(dst) += c * out.V.col(src);
  };

  int t = 0;
  const int lim = std::min(m, n);
  while (t < lim) {
    // locate minimal nonzero |entry| in the trailing block
    int pi = -1, pj = -1;
    long long best = 0;
    for (int i = t; i < m; ++i)
      for (int j = t; j < n; ++j)
        if (A(i, j) != 0 && (pi < 0 || std::llabs(A(i, j)) < best)) {
          best = std::llabs(A(i, j));
          pi = i;
          pj = j;
        }
    if (pi < 0) break;  // trailing block is zero
    swap_rows(t, pi);
    swap_cols(t, pj);

    bool clean = true;
    for (int i = t + 1; i < m; ++i)
      if (A(i, t) != 0) {
        add_row(i, t, -(A(i, t) / A(t, t)));
        if (A(i, t) != 0) clean = false;
      }
    for (int j = t + 1; j < n; ++j)
      if (A(t, j) != 0) {
        add_col(j, t, -(A(t, j) / A(t, t)));
        if (A(t, j) != 0) clean = false;
      }
    if (!clean) continue;  // smaller remainders appeared; re-pivot

    // enforce divisibility of the trailing block by the pivot
    long long p = std::llabs(A(t, t));
    int bi = -1, bj = -1;
    for (int i = t + 1; i < m && bi < 0; ++i)
      for (int j = t + 1; j < n; ++j)
        if (A(i, j) % p != 0) {
          bi = i;
          bj = j;
          break;
        }
    if (bi >= 0) {
      add_row(t, bi, 1);
      continue;
    }
    if (A(t, t) < 0) {
      A.row(t) *= -1;
      out.U.row(t) *= -1;
    }
    ++t;
  }
  out.S = A;
  return out;
}

inline int integer_rank(const MatrixXl& A) {
  if (A.rows() == 0 || A.cols() == 0) return 0;
  return smith_normal_form(A).rank();
}

// Saturated basis of {x : A x = 0} as columns; the lattice it spans is
// primitive (a direct summand of Z^n).
inline MatrixXl integer_kernel(const MatrixXl& A) {
  if (A.cols() == 0) return MatrixXl::Zero(0, 0);
  if (A.rows() == 0) return MatrixXl::Identity(A.cols(), A.cols());
  SmithForm f = smith_normal_form(A);
  int r = f.rank();
  return f.V.rightCols(A.cols() - r);
}

// Index of the lattice spanned by the columns of A inside its saturation;
// 1 means the columns span a primitive sublattice.
inline long long lattice_saturation_index(const MatrixXl& A) {
  if (A.cols() == 0) return 1;
  auto d = smith_normal_form(A).divisors();
  if (static_cast<int>(d.size()) < A.cols())
    throw std::invalid_argument("lattice_saturation_index: columns not independent");
  long long idx = 1;
  for (long long v : d) idx *= v;
  return idx;
}

// ---------------------------------------------------------------------------
// Z_N-graded chain complexes over Z.
// ---------------------------------------------------------------------------

// Supplier of signed trajectory counts between generator pairs. The library
// validates whatever it is given (degree-1 support, square zero); the counts
// themselves are external input.
using DifferentialOracle = std::function<long long(int from, int to)>;

inline DifferentialOracle zero_oracle() {
  return [](int, int) -> long long { return 0; };
}

struct HomologySummary {
  int betti = 0;
  std::vector<long long> torsion;  // nontrivial elementary divisors
};

struct GradedChainComplex {
  std::vector<int> degrees;  // generator degrees in Z_N
  MatrixXl differential;     // entry (i, j): coefficient of generator i in d(generator j)
  int modulus = 2;
  bool closed = false;  // set once square-zero has been validated

  int size() const { return static_cast<int>(degrees.size()); }

  void validate() {
    const int m = size();
    if (differential.rows() != m || differential.cols() != m)
      throw std::invalid_argument("GradedChainComplex: differential shape mismatch");
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i)
        if (differential(i, j) != 0 &&
            ((degrees[j] + 1) % modulus) != (degrees[i] % modulus))
          throw std::invalid_argument(
              "GradedChainComplex: differential entry (" + std::to_string(i) + "," +
              std::to_string(j) + ") does not raise degree by 1");
    MatrixXl sq = differential * differential;
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i)
        if (sq(i, j) != 0)
          throw std::invalid_argument("GradedChainComplex: differential does not square to zero, witness pair (" +
                                      std::to_string(j) + " -> " + std::to_string(i) + ")");
    closed = true;
  }
};

inline GradedChainComplex make_complex(const std::vector<int>& degrees, int modulus,
                                       const DifferentialOracle& oracle) {
  GradedChainComplex cx;
  cx.degrees = degrees;
  for (auto& d : cx.degrees) d = ((d % modulus) + modulus) % modulus;
  cx.modulus = modulus;
  const int m = cx.size();
  cx.differential = MatrixXl::Zero(m, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      long long c = oracle(j, i);
      if (c != 0 && ((cx.degrees[j] + 1) % modulus) != cx.degrees[i])
        throw std::invalid_argument("oracle supplies a count off the degree-1 diagonal, witness pair (" +
                                    std::to_string(j) + " -> " + std::to_string(i) + ")");
      cx.differential(i, j) = c;
    }
  cx.validate();
  return cx;
}

// Block of the differential from degree-d generators to degree-(d+1) generators.
inline MatrixXl degree_block(const GradedChainComplex& cx, int d) {
  const int N = cx.modulus;
  d = ((d % N) + N) % N;
  std::vector<int> src, dst;
  for (int i = 0; i < cx.size(); ++i) {
    if (cx.degrees[i] == d) src.push_back(i);
    if (cx.degrees[i] == (d + 1) % N) dst.push_back(i);
  }
  MatrixXl B(static_cast<int>(dst.size()), static_cast<int>(src.size()));
  for (size_t a = 0; a < dst.size(); ++a)
    for (size_t b = 0; b < src.size(); ++b) B(a, b) = cx.differential(dst[a], src[b]);
  return B;
}

// Integer homology per Z_N degree: H^d = ker(d^d) / im(d^{d-1}).
inline std::vector<HomologySummary> homology(const GradedChainComplex& cx) {
  const int N = cx.modulus;
  std::vector<HomologySummary> out(N);
  for (int d = 0; d < N; ++d) {
    MatrixXl out_block = degree_block(cx, d);
    MatrixXl in_block = degree_block(cx, (d - 1 + N) % N);
    int gens = static_cast<int>(out_block.cols());
    int rank_out = integer_rank(out_block);
    SmithForm fin = smith_normal_form(in_block);
    int rank_in = fin.rank();
    out[d].betti = gens - rank_out - rank_in;
    for (long long v : fin.divisors())
      if (std::llabs(v) > 1) out[d].torsion.push_back(std::llabs(v));
  }
  return out;
}

// Tensor product with the standard Koszul sign; degrees add mod N.
inline GradedChainComplex tensor_complex(const GradedChainComplex& a, const GradedChainComplex& b) {
  if (a.modulus != b.modulus)
    throw std::invalid_argument("tensor_complex: modulus mismatch");
  const int N = a.modulus;
  GradedChainComplex cx;
  cx.modulus = N;
  const int ma = a.size(), mb = b.size();
  auto idx = [&](int i, int j) { return i * mb + j; };
  cx.degrees.resize(ma * mb);
  for (int i = 0; i < ma; ++i)
    for (int j = 0; j < mb; ++j) cx.degrees[idx(i, j)] = (a.degrees[i] + b.degrees[j]) % N;
  cx.differential = MatrixXl::Zero(ma * mb, ma * mb);
  for (int i = 0; i < ma; ++i)
    for (int j = 0; j < mb; ++j) {
      for (int k = 0; k < ma; ++k)
        if (a.differential(k, i) != 0)
          cx.differential(idx(k, j), idx(i, j)) += a.differential(k, i);
      long long sign = (a.degrees[i] % 2 == 0) ? 1 : -1;
      for (int l = 0; l < mb; ++l)
        if (b.differential(l, j) != 0)
          cx.differential(idx(i, l), idx(i, j)) += sign * b.differential(l, j);
    }
  cx.validate();
  return cx;
}

}  // namespace quiltlab
