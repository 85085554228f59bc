// Linear symplectic algebra over standard R^{2n}: subspaces, isotropy
// classification, complements, Lagrangian frames, and the canonical
// orthogonal-symplectic isomorphisms (duals, products, factor permutations)
// that the rest of the library routes every coordinate change through.
#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace quiltlab {

using Eigen::MatrixXd;
using Eigen::MatrixXcd;
using Eigen::VectorXd;
using Eigen::VectorXcd;

constexpr double kPi = 3.14159265358979323846;
constexpr double kLagTol = 1e-9;        // Lagrangian / orthonormality tolerance
constexpr double kRankTol = 1e-9;       // rank decisions on unit-normalized data
constexpr double kTransvTol = 1e-7;     // smallest singular value declaring transversality

// Standard symplectic form on R^{2n}, coordinates stacked (x_1..x_n, y_1..y_n):
// omega(u,v) = u^T Omega v with Omega = [[0, I], [-I, 0]].
inline MatrixXd omega_matrix(int n) {
  MatrixXd W = MatrixXd::Zero(2 * n, 2 * n);
  W.block(0, n, n, n) = MatrixXd::Identity(n, n);
  W.block(n, 0, n, n) = -MatrixXd::Identity(n, n);
  return W;
}

// Compatible complex structure J = [[0, -I], [I, 0]]; J maps x_i to y_i and
// omega(u, Jv) is the Euclidean inner product.
inline MatrixXd j_matrix(int n) {
  MatrixXd J = MatrixXd::Zero(2 * n, 2 * n);
  J.block(0, n, n, n) = -MatrixXd::Identity(n, n);
  J.block(n, 0, n, n) = MatrixXd::Identity(n, n);
  return J;
}

// A symplectic vector space. Internally always R^{2n} with the standard form;
// nonstandard forms are conjugated to this model at the JSON boundary.
// n = 0 is the point space "pt".
struct SymplecticSpace {
  int n = 0;

  SymplecticSpace() = default;
  explicit SymplecticSpace(int half_dim) : n(half_dim) {
    if (n < 0) throw std::invalid_argument("SymplecticSpace: negative dimension");
  }
  int dim() const { return 2 * n; }
  bool is_point() const { return n == 0; }
  MatrixXd form() const { return omega_matrix(n); }
  bool operator==(const SymplecticSpace& o) const { return n == o.n; }
  bool operator!=(const SymplecticSpace& o) const { return n != o.n; }
};

inline SymplecticSpace standard_space(int n) { return SymplecticSpace(n); }

inline SymplecticSpace dual(const SymplecticSpace& sp) { return sp; }

inline SymplecticSpace product(const SymplecticSpace& a, const SymplecticSpace& b) {
  return SymplecticSpace(a.n + b.n);
}

// Thin-QR orthonormalization with positive diagonal R. The span is unchanged
// and, for full-rank real column ops, so is arg det(X+iY)^2.
inline MatrixXd orthonormalize(const MatrixXd& A) {
  if (A.cols() == 0) return A;
  Eigen::HouseholderQR<MatrixXd> qr(A);
  MatrixXd Q = qr.householderQ() * MatrixXd::Identity(A.rows(), A.cols());
  MatrixXd R = qr.matrixQR().topLeftCorner(A.cols(), A.cols());
  for (int j = 0; j < A.cols(); ++j)
    if (R(j, j) < 0) Q.col(j) = -Q.col(j);
  return Q;
}

inline int numerical_rank(const MatrixXd& A, double tol = kRankTol) {
  if (A.rows() == 0 || A.cols() == 0) return 0;
  Eigen::JacobiSVD<MatrixXd> svd(A);
  int r = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > tol) ++r;
  return r;
}

// Orthonormal basis of the kernel of A (columns), empty matrix if trivial.
inline MatrixXd null_space(const MatrixXd& A, double tol = kRankTol) {
  if (A.cols() == 0) return MatrixXd::Zero(0, 0);
  if (A.rows() == 0) return MatrixXd::Identity(A.cols(), A.cols());
  Eigen::JacobiSVD<MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > tol) ++r;
  return svd.matrixV().rightCols(A.cols() - r);
}

// A linear subspace with orthonormalized basis columns.
struct Subspace {
  SymplecticSpace ambient;
  MatrixXd basis;  // 2n x k, orthonormal columns

  Subspace() = default;
  Subspace(const SymplecticSpace& sp, const MatrixXd& raw_basis) : ambient(sp) {
    if (raw_basis.rows() != sp.dim())
      throw std::invalid_argument("Subspace: basis rows do not match ambient dimension");
    if (raw_basis.cols() > 0 && numerical_rank(raw_basis) < raw_basis.cols())
      throw std::invalid_argument("Subspace: rank-deficient basis");
    basis = orthonormalize(raw_basis);
  }
  int dim() const { return static_cast<int>(basis.cols()); }
};

// Gap metric between equi-dimensional subspaces: spectral norm of the
// difference of orthogonal projectors, i.e. the sine of the largest
// principal angle. Zero iff the spans coincide.
inline double subspace_distance(const Subspace& a, const Subspace& b) {
  if (a.ambient != b.ambient) throw std::invalid_argument("subspace_distance: ambient mismatch");
  if (a.dim() != b.dim()) throw std::invalid_argument("subspace_distance: dimension mismatch");
  if (a.dim() == 0) return 0.0;
  MatrixXd P = a.basis * a.basis.transpose() - b.basis * b.basis.transpose();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(P);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline double frame_span_distance(const SymplecticSpace& sp, const MatrixXd& A, const MatrixXd& B) {
  return subspace_distance(Subspace(sp, A), Subspace(sp, B));
}

// omega-orthogonal complement {v : omega(v, w) = 0 for all w in sub}.
inline Subspace symp_complement(const Subspace& sub) {
  const int N = sub.ambient.dim();
  if (sub.dim() == 0) return Subspace(sub.ambient, MatrixXd::Identity(N, N));
  MatrixXd C = (omega_matrix(sub.ambient.n) * sub.basis).transpose();  // k x 2n
  return Subspace(sub.ambient, null_space(C));
}

enum class SubspaceClass { isotropic, coisotropic, lagrangian, symplectic, none };

inline std::string to_string(SubspaceClass c) {
  switch (c) {
    case SubspaceClass::isotropic: return "isotropic";
    case SubspaceClass::coisotropic: return "coisotropic";
    case SubspaceClass::lagrangian: return "lagrangian";
    case SubspaceClass::symplectic: return "symplectic";
    case SubspaceClass::none: return "none";
  }
  return "none";
}

// Classification by comparison with the symplectic complement.
inline SubspaceClass classify(const Subspace& sub, double tol = 1e-8) {
  Subspace comp = symp_complement(sub);
  const MatrixXd& A = sub.basis;
  const MatrixXd& C = comp.basis;
  // contained(X, Y): span X inside span Y
  auto contained = [&](const MatrixXd& X, const MatrixXd& Y) {
    if (X.cols() == 0) return true;
    if (Y.cols() == 0) return false;
    return ((X - Y * (Y.transpose() * X)).colwise().norm().maxCoeff() < tol);
  };
  bool iso = contained(A, C);
  bool coiso = contained(C, A);
  if (iso && coiso) return SubspaceClass::lagrangian;
  if (iso) return SubspaceClass::isotropic;
  if (coiso) return SubspaceClass::coisotropic;
  // symplectic: the form restricts nondegenerately, i.e. complement intersects trivially
  MatrixXd stacked(A.rows(), A.cols() + C.cols());
  stacked << A, C;
  if (numerical_rank(stacked, tol) == A.cols() + C.cols()) return SubspaceClass::symplectic;
  return SubspaceClass::none;
}

// Half-dimensional isotropic frame with orthonormal columns. The complex
// representation X + iY of the stacked blocks is then unitary.
struct LagrangianFrame {
  SymplecticSpace ambient;
  MatrixXd frame;  // 2n x n

  LagrangianFrame() = default;
  LagrangianFrame(const SymplecticSpace& sp, const MatrixXd& raw, bool validate = true)
      : ambient(sp) {
    if (raw.rows() != sp.dim() || raw.cols() != sp.n)
      throw std::invalid_argument("LagrangianFrame: expected a 2n x n matrix");
    frame = orthonormalize(raw);
    if (validate && sp.n > 0) {
      double lag = (frame.transpose() * omega_matrix(sp.n) * frame).cwiseAbs().maxCoeff();
      if (lag > 1e-7)
        throw std::invalid_argument("LagrangianFrame: span is not Lagrangian (residual " +
                                    std::to_string(lag) + ")");
    }
  }
  Subspace span() const { return Subspace(ambient, frame); }
  MatrixXcd unitary() const {
    const int n = ambient.n;
    return frame.topRows(n).cast<std::complex<double>>() +
           std::complex<double>(0, 1) * frame.bottomRows(n).cast<std::complex<double>>();
  }
};

inline double lagrangian_residual(const SymplecticSpace& sp, const MatrixXd& F) {
  if (sp.n == 0) return 0.0;
  return (F.transpose() * omega_matrix(sp.n) * F).cwiseAbs().maxCoeff();
}

// det(X+iY)^2 of the frame's unitary representation.
inline std::complex<double> det_squared(const LagrangianFrame& f) {
  if (f.ambient.n == 0) return {1.0, 0.0};
  std::complex<double> d = f.unitary().determinant();
  return d * d;
}

// Phase of det^2 as a number in [0,1).
inline double principal_phase(const LagrangianFrame& f) {
  double t = std::arg(det_squared(f)) / (2.0 * kPi);
  t -= std::floor(t);
  if (t >= 1.0) t = 0.0;
  return t;
}

// ---------------------------------------------------------------------------
// Deterministic random generators for tests and verification suites.
// ---------------------------------------------------------------------------

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  // Box-Muller; avoids implementation-defined std::normal_distribution.
  double gauss() {
    if (have_) { have_ = false; return cached_; }
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    cached_ = r * std::sin(2.0 * kPi * u2);
    have_ = true;
    return r * std::cos(2.0 * kPi * u2);
  }
  double uniform() {  // in [0,1)
    return (eng_() >> 11) * (1.0 / 9007199254740992.0);
  }
  std::uint64_t integer() { return eng_(); }
  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(integer() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  MatrixXd gauss_matrix(int r, int c) {
    MatrixXd M(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) M(i, j) = gauss();
    return M;
  }

 private:
  std::mt19937_64 eng_;
  bool have_ = false;
  double cached_ = 0.0;
};

// Haar-ish random unitary from QR of a complex Gaussian, diagonal phase fixed.
inline MatrixXcd random_unitary(int n, Rng& rng) {
  MatrixXcd Z(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) Z(i, j) = std::complex<double>(rng.gauss(), rng.gauss());
  Eigen::HouseholderQR<MatrixXcd> qr(Z);
  MatrixXcd Q = qr.householderQ() * MatrixXcd::Identity(n, n);
  MatrixXcd R = qr.matrixQR().topLeftCorner(n, n);
  for (int j = 0; j < n; ++j) Q.col(j) *= R(j, j) / std::abs(R(j, j));
  return Q;
}

inline MatrixXd frame_from_unitary(const MatrixXcd& U) {
  const int n = static_cast<int>(U.rows());
  MatrixXd F(2 * n, n);
  F.topRows(n) = U.real();
  F.bottomRows(n) = U.imag();
  return F;
}

// Uniform-ish Lagrangian frame: the span of the real stacking of a random
// unitary covers the Lagrangian Grassmannian U(n)/O(n).
inline LagrangianFrame random_lagrangian(int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("random_lagrangian: n must be >= 1");
  Rng rng(seed);
  return LagrangianFrame(SymplecticSpace(n), frame_from_unitary(random_unitary(n, rng)));
}

inline LagrangianFrame random_lagrangian(int n, Rng& rng) {
  return LagrangianFrame(SymplecticSpace(n), frame_from_unitary(random_unitary(n, rng)));
}

// exp(J S) with S symmetric is symplectic; these generate Sp(2n).
inline MatrixXd random_symplectic(int n, Rng& rng, double scale = 1.0) {
  MatrixXd S = rng.gauss_matrix(2 * n, 2 * n);
  S = 0.5 * (S + S.transpose()).eval();
  MatrixXd A = j_matrix(n) * S * scale;
  return A.exp();
}

inline bool is_symplectic(const MatrixXd& S, int n, double tol = 1e-8) {
  MatrixXd W = omega_matrix(n);
  return (S.transpose() * W * S - W).cwiseAbs().maxCoeff() < tol;
}

// ---------------------------------------------------------------------------
// Product descriptors: a product of standard factors, each possibly dualized.
// All frame bookkeeping between factor coordinates and the product's own
// standard coordinates goes through embed_matrix, so sign and ordering
// conventions live in exactly one place.
// ---------------------------------------------------------------------------

struct Factor {
  int n = 0;
  bool dualized = false;  // carries -omega
};

struct ProductSignature {
  std::vector<Factor> factors;

  int total_n() const {
    int s = 0;
    for (const auto& f : factors) s += f.n;
    return s;
  }
  SymplecticSpace space() const { return SymplecticSpace(total_n()); }

  static ProductSignature single(int n, bool dualized = false) {
    ProductSignature s;
    s.factors.push_back({n, dualized});
    return s;
  }
  ProductSignature then(int n, bool dualized = false) const {
    ProductSignature s = *this;
    s.factors.push_back({n, dualized});
    return s;
  }
  ProductSignature flipped() const {
    ProductSignature s = *this;
    for (auto& f : s.factors) f.dualized = !f.dualized;
    return s;
  }
  ProductSignature permuted(const std::vector<int>& perm) const {
    ProductSignature s;
    for (int i : perm) s.factors.push_back(factors.at(i));
    return s;
  }
};

// Maps concatenated per-factor standard coordinates (x_i stacked over y_i per
// factor, in order) to the product space's standard coordinates. Orthogonal,
// and pulls the standard form back to  (+/-)Omega_1 (+) ... (+) (+/-)Omega_k.
inline MatrixXd embed_matrix(const ProductSignature& sig) {
  const int N = sig.total_n();
  MatrixXd E = MatrixXd::Zero(2 * N, 2 * N);
  int row_x = 0, col = 0;
  for (const auto& f : sig.factors) {
    for (int i = 0; i < f.n; ++i) {
      E(row_x + i, col + i) = 1.0;                                   // x_i block
      E(N + row_x + i, col + f.n + i) = f.dualized ? -1.0 : 1.0;     // y_i block, sign from dual
    }
    row_x += f.n;
    col += 2 * f.n;
  }
  return E;
}

// Stack per-factor matrices block-diagonally in concatenated coordinates and
// push into product standard coordinates. Column counts are free.
inline MatrixXd product_frame(const ProductSignature& sig, const std::vector<MatrixXd>& blocks) {
  if (blocks.size() != sig.factors.size())
    throw std::invalid_argument("product_frame: block count mismatch");
  const int N = sig.total_n();
  int cols = 0;
  for (const auto& b : blocks) cols += static_cast<int>(b.cols());
  MatrixXd C = MatrixXd::Zero(2 * N, cols);
  int row = 0, col = 0;
  for (size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].rows() != 2 * sig.factors[i].n)
      throw std::invalid_argument("product_frame: block row mismatch");
    C.block(row, col, blocks[i].rows(), blocks[i].cols()) = blocks[i];
    row += blocks[i].rows();
    col += static_cast<int>(blocks[i].cols());
  }
  return embed_matrix(sig) * C;
}

// Change-of-coordinates taking product-standard vectors of `from` to those of
// `to = from.permuted(perm)`. Complex-linear, so det^2 phases are unchanged.
inline MatrixXd factor_permutation_matrix(const ProductSignature& from, const std::vector<int>& perm) {
  ProductSignature to = from.permuted(perm);
  const int N = from.total_n();
  const size_t k = from.factors.size();
  // concatenated-coordinate permutation
  std::vector<int> offset(k + 1, 0);
  for (size_t i = 0; i < k; ++i) offset[i + 1] = offset[i] + 2 * from.factors[i].n;
  MatrixXd P = MatrixXd::Zero(2 * N, 2 * N);
  int dst = 0;
  for (int src_idx : perm) {
    int w = 2 * from.factors[src_idx].n;
    P.block(dst, offset[src_idx], w, w) = MatrixXd::Identity(w, w);
    dst += w;
  }
  return embed_matrix(to) * P * embed_matrix(from).transpose();
}

// Dualize a whole product space: same matrix data, all factor signs flip,
// frames map through diag(I, -I) of the big space.
inline MatrixXd dual_all_matrix(int total_n) {
  MatrixXd D = MatrixXd::Identity(2 * total_n, 2 * total_n);
  D.bottomRightCorner(total_n, total_n) *= -1.0;
  return D;
}

// Intersection of two spans: orthonormal basis of span(A) cap span(B).
inline MatrixXd span_intersection(const MatrixXd& A, const MatrixXd& B, double tol = kRankTol) {
  if (A.cols() == 0 || B.cols() == 0) return MatrixXd::Zero(A.rows(), 0);
  MatrixXd M(A.rows(), A.cols() + B.cols());
  M << A, -B;
  MatrixXd K = null_space(M, tol);
  if (K.cols() == 0) return MatrixXd::Zero(A.rows(), 0);
  return orthonormalize(A * K.topRows(A.cols()));
}

}  // namespace quiltlab
