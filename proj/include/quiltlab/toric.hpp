// Complex projective spaces with their torus moment maps: Clifford tori, the
// sphere-times-torus correspondences from reduction at common moment levels,
// monotonicity constants from polytope data, embedded-composition checks by
// sampling, and Morse-perturbed generator enumeration feeding the quilted
// degree machinery.
#pragma once

#include <quiltlab/quilt.hpp>

#include <algorithm>
#include <numeric>

namespace quiltlab {
namespace toric {

// rational multiple of pi, kept exact
struct PiFraction {
  long long num = 0, den = 1;
  double value() const { return kPi * num / den; }
  bool operator==(const PiFraction& o) const {
    return num * o.den == o.num * den;
  }
};

// mu_j([z]) = pi |z_j|^2 / |z|^2
inline double moment(const VectorXcd& z, int j) {
  if (z.norm() < 1e-12) throw std::invalid_argument("moment: zero vector");
  if (j < 0 || j >= z.size()) throw std::invalid_argument("moment: index out of range");
  return kPi * std::norm(z(j)) / z.squaredNorm();
}

// A point of CP^m as a unit homogeneous vector with canonical phase (first
// nonzero coordinate real positive).
struct ProjectivePoint {
  VectorXcd z;

  explicit ProjectivePoint(const VectorXcd& raw) {
    if (raw.norm() < 1e-12) throw std::invalid_argument("ProjectivePoint: zero vector");
    z = raw / raw.norm();
    int lead = -1;
    for (int i = 0; i < z.size() && lead < 0; ++i)
      if (std::abs(z(i)) > 1e-12) lead = i;
    std::complex<double> phase = z(lead) / std::abs(z(lead));
    z /= phase;
  }
  int dim() const { return static_cast<int>(z.size()) - 1; }
  bool same_point(const ProjectivePoint& o, double tol = 1e-9) const {
    std::complex<double> ip = (z.adjoint() * o.z)(0);
    return std::abs(std::abs(ip) - 1.0) < tol;
  }
};

// ---------------------------------------------------------------------------
// Charts. The tangent space of CP^m at [z] is the complex orthogonal
// complement of z with symplectic form scale * Im<.,.>; a deterministic
// unitary basis of z-perp and sqrt(scale) coordinates make it standard.
// ---------------------------------------------------------------------------

struct Chart {
  VectorXcd z;       // the representative all tangent data refers to
  MatrixXcd basis;   // (m+1) x m unitary columns spanning z-perp
  double scale = 1;

  int m() const { return static_cast<int>(basis.cols()); }

  VectorXd coords(const VectorXcd& u) const {
    VectorXcd a = basis.adjoint() * u;
    VectorXd out(2 * m());
    out.head(m()) = std::sqrt(scale) * a.real();
    out.tail(m()) = std::sqrt(scale) * a.imag();
    return out;
  }
};

inline VectorXcd project_tangent(const VectorXcd& z, const VectorXcd& dz) {
  return dz - (z.adjoint() * dz)(0) * z;
}

inline Chart make_chart(const VectorXcd& z_unit, double scale) {
  Chart ch;
  ch.z = z_unit;
  ch.scale = scale;
  const int d = static_cast<int>(z_unit.size());
  MatrixXcd M(d, d);
  M.col(0) = z_unit;
  M.rightCols(d - 1) = MatrixXcd::Identity(d, d - 1);
  Eigen::HouseholderQR<MatrixXcd> qr(M);
  MatrixXcd Q = qr.householderQ() * MatrixXcd::Identity(d, d);
  std::complex<double> ph = (Q.col(0).adjoint() * z_unit)(0);
  Q.col(0) *= ph;
  ch.basis = Q.rightCols(d - 1);
  return ch;
}

// phase aligning tangent representatives taken at rep `from` with a chart
// built at rep `to` of the same projective point
inline std::complex<double> rep_alignment(const VectorXcd& from, const VectorXcd& to) {
  std::complex<double> ip = (from.adjoint() * to)(0);
  if (std::abs(ip) < 1e-9) throw std::invalid_argument("rep_alignment: different points");
  return ip / std::abs(ip);
}

// ---------------------------------------------------------------------------
// Clifford tori.
// ---------------------------------------------------------------------------

struct CliffordTorus {
  int n = 1;

  explicit CliffordTorus(int dim) : n(dim) {}

  PiFraction level() const { return {1, n + 1}; }

  VectorXcd point(const VectorXd& theta) const {
    if (theta.size() != n) throw std::invalid_argument("CliffordTorus: angle count mismatch");
    VectorXcd z(n + 1);
    z(0) = 1.0;
    for (int i = 0; i < n; ++i) z(i + 1) = std::exp(std::complex<double>(0, 2 * kPi * theta(i)));
    return z / std::sqrt(static_cast<double>(n + 1));
  }

  bool contains(const VectorXcd& raw, double tol = 1e-9) const {
    VectorXcd z = raw / raw.norm();
    for (int j = 0; j <= n; ++j)
      if (std::abs(std::norm(z(j)) - 1.0 / (n + 1)) > tol) return false;
    return true;
  }

  std::vector<VectorXcd> tangent_reps(const VectorXd& theta) const {
    VectorXcd z = point(theta);
    std::vector<VectorXcd> out;
    for (int i = 0; i < n; ++i) {
      VectorXcd dz = VectorXcd::Zero(n + 1);
      dz(i + 1) = std::complex<double>(0, 2 * kPi) * z(i + 1);
      out.push_back(project_tangent(z, dz));
    }
    return out;
  }

  MatrixXd raw_frame(const Chart& ch, const VectorXd& theta) const {
    auto reps = tangent_reps(theta);
    std::complex<double> ph = rep_alignment(point(theta), ch.z);
    MatrixXd F(2 * n, n);
    for (int i = 0; i < n; ++i) F.col(i) = ch.coords(ph * reps[i]);
    return F;
  }

  LagrangianFrame tangent_frame(const Chart& ch, const VectorXd& theta) const {
    return LagrangianFrame(standard_space(n), raw_frame(ch, theta));
  }

  // det^2 lift at the parametrized point, transported from theta = 0 along
  // the straight segment in angle coordinates
  double lift(const VectorXd& theta, int modulus) const {
    VectorXd base = VectorXd::Zero(n);
    Chart ch0 = make_chart(point(base), 1.0);
    double theta0 = principal_phase(tangent_frame(ch0, base));
    LagrangianPath path{standard_space(n),
                        [this, theta](double s) -> MatrixXd {
                          VectorXd th = s * theta;
                          Chart ch = make_chart(point(th), 1.0);
                          return raw_frame(ch, th);
                        },
                        128, false};
    (void)modulus;
    return theta0 + winding_lift(path);
  }
};

// ---------------------------------------------------------------------------
// Moment-fiber correspondences Sigma_S in (CP^{n-|S|})^- x CP^n, cut out by
// mu_j = pi/(n+1) for j in S. Diffeomorphic to S^{2m+1} x T^{|S|-1} where
// m + 1 = n + 1 - |S| counts the free slots.
// ---------------------------------------------------------------------------

struct MomentFiberCorrespondence {
  int n = 2;
  std::vector<int> levels;  // subset of {1..n}, sorted
  std::vector<int> free_slots;

  MomentFiberCorrespondence(int nn, std::vector<int> S) : n(nn), levels(std::move(S)) {
    std::sort(levels.begin(), levels.end());
    if (levels.empty() || levels.front() < 1 || levels.back() > n)
      throw std::invalid_argument("MomentFiberCorrespondence: levels must lie in 1..n");
    for (size_t i = 0; i + 1 < levels.size(); ++i)
      if (levels[i] == levels[i + 1])
        throw std::invalid_argument("MomentFiberCorrespondence: duplicate level");
    std::vector<bool> in(n + 1, false);
    for (int j : levels) in[j] = true;
    for (int j = 0; j <= n; ++j)
      if (!in[j]) free_slots.push_back(j);
    if (source_dim() < 1)
      throw std::invalid_argument("MomentFiberCorrespondence: source must have dimension >= 1");
  }

  static MomentFiberCorrespondence trailing(int k, int n) {
    if (k < 2 || k > n) throw std::invalid_argument("sigma: need 2 <= k <= n");
    std::vector<int> S;
    for (int j = k; j <= n; ++j) S.push_back(j);
    return MomentFiberCorrespondence(n, S);
  }

  PiFraction level_value() const { return {1, n + 1}; }
  int source_dim() const { return n - static_cast<int>(levels.size()); }  // CP^{source_dim}
  int sphere_slots() const { return source_dim() + 1; }
  double reduced_scale() const { return static_cast<double>(sphere_slots()) / (n + 1); }
  int half_dim() const { return source_dim() + n; }  // of the correspondence space

  // parameters: w in C^{sphere_slots} with |w|^2 = sphere_slots/(n+1), and
  // psi in T^{|S|-1} phases of the level slots past the first (gauge: the
  // first level slot is real positive)
  VectorXcd ambient_point(const VectorXcd& w, const VectorXd& psi) const {
    const int sph = sphere_slots();
    if (w.size() != sph || psi.size() != static_cast<int>(levels.size()) - 1)
      throw std::invalid_argument("MomentFiberCorrespondence: parameter size mismatch");
    VectorXcd z = VectorXcd::Zero(n + 1);
    for (int i = 0; i < sph; ++i) z(free_slots[i]) = w(i);
    const double r = 1.0 / std::sqrt(static_cast<double>(n + 1));
    z(levels[0]) = r;
    for (size_t s = 1; s < levels.size(); ++s)
      z(levels[s]) = r * std::exp(std::complex<double>(0, 2 * kPi * psi(s - 1)));
    return z;
  }
  VectorXcd source_point(const VectorXcd& w) const { return w / w.norm(); }

  bool contains(const VectorXcd& v_raw, const VectorXcd& z_raw, double tol = 1e-9) const {
    VectorXcd z = z_raw / z_raw.norm();
    for (int j : levels)
      if (std::abs(moment(z, j) - level_value().value()) > tol * kPi) return false;
    VectorXcd head(sphere_slots());
    for (int i = 0; i < sphere_slots(); ++i) head(i) = z(free_slots[i]);
    if (head.norm() < 1e-12) return false;
    VectorXcd v = v_raw / v_raw.norm();
    std::complex<double> ip = (v.adjoint() * (head / head.norm()))(0);
    return std::abs(std::abs(ip) - 1.0) < tol;
  }

  struct TangentRep {
    VectorXcd src, tgt;
  };

  std::vector<TangentRep> tangent_reps(const VectorXcd& w, const VectorXd& psi) const {
    VectorXcd z = ambient_point(w, psi);
    VectorXcd v = source_point(w);
    const int sph = sphere_slots();
    std::vector<TangentRep> out;
    for (int i = 0; i < 2 * sph; ++i) {
      VectorXcd xi = VectorXcd::Zero(sph);
      if (i < sph)
        xi(i) = 1.0;
      else
        xi(i - sph) = std::complex<double>(0, 1);
      std::complex<double> ip = (w.adjoint() * xi)(0);
      xi -= (ip.real() / w.squaredNorm()) * w;  // stay on the sphere
      if (xi.norm() < 1e-10) continue;
      TangentRep tr;
      VectorXcd dz = VectorXcd::Zero(n + 1);
      for (int q = 0; q < sph; ++q) dz(free_slots[q]) = xi(q);
      tr.tgt = project_tangent(z, dz);
      tr.src = project_tangent(v, xi / w.norm());
      out.push_back(tr);
    }
    for (size_t s = 1; s < levels.size(); ++s) {
      TangentRep tr;
      VectorXcd dz = VectorXcd::Zero(n + 1);
      dz(levels[s]) = std::complex<double>(0, 2 * kPi) * z(levels[s]);
      tr.tgt = project_tangent(z, dz);
      tr.src = VectorXcd::Zero(sph);
      out.push_back(tr);
    }
    return out;
  }

  // raw frame columns in the joint chart coordinates (source chart first)
  MatrixXd raw_frame(const Chart& src_chart, const Chart& tgt_chart, const VectorXcd& w,
                     const VectorXd& psi) const {
    auto reps = tangent_reps(w, psi);
    std::complex<double> ph_src = rep_alignment(source_point(w), src_chart.z);
    std::complex<double> ph_tgt = rep_alignment(ambient_point(w, psi), tgt_chart.z);
    const int ds = source_dim();
    MatrixXd raw(2 * ds + 2 * n, static_cast<int>(reps.size()));
    for (size_t c = 0; c < reps.size(); ++c) {
      VectorXd col(raw.rows());
      col.head(2 * ds) = src_chart.coords(ph_src * reps[c].src);
      col.tail(2 * n) = tgt_chart.coords(ph_tgt * reps[c].tgt);
      raw.col(static_cast<int>(c)) = col;
    }
    Eigen::JacobiSVD<MatrixXd> svd(raw, Eigen::ComputeThinU);
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()(i) > 1e-9 * svd.singularValues()(0)) ++rank;
    if (rank != half_dim())
      throw std::runtime_error("MomentFiberCorrespondence: tangent rank " + std::to_string(rank) +
                               ", expected " + std::to_string(half_dim()));
    return svd.matrixU().leftCols(rank);
  }

  // frame of the correspondence in std(dual(CP^{source}) x CP^n)
  LagrangianFrame tangent_frame(const Chart& src_chart, const Chart& tgt_chart,
                                const VectorXcd& w, const VectorXd& psi) const {
    ProductSignature sig = corr_signature(source_dim(), n);
    return LagrangianFrame(sig.space(), embed_matrix(sig) * raw_frame(src_chart, tgt_chart, w, psi));
  }

  // transposed frame, in std(dual(CP^n) x CP^{source})
  LagrangianFrame transposed_frame(const Chart& tgt_chart, const Chart& src_chart,
                                   const VectorXcd& w, const VectorXd& psi) const {
    MatrixXd raw = raw_frame(src_chart, tgt_chart, w, psi);
    const int ds = source_dim();
    MatrixXd swapped(raw.rows(), raw.cols());
    swapped.topRows(2 * n) = raw.bottomRows(2 * n);
    swapped.bottomRows(2 * ds) = raw.topRows(2 * ds);
    ProductSignature sig = corr_signature(n, ds);
    return LagrangianFrame(sig.space(), embed_matrix(sig) * swapped);
  }
};

inline MomentFiberCorrespondence sigma(int k, int n) {
  return MomentFiberCorrespondence::trailing(k, n);
}

// ---------------------------------------------------------------------------
// Monotonicity constants from polytope data: the ambient line has symplectic
// area pi and Chern number n+1; the reduced line at level pi/(n+1) has area
// pi k/(n+1) and Chern number k.
// ---------------------------------------------------------------------------

inline PiFraction reduced_space_scale(int k, int n) {
  long long g = std::gcd(static_cast<long long>(k), static_cast<long long>(n + 1));
  return {k / g, (n + 1) / g};
}

inline PiFraction tau_ambient(int n) { return {1, n + 1}; }

inline PiFraction tau_reduced(int k, int n) {
  // area pi k/(n+1) divided by Chern number k
  long long num = k, den = static_cast<long long>(n + 1) * k;
  long long g = std::gcd(num, den);
  return {num / g, den / g};
}

// ---------------------------------------------------------------------------
// Morse data on torus fibers: f(theta) = sum c_i cos(2 pi theta_i). Critical
// points have each angle in {0, 1/2}; the Morse index counts the angles at 0.
// ---------------------------------------------------------------------------

struct MorseData {
  VectorXd coefficients;

  explicit MorseData(int n) : coefficients(n) {
    for (int i = 0; i < n; ++i) coefficients(i) = 1.0 + 0.117 * i;
  }
  int n() const { return static_cast<int>(coefficients.size()); }

  VectorXd critical_point(unsigned mask) const {
    VectorXd th(n());
    for (int i = 0; i < n(); ++i) th(i) = (mask >> i & 1u) ? 0.0 : 0.5;
    return th;
  }
  int morse_index(unsigned mask) const {
    int idx = 0;
    for (int i = 0; i < n(); ++i)
      if (mask >> i & 1u) ++idx;  // f'' < 0 at theta = 0
    return idx;
  }
  MatrixXd hessian(unsigned mask) const {
    MatrixXd H = MatrixXd::Zero(n(), n());
    for (int i = 0; i < n(); ++i) {
      double c = (mask >> i & 1u) ? 1.0 : -1.0;
      H(i, i) = -4.0 * kPi * kPi * coefficients(i) * c;
      if (std::abs(H(i, i)) < 1e-12)
        throw std::invalid_argument("MorseData: degenerate critical point");
    }
    return H;
  }
};

// Linearized time-delta flow of the fiber Morse function at a critical point:
// the symplectic shear exp(-delta J S) with S the Hessian form pushed to the
// chart through the parametrization differential.
inline GradedSymplectic morse_shear(const MatrixXd& torus_frame_raw, const MatrixXd& hess,
                                    int m, int modulus, double delta = 5e-2) {
  MatrixXd T = torus_frame_raw;  // 2m x n_angles, columns d(point)/d(theta_i)
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(T);
  MatrixXd pinv = cod.pseudoInverse();  // n_angles x 2m
  MatrixXd S = pinv.transpose() * hess * pinv;
  S = 0.5 * (S + S.transpose()).eval();
  MatrixXd A = -delta * j_matrix(m) * S;
  return GradedSymplectic(standard_space(m),
                          [A](double t) -> MatrixXd { return (t * A).exp(); }, modulus);
}

}  // namespace toric
}  // namespace quiltlab
