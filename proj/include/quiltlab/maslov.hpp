// Paths of Lagrangian subspaces: crossing detection by principal angles,
// crossing forms by finite differences, Robbin-Salamon indices with
// half-weighted endpoints, and the det^2 winding lift that serves as the
// independent integer oracle for loop indices.
#pragma once

#include <quiltlab/linalg.hpp>

#include <algorithm>
#include <functional>
#include <optional>

namespace quiltlab {

struct LagrangianPath {
  SymplecticSpace ambient;
  std::function<MatrixXd(double)> eval_frame;  // raw full-rank frame, need not be orthonormal
  int resolution = 512;
  bool orthonormal = false;  // set when eval_frame is known to return orthonormal columns

  MatrixXd frame(double t) const { return eval_frame(t); }
  LagrangianFrame at(double t) const { return LagrangianFrame(ambient, eval_frame(t)); }
};

inline LagrangianPath constant_path(const LagrangianFrame& f) {
  return {f.ambient, [F = f.frame](double) { return F; }, 64, true};
}

// t -> e^{t * angle * J} Lambda
inline LagrangianPath rotation_path(const LagrangianFrame& f, double angle) {
  MatrixXd J = j_matrix(f.ambient.n);
  return {f.ambient,
          [F = f.frame, J, angle](double t) -> MatrixXd { return (t * angle * J).exp() * F; },
          512, true};
}

namespace detail {

inline MatrixXcd principal_log_unitary(const MatrixXcd& U) {
  // complex Schur: for a unitary input T is diagonal up to roundoff, and Q is
  // exactly unitary, which keeps the log skew-Hermitian
  Eigen::ComplexSchur<MatrixXcd> schur(U);
  if (schur.info() != Eigen::Success)
    throw std::runtime_error("principal_log_unitary: Schur decomposition failed");
  const MatrixXcd& T = schur.matrixT();
  const MatrixXcd& Q = schur.matrixU();
  MatrixXcd L = MatrixXcd::Zero(U.rows(), U.cols());
  for (int i = 0; i < T.rows(); ++i) {
    double phase = std::arg(T(i, i));
    if (std::abs(phase) > kPi - 1e-6)
      throw std::runtime_error("principal_log_unitary: eigenvalue on the branch cut");
    L(i, i) = std::complex<double>(0.0, phase);
  }
  return Q * L * Q.adjoint();
}

}  // namespace detail

// Geodesic t -> A exp(t log(A^dagger B)) between unitary representatives; the
// optional orthogonal twist re-chooses the representative of span(B) when the
// principal log is ill-defined.
inline LagrangianPath unitary_geodesic(const LagrangianFrame& a, const LagrangianFrame& b,
                                       const MatrixXd& twist) {
  MatrixXcd A = a.unitary();
  MatrixXcd B = b.unitary() * twist.cast<std::complex<double>>();
  MatrixXcd L = detail::principal_log_unitary((A.adjoint() * B).eval());
  return {a.ambient,
          [A, L](double t) -> MatrixXd { return frame_from_unitary(A * (t * L).exp()); },
          512, true};
}

inline LagrangianPath unitary_geodesic(const LagrangianFrame& a, const LagrangianFrame& b) {
  return unitary_geodesic(a, b, MatrixXd::Identity(a.ambient.n, a.ambient.n));
}

// Forward-rotating canonical interpolation: with S = U U^T, the eigenvalues
// e^{2 i beta_j} of S_b conj(S_a) give rotation angles beta_j in (0, pi), and
// Lambda(s) = T^{s/2} Lambda_a reaches Lambda_b rotating every principal
// direction forward. The initial crossing form with Lambda_a is positive
// definite and interior crossings with Lambda_a are isolated.
inline LagrangianPath forward_rotation_path(const LagrangianFrame& a, const LagrangianFrame& b) {
  const int n = a.ambient.n;
  MatrixXcd Ua = a.unitary(), Ub = b.unitary();
  MatrixXcd T = (Ub * Ub.transpose()) * (Ua * Ua.transpose()).conjugate();
  Eigen::ComplexSchur<MatrixXcd> schur(T);
  if (schur.info() != Eigen::Success)
    throw std::runtime_error("forward_rotation_path: Schur decomposition failed");
  MatrixXcd Q = schur.matrixU();
  VectorXd beta(n);
  for (int i = 0; i < n; ++i) {
    double t = std::arg(schur.matrixT()(i, i));
    beta(i) = (t > 1e-12) ? 0.5 * t : 0.5 * t + kPi;
  }
  return {a.ambient,
          [Q, beta, Ua, n](double s) -> MatrixXd {
            MatrixXcd D = MatrixXcd::Zero(n, n);
            for (int i = 0; i < n; ++i)
              D(i, i) = std::exp(std::complex<double>(0, beta(i) * s));
            return frame_from_unitary(Q * D * Q.adjoint() * Ua);
          },
          512, true};
}

// Loop based at span(f) winding det^2 by k: t -> U diag(e^{i pi k t}, 1, .., 1).
inline LagrangianPath phase_loop(const LagrangianFrame& f, int k) {
  MatrixXcd U = f.unitary();
  const int n = f.ambient.n;
  return {f.ambient,
          [U, k, n](double t) -> MatrixXd {
            MatrixXcd D = MatrixXcd::Identity(n, n);
            D(0, 0) = std::exp(std::complex<double>(0.0, kPi * k * t));
            return frame_from_unitary(U * D);
          },
          512, true};
}

inline LagrangianPath concatenate(const std::vector<LagrangianPath>& pieces) {
  if (pieces.empty()) throw std::invalid_argument("concatenate: empty path list");
  int res = 0;
  for (const auto& p : pieces) res += p.resolution;
  const auto segs = pieces;
  const double m = static_cast<double>(pieces.size());
  bool ortho = true;
  for (const auto& p : pieces) ortho = ortho && p.orthonormal;
  return {pieces.front().ambient,
          [segs, m](double t) -> MatrixXd {
            double u = std::clamp(t, 0.0, 1.0) * m;
            int i = std::min(static_cast<int>(u), static_cast<int>(m) - 1);
            return segs[i].frame(u - i);
          },
          res, ortho};
}

inline LagrangianPath product_path(const LagrangianPath& p, const LagrangianPath& q) {
  ProductSignature sig =
      ProductSignature::single(p.ambient.n, false).then(q.ambient.n, false);
  return {sig.space(),
          [p, q, sig](double t) -> MatrixXd { return product_frame(sig, {p.frame(t), q.frame(t)}); },
          std::max(p.resolution, q.resolution), p.orthonormal && q.orthonormal};
}

inline LagrangianPath transform_path(const LagrangianPath& p, const MatrixXd& S) {
  return {p.ambient, [p, S](double t) -> MatrixXd { return S * p.frame(t); }, p.resolution, false};
}

inline LagrangianPath reparametrize(const LagrangianPath& p, std::function<double(double)> phi) {
  return {p.ambient, [p, phi](double t) -> MatrixXd { return p.frame(phi(t)); }, p.resolution,
          p.orthonormal};
}

// e^{eps J} applied to the whole path; the standard perturbation when a
// crossing form is degenerate.
inline LagrangianPath perturb_path(const LagrangianPath& p, double eps) {
  MatrixXd R = (eps * j_matrix(p.ambient.n)).exp();
  return transform_path(p, R);
}

struct CrossingRecord {
  double s = 0.0;
  Subspace kernel;   // gamma_0(s) cap gamma_1(s)
  MatrixXd form;     // relative rotation form Q_{gamma_1} - Q_{gamma_0} on the kernel basis
  int signature = 0;
  bool endpoint = false;
  bool regular = true;
};

struct IrregularCrossing : std::runtime_error {
  double location;
  explicit IrregularCrossing(double s)
      : std::runtime_error("irregular crossing at s = " + std::to_string(s)), location(s) {}
};

namespace detail {

constexpr double kDipThreshold = 0.1;
constexpr double kCrossingTol = 5e-7;
constexpr double kFormEigTol = 1e-6;
constexpr int kMaxBisect = 40;

inline double sigma_min_fast(const MatrixXd& M) {
  // smallest singular value via the Gram matrix; adequate above ~1e-7
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(M.transpose() * M, Eigen::EigenvaluesOnly);
  double lam = es.eigenvalues().minCoeff();
  return std::sqrt(std::max(lam, 0.0));
}

// smallest principal-angle sine between the two spans at time s
inline double crossing_detector(const LagrangianPath& g0, const LagrangianPath& g1, double s,
                                const MatrixXd& J) {
  MatrixXd F0 = g0.orthonormal ? g0.frame(s) : orthonormalize(g0.frame(s));
  MatrixXd F1 = g1.orthonormal ? g1.frame(s) : orthonormalize(g1.frame(s));
  return sigma_min_fast((J * F1).transpose() * F0);
}

// rotation form of a single path at time s restricted to kernel columns K,
// measured against the metric complement J gamma(s)
inline MatrixXd rotation_form(const LagrangianPath& g, double s, const MatrixXd& K,
                              const MatrixXd& J, double h = 1e-5) {
  const int N = static_cast<int>(K.rows());
  MatrixXd F = g.orthonormal ? g.frame(s) : orthonormalize(g.frame(s));
  MatrixXd W = omega_matrix(N / 2);
  MatrixXd JF = J * F;

  auto w_of = [&](double t) -> MatrixXd {
    // solve [F(s+t) | JF] [c; a] = v columnwise; w = -JF a
    MatrixXd Ft = g.frame(s + t);
    MatrixXd M(N, N);
    M << Ft, JF;
    MatrixXd sol = M.partialPivLu().solve(K);
    return -JF * sol.bottomRows(N / 2);
  };

  MatrixXd D;
  if (s + h <= 1.0 && s - h >= 0.0) {
    auto central = [&](double hh) -> MatrixXd { return (w_of(hh) - w_of(-hh)) / (2.0 * hh); };
    D = (4.0 * central(h / 2) - central(h)) / 3.0;
  } else {
    double dir = (s + h > 1.0) ? -1.0 : 1.0;
    auto onesided = [&](double hh) -> MatrixXd { return w_of(dir * hh) / (dir * hh); };
    D = 2.0 * onesided(h / 2) - onesided(h);
  }
  MatrixXd B = K.transpose() * W * D;
  return 0.5 * (B + B.transpose());
}

}  // namespace detail

// Locate all parameters with nontrivial intersection and attach crossing
// data. The form convention makes a positively rotating second path against a
// constant first path positive definite.
inline std::vector<CrossingRecord> find_crossings(const LagrangianPath& g0,
                                                  const LagrangianPath& g1) {
  if (g0.ambient != g1.ambient) throw std::invalid_argument("find_crossings: ambient mismatch");
  const int n = g0.ambient.n;
  std::vector<CrossingRecord> out;
  if (n == 0) return out;
  MatrixXd J = j_matrix(n);

  const int R = std::max({g0.resolution, g1.resolution, 64});
  std::vector<double> grid(R + 1), val(R + 1);
  for (int i = 0; i <= R; ++i) {
    grid[i] = static_cast<double>(i) / R;
    val[i] = detail::crossing_detector(g0, g1, grid[i], J);
  }

  std::vector<double> locations;
  auto refine = [&](double lo, double hi) {
    for (int it = 0; it < detail::kMaxBisect; ++it) {
      double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
      if (detail::crossing_detector(g0, g1, m1, J) < detail::crossing_detector(g0, g1, m2, J))
        hi = m2;
      else
        lo = m1;
      if (hi - lo < 1e-12) break;
    }
    return 0.5 * (lo + hi);
  };

  // endpoint crossings
  if (val[0] < detail::kCrossingTol) locations.push_back(0.0);
  if (val[R] < detail::kCrossingTol) locations.push_back(1.0);

  // interior dips: scan runs below the dip threshold with a finer mesh
  int i = 1;
  while (i < R) {
    if (std::min(val[i], val[i + 1]) < detail::kDipThreshold ||
        std::min(val[i - 1], val[i]) < detail::kDipThreshold) {
      int j = i;
      while (j < R && (val[j] < detail::kDipThreshold || val[j + 1] < detail::kDipThreshold)) ++j;
      double lo = grid[std::max(0, i - 1)], hi = grid[std::min(R, j + 1)];
      const int fine = 64 * (j - i + 2);
      double prev2 = -1, prev = -1, prevs = lo;
      for (int k = 0; k <= fine; ++k) {
        double s = lo + (hi - lo) * k / fine;
        double v = detail::crossing_detector(g0, g1, s, J);
        if (k >= 2 && prev <= prev2 && prev <= v && prev < detail::kDipThreshold) {
          double c = refine(std::max(lo, prevs - (hi - lo) / fine),
                            std::min(hi, prevs + (hi - lo) / fine));
          if (detail::crossing_detector(g0, g1, c, J) < detail::kCrossingTol &&
              c > 1e-9 && c < 1.0 - 1e-9)
            locations.push_back(c);
        }
        prev2 = prev;
        prevs = s;
        prev = v;
      }
      i = j + 1;
    } else {
      ++i;
    }
  }

  // near-coincident crossings merge into a single dip; resolve a candidate by
  // a micro-scan of its window whenever a second principal angle is suspect
  {
    std::vector<double> resolved;
    auto g_at = [&](double s) { return detail::crossing_detector(g0, g1, s, J); };
    auto second_sigma = [&](double s) {
      MatrixXd F0 = g0.orthonormal ? g0.frame(s) : orthonormalize(g0.frame(s));
      MatrixXd F1 = g1.orthonormal ? g1.frame(s) : orthonormalize(g1.frame(s));
      MatrixXd M = (J * F1).transpose() * F0;
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(M.transpose() * M, Eigen::EigenvaluesOnly);
      if (es.eigenvalues().size() < 2) return 1.0;
      double lam = es.eigenvalues()(1);
      return std::sqrt(std::max(lam, 0.0));
    };
    for (double s : locations) {
      if (s < 1e-9 || s > 1.0 - 1e-9 || second_sigma(s) > 3e-4) {
        resolved.push_back(s);
        continue;
      }
      const double w = 1.5e-4, step = 2e-6;
      double lo = std::max(1e-9, s - w), hi = std::min(1.0 - 1e-9, s + w);
      double pp = 1e18, p = 1e18, ps = lo;
      bool found_any = false;
      for (double x = lo; x <= hi + step / 2; x += step) {
        double v = g_at(x);
        if (p <= pp && p <= v && p < 50 * detail::kCrossingTol) {
          double c = refine(std::max(lo, ps - step), std::min(hi, ps + step));
          if (g_at(c) < detail::kCrossingTol) {
            resolved.push_back(c);
            found_any = true;
          }
        }
        pp = p;
        p = v;
        ps = x - step;
      }
      if (!found_any) resolved.push_back(s);
    }
    locations.swap(resolved);
  }

  std::sort(locations.begin(), locations.end());
  locations.erase(std::unique(locations.begin(), locations.end(),
                              [](double a, double b) { return std::abs(a - b) < 5e-7; }),
                  locations.end());

  for (size_t li = 0; li < locations.size(); ++li) {
    double s = locations[li];
    CrossingRecord rec;
    rec.s = s;
    rec.endpoint = (s < 1e-9 || s > 1.0 - 1e-9);
    MatrixXd F0 = g0.orthonormal ? g0.frame(s) : orthonormalize(g0.frame(s));
    MatrixXd F1 = g1.orthonormal ? g1.frame(s) : orthonormalize(g1.frame(s));
    Eigen::JacobiSVD<MatrixXd> svd((J * F1).transpose() * F0, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    int k = 0;
    for (int q = 0; q < sv.size(); ++q)
      if (sv(q) < 1e-6) ++k;
    if (k == 0) continue;  // refinement landed on a near miss
    MatrixXd K = orthonormalize(F0 * svd.matrixV().rightCols(k));
    rec.kernel = Subspace(g0.ambient, K);
    // shrink the difference stencil when another crossing sits nearby
    double gap = 1.0;
    if (li > 0) gap = std::min(gap, s - locations[li - 1]);
    if (li + 1 < locations.size()) gap = std::min(gap, locations[li + 1] - s);
    double h = std::min(1e-5, std::max(1e-8, gap / 4.0));
    MatrixXd B = detail::rotation_form(g1, s, K, J, h) - detail::rotation_form(g0, s, K, J, h);
    rec.form = B;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(B);
    int pos = 0, neg = 0, null = 0;
    for (int q = 0; q < es.eigenvalues().size(); ++q) {
      double lam = es.eigenvalues()(q);
      if (lam > detail::kFormEigTol) ++pos;
      else if (lam < -detail::kFormEigTol) ++neg;
      else ++null;
    }
    rec.signature = pos - neg;
    rec.regular = (null == 0);
    out.push_back(rec);
  }
  return out;
}

// Half-integer represented by its doubled value.
struct HalfInt {
  int twice = 0;
  double value() const { return 0.5 * twice; }
  std::string str() const {
    if (twice % 2 == 0) return std::to_string(twice / 2);
    return std::to_string(twice) + "/2";
  }
  bool operator==(const HalfInt& o) const { return twice == o.twice; }
};

// Robbin-Salamon index of the pair: endpoint crossings weighted 1/2.
inline HalfInt rs_index(const LagrangianPath& g0, const LagrangianPath& g1) {
  HalfInt out;
  for (const auto& c : find_crossings(g0, g1)) {
    if (!c.regular) throw IrregularCrossing(c.s);
    out.twice += c.endpoint ? c.signature : 2 * c.signature;
  }
  return out;
}

// Interior crossings only, of a moving path against a fixed Lagrangian.
inline int rs_index_interior(const LagrangianPath& g, const LagrangianFrame& lambda) {
  int sum = 0;
  for (const auto& c : find_crossings(constant_path(lambda), g)) {
    if (!c.regular) throw IrregularCrossing(c.s);
    if (!c.endpoint) sum += c.signature;
  }
  return sum;
}

// Continuous lift of arg det^2 / 2 pi along the path; integer-valued on loops
// and additive under concatenation.
inline double winding_lift(const LagrangianPath& g) {
  auto det2 = [&](double t) -> std::complex<double> {
    MatrixXd F = g.frame(t);
    const int n = g.ambient.n;
    MatrixXcd U = F.topRows(n).cast<std::complex<double>>() +
                  std::complex<double>(0, 1) * F.bottomRows(n).cast<std::complex<double>>();
    std::complex<double> d = U.determinant();
    return d * d;  // argument is basis independent; magnitude is irrelevant here
  };
  if (g.ambient.n == 0) return 0.0;
  double total = 0.0;
  std::function<double(double, double, std::complex<double>, std::complex<double>, int)> go =
      [&](double t0, double t1, std::complex<double> d0, std::complex<double> d1,
          int depth) -> double {
    double dphi = std::arg(d1 / d0) / (2.0 * kPi);
    if (std::abs(dphi) < 0.2 || depth > 24) return dphi;
    double tm = 0.5 * (t0 + t1);
    std::complex<double> dm = det2(tm);
    return go(t0, tm, d0, dm, depth + 1) + go(tm, t1, dm, d1, depth + 1);
  };
  const int R = std::max(g.resolution, 64);
  std::complex<double> prev = det2(0.0);
  for (int i = 1; i <= R; ++i) {
    double t0 = static_cast<double>(i - 1) / R, t1 = static_cast<double>(i) / R;
    std::complex<double> cur = det2(t1);
    total += go(t0, t1, prev, cur, 0);
    prev = cur;
  }
  return total;
}

}  // namespace quiltlab
