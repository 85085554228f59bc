// Cyclic generalized correspondences over the lattice-torus provider:
// generator enumeration by integer linear algebra, generator degrees by three
// independent formulas, diagonal insertion, folding, composition with the
// canonical generator bijection, Kuenneth splitting, and graded chain
// complexes with pluggable count oracles.
#pragma once

#include <quiltlab/grading.hpp>
#include <quiltlab/homology.hpp>

#include <optional>

namespace quiltlab {

// ---------------------------------------------------------------------------
// Generic degree formulas on the linearized data of a generator. tangents[j]
// is the graded tangent correspondence at the j-th seam, with
// tangents[j].corr.source = M_j and .target = M_{j+1} (cyclic).
// ---------------------------------------------------------------------------

struct SeamTangents {
  std::vector<GradedCorrespondence> tangents;
  int modulus = 2;

  int length() const { return static_cast<int>(tangents.size()); }
  int dim(int j) const {
    int r1 = length();
    return tangents[((j % r1) + r1) % r1].corr.source.n;
  }
  void validate() const {
    if (tangents.empty()) throw std::invalid_argument("SeamTangents: empty sequence");
    for (int j = 0; j < length(); ++j) {
      if (tangents[j].modulus != modulus)
        throw std::invalid_argument("SeamTangents: modulus mismatch");
      if (tangents[j].corr.target.n != dim(j + 1))
        throw std::invalid_argument("SeamTangents: seam endpoint mismatch at " +
                                    std::to_string(j));
    }
  }
};

namespace qdetail {

// product of all seam lifts, in the cyclic ambient  M_0^- x M_1 x ... x M_0
inline GradedLagrangian big_product(const SeamTangents& st) {
  std::vector<GradedLagrangian> parts;
  for (const auto& t : st.tangents) parts.push_back(t.graded());
  return graded_product(parts);
}

// transposed product of dual diagonals, graded factor by factor
inline GradedLagrangian diagonal_product(const SeamTangents& st) {
  const int r1 = st.length();
  std::vector<GradedLagrangian> parts;
  std::vector<int> dims;
  for (int j = 0; j < r1; ++j) {
    parts.push_back(canonical_diagonal_dual(st.dim(j), st.modulus));
    dims.push_back(st.dim(j));
    dims.push_back(st.dim(j));
  }
  GradedLagrangian prod = graded_product(parts);
  // move the leading M_0 factor to the back: (M0 x M0^- x ... x Mr^-)^T
  std::vector<int> perm;
  for (int i = 1; i < 2 * r1; ++i) perm.push_back(i);
  perm.push_back(0);
  return graded_permute(prod, dims, perm);
}

}  // namespace qdetail

// Definition-level degree: d(sigma_L(x), sigma_{Delta^T}(x)).
inline int generator_degree(const SeamTangents& st) {
  st.validate();
  GradedLagrangian L = qdetail::big_product(st);
  GradedLagrangian D = qdetail::diagonal_product(st);
  if (!frames_transverse(L.frame, D.frame))
    throw std::invalid_argument("generator_degree: generator is not transverse");
  return degree(L, D);
}

// Split-tuple degree: transport the product lift along a path to a split
// Lagrangian tuple staying transverse to the diagonal, then sum the factor
// degrees d(L_i', L_i''^-).
inline int generator_degree_alt_a(const SeamTangents& st, Rng& rng, int max_attempts = 30) {
  st.validate();
  const int N = st.modulus;
  const int r1 = st.length();
  GradedLagrangian L = qdetail::big_product(st);
  GradedLagrangian D = qdetail::diagonal_product(st);
  if (!frames_transverse(L.frame, D.frame))
    throw std::invalid_argument("generator_degree_alt_a: generator is not transverse");

  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    // split tuple: primed in M_i, double primed in M_i^- (dual-model frames)
    std::vector<LagrangianFrame> primed(r1), dprimed(r1);
    bool ok = true;
    for (int i = 0; i < r1 && ok; ++i) {
      int n = st.dim(i);
      primed[i] = random_lagrangian(n, rng);
      dprimed[i] = random_lagrangian(n, rng);
      // Lambda_i' x Lambda_i'' must be transverse to the diagonal of M_i
      GradedLagrangian pp = graded_product(
          {grade(primed[i], 0, N), grade(dprimed[i], 0, N)});
      LagrangianFrame diag(pp.frame.ambient, diagonal_frame_vdual_std(n));
      if (!frames_transverse(pp.frame, diag, 1e-6)) ok = false;
    }
    if (!ok) continue;

    // target: (L_0'' x L_1') x (L_1'' x L_2') x ... x (L_r'' x L_0')
    std::vector<GradedLagrangian> slots;
    for (int j = 0; j < r1; ++j) {
      slots.push_back(grade(dprimed[j], 0, N));
      slots.push_back(grade(primed[(j + 1) % r1], 0, N));
    }
    GradedLagrangian target = graded_product(slots);

    // both endpoints live in the contractible chart of diagonal-transverse
    // Lagrangians; the chart path stays transverse throughout
    LagrangianPath path = transverse_chart_path(D.frame, L.frame, target.frame);
    double transported = L.theta + winding_lift(path);

    double slack = transported - target.theta;
    long long m = std::llround(slack);
    if (std::abs(slack - m) > 1e-5)
      throw std::runtime_error("generator_degree_alt_a: transported lift is not integral");

    long long total = 0;
    for (int i = 0; i < r1; ++i) {
      GradedLagrangian gp = grade(primed[i], 0, N);
      // dump the integer slack onto the first double-primed lift
      GradedLagrangian gd(dprimed[i], principal_phase(dprimed[i]) + (i == 0 ? m : 0), N);
      total += degree(gp, dual_graded(gd));
    }
    return static_cast<int>(((total % N) + N) % N);
  }
  throw std::runtime_error("generator_degree_alt_a: no transverse split path found");
}

// Folded two-Lagrangian degree. Odd-length sequences route through diagonal
// insertion at the seam into M_0.
struct FoldedPair {
  GradedLagrangian zero;  // L_(0) in the folded product
  GradedLagrangian one;   // L_(1), graded over the dual of the folded product
};

inline SeamTangents insert_diagonal_tangents(const SeamTangents& st, int position) {
  const int r1 = st.length();
  position = ((position % r1) + r1) % r1;
  SeamTangents out;
  out.modulus = st.modulus;
  for (int j = 0; j < r1; ++j) {
    out.tangents.push_back(st.tangents[j]);
    if (j == position) {
      int n = st.dim(j + 1);
      GradedLagrangian diag = canonical_diagonal(n, st.modulus);
      LinearCorrespondence c(standard_space(n), standard_space(n), diag.frame);
      out.tangents.push_back(GradedCorrespondence(c, diag.theta, st.modulus));
    }
  }
  return out;
}

inline FoldedPair fold_tangents(const SeamTangents& st_in) {
  st_in.validate();
  SeamTangents st = st_in;
  if (st.length() % 2 != 0) st = insert_diagonal_tangents(st_in, st_in.length() - 1);
  const int r1 = st.length();

  std::vector<GradedLagrangian> evens, odds;
  std::vector<int> odd_dims;
  for (int j = 0; j < r1; j += 2) evens.push_back(st.tangents[j].graded());
  for (int j = 1; j < r1; j += 2) {
    odds.push_back(st.tangents[j].graded());
    odd_dims.push_back(st.dim(j));
    odd_dims.push_back(st.dim(j + 1));
  }
  FoldedPair out;
  out.zero = graded_product(evens);
  GradedLagrangian pre = graded_product(odds);
  // move the trailing M_0 factor to the front
  std::vector<int> perm;
  perm.push_back(static_cast<int>(odd_dims.size()) - 1);
  for (size_t i = 0; i + 1 < odd_dims.size(); ++i) perm.push_back(static_cast<int>(i));
  out.one = graded_permute(pre, odd_dims, perm);
  return out;
}

inline int generator_degree_alt_b(const SeamTangents& st) {
  FoldedPair fp = fold_tangents(st);
  return degree(fp.zero, dual_graded(fp.one));
}

// Composition at a seam on the linear level; degrees are preserved whenever
// the underlying composition is embedded.
inline SeamTangents compose_tangents_at(const SeamTangents& st, int j) {
  st.validate();
  const int r1 = st.length();
  if (r1 < 2) throw std::invalid_argument("compose_tangents_at: need at least two seams");
  j = ((j % r1) + r1) % r1;
  int jn = (j + 1) % r1;
  SeamTangents out;
  out.modulus = st.modulus;
  GradedCorrespondence merged = compose_graded(st.tangents[j], st.tangents[jn]);
  for (int i = 0; i < r1; ++i) {
    if (i == jn) continue;
    out.tangents.push_back(i == j ? merged : st.tangents[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lattice torus provider: M = R^{2n} / Z^{2n}, correspondences are affine
// subtori with primitive integer direction lattices.
// ---------------------------------------------------------------------------

inline MatrixXl product_form_int(int ns, int nt) {
  // (-Omega_s) (+) Omega_t in concatenated integer coordinates
  MatrixXl W = MatrixXl::Zero(2 * (ns + nt), 2 * (ns + nt));
  for (int i = 0; i < ns; ++i) {
    W(i, ns + i) = -1;
    W(ns + i, i) = 1;
  }
  int off = 2 * ns;
  for (int i = 0; i < nt; ++i) {
    W(off + i, off + nt + i) = 1;
    W(off + nt + i, off + i) = -1;
  }
  return W;
}

struct LatticeCorrespondence {
  int n_src = 0, n_tgt = 0;
  MatrixXl directions;   // 2(ns+nt) x (ns+nt), columns span the tangent lattice
  VectorXd offset;       // base point in concatenated coordinates
  double theta = 0.0;    // lift of the constant tangent frame's det^2 phase
  MatrixXl annihilator;  // saturated integer annihilator, rows * directions = 0
  LagrangianFrame tangent;

  LatticeCorrespondence() = default;
  LatticeCorrespondence(int ns, int nt, const MatrixXl& dirs, const VectorXd& off, double th)
      : n_src(ns), n_tgt(nt), directions(dirs), offset(off), theta(th) {
    const int k = ns + nt;
    if (dirs.rows() != 2 * k || dirs.cols() != k)
      throw std::invalid_argument("LatticeCorrespondence: direction matrix must be 2(ns+nt) x (ns+nt)");
    if (off.size() != 2 * k)
      throw std::invalid_argument("LatticeCorrespondence: offset size mismatch");
    SmithForm f = smith_normal_form(dirs);
    if (f.rank() < k) throw std::invalid_argument("LatticeCorrespondence: directions not independent");
    if (lattice_saturation_index(dirs) != 1)
      throw std::invalid_argument("LatticeCorrespondence: direction lattice is not primitive");
    MatrixXl pairing = dirs.transpose() * product_form_int(ns, nt) * dirs;
    if (pairing.cwiseAbs().maxCoeff() != 0)
      throw std::invalid_argument("LatticeCorrespondence: tangent lattice is not Lagrangian");
    annihilator = integer_kernel(dirs.transpose()).transpose();
    ProductSignature sig = corr_signature(ns, nt);
    tangent = LagrangianFrame(sig.space(), embed_matrix(sig) * dirs.cast<double>());
    // theta must lift the frame phase
    GradedCorrespondence check(
        LinearCorrespondence(standard_space(ns), standard_space(nt), tangent), theta, 2);
  }

  GradedCorrespondence graded(int N) const {
    return GradedCorrespondence(
        LinearCorrespondence(standard_space(n_src), standard_space(n_tgt), tangent), theta, N);
  }

  bool contains(const VectorXd& q, double tol = 1e-7) const {
    VectorXd res = annihilator.cast<double>() * (q - offset);
    for (int i = 0; i < res.size(); ++i)
      if (std::abs(res(i) - std::round(res(i))) > tol) return false;
    return true;
  }
};

// graph of the translation by v on T^{2n}, and other stock correspondences
inline LatticeCorrespondence lattice_translation_graph(int n, const VectorXd& v, double theta_k = 0) {
  MatrixXl dirs(4 * n, 2 * n);
  dirs.topRows(2 * n) = MatrixXl::Identity(2 * n, 2 * n);
  dirs.bottomRows(2 * n) = MatrixXl::Identity(2 * n, 2 * n);
  VectorXd off = VectorXd::Zero(4 * n);
  off.tail(2 * n) = v;
  ProductSignature sig = corr_signature(n, n);
  LagrangianFrame f(sig.space(), embed_matrix(sig) * dirs.cast<double>());
  return LatticeCorrespondence(n, n, dirs, off, principal_phase(f) + theta_k);
}

inline LatticeCorrespondence lattice_diagonal(int n, int N) {
  GradedLagrangian diag = canonical_diagonal(n, N);
  MatrixXl dirs(4 * n, 2 * n);
  dirs.topRows(2 * n) = MatrixXl::Identity(2 * n, 2 * n);
  dirs.bottomRows(2 * n) = MatrixXl::Identity(2 * n, 2 * n);
  return LatticeCorrespondence(n, n, dirs, VectorXd::Zero(4 * n), diag.theta);
}

inline LatticeCorrespondence correspondence_from_lattice(int ns, int nt, const MatrixXl& A,
                                                         const VectorXd& offset,
                                                         double theta_k = 0) {
  ProductSignature sig = corr_signature(ns, nt);
  LagrangianFrame f(sig.space(), embed_matrix(sig) * A.cast<double>());
  return LatticeCorrespondence(ns, nt, A, offset, principal_phase(f) + theta_k);
}

// a Lagrangian subtorus of T^{2n} as a correspondence pt -> T^{2n}
inline LatticeCorrespondence lattice_from_point(int n, const MatrixXl& dirs, const VectorXd& off,
                                                double theta_k = 0) {
  LagrangianFrame f(standard_space(n), dirs.cast<double>());
  return LatticeCorrespondence(0, n, dirs, off, principal_phase(f) + theta_k);
}

// the same subtorus as a correspondence T^{2n} -> pt
inline LatticeCorrespondence lattice_to_point(int n, const MatrixXl& dirs, const VectorXd& off,
                                              double theta_k = 0) {
  LagrangianFrame f(standard_space(n), dual_all_matrix(n) * dirs.cast<double>());
  return LatticeCorrespondence(n, 0, dirs, off, principal_phase(f) + theta_k);
}

struct LatticeSequence {
  std::vector<int> dims;                    // n_j for M_j, j = 0..r
  std::vector<LatticeCorrespondence> seams; // seams[j]: M_j -> M_{j+1} (cyclic)
  std::vector<double> widths;
  std::vector<VectorXd> perturbations;      // translation c_j on M_j
  int modulus = 2;
  double tau = 0.0;                         // lattice provider: exact case

  int length() const { return static_cast<int>(seams.size()); }
  void validate() const {
    const int r1 = length();
    if (r1 == 0 || dims.size() != static_cast<size_t>(r1))
      throw std::invalid_argument("LatticeSequence: size mismatch");
    for (int j = 0; j < r1; ++j) {
      if (seams[j].n_src != dims[j] || seams[j].n_tgt != dims[(j + 1) % r1])
        throw std::invalid_argument("LatticeSequence: seam " + std::to_string(j) +
                                    " does not match its manifolds");
    }
    if (widths.size() != static_cast<size_t>(r1))
      throw std::invalid_argument("LatticeSequence: widths size mismatch");
    for (double w : widths)
      if (w <= 0) throw std::invalid_argument("LatticeSequence: widths must be positive");
    if (perturbations.size() != static_cast<size_t>(r1))
      throw std::invalid_argument("LatticeSequence: perturbation size mismatch");
  }
  SeamTangents tangents() const {
    SeamTangents st;
    st.modulus = modulus;
    for (const auto& s : seams) st.tangents.push_back(s.graded(modulus));
    return st;
  }
};

struct Generator {
  std::vector<VectorXd> points;  // m_j in [0,1)^{2 n_j}
  int degree = 0;
};

namespace qdetail {

inline VectorXd mod_unit(const VectorXd& v) {
  VectorXd out = v;
  for (int i = 0; i < out.size(); ++i) {
    out(i) -= std::floor(out(i));
    if (out(i) >= 1.0 - 1e-12) out(i) = 0.0;
  }
  return out;
}

inline double torus_distance(const VectorXd& a, const VectorXd& b) {
  double d = 0;
  for (int i = 0; i < a.size(); ++i) {
    double t = std::abs(a(i) - b(i));
    t -= std::floor(t);
    d = std::max(d, std::min(t, 1.0 - t));
  }
  return d;
}

}  // namespace qdetail

// Complete enumeration of the generalized intersection points: the matching
// conditions stack into an integer linear system on the product torus, and
// Smith reduction enumerates all residue solutions.
inline std::vector<Generator> intersection_points(const LatticeSequence& seq) {
  seq.validate();
  const int r1 = seq.length();
  std::vector<int> col_off(r1 + 1, 0);
  for (int j = 0; j < r1; ++j) col_off[j + 1] = col_off[j] + 2 * seq.dims[j];
  const int D = col_off[r1];

  MatrixXl M = MatrixXl::Zero(D, D);
  VectorXd b = VectorXd::Zero(D);
  int row = 0;
  for (int j = 0; j < r1; ++j) {
    const auto& s = seq.seams[j];
    const MatrixXl& C = s.annihilator;
    const int rows = static_cast<int>(C.rows());
    const int w_src = 2 * s.n_src, w_tgt = 2 * s.n_tgt;
    int jn = (j + 1) % r1;
    M.block(row, col_off[j], rows, w_src) += C.leftCols(w_src);
    M.block(row, col_off[jn], rows, w_tgt) += C.rightCols(w_tgt);
    VectorXd shift = VectorXd::Zero(w_src + w_tgt);
    shift.head(w_src) = seq.perturbations[j];
    b.segment(row, rows) = C.cast<double>() * (s.offset - shift);
    row += rows;
  }

  SmithForm f = smith_normal_form(M);
  VectorXd c = f.U.cast<double>() * b;
  std::vector<long long> divisors;
  long long count = 1;
  for (int i = 0; i < D; ++i) {
    long long d = f.S(i, i);
    if (d == 0) {
      // zero row: consistent iff the right-hand side is non integral (empty
      // intersection); otherwise the configuration is not transverse
      if (std::abs(c(i) - std::round(c(i))) < 1e-9)
        throw std::invalid_argument(
            "intersection_points: non-transverse configuration, degenerate direction " +
            std::to_string(i));
      return {};
    }
    divisors.push_back(d);
    count *= d;
  }
  if (count > 100000)
    throw std::invalid_argument("intersection_points: generator count overflow (" +
                                std::to_string(count) + ")");

  std::vector<Generator> out;
  MatrixXd V = f.V.cast<double>();
  for (long long e = 0; e < count; ++e) {
    long long rem = e;
    VectorXd w(D);
    for (int i = 0; i < D; ++i) {
      long long l = rem % divisors[i];
      rem /= divisors[i];
      w(i) = (c(i) + l) / static_cast<double>(divisors[i]);
    }
    VectorXd m = qdetail::mod_unit(V * w);
    Generator g;
    for (int j = 0; j < r1; ++j)
      g.points.push_back(m.segment(col_off[j], 2 * seq.dims[j]));
    out.push_back(g);
  }

  // validate matching conditions
  for (const auto& g : out) {
    for (int j = 0; j < r1; ++j) {
      const auto& s = seq.seams[j];
      VectorXd q(2 * (s.n_src + s.n_tgt));
      q.head(2 * s.n_src) = g.points[j] + seq.perturbations[j];
      q.tail(2 * s.n_tgt) = g.points[(j + 1) % r1];
      if (!s.contains(q))
        throw std::runtime_error("intersection_points: solution fails the matching condition");
    }
  }
  return out;
}

inline std::vector<Generator> graded_intersection_points(const LatticeSequence& seq) {
  std::vector<Generator> gens = intersection_points(seq);
  if (gens.empty()) return gens;
  int d = generator_degree(seq.tangents());  // constant tangent data across generators
  for (auto& g : gens) g.degree = d;
  return gens;
}

// ---------------------------------------------------------------------------
// Sequence-level operations.
// ---------------------------------------------------------------------------

inline LatticeSequence insert_diagonal(const LatticeSequence& seq, int position) {
  seq.validate();
  const int r1 = seq.length();
  position = ((position % r1) + r1) % r1;
  LatticeSequence out;
  out.modulus = seq.modulus;
  out.tau = seq.tau;
  for (int j = 0; j < r1; ++j) {
    out.dims.push_back(seq.dims[j]);
    out.seams.push_back(seq.seams[j]);
    out.widths.push_back(seq.widths[j]);
    out.perturbations.push_back(seq.perturbations[j]);
    if (j == position) {
      int n = seq.dims[(j + 1) % r1];
      out.dims.push_back(n);
      out.seams.push_back(lattice_diagonal(n, seq.modulus));
      out.widths.push_back(1.0);
      out.perturbations.push_back(VectorXd::Zero(2 * n));
    }
  }
  return out;
}

struct ComposeResult {
  LatticeSequence sequence;
  std::vector<int> bijection;  // generator i of the input maps to bijection[i] of the output
};

struct NotEmbedded : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Geometric composition of two consecutive lattice seams. Embedded means the
// linear fiber product is transverse and the projection is injective on the
// fiber subtorus: the stacked annihilator and the projected direction lattice
// must both be saturated.
inline LatticeCorrespondence compose_lattice(const LatticeCorrespondence& a,
                                             const LatticeCorrespondence& b, int modulus) {
  if (a.n_tgt != b.n_src) throw std::invalid_argument("compose_lattice: middle mismatch");
  const int n0 = a.n_src, n1 = a.n_tgt, n2 = b.n_tgt;

  if (!is_embedded_linear(
          LinearCorrespondence(standard_space(n0), standard_space(n1), a.tangent),
          LinearCorrespondence(standard_space(n1), standard_space(n2), b.tangent))) {
    CompositionReport rep =
        compose(LinearCorrespondence(standard_space(n0), standard_space(n1), a.tangent),
                LinearCorrespondence(standard_space(n1), standard_space(n2), b.tangent));
    throw NotEmbedded("compose_lattice: fiber product not transverse, kernel dimension " +
                      std::to_string(rep.kernel.dim()));
  }

  // stacked membership conditions on (u, v, w)
  const int du = 2 * n0, dv = 2 * n1, dw = 2 * n2;
  MatrixXl stack = MatrixXl::Zero(a.annihilator.rows() + b.annihilator.rows(), du + dv + dw);
  stack.block(0, 0, a.annihilator.rows(), du + dv) = a.annihilator;
  stack.block(a.annihilator.rows(), du, b.annihilator.rows(), dv + dw) = b.annihilator;

  // fiber components: the stacked row lattice must be saturated, else the
  // fiber is disconnected and the projection cannot be injective
  long long comp = 1;
  for (long long d : smith_normal_form(stack).divisors()) comp *= d;
  if (std::llabs(comp) != 1)
    throw NotEmbedded("compose_lattice: fiber subtorus has " + std::to_string(std::llabs(comp)) +
                      " components; projection is a covering, witness pairs project equally");

  MatrixXl fiber_dirs = integer_kernel(stack);  // saturated
  // project out the middle block
  MatrixXl proj(du + dw, fiber_dirs.cols());
  proj.topRows(du) = fiber_dirs.topRows(du);
  proj.bottomRows(dw) = fiber_dirs.bottomRows(dw);
  if (integer_rank(proj) != n0 + n2)
    throw NotEmbedded("compose_lattice: projected direction lattice drops rank");
  long long cover = lattice_saturation_index(proj);
  if (cover != 1)
    throw NotEmbedded("compose_lattice: projection is a " + std::to_string(cover) +
                      "-fold cover of the composed subtorus");

  // particular solution of the affine conditions for the offset
  VectorXd rhs(stack.rows());
  rhs.head(a.annihilator.rows()) = a.annihilator.cast<double>() * a.offset;
  rhs.tail(b.annihilator.rows()) = b.annihilator.cast<double>() * b.offset;
  Eigen::JacobiSVD<MatrixXd> svd(stack.cast<double>(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  VectorXd q = svd.solve(rhs);
  VectorXd off(du + dw);
  off.head(du) = q.head(du);
  off.tail(dw) = q.tail(dw);

  GradedCorrespondence merged = compose_graded(a.graded(modulus), b.graded(modulus));
  LatticeCorrespondence out(n0, n2, proj, off, merged.theta);
  // the lattice frame and the contraction frame must span the same plane
  if (subspace_distance(out.tangent.span(), merged.corr.lag.span()) > 1e-8)
    throw std::runtime_error("compose_lattice: composed tangent mismatch");
  return out;
}

inline ComposeResult compose_at(const LatticeSequence& seq, int j) {
  seq.validate();
  const int r1 = seq.length();
  if (r1 < 2) throw std::invalid_argument("compose_at: need at least two seams");
  j = ((j % r1) + r1) % r1;
  const int jn = (j + 1) % r1;
  if (seq.perturbations[jn].cwiseAbs().maxCoeff() > 0)
    throw std::invalid_argument("compose_at: intermediate perturbation must vanish (H_j = 0)");

  ComposeResult out;
  out.sequence.modulus = seq.modulus;
  out.sequence.tau = seq.tau;
  LatticeCorrespondence merged = compose_lattice(seq.seams[j], seq.seams[jn], seq.modulus);
  for (int i = 0; i < r1; ++i) {
    if (i == jn) continue;
    out.sequence.dims.push_back(seq.dims[i]);
    out.sequence.seams.push_back(i == j ? merged : seq.seams[i]);
    out.sequence.widths.push_back(seq.widths[i]);
    out.sequence.perturbations.push_back(seq.perturbations[i]);
  }

  // canonical bijection: drop the intermediate point
  std::vector<Generator> before = intersection_points(seq);
  std::vector<Generator> after = intersection_points(out.sequence);
  if (before.size() != after.size())
    throw std::runtime_error("compose_at: generator counts differ (" +
                             std::to_string(before.size()) + " vs " +
                             std::to_string(after.size()) + ")");
  out.bijection.assign(before.size(), -1);
  std::vector<bool> used(after.size(), false);
  for (size_t i = 0; i < before.size(); ++i) {
    for (size_t k = 0; k < after.size(); ++k) {
      if (used[k]) continue;
      double dist = 0;
      int oi = 0;
      for (int q = 0; q < r1; ++q) {
        if (q == jn) continue;
        dist = std::max(dist, qdetail::torus_distance(before[i].points[q], after[k].points[oi]));
        ++oi;
      }
      if (dist < 1e-6) {
        out.bijection[i] = static_cast<int>(k);
        used[k] = true;
        break;
      }
    }
    if (out.bijection[i] < 0)
      throw std::runtime_error("compose_at: generator bijection failed at index " +
                               std::to_string(i));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Kuenneth splitting at a split seam.
// ---------------------------------------------------------------------------

struct KunnethSplit {
  LatticeSequence left, right;
  // generator index maps: gen i of the product corresponds to
  // (left_index[i], right_index[i])
  std::vector<int> left_index, right_index;
};

// detect a block-split seam L_j x L_{j+1} and split the cyclic sequence at a
// point manifold M_0 = pt
inline KunnethSplit kunneth_split(const LatticeSequence& seq, int j) {
  seq.validate();
  const int r1 = seq.length();
  if (seq.dims[0] != 0)
    throw std::invalid_argument("kunneth_split: M_0 must be the point");
  j = ((j % r1) + r1) % r1;
  if (j == 0 || j + 1 >= r1)
    throw std::invalid_argument("kunneth_split: split seam must be interior");
  const auto& s = seq.seams[j];
  const int da = 2 * s.n_src, db = 2 * s.n_tgt;

  // the direction lattice must decompose as a direct sum over the two blocks
  MatrixXl top = s.directions.topRows(da), bot = s.directions.bottomRows(db);
  MatrixXl dir_a(da, 0), dir_b(db, 0);
  {
    // lattice intersections with the coordinate blocks via integer kernels
    MatrixXl kerb = integer_kernel(bot);  // combos with zero target part
    MatrixXl kera = integer_kernel(top);
    if (kerb.cols() != s.n_src || kera.cols() != s.n_tgt)
      throw std::invalid_argument("kunneth_split: seam is not a product correspondence");
    dir_a = top * kerb;
    dir_b = bot * kera;
    if (lattice_saturation_index(dir_a) != 1 || lattice_saturation_index(dir_b) != 1)
      throw std::invalid_argument("kunneth_split: split factors are not primitive");
  }

  double theta_a, theta_b;
  {
    // split the seam lift across the factors
    LagrangianFrame fa(standard_space(s.n_src),
                       dual_all_matrix(s.n_src) * dir_a.cast<double>());
    theta_a = principal_phase(fa);
    theta_b = s.theta - theta_a;
  }

  KunnethSplit out;
  out.left.modulus = out.right.modulus = seq.modulus;
  out.left.tau = out.right.tau = seq.tau;
  // left: pt -> M_1 -> ... -> M_j -> pt, closing with L_j as M_j -> pt
  for (int i = 0; i < j; ++i) {
    out.left.dims.push_back(seq.dims[i]);
    out.left.seams.push_back(seq.seams[i]);
    out.left.widths.push_back(seq.widths[i]);
    out.left.perturbations.push_back(seq.perturbations[i]);
  }
  out.left.dims.push_back(seq.dims[j]);
  out.left.seams.push_back(lattice_to_point(s.n_src, dir_a, s.offset.head(da), 0));
  out.left.seams.back().theta = theta_a;
  out.left.seams.back().graded(seq.modulus);  // validates the split lift
  out.left.widths.push_back(seq.widths[j]);
  out.left.perturbations.push_back(seq.perturbations[j]);

  // right: pt -> M_{j+1} -> ... -> M_r -> pt
  out.right.dims.push_back(0);
  out.right.seams.push_back(lattice_from_point(s.n_tgt, dir_b, s.offset.tail(db), 0));
  out.right.seams.back().theta = theta_b;
  out.right.seams.back().graded(seq.modulus);  // validates the split lift
  out.right.widths.push_back(1.0);
  out.right.perturbations.push_back(VectorXd::Zero(0));
  for (int i = j + 1; i < r1; ++i) {
    out.right.dims.push_back(seq.dims[i]);
    out.right.seams.push_back(seq.seams[i]);
    out.right.widths.push_back(seq.widths[i]);
    out.right.perturbations.push_back(seq.perturbations[i]);
  }

  // generator factorization
  std::vector<Generator> whole = intersection_points(seq);
  std::vector<Generator> lg = intersection_points(out.left);
  std::vector<Generator> rg = intersection_points(out.right);
  if (whole.size() != lg.size() * rg.size())
    throw std::runtime_error("kunneth_split: generator counts do not factor");
  out.left_index.assign(whole.size(), -1);
  out.right_index.assign(whole.size(), -1);
  for (size_t i = 0; i < whole.size(); ++i) {
    for (size_t a = 0; a < lg.size() && out.left_index[i] < 0; ++a) {
      double d = 0;
      for (int q = 1; q <= j; ++q)
        d = std::max(d, qdetail::torus_distance(whole[i].points[q], lg[a].points[q]));
      if (d < 1e-6) out.left_index[i] = static_cast<int>(a);
    }
    for (size_t bidx = 0; bidx < rg.size() && out.right_index[i] < 0; ++bidx) {
      double d = 0;
      for (int q = j + 1; q < r1; ++q)
        d = std::max(d,
                     qdetail::torus_distance(whole[i].points[q], rg[bidx].points[q - j]));
      if (d < 1e-6) out.right_index[i] = static_cast<int>(bidx);
    }
    if (out.left_index[i] < 0 || out.right_index[i] < 0)
      throw std::runtime_error("kunneth_split: generator factorization failed");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Chain complexes from sequences.
// ---------------------------------------------------------------------------

inline GradedChainComplex build_complex(const LatticeSequence& seq,
                                        const DifferentialOracle& oracle) {
  std::vector<Generator> gens = graded_intersection_points(seq);
  std::vector<int> degrees;
  for (const auto& g : gens) degrees.push_back(g.degree);
  return make_complex(degrees, seq.modulus, oracle);
}

}  // namespace quiltlab
