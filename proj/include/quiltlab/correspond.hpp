// Linear Lagrangian correspondences: duals, graphs, geometric composition
// with embeddedness diagnostics (kernel and defect of the fiber product), and
// the explicit contraction of the space of fibers over a fixed composition.
#pragma once

#include <quiltlab/linalg.hpp>

namespace quiltlab {

// Signature of dual(V0) x V1, the home of a correspondence frame.
inline ProductSignature corr_signature(int n0, int n1) {
  return ProductSignature::single(n0, true).then(n1, false);
}

// Join two product frames into the frame of the concatenated product.
inline MatrixXd join_product(const ProductSignature& a, const MatrixXd& Fa,
                             const ProductSignature& b, const MatrixXd& Fb) {
  ProductSignature big = a;
  for (const auto& f : b.factors) big.factors.push_back(f);
  const int ra = 2 * a.total_n(), rb = 2 * b.total_n();
  MatrixXd concat = MatrixXd::Zero(ra + rb, Fa.cols() + Fb.cols());
  concat.block(0, 0, ra, Fa.cols()) = embed_matrix(a).transpose() * Fa;
  concat.block(ra, Fa.cols(), rb, Fb.cols()) = embed_matrix(b).transpose() * Fb;
  return embed_matrix(big) * concat;
}

// A Lagrangian correspondence from V0 to V1: a Lagrangian frame in the
// standard model of V0^- x V1.
struct LinearCorrespondence {
  SymplecticSpace source, target;
  LagrangianFrame lag;

  LinearCorrespondence() = default;
  LinearCorrespondence(const SymplecticSpace& src, const SymplecticSpace& tgt,
                       const LagrangianFrame& frame)
      : source(src), target(tgt), lag(frame) {
    if (frame.ambient.n != src.n + tgt.n)
      throw std::invalid_argument("LinearCorrespondence: frame lives in the wrong space");
  }
  ProductSignature signature() const { return corr_signature(source.n, target.n); }
};

// Graph of a symplectic matrix as a correspondence V -> V (or V0 -> V1 when
// the matrix maps between equal-dimension spaces).
inline LinearCorrespondence graph(const MatrixXd& S, const SymplecticSpace& sp) {
  if (S.rows() != sp.dim() || S.cols() != sp.dim())
    throw std::invalid_argument("graph: matrix does not match the space");
  if (!is_symplectic(S, sp.n))
    throw std::invalid_argument("graph: matrix is not symplectic");
  ProductSignature sig = corr_signature(sp.n, sp.n);
  MatrixXd concat(2 * sp.dim(), sp.dim());
  concat.topRows(sp.dim()) = MatrixXd::Identity(sp.dim(), sp.dim());
  concat.bottomRows(sp.dim()) = S;
  return LinearCorrespondence(sp, sp, LagrangianFrame(sig.space(), embed_matrix(sig) * concat));
}

inline LinearCorrespondence diagonal_correspondence(const SymplecticSpace& sp) {
  return graph(MatrixXd::Identity(sp.dim(), sp.dim()), sp);
}

// A Lagrangian L in V viewed as a correspondence pt -> V.
inline LinearCorrespondence from_lagrangian(const LagrangianFrame& L) {
  return LinearCorrespondence(standard_space(0), L.ambient, L);
}

// The same Lagrangian viewed as V -> pt; the frame moves to the dual model.
inline LinearCorrespondence to_point(const LagrangianFrame& L) {
  MatrixXd F = dual_all_matrix(L.ambient.n) * L.frame;
  return LinearCorrespondence(L.ambient, standard_space(0), LagrangianFrame(L.ambient, F));
}

// Dual correspondence: (m0, m1) -> (m1, m0).
inline LinearCorrespondence transpose(const LinearCorrespondence& c) {
  const int n0 = c.source.n, n1 = c.target.n;
  MatrixXd concat = embed_matrix(c.signature()).transpose() * c.lag.frame;
  MatrixXd swapped(concat.rows(), concat.cols());
  swapped.topRows(2 * n1) = concat.bottomRows(2 * n1);
  swapped.bottomRows(2 * n0) = concat.topRows(2 * n0);
  ProductSignature tsig = corr_signature(n1, n0);
  return LinearCorrespondence(c.target, c.source,
                              LagrangianFrame(tsig.space(), embed_matrix(tsig) * swapped));
}

// The ambient of the fiber product: V0^- x V1 x V1^- x V2.
inline ProductSignature fiber_signature(int n0, int n1, int n2) {
  return ProductSignature::single(n0, true).then(n1, false).then(n1, true).then(n2, false);
}

// Basis of V0 x Delta_{V1} x V2 in the standard model of the fiber ambient.
inline MatrixXd diagonal_constraint_basis(int n0, int n1, int n2) {
  ProductSignature sig = fiber_signature(n0, n1, n2);
  const int rows = 2 * (n0 + 2 * n1 + n2);
  const int cols = 2 * n0 + 2 * n1 + 2 * n2;
  MatrixXd concat = MatrixXd::Zero(rows, cols);
  concat.block(0, 0, 2 * n0, 2 * n0).setIdentity();
  concat.block(2 * n0, 2 * n0, 2 * n1, 2 * n1).setIdentity();
  concat.block(2 * n0 + 2 * n1, 2 * n0, 2 * n1, 2 * n1).setIdentity();
  concat.block(2 * n0 + 4 * n1, 2 * n0 + 2 * n1, 2 * n2, 2 * n2).setIdentity();
  return embed_matrix(sig) * concat;
}

struct CompositionReport {
  Subspace fiber;            // inside the standard model of V0^- x V1 x V1^- x V2
  bool transverse = false;
  Subspace kernel;           // inside V1
  int defect = 0;
  LinearCorrespondence composed;
};

namespace detail {

// rows of the concatenated-coordinate representation belonging to factor k
inline MatrixXd factor_rows(const ProductSignature& sig, const MatrixXd& std_frame, int k) {
  MatrixXd concat = embed_matrix(sig).transpose() * std_frame;
  int off = 0;
  for (int i = 0; i < k; ++i) off += 2 * sig.factors[i].n;
  return concat.middleRows(off, 2 * sig.factors[k].n);
}

}  // namespace detail

// Geometric composition of c01 and c12 with full diagnostics. The composed
// span is Lagrangian whether or not the fiber product is transverse; the
// kernel realizes ker d(pi_02) inside V1 and always has dimension equal to
// the codimension defect of the intersection.
inline CompositionReport compose(const LinearCorrespondence& c01, const LinearCorrespondence& c12) {
  if (c01.target != c12.source)
    throw std::invalid_argument("compose: middle spaces do not match");
  const int n0 = c01.source.n, n1 = c01.target.n, n2 = c12.target.n;
  ProductSignature sig = fiber_signature(n0, n1, n2);
  SymplecticSpace W = sig.space();

  MatrixXd F = join_product(c01.signature(), c01.lag.frame, c12.signature(), c12.lag.frame);
  MatrixXd D = diagonal_constraint_basis(n0, n1, n2);

  CompositionReport rep;
  rep.fiber = Subspace(W, span_intersection(F, D));

  // transversality and defect from the stacked constraint matrix
  {
    MatrixXd stack(F.rows(), F.cols() + D.cols());
    stack << F, D;
    Eigen::JacobiSVD<MatrixXd> svd(stack);
    const auto& s = svd.singularValues();
    int full = 0;
    for (int i = 0; i < s.size(); ++i)
      if (s(i) > kTransvTol) ++full;
    rep.defect = W.dim() - full;
    rep.transverse = (rep.defect == 0);
  }

  // kernel = { v1 : (0, v1) in L01 } cap { v1 : (v1, 0) in L12 }
  {
    ProductSignature s01 = c01.signature();
    MatrixXd slot01 = MatrixXd::Zero(2 * (n0 + n1), 2 * n1);
    slot01.bottomRows(2 * n1).setIdentity();
    MatrixXd K1 = span_intersection(c01.lag.frame, embed_matrix(s01) * slot01);
    MatrixXd K1v = detail::factor_rows(s01, K1, 1);

    ProductSignature s12 = c12.signature();
    MatrixXd slot12 = MatrixXd::Zero(2 * (n1 + n2), 2 * n1);
    slot12.topRows(2 * n1).setIdentity();
    MatrixXd K2 = span_intersection(c12.lag.frame, embed_matrix(s12) * slot12);
    MatrixXd K2v = detail::factor_rows(s12, K2, 0);

    MatrixXd kv = (K1v.cols() == 0 || K2v.cols() == 0)
                      ? MatrixXd::Zero(2 * n1, 0)
                      : span_intersection(orthonormalize(K1v), orthonormalize(K2v));
    rep.kernel = Subspace(c01.target, kv);
  }

  // composed span: project the fiber to the outer factors
  {
    MatrixXd raw0 = detail::factor_rows(sig, rep.fiber.basis, 0);
    MatrixXd raw2 = detail::factor_rows(sig, rep.fiber.basis, 3);
    MatrixXd concat02(2 * n0 + 2 * n2, rep.fiber.dim());
    concat02 << raw0, raw2;
    ProductSignature sig02 = corr_signature(n0, n2);
    MatrixXd P = embed_matrix(sig02) * concat02;
    // rank-revealing extraction: the projection may have nontrivial kernel
    MatrixXd basis;
    if (P.cols() == 0 || P.rows() == 0) {
      basis = MatrixXd::Zero(P.rows(), 0);
    } else {
      Eigen::JacobiSVD<MatrixXd> svd(P, Eigen::ComputeThinU);
      int r = 0;
      for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > kRankTol) ++r;
      basis = svd.matrixU().leftCols(r);
    }
    if (basis.cols() != n0 + n2)
      throw std::runtime_error("compose: composed span has unexpected dimension " +
                               std::to_string(basis.cols()));
    rep.composed = LinearCorrespondence(c01.source, c12.target,
                                        LagrangianFrame(sig02.space(), basis));
  }
  return rep;
}

inline bool is_embedded_linear(const LinearCorrespondence& c01, const LinearCorrespondence& c12) {
  return compose(c01, c12).transverse;
}

// ---------------------------------------------------------------------------
// Contraction of the space of transverse fibers over a fixed composition.
// rho_0 is the identity and rho_1 lands on the split form
// Psi(Lambda_02 x Delta^perp), with Delta^perp = {(v, -v)} the metric
// complement of the diagonal. The composition is constant along t.
// ---------------------------------------------------------------------------

struct FiberContraction {
  int n0, n1, n2;
  ProductSignature sig;
  // fiber part, raw blocks of an orthonormal basis of Lambda cap (V0 x Delta x V2)
  MatrixXd v0, mid, v2;       // 2n0 x k, 2n1 x k, 2n2 x k with k = n0 + n2
  // complement part, raw blocks of the orthogonal complement inside Lambda
  MatrixXd u0, a, b, u2;      // columns indexed by l = 1..2n1

  MatrixXd frame_at(double t) const {
    const double s = 1.0 - t;  // s = 1 reproduces the input, s = 0 the split form
    const int k = static_cast<int>(v0.cols());
    const int l = static_cast<int>(a.cols());
    MatrixXd concat = MatrixXd::Zero(2 * (n0 + 2 * n1 + n2), k + l);
    MatrixXd v1 = 0.5 * (a - b);
    MatrixXd w = 0.5 * (a + b);
    // fiber part: (v0, s*m, s*m, v2)
    concat.block(0, 0, 2 * n0, k) = v0;
    concat.block(2 * n0, 0, 2 * n1, k) = s * mid;
    concat.block(2 * n0 + 2 * n1, 0, 2 * n1, k) = s * mid;
    concat.block(2 * n0 + 4 * n1, 0, 2 * n2, k) = v2;
    // complement part: (s*j0, v1 + s^2 w, -v1 + s^2 w, s*j2)
    concat.block(0, k, 2 * n0, l) = s * u0;
    concat.block(2 * n0, k, 2 * n1, l) = v1 + s * s * w;
    concat.block(2 * n0 + 2 * n1, k, 2 * n1, l) = -v1 + s * s * w;
    concat.block(2 * n0 + 4 * n1, k, 2 * n2, l) = s * u2;
    return embed_matrix(sig) * concat;
  }

  LagrangianFrame lagrangian_at(double t) const {
    return LagrangianFrame(sig.space(), frame_at(t));
  }
};

// Split a transverse fiber Lagrangian into the data of the contraction.
inline FiberContraction make_contraction(int n0, int n1, int n2, const LagrangianFrame& lambda) {
  FiberContraction c;
  c.n0 = n0;
  c.n1 = n1;
  c.n2 = n2;
  c.sig = fiber_signature(n0, n1, n2);
  if (lambda.ambient != c.sig.space())
    throw std::invalid_argument("make_contraction: frame lives in the wrong space");

  MatrixXd D = diagonal_constraint_basis(n0, n1, n2);
  MatrixXd hat02 = span_intersection(lambda.frame, D);
  if (hat02.cols() != n0 + n2)
    throw std::invalid_argument("make_contraction: fiber is not transverse to the diagonal");

  // orthogonal complement of the fiber part inside Lambda
  MatrixXd rest = lambda.frame - hat02 * (hat02.transpose() * lambda.frame);
  Eigen::JacobiSVD<MatrixXd> svd(rest, Eigen::ComputeThinU);
  int r = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > kRankTol) ++r;
  if (r != 2 * n1)
    throw std::invalid_argument("make_contraction: complement has unexpected dimension");
  MatrixXd hat11 = svd.matrixU().leftCols(r);

  c.v0 = detail::factor_rows(c.sig, hat02, 0);
  c.mid = detail::factor_rows(c.sig, hat02, 1);
  c.v2 = detail::factor_rows(c.sig, hat02, 3);
  {
    MatrixXd mid2 = detail::factor_rows(c.sig, hat02, 2);
    if ((c.mid - mid2).cwiseAbs().maxCoeff() > 1e-8)
      throw std::runtime_error("make_contraction: fiber part violates the matching condition");
  }
  c.u0 = detail::factor_rows(c.sig, hat11, 0);
  c.a = detail::factor_rows(c.sig, hat11, 1);
  c.b = detail::factor_rows(c.sig, hat11, 2);
  c.u2 = detail::factor_rows(c.sig, hat11, 3);

  // (a - b)/2 must be a basis of V1 for the complement parametrization
  if (numerical_rank(0.5 * (c.a - c.b), 1e-8) != 2 * n1)
    throw std::invalid_argument("make_contraction: complement does not project onto V1");
  return c;
}

inline LagrangianFrame contract_fiber(int n0, int n1, int n2, const LagrangianFrame& lambda,
                                      double t) {
  return make_contraction(n0, n1, n2, lambda).lagrangian_at(t);
}

// The composed correspondence read off a fiber Lagrangian directly.
inline LagrangianFrame fiber_composition(int n0, int n1, int n2, const MatrixXd& fiber_frame) {
  ProductSignature sig = fiber_signature(n0, n1, n2);
  MatrixXd D = diagonal_constraint_basis(n0, n1, n2);
  MatrixXd hat02 = span_intersection(fiber_frame, D);
  MatrixXd raw0 = detail::factor_rows(sig, hat02, 0);
  MatrixXd raw2 = detail::factor_rows(sig, hat02, 3);
  MatrixXd concat(2 * n0 + 2 * n2, hat02.cols());
  concat << raw0, raw2;
  ProductSignature sig02 = corr_signature(n0, n2);
  return LagrangianFrame(sig02.space(), orthonormalize(embed_matrix(sig02) * concat));
}

}  // namespace quiltlab
