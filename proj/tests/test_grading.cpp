#include <catch2/catch_amalgamated.hpp>
#include <quiltlab/grading.hpp>

using namespace quiltlab;

namespace {
int imod(long long v, int N) { return static_cast<int>(((v % N) + N) % N); }

GradedLagrangian random_graded(int n, int N, Rng& rng) {
  return grade(random_lagrangian(n, rng), rng.uniform_int(-2 * N, 2 * N), N);
}

// Independent spectral oracle: with S = U U^T the symmetric unitary of a
// frame, the eigenvalues of S_b conj(S_a) are e^{2 i beta_j} for the rotation
// angles beta_j in (0, pi) carrying Lambda_a to Lambda_b, and
//   d(a, b) = theta_a - theta_b + sum_j beta_j / pi   (mod N).
int spectral_degree(const GradedLagrangian& a, const GradedLagrangian& b) {
  const int n = a.n();
  MatrixXcd Ua = a.frame.unitary(), Ub = b.frame.unitary();
  MatrixXcd T = (Ub * Ub.transpose()) * (Ua * Ua.transpose()).conjugate();
  Eigen::ComplexEigenSolver<MatrixXcd> es(T);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    double t = std::arg(es.eigenvalues()(i));
    double beta = (t > 1e-9) ? t / 2.0 : t / 2.0 + kPi;
    sum += beta / kPi;
  }
  double val = a.theta - b.theta + sum;
  long long r = std::llround(val);
  REQUIRE(std::abs(val - r) < 1e-6);
  return imod(r, a.modulus);
}

// paper deck action c . b in the det^2 model
GradedLagrangian deck(int c, const GradedLagrangian& b) { return shift(b, -c); }

GradedCorrespondence random_graded_corr(int n0, int n1, int N, Rng& rng) {
  ProductSignature sig = corr_signature(n0, n1);
  LagrangianFrame f(sig.space(), random_lagrangian(n0 + n1, rng).frame);
  LinearCorrespondence c(standard_space(n0), standard_space(n1), f);
  return GradedCorrespondence(c, principal_phase(f) + rng.uniform_int(-N, N), N);
}

GradedSymplectic random_graded_symp(int n, int N, Rng& rng, double scale = 0.6) {
  MatrixXd S = rng.gauss_matrix(2 * n, 2 * n);
  S = 0.5 * (S + S.transpose()).eval();
  MatrixXd A = j_matrix(n) * S * scale;
  return GradedSymplectic(standard_space(n),
                          [A](double t) -> MatrixXd { return (t * A).exp(); }, N);
}
}  // namespace

TEST_CASE("grade and shift") {
  MatrixXd Fx(2, 1), Fy(2, 1);
  Fx << 1, 0;
  Fy << 0, 1;
  LagrangianFrame horiz(standard_space(1), Fx), vert(standard_space(1), Fy);

  CHECK(grade(horiz, 0, 2).theta == 0.0);
  CHECK(grade(vert, 0, 2).theta == Catch::Approx(0.5).margin(1e-12));
  CHECK(grade(horiz, 3, 4).theta == 3.0);
  CHECK(grade(vert, 2, 6).theta - grade(vert, 0, 6).theta == 2.0);
  CHECK_THROWS_AS(grade(horiz, 0, 3), std::invalid_argument);
  CHECK_THROWS_AS(grade(horiz, 0, 0), std::invalid_argument);

  // dual is an involution; product with a 0-graded point space is identity
  Rng rng(1);
  GradedLagrangian g = random_graded(2, 4, rng);
  GradedLagrangian dd = dual_graded(dual_graded(g));
  CHECK((dd.frame.frame - g.frame.frame).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(dd.theta == g.theta);

  GradedLagrangian pt(LagrangianFrame(), 0.0, 4);
  GradedLagrangian prod = graded_product({g, pt});
  CHECK(prod.n() == g.n());
  CHECK(prod.theta == g.theta);
}

TEST_CASE("degree agrees with the spectral oracle") {
  Rng rng(2026);
  int done = 0;
  while (done < 60) {
    int n = rng.uniform_int(1, 3);
    int N = 2 * rng.uniform_int(1, 4);
    GradedLagrangian a = random_graded(n, N, rng);
    GradedLagrangian b = random_graded(n, N, rng);
    if (!frames_transverse(a.frame, b.frame, 1e-4)) continue;
    CHECK(degree(a, b) == spectral_degree(a, b));
    ++done;
  }
}

TEST_CASE("degree on point spaces") {
  GradedLagrangian p0(LagrangianFrame(), 1.0, 4);
  GradedLagrangian p1(LagrangianFrame(), 3.0, 4);
  CHECK(degree(p0, p1) == imod(1 - 3, 4));
  CHECK(degree(p0, p0) == 0);
}

TEST_CASE("degprop additivity") {
  Rng rng(3);
  int done = 0;
  while (done < 25) {
    int N = 2 * rng.uniform_int(1, 4);
    GradedLagrangian a1 = random_graded(rng.uniform_int(1, 2), N, rng);
    GradedLagrangian b1 = random_graded(a1.n(), N, rng);
    GradedLagrangian a2 = random_graded(rng.uniform_int(1, 2), N, rng);
    GradedLagrangian b2 = random_graded(a2.n(), N, rng);
    if (!frames_transverse(a1.frame, b1.frame, 1e-4) ||
        !frames_transverse(a2.frame, b2.frame, 1e-4))
      continue;
    int lhs = degree(graded_product({a1, a2}), graded_product({b1, b2}));
    CHECK(lhs == imod(degree(a1, b1) + degree(a2, b2), N));
    ++done;
  }
}

TEST_CASE("degprop multiplicativity via the deck action") {
  Rng rng(4);
  int done = 0;
  while (done < 25) {
    int N = 2 * rng.uniform_int(1, 4);
    GradedLagrangian a = random_graded(rng.uniform_int(1, 3), N, rng);
    GradedLagrangian b = random_graded(a.n(), N, rng);
    if (!frames_transverse(a.frame, b.frame, 1e-4)) continue;
    int c = rng.uniform_int(0, N - 1);
    CHECK(degree(a, deck(c, b)) == imod(c + degree(a, b), N));
    // in raw lift terms the shift acts with the opposite sign
    CHECK(degree(a, shift(b, c)) == imod(degree(a, b) - c, N));
    ++done;
  }
}

TEST_CASE("degprop skewsymmetry") {
  Rng rng(5);
  int done = 0;
  while (done < 25) {
    int N = 2 * rng.uniform_int(1, 4);
    int n = rng.uniform_int(1, 3);
    GradedLagrangian a = random_graded(n, N, rng);
    GradedLagrangian b = random_graded(n, N, rng);
    if (!frames_transverse(a.frame, b.frame, 1e-4)) continue;
    CHECK(imod(degree(a, b) + degree(b, a), N) == imod(n, N));
    CHECK(imod(degree(a, b) + degree(dual_graded(a), dual_graded(b)), N) == imod(n, N));
    ++done;
  }
}

TEST_CASE("degprop diagonal") {
  Rng rng(6);
  int done = 0;
  while (done < 20) {
    int N = 2 * rng.uniform_int(1, 4);
    int n = rng.uniform_int(1, 2);
    GradedLagrangian a = random_graded(n, N, rng);
    GradedLagrangian b = random_graded(n, N, rng);
    if (!frames_transverse(a.frame, b.frame, 1e-4)) continue;
    GradedLagrangian diag = canonical_diagonal(n, N);
    GradedLagrangian prod = graded_product({dual_graded(a), b});
    if (!frames_transverse(diag.frame, prod.frame, 1e-4)) continue;
    CHECK(degree(diag, prod) == degree(a, b));
    ++done;
  }
}

TEST_CASE("canonical diagonal lift value and auxiliary independence") {
  for (int n = 1; n <= 3; ++n) {
    GradedLagrangian diag = canonical_diagonal(n, 2);
    CHECK(diag.theta == Catch::Approx(-0.5 * n).margin(1e-7));
    Rng rng(100 + n);
    for (int trial = 0; trial < 3; ++trial) {
      double th = canonical_diagonal_theta(n, random_lagrangian(n, rng));
      CHECK(th == Catch::Approx(diag.theta).margin(1e-6));
    }
  }
}

TEST_CASE("oriented lifts flip under column swap") {
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    LagrangianFrame L = random_lagrangian(2, rng);
    double th = std::arg(L.unitary().determinant()) / kPi;
    MatrixXd swapped = L.frame;
    swapped.col(0).swap(swapped.col(1));
    LagrangianFrame Ls(standard_space(2), swapped);
    double ths = std::arg(Ls.unitary().determinant()) / kPi;
    // same det^2 lift class mod 1, opposite class mod 2
    double diff = ths - th;
    long long r = std::llround(diff);
    CHECK(std::abs(diff - r) < 1e-9);
    CHECK(imod(r, 2) == 1);
  }
}

TEST_CASE("graph gradings") {
  // identity with the constant path reproduces the canonical diagonal exactly
  for (int n : {1, 2}) {
    GradedSymplectic id(standard_space(n),
                        [n](double) { return MatrixXd::Identity(2 * n, 2 * n); }, 4);
    GradedLagrangian g = graph_grading(id);
    GradedLagrangian diag = canonical_diagonal(n, 4);
    CHECK(frame_span_distance(g.frame.ambient, g.frame.frame, diag.frame.frame) < 1e-10);
    CHECK(g.theta == Catch::Approx(diag.theta).margin(1e-8));
  }

  // a full loop in the symplectic group shifts theta by an even integer
  GradedSymplectic loop(standard_space(1),
                        [](double t) -> MatrixXd { return (2 * kPi * t * j_matrix(1)).exp(); }, 2);
  GradedLagrangian g = graph_grading(loop);
  GradedLagrangian diag = canonical_diagonal(1, 2);
  double dtheta = g.theta - diag.theta;
  long long r = std::llround(dtheta);
  CHECK(std::abs(dtheta - r) < 1e-7);
  CHECK(r % 2 == 0);
  CHECK(r != 0);
}

TEST_CASE("graded composition of graphs matches the canonical bijection") {
  Rng rng(8);
  for (int trial = 0; trial < 6; ++trial) {
    int n = rng.uniform_int(1, 2);
    int N = 2 * rng.uniform_int(1, 3);
    GradedSymplectic ga = random_graded_symp(n, N, rng);
    GradedSymplectic gb = random_graded_symp(n, N, rng);
    GradedCorrespondence cab = compose_graded(graded_graph(ga), graded_graph(gb));

    MatrixXd A = ga.matrix, B = gb.matrix;
    auto pa = ga.path, pb = gb.path;
    GradedSymplectic chained(standard_space(n),
                             [pa, pb, A](double t) -> MatrixXd {
                               return t <= 0.5 ? pa(2 * t) : MatrixXd(pb(2 * t - 1) * A);
                             },
                             N);
    GradedLagrangian expect = graph_grading(chained);
    CHECK(frame_span_distance(cab.corr.lag.ambient, cab.corr.lag.frame, expect.frame.frame) <
          1e-8);
    double diff = cab.theta - expect.theta;
    long long r = std::llround(diff);
    CHECK(std::abs(diff - r) < 1e-6);
    CHECK(imod(r, N) == 0);
  }
}

TEST_CASE("composing with the graded diagonal is the identity on gradings") {
  Rng rng(9);
  for (int trial = 0; trial < 8; ++trial) {
    int n0 = rng.uniform_int(1, 2), n1 = rng.uniform_int(1, 2);
    int N = 4;
    GradedCorrespondence c = random_graded_corr(n0, n1, N, rng);
    GradedSymplectic id0(standard_space(n0),
                         [n0](double) { return MatrixXd::Identity(2 * n0, 2 * n0); }, N);
    GradedCorrespondence left = compose_graded(graded_graph(id0), c);
    CHECK(subspace_distance(left.corr.lag.span(), c.corr.lag.span()) < 1e-8);
    double diff = left.theta - c.theta;
    long long r = std::llround(diff);
    CHECK(std::abs(diff - r) < 1e-6);
    CHECK(imod(r, N) == 0);

    GradedSymplectic id1(standard_space(n1),
                         [n1](double) { return MatrixXd::Identity(2 * n1, 2 * n1); }, N);
    GradedCorrespondence right = compose_graded(c, graded_graph(id1));
    CHECK(subspace_distance(right.corr.lag.span(), c.corr.lag.span()) < 1e-8);
    diff = right.theta - c.theta;
    r = std::llround(diff);
    CHECK(std::abs(diff - r) < 1e-6);
    CHECK(imod(r, N) == 0);
  }
}

TEST_CASE("proposition gradingcomp on random embedded compositions") {
  Rng rng(10);
  int done = 0;
  while (done < 12) {
    int n0 = rng.uniform_int(1, 2), n1 = rng.uniform_int(1, 2), n2 = rng.uniform_int(1, 2);
    int N = 2 * rng.uniform_int(1, 3);
    GradedCorrespondence c01 = random_graded_corr(n0, n1, N, rng);
    GradedCorrespondence c12 = random_graded_corr(n1, n2, N, rng);
    if (!is_embedded_linear(c01.corr, c12.corr)) continue;
    GradedLagrangian g0 = random_graded(n0, N, rng);
    GradedLagrangian g2 = random_graded(n2, N, rng);

    GradedCorrespondence c02 = compose_graded(c01, c12);

    GradedLagrangian lhs1 = graded_product({g0, c12.graded()});
    GradedLagrangian lhs2 = graded_product({dual_graded(c01.graded()), g2});
    GradedLagrangian rhs1 = graded_product({g0, dual_graded(g2)});
    GradedLagrangian rhs2 = dual_graded(c02.graded());
    if (!frames_transverse(lhs1.frame, lhs2.frame, 1e-4) ||
        !frames_transverse(rhs1.frame, rhs2.frame, 1e-4))
      continue;
    CHECK(degree(lhs1, lhs2) == degree(rhs1, rhs2));
    ++done;
  }
}

TEST_CASE("graded composition is associative") {
  Rng rng(11);
  int done = 0;
  while (done < 6) {
    int N = 4;
    GradedCorrespondence a = random_graded_corr(1, 2, N, rng);
    GradedCorrespondence b = random_graded_corr(2, 1, N, rng);
    GradedCorrespondence c = random_graded_corr(1, 2, N, rng);
    if (!is_embedded_linear(a.corr, b.corr) || !is_embedded_linear(b.corr, c.corr)) continue;
    GradedCorrespondence ab = compose_graded(a, b);
    GradedCorrespondence bc = compose_graded(b, c);
    if (!is_embedded_linear(ab.corr, c.corr) || !is_embedded_linear(a.corr, bc.corr)) continue;
    GradedCorrespondence left = compose_graded(ab, c);
    GradedCorrespondence right = compose_graded(a, bc);
    CHECK(subspace_distance(left.corr.lag.span(), right.corr.lag.span()) < 1e-8);
    double diff = left.theta - right.theta;
    long long r = std::llround(diff);
    CHECK(std::abs(diff - r) < 1e-6);
    CHECK(imod(r, N) == 0);
    ++done;
  }
}

TEST_CASE("insert diagonal lemma clause a") {
  Rng rng(12);
  int done = 0;
  while (done < 10) {
    int n0 = rng.uniform_int(1, 2), n1 = rng.uniform_int(1, 2), n2 = rng.uniform_int(1, 2);
    int N = 2 * rng.uniform_int(1, 3);
    GradedLagrangian g0 = random_graded(n0, N, rng);
    GradedCorrespondence g01 = random_graded_corr(n0, n1, N, rng);
    GradedCorrespondence g12 = random_graded_corr(n1, n2, N, rng);
    GradedLagrangian g2 = random_graded(n2, N, rng);
    try {
      CHECK(insert_diagonal_check_a(g0, g01, g12, g2));
      ++done;
    } catch (const std::exception&) {
      // non-transverse draw
    }
  }
}

TEST_CASE("insert diagonal lemma clause b") {
  Rng rng(13);
  int done = 0;
  while (done < 10) {
    int n0 = rng.uniform_int(1, 2), n1 = rng.uniform_int(1, 2);
    int N = 2 * rng.uniform_int(1, 3);
    GradedLagrangian lam = random_graded(2 * n0 + n1, N, rng);
    GradedLagrangian kay = random_graded(2 * n0 + n1, N, rng);
    try {
      CHECK(insert_diagonal_check_b(lam, kay, n0, n1));
      ++done;
    } catch (const std::exception&) {
    }
  }
}

TEST_CASE("degree is deterministic and stable across calls") {
  Rng rng(14);
  int done = 0;
  while (done < 10) {
    int n = rng.uniform_int(2, 3);
    int N = 8;
    GradedLagrangian a = random_graded(n, N, rng);
    GradedLagrangian b = random_graded(n, N, rng);
    if (!frames_transverse(a.frame, b.frame, 1e-4)) continue;
    int base = degree(a, b);
    CHECK(degree(a, b) == base);
    CHECK(base == spectral_degree(a, b));
    ++done;
  }
}
