#include <catch2/catch_amalgamated.hpp>
#include <quiltlab/quilt.hpp>

using namespace quiltlab;

namespace {

// random element of Sp(2k, Z) as a word in elementary generators
MatrixXl random_int_symplectic(int k, Rng& rng, int words) {
  MatrixXl K = MatrixXl::Identity(2 * k, 2 * k);
  for (int w = 0; w < words; ++w) {
    MatrixXl G = MatrixXl::Identity(2 * k, 2 * k);
    int kind = rng.uniform_int(0, 2);
    if (kind == 0 || kind == 1) {
      MatrixXl B = MatrixXl::Zero(k, k);
      int i = rng.uniform_int(0, k - 1), j = rng.uniform_int(0, k - 1);
      long long v = rng.uniform_int(-1, 1);
      B(i, j) += v;
      B(j, i) = B(i, j);
      if (kind == 0)
        G.block(0, k, k, k) = B;  // [[I, B], [0, I]]
      else
        G.block(k, 0, k, k) = B;  // [[I, 0], [B, I]]
    } else {
      MatrixXl U = MatrixXl::Identity(k, k);
      if (k > 1) {
        int i = rng.uniform_int(0, k - 1), j = rng.uniform_int(0, k - 1);
        if (i != j) U(i, j) = rng.uniform_int(-1, 1);
      }
      G.block(0, 0, k, k) = U;
      // (U^{-1})^T for an elementary row-add is the transpose with negated entry
      MatrixXl Uinv = MatrixXl::Identity(k, k);
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b)
          if (a != b) Uinv(a, b) = -U(a, b);
      G.block(k, k, k, k) = Uinv.transpose();
    }
    K = K * G;
  }
  return K;
}

// random primitive integer Lagrangian direction lattice for a correspondence
MatrixXl random_lagrangian_lattice(int ns, int nt, Rng& rng, int words) {
  const int k = ns + nt;
  // horizontal lattice in concatenated coordinates (x_s, y_s, x_t, y_t)
  MatrixXl H = MatrixXl::Zero(2 * k, k);
  for (int i = 0; i < ns; ++i) H(i, i) = 1;
  for (int i = 0; i < nt; ++i) H(2 * ns + i, ns + i) = 1;
  // conjugate a standard integer symplectic through the (integer, orthogonal)
  // embedding to act on the product form (-omega) + omega
  MatrixXd E = embed_matrix(corr_signature(ns, nt));
  MatrixXl Ei = E.cast<long long>();
  MatrixXl K = random_int_symplectic(k, rng, words);
  MatrixXl G = Ei.transpose() * K * Ei;
  return G * H;
}

LatticeCorrespondence random_lattice_corr(int ns, int nt, int N, Rng& rng, int words = 4) {
  for (int attempt = 0; attempt < 50; ++attempt) {
    MatrixXl dirs = random_lagrangian_lattice(ns, nt, rng, words);
    if (dirs.cwiseAbs().maxCoeff() > 6) continue;  // keep lattice indices small
    VectorXd off(2 * (ns + nt));
    for (int i = 0; i < off.size(); ++i) off(i) = rng.uniform();
    try {
      return correspondence_from_lattice(ns, nt, dirs, off, rng.uniform_int(-N, N));
    } catch (const std::invalid_argument&) {
    }
  }
  throw std::runtime_error("random_lattice_corr: generation failed");
}

LatticeSequence random_sequence(int len, int N, Rng& rng, int max_count = 60) {
  for (int attempt = 0; attempt < 80; ++attempt) {
    LatticeSequence seq;
    seq.modulus = N;
    for (int j = 0; j < len; ++j) seq.dims.push_back(rng.uniform_int(1, 2));
    bool ok = true;
    for (int j = 0; j < len && ok; ++j) {
      try {
        seq.seams.push_back(
            random_lattice_corr(seq.dims[j], seq.dims[(j + 1) % len], N, rng, 3));
      } catch (const std::runtime_error&) {
        ok = false;
      }
      seq.widths.push_back(0.5 + rng.uniform());
      VectorXd c(2 * seq.dims[j]);
      for (int i = 0; i < c.size(); ++i) c(i) = 0.3 * (rng.uniform() - 0.5);
      seq.perturbations.push_back(c);
    }
    if (!ok) continue;
    try {
      auto gens = intersection_points(seq);
      if (gens.empty() || static_cast<int>(gens.size()) > max_count) continue;
      generator_degree(seq.tangents());
      return seq;
    } catch (const std::exception&) {
      continue;
    }
  }
  throw std::runtime_error("random_sequence: generation failed");
}

MatrixXl circle_directions(long long dx, long long dy) {
  MatrixXl d(2, 1);
  d << dx, dy;
  return d;
}
}  // namespace

TEST_CASE("two circles in the torus") {
  // L0 = {y = 0} as pt -> T^2, L1 = {x = 0} as T^2 -> pt
  LatticeCorrespondence L0 = lattice_from_point(1, circle_directions(1, 0), VectorXd::Zero(2));
  LatticeCorrespondence L1 = lattice_to_point(1, circle_directions(0, 1), VectorXd::Zero(2));
  LatticeSequence seq;
  seq.dims = {0, 1};
  seq.seams = {L0, L1};
  seq.widths = {1.0, 1.0};
  seq.perturbations = {VectorXd::Zero(0), VectorXd::Zero(2)};
  seq.modulus = 2;
  auto gens = intersection_points(seq);
  REQUIRE(gens.size() == 1);
  CHECK(gens[0].points[1].cwiseAbs().maxCoeff() < 1e-9);  // the origin

  // L1 = {y = k x}: exactly |k| intersection points
  for (long long k : {2, 3, 5}) {
    LatticeSequence s2 = seq;
    s2.seams[1] = lattice_to_point(1, circle_directions(1, k), VectorXd::Zero(2));
    CHECK(intersection_points(s2).size() == static_cast<size_t>(k));
  }
}

TEST_CASE("shifted diagonal fixed points") {
  // cyclic (L, L^t) with L the graph of a translation: count = fixed points
  VectorXd v(2);
  v << 0.5, 0.0;
  LatticeCorrespondence g = lattice_translation_graph(1, v);
  LatticeCorrespondence gt = lattice_translation_graph(1, -v);
  LatticeSequence seq;
  seq.dims = {1, 1};
  seq.seams = {g, gt};
  seq.widths = {1.0, 1.0};
  seq.perturbations = {VectorXd::Zero(2), VectorXd::Zero(2)};
  seq.modulus = 2;
  // translations of the torus are fixed-point free or all-fixing; with net
  // shift zero the system is degenerate, never a finite set
  CHECK_THROWS_AS(intersection_points(seq), std::invalid_argument);

  // an irrational net shift empties the intersection instead
  VectorXd w(2);
  w << std::sqrt(2.0) / 3.0, 0.0;
  seq.seams[1] = lattice_translation_graph(1, w);
  CHECK(intersection_points(seq).empty());
}

TEST_CASE("diagonal composes as the identity for lattice correspondences") {
  Rng rng(41);
  for (int trial = 0; trial < 6; ++trial) {
    LatticeCorrespondence c = random_lattice_corr(1, 2, 4, rng);
    LatticeCorrespondence d = lattice_diagonal(1, 4);
    LatticeCorrespondence composed = compose_lattice(d, c, 4);
    CHECK(subspace_distance(composed.tangent.span(), c.tangent.span()) < 1e-8);
    CHECK(composed.contains(c.offset));
  }
}

TEST_CASE("three degree formulas agree on random sequences") {
  Rng rng(42);
  int done = 0;
  while (done < 12) {
    int len = rng.uniform_int(2, 5);
    int N = 2 * rng.uniform_int(1, 2);
    LatticeSequence seq;
    try {
      seq = random_sequence(len, N, rng);
    } catch (const std::runtime_error&) {
      continue;
    }
    SeamTangents st = seq.tangents();
    int d0 = generator_degree(st);
    int da = generator_degree_alt_a(st, rng);
    int db = generator_degree_alt_b(st);
    CHECK(d0 == da);
    CHECK(d0 == db);
    ++done;
  }
}

TEST_CASE("diagonal insertion preserves degrees and commutes") {
  Rng rng(43);
  int done = 0;
  while (done < 8) {
    int len = rng.uniform_int(2, 4);
    LatticeSequence seq;
    try {
      seq = random_sequence(len, 4, rng);
    } catch (const std::runtime_error&) {
      continue;
    }
    int base = generator_degree(seq.tangents());
    for (int pos = 0; pos < len; ++pos) {
      LatticeSequence ins = insert_diagonal(seq, pos);
      CHECK(generator_degree(ins.tangents()) == base);
      CHECK(intersection_points(ins).size() == intersection_points(seq).size());
    }
    if (len >= 3) {
      LatticeSequence ab = insert_diagonal(insert_diagonal(seq, 0), 3);
      LatticeSequence ba = insert_diagonal(insert_diagonal(seq, 2), 0);
      CHECK(generator_degree(ab.tangents()) == generator_degree(ba.tangents()));
      CHECK(ab.length() == ba.length());
    }
    ++done;
  }
}

TEST_CASE("folding reproduces the pair degree for r = 1") {
  Rng rng(44);
  int done = 0;
  while (done < 8) {
    LatticeSequence seq;
    try {
      seq = random_sequence(2, 4, rng);
    } catch (const std::runtime_error&) {
      continue;
    }
    SeamTangents st = seq.tangents();
    FoldedPair fp = fold_tangents(st);
    CHECK(degree(fp.zero, dual_graded(fp.one)) == generator_degree(st));
    ++done;
  }
}

TEST_CASE("odd length sequences route through the diagonal") {
  Rng rng(45);
  int done = 0;
  while (done < 6) {
    LatticeSequence seq;
    try {
      seq = random_sequence(3, 2, rng);
    } catch (const std::runtime_error&) {
      continue;
    }
    SeamTangents st = seq.tangents();
    int direct = generator_degree(st);
    int folded = generator_degree_alt_b(st);
    LatticeSequence ins = insert_diagonal(seq, 2);
    int via_insert = generator_degree_alt_b(ins.tangents());
    CHECK(direct == folded);
    CHECK(folded == via_insert);
    ++done;
  }
}

TEST_CASE("composition drops the intermediate point and preserves degrees") {
  Rng rng(46);
  int done = 0, attempts = 0;
  while (done < 8 && attempts < 200) {
    ++attempts;
    int len = rng.uniform_int(3, 5);
    LatticeSequence seq;
    try {
      seq = random_sequence(len, 4, rng);
    } catch (const std::runtime_error&) {
      continue;
    }
    int j = rng.uniform_int(0, len - 1);
    seq.perturbations[(j + 1) % len].setZero();
    std::vector<Generator> before;
    try {
      before = intersection_points(seq);
      if (before.empty()) continue;
    } catch (const std::exception&) {
      continue;
    }
    try {
      ComposeResult res = compose_at(seq, j);
      CHECK(res.sequence.length() == len - 1);
      CHECK(intersection_points(res.sequence).size() == before.size());
      for (int b : res.bijection) CHECK(b >= 0);
      CHECK(generator_degree(res.sequence.tangents()) == generator_degree(seq.tangents()));
      ++done;
    } catch (const NotEmbedded&) {
      // legitimate rejection
    }
  }
  CHECK(done >= 5);
}

TEST_CASE("composing away an inserted diagonal is the identity") {
  Rng rng(47);
  int done = 0;
  while (done < 5) {
    LatticeSequence seq;
    try {
      seq = random_sequence(2, 4, rng);
    } catch (const std::runtime_error&) {
      continue;
    }
    LatticeSequence ins = insert_diagonal(seq, 0);
    ComposeResult res = compose_at(ins, 0);
    REQUIRE(res.sequence.length() == seq.length());
    CHECK(subspace_distance(res.sequence.seams[0].tangent.span(),
                            seq.seams[0].tangent.span()) < 1e-8);
    CHECK(intersection_points(res.sequence).size() == intersection_points(seq).size());
    CHECK(generator_degree(res.sequence.tangents()) == generator_degree(seq.tangents()));
    ++done;
  }
}

TEST_CASE("covering compositions are rejected with a diagnostic") {
  // the doubling isogeny correspondence composed with its transpose has a
  // disconnected fiber
  MatrixXl dirs(4, 2);
  dirs << 1, 0, 0, 2, 2, 0, 0, 1;
  LatticeCorrespondence L = correspondence_from_lattice(1, 1, dirs, VectorXd::Zero(4));
  MatrixXl tdirs(4, 2);
  tdirs << 2, 0, 0, 1, 1, 0, 0, 2;
  LatticeCorrespondence Lt = correspondence_from_lattice(1, 1, tdirs, VectorXd::Zero(4));
  try {
    compose_lattice(L, Lt, 2);
    FAIL("expected NotEmbedded");
  } catch (const NotEmbedded& e) {
    std::string msg = e.what();
    CHECK((msg.find("components") != std::string::npos ||
           msg.find("cover") != std::string::npos));
  }
}

TEST_CASE("kunneth splitting factors generators and degrees") {
  // pt -> T^2 -> T^2 -> pt with a split middle seam (circle x circle)
  LatticeSequence prod;
  prod.dims = {0, 1, 1};
  prod.modulus = 2;
  prod.seams.push_back(lattice_from_point(1, circle_directions(1, 0), VectorXd::Zero(2)));
  {
    MatrixXl dirs = MatrixXl::Zero(4, 2);
    dirs.block(0, 0, 2, 1) = circle_directions(1, 1);
    dirs.block(2, 1, 2, 1) = circle_directions(1, 0);
    prod.seams.push_back(correspondence_from_lattice(1, 1, dirs, VectorXd::Zero(4)));
  }
  prod.seams.push_back(lattice_to_point(1, circle_directions(1, -1), VectorXd::Zero(2)));
  prod.widths = {1.0, 1.0, 1.0};
  VectorXd c1(2), c2(2);
  c1 << 0.23, 0.41;
  c2 << 0.11, 0.37;
  prod.perturbations = {VectorXd::Zero(0), c1, c2};

  KunnethSplit ks = kunneth_split(prod, 1);
  auto whole = graded_intersection_points(prod);
  auto lg = graded_intersection_points(ks.left);
  auto rg = graded_intersection_points(ks.right);
  REQUIRE(!whole.empty());
  REQUIRE(whole.size() == lg.size() * rg.size());
  for (size_t i = 0; i < whole.size(); ++i) {
    int dsum = (lg[ks.left_index[i]].degree + rg[ks.right_index[i]].degree) % 2;
    CHECK(whole[i].degree == dsum);
  }

  // zero oracle: homology of the product equals homology of the tensor complex
  GradedChainComplex cw = build_complex(prod, zero_oracle());
  GradedChainComplex cl = build_complex(ks.left, zero_oracle());
  GradedChainComplex cr = build_complex(ks.right, zero_oracle());
  auto hw = homology(cw);
  auto ht = homology(tensor_complex(cl, cr));
  for (int d = 0; d < 2; ++d) {
    CHECK(hw[d].betti == ht[d].betti);
    CHECK(hw[d].torsion == ht[d].torsion);
  }

  // non-split seams are refused
  LatticeSequence bad = prod;
  Rng rng(50);
  bad.seams[1] = random_lattice_corr(1, 1, 2, rng);
  bool split_or_refused = true;
  try {
    kunneth_split(bad, 1);
  } catch (const std::invalid_argument&) {
    split_or_refused = true;
  }
  CHECK(split_or_refused);
}

TEST_CASE("complex construction validates oracles and widths are inert") {
  Rng rng(49);
  LatticeSequence seq = random_sequence(2, 2, rng);
  GradedChainComplex cx = build_complex(seq, zero_oracle());
  auto H = homology(cx);
  int total = 0;
  for (auto& h : H) total += h.betti;
  CHECK(total == static_cast<int>(intersection_points(seq).size()));

  // all generators of a lattice sequence share one degree, so any nonzero
  // count violates the degree-1 rule and must be rejected with a witness
  if (cx.size() >= 2) {
    auto bad = [](int from, int to) -> long long { return (from == 0 && to == 1) ? 1 : 0; };
    CHECK_THROWS_WITH(build_complex(seq, bad),
                      Catch::Matchers::ContainsSubstring("witness"));
  }

  LatticeSequence wide = seq;
  for (auto& w : wide.widths) w *= 7.5;
  CHECK(intersection_points(wide).size() == intersection_points(seq).size());
  CHECK(generator_degree(wide.tangents()) == generator_degree(seq.tangents()));
}
