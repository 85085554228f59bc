// JSON schemas (version "quiltlab/1") for spaces, frames, correspondences,
// graded lifts, Lagrangian paths, and lattice sequences. Schema violations
// raise SchemaError carrying a JSON pointer path.
#pragma once

#include <quiltlab/maslov.hpp>
#include <quiltlab/quilt.hpp>

#include <json.hpp>

#include <string>

namespace quiltlab {

using nlohmann::json;

struct SchemaError : std::runtime_error {
  std::string pointer;
  SchemaError(const std::string& ptr, const std::string& what)
      : std::runtime_error(what + " at " + ptr), pointer(ptr) {}
};

namespace jdetail {

inline const json& at(const json& doc, const std::string& ptr, const char* key) {
  if (!doc.is_object() || !doc.contains(key))
    throw SchemaError(ptr + "/" + key, "missing field");
  return doc[key];
}

inline int as_int(const json& v, const std::string& ptr) {
  if (!v.is_number_integer()) throw SchemaError(ptr, "expected an integer");
  return v.get<int>();
}

inline double as_num(const json& v, const std::string& ptr) {
  if (!v.is_number()) throw SchemaError(ptr, "expected a number");
  return v.get<double>();
}

inline MatrixXd as_matrix(const json& v, const std::string& ptr) {
  if (!v.is_array() || v.empty()) throw SchemaError(ptr, "expected a nonempty array of rows");
  const size_t cols = v[0].is_array() ? v[0].size() : 0;
  if (cols == 0) throw SchemaError(ptr + "/0", "expected a nonempty row");
  MatrixXd M(v.size(), cols);
  for (size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_array() || v[i].size() != cols)
      throw SchemaError(ptr + "/" + std::to_string(i), "ragged row");
    for (size_t j = 0; j < cols; ++j)
      M(static_cast<int>(i), static_cast<int>(j)) =
          as_num(v[i][j], ptr + "/" + std::to_string(i) + "/" + std::to_string(j));
  }
  return M;
}

inline json matrix_json(const MatrixXd& M) {
  json rows = json::array();
  for (int i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace jdetail

// Darboux basis of an arbitrary antisymmetric invertible form: returns T with
// T^T A T equal to the standard form, so frames in the original coordinates
// map to standard ones through T^{-1}.
inline MatrixXd darboux_basis(const MatrixXd& A, double tol = 1e-10) {
  const int d = static_cast<int>(A.rows());
  if (d % 2 != 0 || A.cols() != d)
    throw std::invalid_argument("darboux_basis: form must be even-dimensional and square");
  if ((A + A.transpose()).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("darboux_basis: form is not antisymmetric");
  const int n = d / 2;
  MatrixXd V = MatrixXd::Identity(d, d);  // columns span the remaining subspace
  MatrixXd U(d, n), W(d, n);
  for (int k = 0; k < n; ++k) {
    VectorXd u = V.col(0);
    // partner with maximal pairing for conditioning
    int best = -1;
    double bv = 0;
    for (int c = 1; c < V.cols(); ++c) {
      double p = std::abs(u.dot(A * V.col(c)));
      if (p > bv) {
        bv = p;
        best = c;
      }
    }
    if (best < 0 || bv < tol) throw std::invalid_argument("darboux_basis: form is degenerate");
    VectorXd w = V.col(best) / u.dot(A * V.col(best));
    U.col(k) = u;
    W.col(k) = w;
    // reduce the remaining subspace to the symplectic complement of (u, w)
    MatrixXd C(2, V.cols());
    C.row(0) = (A * u).transpose() * V;
    C.row(1) = (A * w).transpose() * V;
    MatrixXd K = null_space(C, tol);
    V = (V * K).eval();
  }
  MatrixXd T(d, d);
  T.leftCols(n) = U;
  T.rightCols(n) = W;
  return T;
}

struct SpaceDocument {
  SymplecticSpace space;
  MatrixXd to_standard;  // maps original coordinates to standard ones
};

inline SpaceDocument read_space(const json& doc, const std::string& ptr = "") {
  int n = jdetail::as_int(jdetail::at(doc, ptr, "n"), ptr + "/n");
  if (n < 0) throw SchemaError(ptr + "/n", "n must be nonnegative");
  SpaceDocument out;
  out.space = standard_space(n);
  const json& form = jdetail::at(doc, ptr, "form");
  if (form.is_string() && form.get<std::string>() == "standard") {
    out.to_standard = MatrixXd::Identity(2 * n, 2 * n);
    return out;
  }
  if (!form.is_array()) throw SchemaError(ptr + "/form", "expected \"standard\" or a matrix");
  MatrixXd A = jdetail::as_matrix(form, ptr + "/form");
  if (A.rows() != 2 * n || A.cols() != 2 * n)
    throw SchemaError(ptr + "/form", "form must be 2n x 2n");
  MatrixXd T = darboux_basis(A);
  out.to_standard = T.inverse();
  return out;
}

inline json space_json(const SymplecticSpace& sp) {
  return json{{"n", sp.n}, {"form", "standard"}};
}

inline LagrangianFrame read_frame(const json& doc, const std::string& ptr = "") {
  SpaceDocument sd = read_space(jdetail::at(doc, ptr, "space"), ptr + "/space");
  MatrixXd cols = jdetail::as_matrix(jdetail::at(doc, ptr, "columns"), ptr + "/columns");
  if (cols.rows() != sd.space.dim() || cols.cols() != sd.space.n)
    throw SchemaError(ptr + "/columns", "expected a 2n x n matrix");
  try {
    return LagrangianFrame(sd.space, sd.to_standard * cols);
  } catch (const std::invalid_argument& e) {
    throw SchemaError(ptr + "/columns", e.what());
  }
}

inline json frame_json(const LagrangianFrame& f) {
  return json{{"space", space_json(f.ambient)}, {"columns", jdetail::matrix_json(f.frame)}};
}

inline LinearCorrespondence read_correspondence(const json& doc, const std::string& ptr = "") {
  SpaceDocument src = read_space(jdetail::at(doc, ptr, "source"), ptr + "/source");
  SpaceDocument tgt = read_space(jdetail::at(doc, ptr, "target"), ptr + "/target");
  MatrixXd cols = jdetail::as_matrix(jdetail::at(doc, ptr, "frame"), ptr + "/frame");
  ProductSignature sig = corr_signature(src.space.n, tgt.space.n);
  if (cols.rows() != sig.space().dim() || cols.cols() != sig.space().n)
    throw SchemaError(ptr + "/frame", "expected a 2(n0+n1) x (n0+n1) matrix");
  try {
    return LinearCorrespondence(src.space, tgt.space, LagrangianFrame(sig.space(), cols));
  } catch (const std::invalid_argument& e) {
    throw SchemaError(ptr + "/frame", e.what());
  }
}

inline json correspondence_json(const LinearCorrespondence& c) {
  return json{{"schema", "quiltlab/1"},
              {"source", space_json(c.source)},
              {"target", space_json(c.target)},
              {"frame", jdetail::matrix_json(c.lag.frame)}};
}

inline json composition_report_json(const CompositionReport& rep) {
  return json{{"schema", "quiltlab/1"},
              {"transverse", rep.transverse},
              {"defect", rep.defect},
              {"kernel", jdetail::matrix_json(rep.kernel.basis)},
              {"fiber", jdetail::matrix_json(rep.fiber.basis)},
              {"composed", correspondence_json(rep.composed)}};
}

inline GradedLagrangian read_graded(const json& doc, const std::string& ptr = "") {
  LagrangianFrame f = read_frame(doc, ptr);
  double theta = jdetail::as_num(jdetail::at(doc, ptr, "theta"), ptr + "/theta");
  int N = jdetail::as_int(jdetail::at(doc, ptr, "N"), ptr + "/N");
  try {
    return GradedLagrangian(f, theta, N);
  } catch (const std::invalid_argument& e) {
    throw SchemaError(ptr + "/theta", e.what());
  }
}

inline json graded_json(const GradedLagrangian& g) {
  json out = frame_json(g.frame);
  out["schema"] = "quiltlab/1";
  out["theta"] = g.theta;
  out["N"] = g.modulus;
  return out;
}

// Paths: analytic rotation families or piecewise-geodesic sample lists.
inline LagrangianPath read_path(const json& doc, const std::string& ptr = "") {
  if (doc.contains("kind")) {
    std::string kind = doc["kind"].get<std::string>();
    if (kind == "rotation") {
      LagrangianFrame f = read_frame(jdetail::at(doc, ptr, "frame"), ptr + "/frame");
      double angle = jdetail::as_num(jdetail::at(doc, ptr, "angle"), ptr + "/angle");
      return rotation_path(f, angle);
    }
    if (kind == "constant") {
      LagrangianFrame f = read_frame(jdetail::at(doc, ptr, "frame"), ptr + "/frame");
      return constant_path(f);
    }
    throw SchemaError(ptr + "/kind", "unknown path kind \"" + kind + "\"");
  }
  const json& samples = jdetail::at(doc, ptr, "samples");
  if (!samples.is_array() || samples.size() < 2)
    throw SchemaError(ptr + "/samples", "expected at least two frames");
  std::vector<LagrangianFrame> frames;
  for (size_t i = 0; i < samples.size(); ++i)
    frames.push_back(read_frame(samples[i], ptr + "/samples/" + std::to_string(i)));
  std::vector<LagrangianPath> segs;
  for (size_t i = 0; i + 1 < frames.size(); ++i)
    segs.push_back(unitary_geodesic(frames[i], frames[i + 1]));
  return concatenate(segs);
}

// Lattice sequences.
inline LatticeSequence read_lattice_sequence(const json& doc, const std::string& ptr = "") {
  if (jdetail::at(doc, ptr, "provider").get<std::string>() != "torus")
    throw SchemaError(ptr + "/provider", "expected provider \"torus\"");
  LatticeSequence seq;
  const json& mans = jdetail::at(doc, ptr, "manifolds");
  if (!mans.is_array() || mans.empty()) throw SchemaError(ptr + "/manifolds", "expected a list");
  for (size_t j = 0; j < mans.size(); ++j)
    seq.dims.push_back(jdetail::as_int(mans[j], ptr + "/manifolds/" + std::to_string(j)));
  seq.modulus = jdetail::as_int(jdetail::at(doc, ptr, "N"), ptr + "/N");

  const json& corrs = jdetail::at(doc, ptr, "correspondences");
  if (!corrs.is_array() || corrs.size() != mans.size())
    throw SchemaError(ptr + "/correspondences", "expected one correspondence per manifold");
  const int r1 = static_cast<int>(mans.size());
  for (int j = 0; j < r1; ++j) {
    std::string cp = ptr + "/correspondences/" + std::to_string(j);
    const json& c = corrs[j];
    MatrixXd dirs_d = jdetail::as_matrix(jdetail::at(c, cp, "directions"), cp + "/directions");
    MatrixXl dirs(dirs_d.rows(), dirs_d.cols());
    for (int a = 0; a < dirs_d.rows(); ++a)
      for (int b = 0; b < dirs_d.cols(); ++b) {
        double v = dirs_d(a, b);
        if (std::abs(v - std::round(v)) > 1e-9)
          throw SchemaError(cp + "/directions", "directions must be integers");
        dirs(a, b) = static_cast<long long>(std::llround(v));
      }
    const json& offj = jdetail::at(c, cp, "offset");
    if (!offj.is_array()) throw SchemaError(cp + "/offset", "expected an array");
    VectorXd off(offj.size());
    for (size_t i = 0; i < offj.size(); ++i)
      off(static_cast<int>(i)) = jdetail::as_num(offj[i], cp + "/offset/" + std::to_string(i));
    int shift = c.contains("theta_shift")
                    ? jdetail::as_int(c["theta_shift"], cp + "/theta_shift")
                    : 0;
    int ns = seq.dims[j], nt = seq.dims[(j + 1) % r1];
    try {
      seq.seams.push_back(correspondence_from_lattice(ns, nt, dirs, off, shift));
    } catch (const std::invalid_argument& e) {
      throw SchemaError(cp, e.what());
    }
  }

  const json& widths = jdetail::at(doc, ptr, "widths");
  if (!widths.is_array() || widths.size() != mans.size())
    throw SchemaError(ptr + "/widths", "expected one width per manifold");
  for (size_t j = 0; j < widths.size(); ++j)
    seq.widths.push_back(jdetail::as_num(widths[j], ptr + "/widths/" + std::to_string(j)));

  for (int j = 0; j < r1; ++j) {
    VectorXd c = VectorXd::Zero(2 * seq.dims[j]);
    if (doc.contains("perturbations")) {
      const json& ps = doc["perturbations"];
      if (!ps.is_array() || ps.size() != mans.size())
        throw SchemaError(ptr + "/perturbations", "expected one perturbation per manifold");
      const json& pj = ps[j];
      if (!pj.is_array() || static_cast<int>(pj.size()) != 2 * seq.dims[j])
        throw SchemaError(ptr + "/perturbations/" + std::to_string(j), "wrong length");
      for (int i = 0; i < c.size(); ++i)
        c(i) = jdetail::as_num(pj[i],
                               ptr + "/perturbations/" + std::to_string(j) + "/" +
                                   std::to_string(i));
    }
    seq.perturbations.push_back(c);
  }
  try {
    seq.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(ptr, e.what());
  }
  return seq;
}

inline json lattice_sequence_json(const LatticeSequence& seq) {
  json out;
  out["schema"] = "quiltlab/1";
  out["provider"] = "torus";
  out["N"] = seq.modulus;
  out["manifolds"] = seq.dims;
  json corrs = json::array();
  for (const auto& s : seq.seams) {
    json c;
    c["directions"] = jdetail::matrix_json(s.directions.cast<double>());
    json off = json::array();
    for (int i = 0; i < s.offset.size(); ++i) off.push_back(s.offset(i));
    c["offset"] = off;
    c["theta"] = s.theta;
    corrs.push_back(c);
  }
  out["correspondences"] = corrs;
  out["widths"] = seq.widths;
  json ps = json::array();
  for (const auto& p : seq.perturbations) {
    json row = json::array();
    for (int i = 0; i < p.size(); ++i) row.push_back(p(i));
    ps.push_back(row);
  }
  out["perturbations"] = ps;
  return out;
}

}  // namespace quiltlab
