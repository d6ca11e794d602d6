#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include "ks/catalog.hpp"
#include "ks/errors.hpp"
#include "ks/graph.hpp"
#include "ks/rigidity.hpp"

using namespace ks;
using cd = std::complex<double>;

namespace {

std::filesystem::path catalog_dir() { return KS_CATALOG_DIR; }

KSSetRecord load(const char* name) {
  return load_set(catalog_dir() / (std::string(name) + ".ks"));
}

// A deterministic unitary built from a fixed seed (QR of a random complex
// matrix), used by the invariance tests.
Eigen::MatrixXcd seeded_unitary(int dim, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXcd m(dim, dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) m(r, c) = cd(gauss(rng), gauss(rng));
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
  return qr.householderQ();
}

KSSetRecord transformed_copy(const KSSetRecord& set,
                             const Eigen::MatrixXcd& u) {
  KSSetRecord out;
  out.name = set.name;
  out.dim = set.dim;
  out.expected = set.expected;
  for (const Ray& r : set.rays) out.rays.push_back(canonicalize(u * r.v));
  return out;
}

}  // namespace

TEST_CASE("gauge_fix pins the chosen basis onto the standard basis") {
  KSSetRecord set = load("peres33");
  OrthoGraph g = build_graph(set);
  std::vector<Basis> bases = enumerate_bases(g);
  GaugeFrame frame = gauge_fix(set, g, bases[0]);
  CHECK(frame.dim == 3);
  CHECK(frame.n_coords == 2 * (33 - 3) * 2);  // 2(dim-1) per free ray
  for (int j = 0; j < 3; ++j) {
    int v = frame.pinned.vertices[static_cast<size_t>(j)];
    const Eigen::VectorXcd& ray = frame.reference[static_cast<size_t>(v)].v;
    CHECK(std::abs(ray[j] - cd(1, 0)) < 1e-12);
    CHECK(frame.anchor[static_cast<size_t>(v)] == -1);
    CHECK(frame.offset[static_cast<size_t>(v)] == -1);
  }
  // Free rays carry consecutive chart offsets and a valid anchor.
  for (size_t v = 0; v < frame.reference.size(); ++v) {
    if (frame.anchor[v] < 0) continue;
    CHECK(std::abs(frame.reference[v].v[frame.anchor[v]]) > 1e-9);
    CHECK(frame.offset[v] >= 0);
    CHECK(frame.offset[v] + 2 * (frame.dim - 1) <= frame.n_coords);
  }
}

TEST_CASE("gauge_fix rejects a non-basis") {
  KSSetRecord set = load("peres33");
  OrthoGraph g = build_graph(set);
  Basis bogus{{0, 1, 3}};  // not mutually orthogonal in peres33
  CHECK_THROWS_AS(gauge_fix(set, g, bogus), InputError);
}

TEST_CASE("constraint system: zero residual and analytic Jacobian at the reference") {
  KSSetRecord set = load("peres33");
  OrthoGraph g = build_graph(set);
  std::vector<Basis> bases = enumerate_bases(g);
  GaugeFrame frame = gauge_fix(set, g, bases[0]);
  ConstraintSystem sys = assemble_constraints(frame, g);
  // 72 edges, 3 internal to the pinned basis: 69 constrained, 138 residues.
  CHECK(sys.constrained_edges.size() == 69);
  CHECK(sys.n_residues == 138);
  CHECK(sys.n_coords == 120);

  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(sys.n_coords);
  CHECK(sys.residuals(x0).cwiseAbs().maxCoeff() < 1e-12);

  // Analytic Jacobian equals central finite differences at a generic point.
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd x(sys.n_coords);
  for (int k = 0; k < sys.n_coords; ++k) x[k] = 1e-2 * gauss(rng);
  Eigen::MatrixXd jac = sys.jacobian(x);
  const double h = 1e-5;
  double worst = 0.0;
  for (int k = 0; k < sys.n_coords; ++k) {
    Eigen::VectorXd xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    Eigen::VectorXd col = (sys.residuals(xp) - sys.residuals(xm)) / (2 * h);
    worst = std::max(worst, (jac.col(k) - col).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("residual gauge tangents are orthonormal null directions") {
  KSSetRecord set = load("peres33");
  OrthoGraph g = build_graph(set);
  std::vector<Basis> bases = enumerate_bases(g);
  GaugeFrame frame = gauge_fix(set, g, bases[0]);
  ConstraintSystem sys = assemble_constraints(frame, g);
  std::vector<Eigen::VectorXd> tangents = residual_gauge_tangents(frame);
  CHECK(tangents.size() == 2);  // dim - 1 diagonal phases modulo global phase
  Eigen::MatrixXd jac = sys.jacobian(Eigen::VectorXd::Zero(sys.n_coords));
  for (size_t a = 0; a < tangents.size(); ++a) {
    CHECK(tangents[a].norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((jac * tangents[a]).cwiseAbs().maxCoeff() < 1e-9);
    for (size_t b = 0; b < a; ++b) {
      CHECK(std::abs(tangents[a].dot(tangents[b])) < 1e-12);
    }
  }
}

TEST_CASE("parameter_count matches the catalog analysis for movable and rigid sets") {
  Tolerance tol;

  RigidityReport peres = parameter_count(load("peres33"), tol);
  CHECK(peres.null_dim == 3);
  CHECK(peres.residual_gauge_dim == 2);
  CHECK(peres.parameter_count == 1);
  CHECK(peres.rank == 117);
  CHECK(peres.n_coords == 120);
  CHECK(peres.conclusive);
  CHECK(peres.gap_ratio >= tol.gap_min);
  REQUIRE(peres.real_parameter_count.has_value());
  CHECK(*peres.real_parameter_count == 0);

  RigidityReport penrose = parameter_count(load("penrose33"), tol);
  CHECK(penrose.null_dim == 3);
  CHECK(penrose.residual_gauge_dim == 2);
  CHECK(penrose.parameter_count == 1);
  CHECK_FALSE(penrose.real_parameter_count.has_value());  // complex entries

  RigidityReport schuette = parameter_count(load("schuette33"), tol);
  CHECK(schuette.parameter_count == 0);
  CHECK(schuette.null_dim == 2);
  CHECK(schuette.residual_gauge_dim == 2);
  CHECK(schuette.conclusive);

  RigidityReport pavicic = parameter_count(load("pavicic20"), tol);
  CHECK(pavicic.parameter_count == 0);
  CHECK(pavicic.null_dim == 3);
  CHECK(pavicic.residual_gauge_dim == 3);
  CHECK(pavicic.conclusive);
}

TEST_CASE("parameter_count is invariant under basis choice, relabeling, and a global unitary") {
  KSSetRecord set = load("peres33");
  Tolerance tol;
  RigidityReport ref = parameter_count(set, tol, 0);

  // Any pinned basis gives the same quotiented count.
  OrthoGraph g = build_graph(set);
  const int n_bases = static_cast<int>(enumerate_bases(g).size());
  for (int b : {1, n_bases / 2, n_bases - 1}) {
    RigidityReport r = parameter_count(set, tol, b);
    CHECK(r.parameter_count == ref.parameter_count);
    CHECK(r.null_dim == ref.null_dim);
    CHECK(r.conclusive);
  }

  // Reversing the ray order only relabels the graph.
  KSSetRecord reversed = set;
  std::reverse(reversed.rays.begin(), reversed.rays.end());
  RigidityReport rrev = parameter_count(reversed, tol);
  CHECK(rrev.parameter_count == ref.parameter_count);
  CHECK(rrev.null_dim == ref.null_dim);

  // A global unitary moves every ray but no projective relation.
  KSSetRecord rotated = transformed_copy(set, seeded_unitary(3, 99));
  RigidityReport rrot = parameter_count(rotated, tol);
  CHECK(rrot.parameter_count == ref.parameter_count);
  CHECK(rrot.null_dim == ref.null_dim);
  CHECK(rrot.conclusive);
}

TEST_CASE("parameter_count rejects sets without a pinnable basis") {
  KSSetRecord rec = parse_set("name: t\ndim: 3\n1,0,0\n0,1,0\n", "t");
  CHECK_THROWS_AS(parameter_count(rec), InputError);
  KSSetRecord rec2 = parse_set("name: t\ndim: 3\n1,0,0\n0,1,0\n0,0,1\n", "t");
  CHECK_THROWS_AS(parameter_count(rec2, Tolerance{}, 5), InputError);
}

TEST_CASE("propagate_reconstruct rebuilds catalog sets consistently") {
  for (const char* name : {"peres33", "pavicic20"}) {
    KSSetRecord set = load(name);
    OrthoGraph g = build_graph(set);
    std::vector<Basis> bases = enumerate_bases(g);
    RigidityReport rig = parameter_count(set);
    PropagateResult res = propagate_reconstruct(g, bases, 1);
    INFO(name);
    CHECK(res.consistency);
    CHECK(res.parameters_introduced == rig.parameter_count);
    REQUIRE(res.rays.size() == set.rays.size());
    // The reconstruction satisfies every recorded orthogonality.
    Tolerance tol;
    for (const auto& [i, j] : g.edges) {
      CHECK(std::abs(inner_product(res.rays[static_cast<size_t>(i)],
                                   res.rays[static_cast<size_t>(j)])) <=
            tol.ortho_tol);
    }
  }
}

TEST_CASE("propagate_reconstruct handles a fully forced toy set") {
  // One basis plus both diagonals of the (1,2) coordinate plane: every vertex
  // is forced, no junctures.
  KSSetRecord rec = parse_set(
      "name: t\ndim: 3\n1,0,0\n0,1,0\n0,0,1\n0,1,1\n0,1,-1\n", "t");
  OrthoGraph g = build_graph(rec);
  std::vector<Basis> bases = enumerate_bases(g);
  PropagateResult res = propagate_reconstruct(g, bases, 3);
  CHECK(res.consistency);
  CHECK(res.parameters_introduced == 0);
}

TEST_CASE("propagate_reconstruct rejects a component without a basis") {
  OrthoGraph g = graph_from_edges(5, 3, {{0, 1}, {0, 2}, {1, 2}, {3, 4}});
  std::vector<Basis> bases = {Basis{{0, 1, 2}}};
  CHECK_THROWS_AS(propagate_reconstruct(g, bases, 1), InputError);
}

TEST_CASE("flex walks the movable set and preserves its graph") {
  KSSetRecord set = load("peres33");
  Tolerance tol;
  OrthoGraph g = build_graph(set, tol);
  FlexResult res = flex(set, 0, 3, 0.02, tol);
  REQUIRE(res.sets.size() == 3);
  REQUIRE(res.max_residues.size() == 3);
  for (size_t s = 0; s < res.sets.size(); ++s) {
    CHECK(res.max_residues[s] <= tol.ortho_tol);
    OrthoGraph gd = build_graph(res.sets[s], tol);
    CHECK(gd.edges == g.edges);
  }
  // The walk genuinely moves the configuration: some non-edge Gram modulus
  // changes measurably by the last step.
  double change = 0.0;
  const KSSetRecord& last = res.sets.back();
  for (int i = 0; i < 33; ++i) {
    for (int j = i + 1; j < 33; ++j) {
      if (g.adjacent(i, j)) continue;
      double before = std::abs(inner_product(set.rays[static_cast<size_t>(i)],
                                             set.rays[static_cast<size_t>(j)]));
      double after =
          std::abs(inner_product(last.rays[static_cast<size_t>(i)],
                                 last.rays[static_cast<size_t>(j)]));
      change = std::max(change, std::abs(after - before));
    }
  }
  CHECK(change > 1e-5);
}

TEST_CASE("flex accepts every null direction of the movable set") {
  KSSetRecord set = load("peres33");
  RigidityReport rig = parameter_count(set);
  REQUIRE(rig.null_dim == 3);
  for (int d = 0; d < rig.null_dim; ++d) {
    FlexResult res = flex(set, d, 1, 0.02);
    CHECK(res.sets.size() == 1);
  }
}

TEST_CASE("flex rejects rigid sets and bad arguments") {
  KSSetRecord rigid = load("schuette33");
  CHECK_THROWS_AS(flex(rigid, 0, 2, 0.02), InputError);

  KSSetRecord movable = load("peres33");
  CHECK_THROWS_AS(flex(movable, 9, 2, 0.02), InputError);   // out of range
  CHECK_THROWS_AS(flex(movable, -1, 2, 0.02), InputError);
  CHECK_THROWS_AS(flex(movable, 0, 2, 0.0), InputError);    // bad step size
  CHECK_THROWS_AS(flex(movable, 0, 2, 0.5), InputError);
}
