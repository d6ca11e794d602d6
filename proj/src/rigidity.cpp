#include "ks/rigidity.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <random>

#include "ks/color.hpp"

namespace ks {
namespace {

constexpr double kTrivialTangent = 1e-10;
constexpr double kProjectorTol = 1e-8;

// Deterministic uniform double in [0,1) from the engine's raw 64-bit output
// (independent of the standard library's distribution implementations).
double uniform01(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

std::complex<double> complex_gaussian(std::mt19937_64& eng) {
  // Box-Muller on deterministic uniforms.
  double u1 = uniform01(eng);
  while (u1 == 0.0) u1 = uniform01(eng);
  const double u2 = uniform01(eng);
  const double r = std::sqrt(-2.0 * std::log(u1));
  return {r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2)};
}

GaugeFrame frame_from_rays(const std::vector<Ray>& transformed, int dim,
                           const Basis& pinned) {
  GaugeFrame frame;
  frame.dim = dim;
  frame.pinned = pinned;
  frame.reference = transformed;
  const int n = static_cast<int>(transformed.size());
  frame.anchor.assign(static_cast<size_t>(n), -1);
  frame.offset.assign(static_cast<size_t>(n), -1);
  std::vector<bool> is_pinned(static_cast<size_t>(n), false);
  for (int v : pinned.vertices) is_pinned[static_cast<size_t>(v)] = true;
  int coords = 0;
  for (int i = 0; i < n; ++i) {
    if (is_pinned[static_cast<size_t>(i)]) continue;
    const Eigen::VectorXcd& r = frame.reference[static_cast<size_t>(i)].v;
    int anchor = -1;
    for (int k = 0; k < dim; ++k) {
      if (std::abs(r[k]) > kCanonTol) {
        anchor = k;
        break;
      }
    }
    if (anchor < 0) {
      throw ZeroVectorError("gauge_fix: degenerate reference ray");
    }
    frame.anchor[static_cast<size_t>(i)] = anchor;
    frame.offset[static_cast<size_t>(i)] = coords;
    coords += 2 * (dim - 1);
  }
  frame.n_coords = coords;
  return frame;
}

void validate_basis(const std::vector<Ray>& rays, int dim, const Basis& basis,
                    const Tolerance& tol) {
  if (static_cast<int>(basis.vertices.size()) != dim) {
    throw InputError("gauge_fix: basis must have exactly dim vertices");
  }
  for (int v : basis.vertices) {
    if (v < 0 || v >= static_cast<int>(rays.size())) {
      throw InputError("gauge_fix: basis vertex out of range");
    }
  }
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(dim, dim);
  for (size_t a = 0; a < basis.vertices.size(); ++a) {
    for (size_t b = a + 1; b < basis.vertices.size(); ++b) {
      if (basis.vertices[a] == basis.vertices[b]) {
        throw InputError("gauge_fix: repeated basis vertex");
      }
      if (!is_orthogonal(rays[static_cast<size_t>(basis.vertices[a])],
                         rays[static_cast<size_t>(basis.vertices[b])], tol)) {
        throw InputError("gauge_fix: basis rays are not mutually orthogonal");
      }
    }
    const Eigen::VectorXcd& u =
        rays[static_cast<size_t>(basis.vertices[a])].v;
    p += u * u.adjoint();
  }
  p -= Eigen::MatrixXcd::Identity(dim, dim);
  if (p.norm() > kProjectorTol) {
    throw InputError("gauge_fix: basis projectors do not sum to the identity");
  }
}

// Gauge tangents evaluated at arbitrary current ray values in the frame's
// chart.  Generator m (= standard-basis phase component m, with component 0
// the global-phase reference) moves component k of ray i by
// i (delta_{k,m} - delta_{anchor_i,m}) u_k and leaves the anchor fixed.
std::vector<Eigen::VectorXd> gauge_tangents_at(
    const GaugeFrame& frame, const std::vector<Eigen::VectorXcd>& current) {
  const int n = static_cast<int>(frame.reference.size());
  std::vector<Eigen::VectorXd> out;
  for (int m = 1; m < frame.dim; ++m) {
    Eigen::VectorXd t = Eigen::VectorXd::Zero(frame.n_coords);
    for (int i = 0; i < n; ++i) {
      if (frame.offset[static_cast<size_t>(i)] < 0) continue;
      const int a = frame.anchor[static_cast<size_t>(i)];
      int slot = frame.offset[static_cast<size_t>(i)];
      for (int k = 0; k < frame.dim; ++k) {
        if (k == a) continue;
        const double gen = (k == m ? 1.0 : 0.0) - (a == m ? 1.0 : 0.0);
        const std::complex<double> d =
            std::complex<double>(0.0, gen) * current[static_cast<size_t>(i)][k];
        t[slot] = d.real();
        t[slot + 1] = d.imag();
        slot += 2;
      }
    }
    if (t.norm() >= kTrivialTangent) out.push_back(std::move(t));
  }
  // Modified Gram-Schmidt; drop near-dependent directions.
  std::vector<Eigen::VectorXd> ortho;
  for (auto& t : out) {
    for (const auto& q : ortho) t -= q.dot(t) * q;
    const double norm = t.norm();
    if (norm >= kTrivialTangent) ortho.push_back(t / norm);
  }
  return ortho;
}

struct NullSpace {
  std::vector<double> singular_values;
  int rank = 0;
  int null_dim = 0;
  double gap_ratio = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd basis;  // n_coords x null_dim, orthonormal columns
};

NullSpace null_space_of(const Eigen::MatrixXd& jac, double rank_tol) {
  NullSpace ns;
  const int cols = static_cast<int>(jac.cols());
  if (cols == 0) return ns;
  if (jac.rows() == 0) {
    ns.null_dim = cols;
    ns.basis = Eigen::MatrixXd::Identity(cols, cols);
    return ns;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  ns.singular_values.assign(sv.data(), sv.data() + sv.size());
  const double cutoff = rank_tol * sv[0];
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv[k] > cutoff) ++ns.rank;
  }
  ns.null_dim = cols - ns.rank;
  if (ns.rank > 0 && ns.rank < sv.size()) {
    ns.gap_ratio = sv[ns.rank - 1] / sv[ns.rank];
  }
  ns.basis = svd.matrixV().rightCols(ns.null_dim);
  return ns;
}

int gauge_rank_in_null(const NullSpace& ns,
                       const std::vector<Eigen::VectorXd>& gauge,
                       double rank_tol) {
  if (ns.null_dim == 0 || gauge.empty()) return 0;
  Eigen::MatrixXd c(ns.null_dim, static_cast<Eigen::Index>(gauge.size()));
  for (size_t g = 0; g < gauge.size(); ++g) {
    c.col(static_cast<Eigen::Index>(g)) = ns.basis.transpose() * gauge[g];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(c);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  const double cutoff = std::max(rank_tol * sv[0], 1e-8);
  int rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv[k] > cutoff) ++rank;
  }
  return rank;
}

// Orthonormal essential directions: the null space with the gauge tangents'
// span removed.  Deterministic given the SVD.
Eigen::MatrixXd essential_directions(const NullSpace& ns,
                                     const std::vector<Eigen::VectorXd>& gauge,
                                     double rank_tol) {
  if (ns.null_dim == 0) return Eigen::MatrixXd(ns.basis.rows(), 0);
  if (gauge.empty()) return ns.basis;
  Eigen::MatrixXd c(ns.null_dim, static_cast<Eigen::Index>(gauge.size()));
  for (size_t g = 0; g < gauge.size(); ++g) {
    c.col(static_cast<Eigen::Index>(g)) = ns.basis.transpose() * gauge[g];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(c, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  const double cutoff =
      sv.size() > 0 ? std::max(rank_tol * sv[0], 1e-8) : 0.0;
  int rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv[k] > cutoff) ++rank;
  }
  return ns.basis * svd.matrixU().rightCols(ns.null_dim - rank);
}

}  // namespace

GaugeFrame gauge_fix(const KSSetRecord& set, const OrthoGraph& graph,
                     const Basis& basis) {
  validate_basis(set.rays, set.dim, basis, Tolerance{});
  (void)graph;
  const int dim = set.dim;
  Eigen::MatrixXcd b(dim, dim);
  for (int j = 0; j < dim; ++j) {
    b.col(j) = set.rays[static_cast<size_t>(basis.vertices[static_cast<size_t>(j)])].v;
  }
  const Eigen::MatrixXcd u = b.adjoint();  // u * basis_ray_j = e_j
  std::vector<Ray> transformed;
  transformed.reserve(set.rays.size());
  std::vector<bool> is_pinned(set.rays.size(), false);
  std::vector<int> pin_slot(set.rays.size(), -1);
  for (size_t j = 0; j < basis.vertices.size(); ++j) {
    is_pinned[static_cast<size_t>(basis.vertices[j])] = true;
    pin_slot[static_cast<size_t>(basis.vertices[j])] = static_cast<int>(j);
  }
  for (size_t i = 0; i < set.rays.size(); ++i) {
    if (is_pinned[i]) {
      Eigen::VectorXcd e = Eigen::VectorXcd::Zero(dim);
      e[pin_slot[i]] = 1.0;  // snap exactly onto the standard basis
      transformed.push_back(Ray{std::move(e), {}});
    } else {
      transformed.push_back(canonicalize(u * set.rays[i].v));
    }
  }
  return frame_from_rays(transformed, dim, basis);
}

std::vector<Eigen::VectorXcd> ConstraintSystem::rays_at(
    const Eigen::VectorXd& x) const {
  std::vector<Eigen::VectorXcd> out;
  out.reserve(frame.reference.size());
  for (size_t i = 0; i < frame.reference.size(); ++i) {
    Eigen::VectorXcd v = frame.reference[i].v;
    if (frame.offset[i] >= 0) {
      int slot = frame.offset[i];
      for (int k = 0; k < frame.dim; ++k) {
        if (k == frame.anchor[i]) continue;
        v[k] += std::complex<double>(x[slot], x[slot + 1]);
        slot += 2;
      }
    }
    out.push_back(std::move(v));
  }
  return out;
}

Eigen::VectorXd ConstraintSystem::residuals(const Eigen::VectorXd& x) const {
  const auto rays = rays_at(x);
  Eigen::VectorXd f(n_residues);
  for (size_t t = 0; t < constrained_edges.size(); ++t) {
    const auto& [i, j] = constrained_edges[t];
    const std::complex<double> ip =
        rays[static_cast<size_t>(i)].dot(rays[static_cast<size_t>(j)]);
    f[2 * static_cast<Eigen::Index>(t)] = ip.real();
    f[2 * static_cast<Eigen::Index>(t) + 1] = ip.imag();
  }
  return f;
}

Eigen::MatrixXd ConstraintSystem::jacobian(const Eigen::VectorXd& x) const {
  const auto rays = rays_at(x);
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n_residues, n_coords);
  for (size_t t = 0; t < constrained_edges.size(); ++t) {
    const auto& [i, j] = constrained_edges[t];
    const Eigen::Index row_re = 2 * static_cast<Eigen::Index>(t);
    const Eigen::Index row_im = row_re + 1;
    const auto& u = rays[static_cast<size_t>(i)];
    const auto& v = rays[static_cast<size_t>(j)];
    // f = <u,v> = sum_k conj(u_k) v_k; differentiate by the chart offsets.
    if (frame.offset[static_cast<size_t>(i)] >= 0) {
      int slot = frame.offset[static_cast<size_t>(i)];
      for (int k = 0; k < frame.dim; ++k) {
        if (k == frame.anchor[static_cast<size_t>(i)]) continue;
        jac(row_re, slot) = v[k].real();
        jac(row_re, slot + 1) = v[k].imag();
        jac(row_im, slot) = v[k].imag();
        jac(row_im, slot + 1) = -v[k].real();
        slot += 2;
      }
    }
    if (frame.offset[static_cast<size_t>(j)] >= 0) {
      int slot = frame.offset[static_cast<size_t>(j)];
      for (int k = 0; k < frame.dim; ++k) {
        if (k == frame.anchor[static_cast<size_t>(j)]) continue;
        jac(row_re, slot) += u[k].real();
        jac(row_re, slot + 1) += u[k].imag();
        jac(row_im, slot) += -u[k].imag();
        jac(row_im, slot + 1) += u[k].real();
        slot += 2;
      }
    }
  }
  return jac;
}

ConstraintSystem assemble_constraints(const GaugeFrame& frame,
                                      const OrthoGraph& graph) {
  ConstraintSystem system;
  system.frame = frame;
  std::vector<bool> pinned(static_cast<size_t>(graph.n_vertices), false);
  for (int v : frame.pinned.vertices) pinned[static_cast<size_t>(v)] = true;
  for (const auto& e : graph.edges) {
    if (pinned[static_cast<size_t>(e.first)] &&
        pinned[static_cast<size_t>(e.second)]) {
      continue;  // internal to the pinned basis
    }
    system.constrained_edges.push_back(e);
  }
  system.n_residues = 2 * static_cast<int>(system.constrained_edges.size());
  system.n_coords = frame.n_coords;
  return system;
}

std::vector<Eigen::VectorXd> residual_gauge_tangents(const GaugeFrame& frame) {
  std::vector<Eigen::VectorXcd> current;
  current.reserve(frame.reference.size());
  for (const Ray& r : frame.reference) current.push_back(r.v);
  return gauge_tangents_at(frame, current);
}

namespace {

RigidityReport analyze_system(const ConstraintSystem& system,
                              const std::vector<Eigen::VectorXcd>& at_rays,
                              const Tolerance& tol) {
  RigidityReport report;
  report.n_residues = system.n_residues;
  report.n_coords = system.n_coords;
  if (system.n_coords == 0) {
    return report;  // fully pinned: zero of everything, conclusive
  }
  const Eigen::MatrixXd jac = system.jacobian(Eigen::VectorXd::Zero(system.n_coords));
  const NullSpace ns = null_space_of(jac, tol.rank_tol);
  report.singular_values = ns.singular_values;
  report.rank = ns.rank;
  report.null_dim = ns.null_dim;
  report.gap_ratio = ns.gap_ratio;
  report.conclusive = ns.gap_ratio >= tol.gap_min;
  const auto gauge = gauge_tangents_at(system.frame, at_rays);
  report.residual_gauge_dim = gauge_rank_in_null(ns, gauge, tol.rank_tol);
  report.parameter_count = report.null_dim - report.residual_gauge_dim;
  return report;
}

}  // namespace

RigidityReport parameter_count(const KSSetRecord& set, const Tolerance& tol,
                               int basis_index) {
  const OrthoGraph graph = build_graph(set, tol);
  const auto bases = enumerate_bases(graph);
  if (bases.empty()) {
    throw InputError("parameter_count: the set has no complete basis to pin");
  }
  if (basis_index < 0 || basis_index >= static_cast<int>(bases.size())) {
    throw InputError("parameter_count: basis index out of range");
  }
  const GaugeFrame frame =
      gauge_fix(set, graph, bases[static_cast<size_t>(basis_index)]);
  const ConstraintSystem system = assemble_constraints(frame, graph);
  std::vector<Eigen::VectorXcd> at_rays;
  for (const Ray& r : frame.reference) at_rays.push_back(r.v);
  RigidityReport report = analyze_system(system, at_rays, tol);
  report.pinned_basis_index = basis_index;

  // Real-restricted count (informational): real perturbations and the real
  // part of each constraint only; no continuous phase gauge over the reals.
  double max_imag = 0.0;
  for (const Ray& r : set.rays) {
    max_imag = std::max(max_imag, r.v.imag().cwiseAbs().maxCoeff());
  }
  if (max_imag < 1e-12 && system.n_coords > 0) {
    const Eigen::MatrixXd jac =
        system.jacobian(Eigen::VectorXd::Zero(system.n_coords));
    Eigen::MatrixXd real_jac(system.n_residues / 2, system.n_coords / 2);
    for (int r = 0; r < system.n_residues / 2; ++r) {
      for (int c = 0; c < system.n_coords / 2; ++c) {
        real_jac(r, c) = jac(2 * r, 2 * c);
      }
    }
    const NullSpace real_ns = null_space_of(real_jac, tol.rank_tol);
    report.real_parameter_count = real_ns.null_dim;
  } else if (max_imag < 1e-12) {
    report.real_parameter_count = 0;
  }
  return report;
}

namespace {

struct ForwardPass {
  std::vector<Eigen::VectorXcd> rays;  // component-local, by local index
  int raw_parameters = 0;
  int junctures = 0;
  int forced = 0;
};

// Sequential completion of one connected component, local indices.
ForwardPass forward_reconstruct(const OrthoGraph& comp,
                                const Basis& seed_basis, std::mt19937_64& eng,
                                const Tolerance& tol) {
  const int dim = comp.dim;
  const int n = comp.n_vertices;
  ForwardPass fp;
  fp.rays.assign(static_cast<size_t>(n), Eigen::VectorXcd());
  std::vector<bool> det(static_cast<size_t>(n), false);
  for (size_t j = 0; j < seed_basis.vertices.size(); ++j) {
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(dim);
    e[static_cast<Eigen::Index>(j)] = 1.0;
    fp.rays[static_cast<size_t>(seed_basis.vertices[j])] = std::move(e);
    det[static_cast<size_t>(seed_basis.vertices[j])] = true;
  }
  int remaining = n - dim;
  while (remaining > 0) {
    int best_v = -1;
    int best_rank = -1;
    Eigen::MatrixXcd best_null;
    bool placed = false;
    for (int v = 0; v < n && !placed; ++v) {
      if (det[static_cast<size_t>(v)]) continue;
      std::vector<int> nbrs;
      for (int w = 0; w < n; ++w) {
        if (det[static_cast<size_t>(w)] && comp.adjacent(v, w)) {
          nbrs.push_back(w);
        }
      }
      if (nbrs.empty()) continue;
      Eigen::MatrixXcd a(static_cast<Eigen::Index>(nbrs.size()), dim);
      for (size_t r = 0; r < nbrs.size(); ++r) {
        a.row(static_cast<Eigen::Index>(r)) =
            fp.rays[static_cast<size_t>(nbrs[r])].conjugate();
      }
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeFullV);
      const auto& sv = svd.singularValues();
      int rank = 0;
      for (Eigen::Index k = 0; k < sv.size(); ++k) {
        if (sv[k] > tol.rank_tol * sv[0]) ++rank;
      }
      const int nullity = dim - rank;
      if (nullity <= 1) {
        // Forced: unique completion (or least-squares ray when neighbors
        // already span everything; the polish resolves the residue).
        fp.rays[static_cast<size_t>(v)] =
            canonicalize(Eigen::VectorXcd(svd.matrixV().col(dim - 1))).v;
        det[static_cast<size_t>(v)] = true;
        ++fp.forced;
        --remaining;
        placed = true;
      } else if (rank > best_rank) {
        best_rank = rank;
        best_v = v;
        best_null = svd.matrixV().rightCols(nullity);
      }
    }
    if (placed) continue;
    if (best_v < 0) {
      // No undetermined vertex touches a determined one; should not happen
      // in a connected component.
      throw InputError("propagate_reconstruct: component is not connected");
    }
    // Juncture: draw a random ray in the orthogonal complement of the
    // determined neighbors' span.  A ray in a (dim-k)-dimensional subspace
    // has 2(dim-k) real components minus norm and canonical phase:
    // 2(dim-1-k) real parameters.
    const int nullity = dim - best_rank;
    Eigen::VectorXcd coeff(nullity);
    for (int c = 0; c < nullity; ++c) coeff[c] = complex_gaussian(eng);
    fp.rays[static_cast<size_t>(best_v)] =
        canonicalize(Eigen::VectorXcd(best_null * coeff)).v;
    det[static_cast<size_t>(best_v)] = true;
    fp.raw_parameters += 2 * (dim - 1 - best_rank);
    ++fp.junctures;
    --remaining;
  }
  return fp;
}

// Damped Gauss-Newton polish onto the constraint manifold; returns the
// converged chart point, or nullopt on stall.
std::optional<Eigen::VectorXd> polish(const ConstraintSystem& system,
                                      const Tolerance& tol) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(system.n_coords);
  if (system.n_coords == 0 || system.n_residues == 0) {
    return system.residuals(x).size() == 0 ||
                   system.residuals(x).cwiseAbs().maxCoeff() <= tol.ortho_tol
               ? std::optional<Eigen::VectorXd>(x)
               : std::nullopt;
  }
  double lambda = 1e-3;
  Eigen::VectorXd f = system.residuals(x);
  for (int it = 0; it < 120; ++it) {
    if (f.cwiseAbs().maxCoeff() <= tol.ortho_tol) return x;
    const Eigen::MatrixXd jac = system.jacobian(x);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    bool accepted = false;
    for (int inner = 0; inner < 10; ++inner) {
      Eigen::VectorXd damped(sv.size());
      for (Eigen::Index k = 0; k < sv.size(); ++k) {
        damped[k] = sv[k] / (sv[k] * sv[k] + lambda);
      }
      const Eigen::VectorXd dx =
          -svd.matrixV() *
          damped.asDiagonal() * (svd.matrixU().transpose() * f);
      const Eigen::VectorXd x_new = x + dx;
      const Eigen::VectorXd f_new = system.residuals(x_new);
      if (f_new.norm() < f.norm()) {
        x = x_new;
        f = f_new;
        lambda = std::max(lambda * 0.35, 1e-12);
        accepted = true;
        break;
      }
      lambda *= 8.0;
    }
    if (!accepted) return std::nullopt;
  }
  return f.cwiseAbs().maxCoeff() <= tol.ortho_tol
             ? std::optional<Eigen::VectorXd>(x)
             : std::nullopt;
}

struct ComponentOutcome {
  bool consistent = false;
  int surviving = 0;
  std::vector<Eigen::VectorXcd> rays;  // canonicalized, component-local
};

ComponentOutcome finish_component(const OrthoGraph& comp,
                                  const std::vector<Basis>& comp_bases,
                                  const Basis& seed_basis,
                                  const ForwardPass& fp, const Tolerance& tol) {
  ComponentOutcome out;
  std::vector<Ray> placed;
  placed.reserve(fp.rays.size());
  for (const auto& v : fp.rays) placed.push_back(Ray{v, {}});
  const GaugeFrame frame = frame_from_rays(placed, comp.dim, seed_basis);
  const ConstraintSystem system = assemble_constraints(frame, comp);
  const auto x = polish(system, tol);
  if (!x) return out;
  auto rays = system.rays_at(*x);
  for (auto& v : rays) v = canonicalize(v).v;

  // Consistency guards: every edge orthogonal, bases genuinely complete,
  // no two rays collapsed onto the same projective point.
  for (const auto& [i, j] : comp.edges) {
    if (std::abs(rays[static_cast<size_t>(i)].dot(
            rays[static_cast<size_t>(j)])) > tol.ortho_tol) {
      return out;
    }
  }
  for (const auto& b : comp_bases) {
    Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(comp.dim, comp.dim);
    for (int v : b.vertices) {
      p += rays[static_cast<size_t>(v)] * rays[static_cast<size_t>(v)].adjoint();
    }
    p -= Eigen::MatrixXcd::Identity(comp.dim, comp.dim);
    if (p.norm() > kProjectorTol) return out;
  }
  for (size_t i = 0; i < rays.size(); ++i) {
    for (size_t j = i + 1; j < rays.size(); ++j) {
      if (std::abs(rays[i].dot(rays[j])) > kDuplicateTol) return out;
    }
  }

  // Surviving parameters: rigidity analysis at the converged realization.
  std::vector<Ray> converged;
  converged.reserve(rays.size());
  for (const auto& v : rays) converged.push_back(Ray{v, {}});
  const GaugeFrame frame2 = frame_from_rays(converged, comp.dim, seed_basis);
  const ConstraintSystem system2 = assemble_constraints(frame2, comp);
  const RigidityReport report = analyze_system(system2, rays, tol);
  if (!report.conclusive) return out;
  out.consistent = true;
  out.surviving = report.parameter_count;
  out.rays = std::move(rays);
  return out;
}

}  // namespace

PropagateResult propagate_reconstruct(const OrthoGraph& graph,
                                      const std::vector<Basis>& bases,
                                      std::uint64_t seed,
                                      const Tolerance& tol) {
  const int n = graph.n_vertices;
  for (size_t bi = 0; bi < bases.size(); ++bi) {
    const auto& b = bases[bi].vertices;
    if (static_cast<int>(b.size()) != graph.dim) {
      throw InputError("propagate_reconstruct: basis of wrong size");
    }
    for (size_t p = 0; p < b.size(); ++p) {
      for (size_t q = p + 1; q < b.size(); ++q) {
        if (!graph.adjacent(b[p], b[q])) {
          throw InputError("propagate_reconstruct: basis " +
                           std::to_string(bi) + " is not a clique");
        }
      }
    }
  }

  // Connected components.
  std::vector<int> comp_id(static_cast<size_t>(n), -1);
  int n_comps = 0;
  for (int s = 0; s < n; ++s) {
    if (comp_id[static_cast<size_t>(s)] >= 0) continue;
    std::vector<int> stack{s};
    comp_id[static_cast<size_t>(s)] = n_comps;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int w = 0; w < n; ++w) {
        if (graph.adjacent(v, w) && comp_id[static_cast<size_t>(w)] < 0) {
          comp_id[static_cast<size_t>(w)] = n_comps;
          stack.push_back(w);
        }
      }
    }
    ++n_comps;
  }

  struct Comp {
    std::vector<int> vertices;          // global, ascending
    OrthoGraph graph;                   // local indices
    std::vector<Basis> bases;           // local
    Basis seed;                         // local
  };
  std::vector<Comp> comps(static_cast<size_t>(n_comps));
  std::vector<int> local(static_cast<size_t>(n), -1);
  for (int v = 0; v < n; ++v) {
    auto& c = comps[static_cast<size_t>(comp_id[static_cast<size_t>(v)])];
    local[static_cast<size_t>(v)] = static_cast<int>(c.vertices.size());
    c.vertices.push_back(v);
  }
  for (auto& c : comps) {
    std::vector<std::pair<int, int>> edges;
    for (const auto& [i, j] : graph.edges) {
      if (comp_id[static_cast<size_t>(i)] ==
          comp_id[static_cast<size_t>(c.vertices[0])]) {
        edges.emplace_back(local[static_cast<size_t>(i)],
                           local[static_cast<size_t>(j)]);
      }
    }
    c.graph = graph_from_edges(static_cast<int>(c.vertices.size()), graph.dim,
                               std::move(edges));
    bool have_seed = false;
    for (const auto& b : bases) {
      if (comp_id[static_cast<size_t>(b.vertices[0])] !=
          comp_id[static_cast<size_t>(c.vertices[0])]) {
        continue;
      }
      Basis lb;
      for (int v : b.vertices) lb.vertices.push_back(local[static_cast<size_t>(v)]);
      std::sort(lb.vertices.begin(), lb.vertices.end());
      if (!have_seed) {
        c.seed = lb;
        have_seed = true;
      }
      c.bases.push_back(std::move(lb));
    }
    if (!have_seed) {
      throw InputError(
          "propagate_reconstruct: a connected component contains no basis");
    }
  }

  PropagateResult best;
  bool have_best = false;
  PropagateResult first_attempt;
  for (int attempt = 0; attempt < 8; ++attempt) {
    std::mt19937_64 eng(seed * 1000003ULL + static_cast<std::uint64_t>(attempt));
    PropagateResult result;
    result.rays.assign(static_cast<size_t>(n), Ray{});
    result.consistency = true;
    for (const auto& c : comps) {
      const ForwardPass fp = forward_reconstruct(c.graph, c.seed, eng, tol);
      result.raw_parameters += fp.raw_parameters;
      result.junctures += fp.junctures;
      result.forced_completions += fp.forced;
      const ComponentOutcome outcome =
          finish_component(c.graph, c.bases, c.seed, fp, tol);
      if (!outcome.consistent) {
        result.consistency = false;
        for (size_t lv = 0; lv < c.vertices.size(); ++lv) {
          result.rays[static_cast<size_t>(c.vertices[lv])] =
              Ray{canonicalize(fp.rays[lv]).v, {}};
        }
        continue;
      }
      result.parameters_introduced += outcome.surviving;
      for (size_t lv = 0; lv < c.vertices.size(); ++lv) {
        result.rays[static_cast<size_t>(c.vertices[lv])] =
            Ray{outcome.rays[lv], {}};
      }
    }
    if (attempt == 0) first_attempt = result;
    if (result.consistency &&
        (!have_best ||
         result.parameters_introduced < best.parameters_introduced)) {
      best = result;
      have_best = true;
    }
  }
  if (have_best) return best;
  first_attempt.parameters_introduced = first_attempt.raw_parameters;
  first_attempt.consistency = false;
  return first_attempt;
}

FlexResult flex(const KSSetRecord& set, int direction_index, int steps,
                double step_size, const Tolerance& tol, int basis_index) {
  if (!(step_size > 0.0) || step_size > 0.1) {
    throw InputError("flex: step_size must lie in (0, 0.1]");
  }
  if (steps < 0) {
    throw InputError("flex: steps must be non-negative");
  }
  const OrthoGraph graph = build_graph(set, tol);
  const auto bases = enumerate_bases(graph);
  if (bases.empty()) {
    throw InputError("flex: the set has no complete basis to pin");
  }
  if (basis_index < 0 || basis_index >= static_cast<int>(bases.size())) {
    throw InputError("flex: basis index out of range");
  }
  const GaugeFrame frame =
      gauge_fix(set, graph, bases[static_cast<size_t>(basis_index)]);
  const ConstraintSystem system = assemble_constraints(frame, graph);

  auto directions_at = [&](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
    const NullSpace ns = null_space_of(system.jacobian(x), tol.rank_tol);
    const auto gauge = gauge_tangents_at(frame, system.rays_at(x));
    return essential_directions(ns, gauge, tol.rank_tol);
  };

  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(system.n_coords);
  const NullSpace ns0 = null_space_of(system.jacobian(x0), tol.rank_tol);
  const auto gauge0 = gauge_tangents_at(frame, system.rays_at(x0));
  if (essential_directions(ns0, gauge0, tol.rank_tol).cols() == 0) {
    throw InputError("flex: set is rigid (no essential direction to follow)");
  }
  // Directions index the full null-space basis (the table's parameter-count
  // convention); the chosen direction is walked with its residual-gauge
  // component projected out, so every index yields a genuine deformation.
  if (direction_index < 0 || direction_index >= ns0.null_dim) {
    throw InputError("flex: direction index out of range (set has " +
                     std::to_string(ns0.null_dim) + " null directions)");
  }
  Eigen::VectorXd dir = ns0.basis.col(direction_index);
  for (const Eigen::VectorXd& g : gauge0) dir -= g.dot(dir) * g;
  if (dir.norm() < 1e-8) {
    throw InputError(
        "flex: chosen direction is pure residual gauge (no deformation)");
  }
  dir.normalize();

  FlexResult result;
  Eigen::VectorXd x = x0;
  for (int s = 0; s < steps; ++s) {
    Eigen::VectorXd x1 = x + step_size * dir;
    // Min-norm Newton correction back onto the constraint manifold.
    bool converged = false;
    double last_residual = 0.0;
    for (int it = 0; it < 50; ++it) {
      const Eigen::VectorXd f = system.residuals(x1);
      last_residual = f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
      if (last_residual <= tol.ortho_tol / 2) {
        converged = true;
        break;
      }
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(
          system.jacobian(x1), Eigen::ComputeThinU | Eigen::ComputeThinV);
      const auto& sv = svd.singularValues();
      Eigen::VectorXd inv(sv.size());
      for (Eigen::Index k = 0; k < sv.size(); ++k) {
        inv[k] = sv[k] > tol.rank_tol * sv[0] ? 1.0 / sv[k] : 0.0;
      }
      x1 -= svd.matrixV() * inv.asDiagonal() * (svd.matrixU().transpose() * f);
    }
    if (!converged) {
      throw ContinuationStallError(
          "flex: Newton correction stalled at step " + std::to_string(s + 1) +
          " (last residual " + std::to_string(last_residual) + ")");
    }

    KSSetRecord deformed;
    deformed.name = set.name;
    deformed.dim = set.dim;
    deformed.expected = set.expected;
    const auto rays = system.rays_at(x1);
    double max_norm_residue = 0.0;
    for (const auto& v : rays) deformed.rays.push_back(canonicalize(v));
    const OrthoGraph deformed_graph = build_graph(deformed, tol);
    if (deformed_graph.edges != graph.edges) {
      throw ContinuationStallError(
          "flex: deformed set's orthogonality graph deviates from the "
          "original at step " +
          std::to_string(s + 1));
    }
    for (const auto& [i, j] : deformed_graph.edges) {
      max_norm_residue = std::max(
          max_norm_residue, std::abs(inner_product(
                                deformed.rays[static_cast<size_t>(i)],
                                deformed.rays[static_cast<size_t>(j)])));
    }
    result.sets.push_back(std::move(deformed));
    result.max_residues.push_back(max_norm_residue);

    // Re-anchor the tangent at the accepted point: the essential direction
    // with maximal overlap with the previous one, sign-aligned.
    const Eigen::MatrixXd next_dirs = directions_at(x1);
    if (next_dirs.cols() == 0) {
      throw ContinuationStallError(
          "flex: essential directions vanished at step " +
          std::to_string(s + 1));
    }
    Eigen::Index best = 0;
    double best_dot = 0.0;
    for (Eigen::Index c = 0; c < next_dirs.cols(); ++c) {
      const double d = next_dirs.col(c).dot(dir);
      if (std::abs(d) > std::abs(best_dot)) {
        best_dot = d;
        best = c;
      }
    }
    dir = next_dirs.col(best) * (best_dot < 0 ? -1.0 : 1.0);
    x = x1;
  }
  return result;
}

}  // namespace ks
