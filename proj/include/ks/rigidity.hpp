#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "ks/catalog.hpp"
#include "ks/errors.hpp"
#include "ks/graph.hpp"

namespace ks {

// Gauge-fixed frame: one basis rotated exactly onto the standard basis, all
// other rays transformed along and canonicalized.  Each free (non-pinned)
// ray gets an affine chart of 2(dim-1) real coordinates: the first component
// above threshold (the one canonicalization made real-positive) is held at
// its reference value, and every other component carries a complex offset.
// Holding one component at a fixed nonzero value selects exactly one
// representative per nearby projective ray, so the chart is a bijective
// parameterization of projective space near the reference; orthogonality is
// scale-invariant, so no normalization is needed.  At zero coordinates the
// chart reproduces the reference rays exactly.
struct GaugeFrame {
  int dim = 0;
  Basis pinned;                 // its sorted vertices map to e_1..e_dim
  std::vector<Ray> reference;   // all rays after the pinning unitary
  std::vector<int> anchor;      // per ray: fixed component; -1 for pinned rays
  std::vector<int> offset;      // per ray: first chart coordinate; -1 pinned
  int n_coords = 0;             // 2(dim-1) per free ray
};

// The orthogonality constraint system over a frame's chart: two real
// residues (Re, Im of the inner product) per graph edge not internal to the
// pinned basis.  Residuals and the analytic Jacobian are evaluable at any
// chart point, which the Newton corrector and the reconstruction polish use.
struct ConstraintSystem {
  GaugeFrame frame;
  std::vector<std::pair<int, int>> constrained_edges;  // lexicographic
  int n_residues = 0;  // 2 * constrained_edges.size()
  int n_coords = 0;

  // Chart reconstruction: all rays at coordinate vector x (size n_coords).
  std::vector<Eigen::VectorXcd> rays_at(const Eigen::VectorXd& x) const;
  Eigen::VectorXd residuals(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;
};

struct RigidityReport {
  std::vector<double> singular_values;  // descending
  int n_residues = 0;
  int n_coords = 0;
  int rank = 0;
  int null_dim = 0;            // n_coords - rank
  int residual_gauge_dim = 0;  // rank of gauge tangents inside the null space
  int parameter_count = 0;     // null_dim - residual_gauge_dim
  double gap_ratio = std::numeric_limits<double>::infinity();
  bool conclusive = true;      // gap_ratio >= tol.gap_min
  int pinned_basis_index = 0;
  // Real-restricted count, reported for sets whose rays are all real:
  // real perturbations only, with no continuous phase gauge over the reals.
  std::optional<int> real_parameter_count;
};

// Rotates the chosen basis onto the standard basis (by the adjoint of the
// unitary whose columns are the basis rays) and charts the rest.
// Throws InputError if the basis is not a valid basis of the set.
GaugeFrame gauge_fix(const KSSetRecord& set, const OrthoGraph& graph,
                     const Basis& basis);

// Collects every edge except those internal to the pinned basis.
ConstraintSystem assemble_constraints(const GaugeFrame& frame,
                                      const OrthoGraph& graph);

// Chart tangents of the diagonal-phase stabilizer of the pinned basis
// (dim-1 generators modulo global phase), orthonormalized; generators acting
// trivially (norm < 1e-10) are dropped.
std::vector<Eigen::VectorXd> residual_gauge_tangents(const GaugeFrame& frame);

// Full first-order rigidity analysis: SVD of the constraint Jacobian at the
// reference, null dimension by relative threshold rank_tol, residual gauge
// dimension by projecting the gauge tangents into the null space, and
// parameter_count = null_dim - residual_gauge_dim.  The report is marked
// inconclusive unless the spectrum's kept/discarded gap is at least gap_min.
// Assumes the graph is connected (true for every shipped set).
RigidityReport parameter_count(const KSSetRecord& set, const Tolerance& tol = {},
                               int basis_index = 0);

struct PropagateResult {
  std::vector<Ray> rays;            // reconstructed realization
  int parameters_introduced = 0;    // free parameters surviving all constraints
  int raw_parameters = 0;           // real parameters drawn at junctures
  int forced_completions = 0;
  int junctures = 0;
  bool consistency = false;         // all edges hold within ortho_tol
};

// Sequential reconstruction from the graph alone (stored rays are not
// consulted): seeds each connected component's first basis as the standard
// basis, completes every vertex with dim-1 independent determined neighbors
// via the orthogonal complement, and when nothing is forced parameterizes
// the undetermined vertex with the most determined neighbors with random
// values (2(dim-1-k) real parameters for k independent determined
// neighbors: 2(dim-k) real components minus norm and canonical phase).
// Parameters drawn early are constrained by later edges, so after the
// forward pass the realization is polished onto the full constraint
// manifold by damped Gauss-Newton; the surviving free-parameter count is
// the polished point's null dimension minus residual gauge, summed over
// components.  Reruns with 8 sub-seeds and reports the minimum consistent
// count.  Inconsistency for all retries sets consistency = false rather
// than raising.  Throws InputError for a basis that is not a clique or a
// component containing no basis.
PropagateResult propagate_reconstruct(const OrthoGraph& graph,
                                      const std::vector<Basis>& bases,
                                      std::uint64_t seed,
                                      const Tolerance& tol = {});

struct FlexResult {
  std::vector<KSSetRecord> sets;     // one per accepted step
  std::vector<double> max_residues;  // post-correction, per step
};

// Numerical continuation along essential direction `direction_index` (a
// null-space direction with the residual gauge projected out): predictor
// step of length step_size, then min-norm Newton correction back onto the
// constraint manifold (residues <= ortho_tol / 2 so normalized inner
// products stay below ortho_tol), re-anchoring the tangent at each accepted
// point by maximal overlap with the previous direction.  Every emitted set
// is canonicalized and must have exactly the original edge set.
// Throws InputError if the set is rigid, direction_index is out of range,
// or step_size is outside (0, 0.1]; ContinuationStallError if Newton fails
// to converge within 50 iterations (reporting the last residual) or the
// deformed graph deviates from the original.
FlexResult flex(const KSSetRecord& set, int direction_index, int steps,
                double step_size, const Tolerance& tol = {},
                int basis_index = 0);

}  // namespace ks
