#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "ks/errors.hpp"

namespace ks {

// A complex value together with the expression text it was parsed from
// (empty when it was produced numerically).
struct ComplexScalar {
  std::complex<double> value{};
  std::string origin{};
};

// Numerical policy shared by every decision in the library.
//   ortho_tol : |<u,v>| at or below this counts as orthogonal.
//   rank_tol  : relative singular-value threshold for rank/null decisions.
//   gap_min   : minimum ratio between smallest kept and largest discarded
//               singular value for a rank decision to count as conclusive.
struct Tolerance {
  double ortho_tol = 1e-9;
  double rank_tol = 1e-6;
  double gap_min = 1e3;
};

// A unit vector in C^n identified projectively and stored in canonical form:
// unit norm, first component of modulus > kCanonTol real and positive.
// `origins` optionally carries the component expression texts the ray was
// parsed from (used when re-serializing); it may be empty.
struct Ray {
  Eigen::VectorXcd v;
  std::vector<std::string> origins;

  int dim() const { return static_cast<int>(v.size()); }
};

// Modulus threshold used by canonicalization when picking the anchor
// (first above-threshold) component. Fixed, not configurable: canonical form
// must not depend on analysis tolerances.
inline constexpr double kCanonTol = 1e-9;

// <u,v> = sum_k conj(u_k) v_k. Throws DimensionError on mismatch.
std::complex<double> inner_product(const Ray& u, const Ray& v);

// |<u,v>| <= tol.ortho_tol. Symmetric. Throws DimensionError on mismatch.
bool is_orthogonal(const Ray& u, const Ray& v, const Tolerance& tol);

// Unique phase-canonical unit ray on the projective line of `components`.
// Throws ZeroVectorError if all components are below kCanonTol in modulus.
Ray canonicalize(const Eigen::VectorXcd& components);

// Same, keeping the given origin strings attached to the result.
Ray canonicalize(const std::vector<ComplexScalar>& components);

// The unique (projective) ray orthogonal to n-1 linearly independent rays in
// dimension n, canonical form. Computed from the null space of the stacked
// (n-1) x n matrix so dimensions 3 and 4 share one code path.
// Throws DegenerateSpanError when the inputs do not span n-1 dimensions.
Ray orthogonal_complement_ray(const std::vector<Ray>& rays, int dim,
                              const Tolerance& tol = {});

}  // namespace ks
