#include "ks/ray.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace ks {

std::complex<double> inner_product(const Ray& u, const Ray& v) {
  if (u.dim() != v.dim()) {
    throw DimensionError("inner_product: dimension mismatch (" +
                         std::to_string(u.dim()) + " vs " +
                         std::to_string(v.dim()) + ")");
  }
  // Eigen's dot conjugates the left factor: u.dot(v) = sum conj(u_k) v_k.
  return u.v.dot(v.v);
}

bool is_orthogonal(const Ray& u, const Ray& v, const Tolerance& tol) {
  return std::abs(inner_product(u, v)) <= tol.ortho_tol;
}

Ray canonicalize(const Eigen::VectorXcd& components) {
  const double norm = components.norm();
  if (!(norm > kCanonTol)) {
    throw ZeroVectorError("canonicalize: zero (or sub-threshold) vector");
  }
  Eigen::VectorXcd w = components / norm;
  Eigen::Index anchor = -1;
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    if (std::abs(w[k]) > kCanonTol) {
      anchor = k;
      break;
    }
  }
  if (anchor < 0) {
    throw ZeroVectorError("canonicalize: no component above threshold");
  }
  // Divide out the anchor's phase; the anchor becomes real and positive and
  // everything earlier stays (numerically) zero.
  const std::complex<double> phase = w[anchor] / std::abs(w[anchor]);
  w /= phase;
  w[anchor] = std::complex<double>(std::abs(w[anchor]), 0.0);
  return Ray{std::move(w), {}};
}

Ray canonicalize(const std::vector<ComplexScalar>& components) {
  Eigen::VectorXcd raw(static_cast<Eigen::Index>(components.size()));
  std::vector<std::string> origins;
  origins.reserve(components.size());
  for (size_t k = 0; k < components.size(); ++k) {
    raw[static_cast<Eigen::Index>(k)] = components[k].value;
    origins.push_back(components[k].origin);
  }
  Ray r = canonicalize(raw);
  r.origins = std::move(origins);
  return r;
}

Ray orthogonal_complement_ray(const std::vector<Ray>& rays, int dim,
                              const Tolerance& tol) {
  if (static_cast<int>(rays.size()) != dim - 1) {
    throw DimensionError("orthogonal_complement_ray: need exactly dim-1 rays");
  }
  Eigen::MatrixXcd A(dim - 1, dim);
  for (int i = 0; i < dim - 1; ++i) {
    if (rays[static_cast<size_t>(i)].dim() != dim) {
      throw DimensionError("orthogonal_complement_ray: ray of wrong dimension");
    }
    // Row i is the conjugate of ray i, so A x = 0 means <ray_i, x> = 0.
    A.row(i) = rays[static_cast<size_t>(i)].v.conjugate();
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cutoff = tol.rank_tol * sv[0];
  int rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv[k] > cutoff) ++rank;
  }
  if (rank < dim - 1) {
    throw DegenerateSpanError(
        "orthogonal_complement_ray: inputs are linearly dependent (rank " +
        std::to_string(rank) + " of " + std::to_string(dim - 1) + ")");
  }
  Ray out = canonicalize(svd.matrixV().col(dim - 1));
  for (const Ray& r : rays) {
    if (!is_orthogonal(r, out, tol)) {
      throw DegenerateSpanError(
          "orthogonal_complement_ray: completion failed post-verification");
    }
  }
  return out;
}

}  // namespace ks
