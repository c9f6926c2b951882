#include "specrec/filters.hpp"

#include <cmath>
#include <stdexcept>

namespace specrec {

namespace {

Vector pseudo_inv_sqrt(const Vector& v) {
  Vector out(v.size());
  for (int i = 0; i < v.size(); ++i) {
    out[i] = v[i] > 0.0 ? 1.0 / std::sqrt(v[i]) : 0.0;
  }
  return out;
}

Vector safe_sqrt(const Vector& v) {
  Vector out(v.size());
  for (int i = 0; i < v.size(); ++i) {
    out[i] = v[i] > 0.0 ? std::sqrt(v[i]) : 0.0;
  }
  return out;
}

void check_params(const BandpassParams& p) {
  if (!(p.center >= 0.0 && p.center <= 1.0)) {
    throw std::invalid_argument("bandpass center must be in [0, 1]");
  }
  if (!(p.width > 0.0)) {
    throw std::invalid_argument("bandpass width must be positive");
  }
}

}  // namespace

DegreeVectors degree_vectors(const SparseMatrix& interactions) {
  const int m = static_cast<int>(interactions.rows());
  const int n = static_cast<int>(interactions.cols());
  DegreeVectors deg;
  deg.user_degrees = interactions * Vector::Ones(n);
  deg.item_degrees = interactions.transpose() * Vector::Ones(m);

  // Column sums of [C_U, X]: the C_U block contributes X~_U (X~_U^T 1).
  Vector inv_sqrt_du = pseudo_inv_sqrt(deg.user_degrees);
  Vector t = interactions.transpose() * inv_sqrt_du;  // X~_U^T 1
  Vector cu_sums = inv_sqrt_du.asDiagonal() * (interactions * t);
  deg.augmented_degrees.resize(m + n);
  deg.augmented_degrees.head(m) = cu_sums;
  deg.augmented_degrees.tail(n) = deg.item_degrees;
  return deg;
}

Vector gaussian_kernel(const Vector& eigenvalues, const BandpassParams& params) {
  if (eigenvalues.size() == 0) {
    throw std::invalid_argument("gaussian_kernel: empty eigenvalue list");
  }
  check_params(params);
  const double lo = eigenvalues.minCoeff();
  const double hi = eigenvalues.maxCoeff();
  const double span = hi - lo;
  Vector weights(eigenvalues.size());
  for (int i = 0; i < eigenvalues.size(); ++i) {
    const double nl = span > 0.0 ? (eigenvalues[i] - lo) / span : 0.0;
    const double d = nl - params.center;
    weights[i] = std::exp(-(d * d) / params.width);
  }
  return weights;
}

FilterBasis build_filter_basis(const SparseMatrix& interactions, const DegreeVectors& degrees,
                               const EigenSystem& system) {
  const int m = static_cast<int>(interactions.rows());
  const int n = static_cast<int>(interactions.cols());
  if (system.dim() != m + n) {
    throw std::invalid_argument("build_filter_basis: eigensystem does not cover the unified graph");
  }
  FilterBasis basis;
  basis.eigenvalues = system.eigenvalues;

  const auto u_user = system.eigenvectors.topRows(m);
  const auto u_item = system.eigenvectors.bottomRows(n);

  Vector inv_sqrt_di = pseudo_inv_sqrt(degrees.item_degrees);
  basis.bp_item = inv_sqrt_di.asDiagonal() * u_item;
  basis.bp_user = interactions * basis.bp_item;

  Vector inv_sqrt_db = pseudo_inv_sqrt(degrees.augmented_degrees);
  Vector inv_sqrt_du = pseudo_inv_sqrt(degrees.user_degrees);
  DenseMatrix z_user = inv_sqrt_db.head(m).asDiagonal() * u_user;
  // C_U z = X~_U (X~_U^T z) without forming C_U
  DenseMatrix xt_z = interactions.transpose() * (inv_sqrt_du.asDiagonal() * z_user);
  basis.lp_user = inv_sqrt_du.asDiagonal() * (interactions * xt_z);
  basis.lp_user += interactions * (inv_sqrt_db.tail(n).asDiagonal() * u_item);
  basis.lp_item = safe_sqrt(degrees.augmented_degrees.tail(n)).asDiagonal() * u_item;
  return basis;
}

void bandpass_block(const FilterBasis& basis, const Vector& kernel, int first_user, int rows,
                    DenseMatrix& out) {
  out.noalias() = basis.bp_user.middleRows(first_user, rows) * kernel.asDiagonal() *
                  basis.bp_item.transpose();
}

void lowpass_block(const FilterBasis& basis, int first_user, int rows, DenseMatrix& out) {
  out.noalias() = basis.lp_user.middleRows(first_user, rows) * basis.lp_item.transpose();
}

DenseMatrix bandpass_scores(const SparseMatrix& interactions, const DegreeVectors& degrees,
                            const EigenSystem& system, const BandpassParams& params) {
  FilterBasis basis = build_filter_basis(interactions, degrees, system);
  if (system.count() == 0) {
    return DenseMatrix::Zero(interactions.rows(), interactions.cols());
  }
  Vector kernel = gaussian_kernel(system.eigenvalues, params);
  DenseMatrix out;
  bandpass_block(basis, kernel, 0, static_cast<int>(interactions.rows()), out);
  return out;
}

DenseMatrix user_similarity(const SparseMatrix& interactions, const DegreeVectors& degrees) {
  Vector inv_sqrt_du = pseudo_inv_sqrt(degrees.user_degrees);
  DenseMatrix xu = inv_sqrt_du.asDiagonal() * DenseMatrix(interactions);
  return xu * xu.transpose();
}

DenseMatrix lowpass_scores(const SparseMatrix& interactions, const DenseMatrix& user_sim,
                           const EigenSystem& system) {
  const int m = static_cast<int>(interactions.rows());
  Vector db(m + interactions.cols());
  db.head(m) = user_sim.colwise().sum().transpose();
  db.tail(interactions.cols()) = interactions.transpose() * Vector::Ones(m);
  return lowpass_scores(interactions, user_sim, system, db);
}

DenseMatrix lowpass_scores(const SparseMatrix& interactions, const DenseMatrix& user_sim,
                           const EigenSystem& system, const Vector& augmented_degrees) {
  const int m = static_cast<int>(interactions.rows());
  const int n = static_cast<int>(interactions.cols());
  if (user_sim.rows() != m || user_sim.cols() != m) {
    throw std::invalid_argument("lowpass_scores: user similarity must be m x m");
  }
  if (system.dim() != m + n) {
    throw std::invalid_argument("lowpass_scores: eigensystem does not cover the unified graph");
  }
  if (augmented_degrees.size() != m + n) {
    throw std::invalid_argument("lowpass_scores: augmented degree vector must have length m+n");
  }
  if (system.count() == 0) {
    return DenseMatrix::Zero(m, n);
  }

  Vector inv_sqrt_db = pseudo_inv_sqrt(augmented_degrees);
  const auto u_user = system.eigenvectors.topRows(m);
  const auto u_item = system.eigenvectors.bottomRows(n);
  DenseMatrix q = user_sim * (inv_sqrt_db.head(m).asDiagonal() * u_user);
  q.noalias() += interactions * (inv_sqrt_db.tail(n).asDiagonal() * u_item);
  DenseMatrix w = safe_sqrt(augmented_degrees.tail(n)).asDiagonal() * u_item;
  return q * w.transpose();
}

DenseMatrix fuse(const DenseMatrix& bandpass, const DenseMatrix& lowpass, double phi) {
  if (bandpass.rows() != lowpass.rows() || bandpass.cols() != lowpass.cols()) {
    throw std::invalid_argument("fuse: score shapes differ");
  }
  if (!(phi >= 0.0 && phi <= 1.0)) {
    throw std::invalid_argument("fuse: phi must be in [0, 1]");
  }
  return phi * bandpass + (1.0 - phi) * lowpass;
}

}  // namespace specrec
