#pragma once

#include "specrec/eigensolver.hpp"

namespace specrec {

struct BandpassParams {
  double center = 0.2;  // in normalized-eigenvalue units [0, 1]
  double width = 0.1;
};

struct DegreeVectors {
  Vector user_degrees;       // row sums of X
  Vector item_degrees;       // column sums of X
  Vector augmented_degrees;  // column sums of [C_U, X], length m+n
};

// All three degree vectors of an interaction matrix. The augmented degrees
// are computed through the factored form of C_U, so no m x m similarity
// matrix is materialized.
DegreeVectors degree_vectors(const SparseMatrix& interactions);

// Gaussian weights exp(-(nl - c)^2 / w) where nl rescales the retained
// eigenvalues to [0, 1]. A degenerate spectrum (max == min) maps to nl = 0.
Vector gaussian_kernel(const Vector& eigenvalues, const BandpassParams& params);

// Precomputed projection factors shared across users and across kernel
// settings. Score rows come out of rank-r products, never an n x n dense
// intermediate:
//   bandpass rows  = bp_user * diag(g) * bp_item^T
//   lowpass rows   = lp_user * lp_item^T
struct FilterBasis {
  DenseMatrix bp_user;  // m x r: (X D_I^{-1/2}) U_item
  DenseMatrix bp_item;  // n x r: D_I^{-1/2} U_item
  DenseMatrix lp_user;  // m x r: [C_U, X] D_b^{-1/2} U
  DenseMatrix lp_item;  // n x r: D_b^{1/2} U_item
  Vector eigenvalues;
};

FilterBasis build_filter_basis(const SparseMatrix& interactions, const DegreeVectors& degrees,
                               const EigenSystem& system);

void bandpass_block(const FilterBasis& basis, const Vector& kernel, int first_user, int rows,
                    DenseMatrix& out);
void lowpass_block(const FilterBasis& basis, int first_user, int rows, DenseMatrix& out);

// Item-degree-normalized interaction signal filtered through the item block
// of the unified-graph eigenvectors.
DenseMatrix bandpass_scores(const SparseMatrix& interactions, const DegreeVectors& degrees,
                            const EigenSystem& system, const BandpassParams& params);

// C_U = (D_U^{-1/2} X)(D_U^{-1/2} X)^T, dense m x m.
DenseMatrix user_similarity(const SparseMatrix& interactions, const DegreeVectors& degrees);

// [C_U, X] D_b^{-1/2} U U^T D_b^{1/2}, item columns only. The first overload
// derives D_b from the supplied blocks; the second takes it fixed, which is
// what the linearity checks need.
DenseMatrix lowpass_scores(const SparseMatrix& interactions, const DenseMatrix& user_sim,
                           const EigenSystem& system);
DenseMatrix lowpass_scores(const SparseMatrix& interactions, const DenseMatrix& user_sim,
                           const EigenSystem& system, const Vector& augmented_degrees);

// Y = phi * bandpass + (1 - phi) * lowpass.
DenseMatrix fuse(const DenseMatrix& bandpass, const DenseMatrix& lowpass, double phi);

}  // namespace specrec
