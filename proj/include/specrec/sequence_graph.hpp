#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "specrec/interactions.hpp"

namespace specrec {

struct DiffusionParams {
  double alpha = 0.4;
  int depth = 2;
  // Estimated multiply work above which a power is computed densely
  // (n <= kDenseFallbackLimit) instead of blowing up sparse storage.
  std::int64_t nnz_budget = 25'000'000;
};

inline constexpr int kDenseFallbackLimit = 5000;

struct SpectralRadiusEstimate {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct NormalizedItemGraph {
  SparseMatrix matrix;      // n x n, symmetric, non-negative
  Eigen::VectorXd degrees;  // row sums of the diffused graph
};

// Directed 0/1 transition matrix: s_ij = 1 iff item i immediately precedes
// item j in some sequence. Consecutive repeats of the same item are dropped.
SparseMatrix build_transition_matrix(const UserSequences& seqs, int item_count);

// Undirected support of S: s'_ij = 1 iff s_ij = 1 or s_ji = 1.
SparseMatrix symmetrize(const SparseMatrix& transitions);

// Power iteration for the spectral radius of a symmetric non-negative matrix.
SpectralRadiusEstimate estimate_spectral_radius(const SparseMatrix& sym, double tol = 1e-6,
                                                int max_iter = 1000);

// Depth-d hop-decayed sum of powers: sum_{k=1..d} alpha^{k-1} (S')^k.
// Powers of the 0/1 base stay integer-valued, so the result is exactly
// symmetric; a work-estimate guard switches oversized powers to a dense
// representation for n <= kDenseFallbackLimit and fails loudly otherwise.
// When a positive spectral-radius estimate is supplied and
// alpha >= 1/radius, a note is appended to `warnings` (the finite sum is
// still well defined; only the infinite series would diverge).
SparseMatrix diffuse(const SparseMatrix& sym, const DiffusionParams& params,
                     double spectral_radius = -1.0,
                     std::vector<std::string>* warnings = nullptr);

// D^{-1/2} S D^{-1/2} with zero-degree rows/columns mapped to zero.
NormalizedItemGraph normalize_symmetric(const SparseMatrix& diffused);

// Debug dump as "row<TAB>col<TAB>value" coordinate lines.
void write_coordinate_list(const SparseMatrix& matrix, std::ostream& out);

}  // namespace specrec
