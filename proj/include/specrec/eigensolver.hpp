#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "specrec/interactions.hpp"

namespace specrec {

using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// r eigenpairs in ascending eigenvalue order. Columns are orthonormal and
// sign-normalized so the largest-magnitude entry of each is positive.
struct EigenSystem {
  Vector eigenvalues;
  DenseMatrix eigenvectors;  // dim x r, column-major
  Vector residuals;          // ||L u_i - lambda_i u_i||_2
  std::vector<char> converged;

  int count() const { return static_cast<int>(eigenvalues.size()); }
  int dim() const { return static_cast<int>(eigenvectors.rows()); }
  bool all_converged() const;
};

struct EigenOptions {
  double tol = 1e-8;
  int max_iter = 0;  // 0 -> 50 * r block steps
  std::uint64_t seed = 0;
  int block = 0;      // 0 -> min(r, 8)
  int max_basis = 0;  // 0 -> min(dim, max(2r + 2*block, 64))
};

// r smallest eigenpairs of a sparse symmetric matrix via block Krylov
// iteration with full reorthogonalization and thick restarts. Deterministic
// for a fixed seed. Non-convergence returns the best Ritz pairs with
// per-pair flags instead of throwing.
EigenSystem truncated_eigh(const SparseMatrix& matrix, int r, const EigenOptions& options = {});

// Full spectrum by direct dense solve; test/diagnostic oracle only.
// Guarded to dim <= 2000.
EigenSystem dense_eigh_oracle(const DenseMatrix& matrix);

void sign_normalize_columns(DenseMatrix& vectors);

struct SpectralEnergyProfile {
  Vector coefficients;       // |u_i^T f| per retained pair
  double low_energy = 0.0;   // lambda < 0.3
  double mid_energy = 0.0;   // 0.3 <= lambda < 0.8
  double high_energy = 0.0;  // lambda >= 0.8
};

SpectralEnergyProfile spectral_energy_profile(const EigenSystem& system, const Vector& signal);

// ---- Eigenpair cache ----------------------------------------------------
//
// File layout: magic "SRECEIG1", u32 version, u64 dim, u64 r, u64 key,
// then little-endian doubles: eigenvalues, then column-major eigenvectors.

std::uint64_t laplacian_cache_key(const SparseMatrix& matrix, int r);

bool cache_store(const EigenSystem& system, std::uint64_t key, const std::string& cache_dir);

// Returns the cached system (residuals/converged left empty; callers
// recompute them against the matrix at hand). Corrupt or mismatched files
// are treated as misses, with a note appended to `warnings` when given.
std::optional<EigenSystem> cache_load(std::uint64_t key, const std::string& cache_dir,
                                      std::vector<std::string>* warnings = nullptr);

// truncated_eigh with read-through caching; `cache_dir` empty disables.
EigenSystem eigh_with_cache(const SparseMatrix& matrix, int r, const EigenOptions& options,
                            const std::string& cache_dir,
                            std::vector<std::string>* warnings = nullptr);

}  // namespace specrec
