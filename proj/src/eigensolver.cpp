#include "specrec/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

namespace specrec {

bool EigenSystem::all_converged() const {
  if (converged.size() != static_cast<std::size_t>(count())) return false;
  return std::all_of(converged.begin(), converged.end(), [](char c) { return c != 0; });
}

void sign_normalize_columns(DenseMatrix& vectors) {
  for (int j = 0; j < vectors.cols(); ++j) {
    int max_row = 0;
    double max_abs = -1.0;
    for (int i = 0; i < vectors.rows(); ++i) {
      const double a = std::abs(vectors(i, j));
      if (a > max_abs) {
        max_abs = a;
        max_row = i;
      }
    }
    if (vectors(max_row, j) < 0.0) vectors.col(j) = -vectors.col(j);
  }
}

namespace {

// Projects `block` against the first `k` columns of `basis` (two classical
// Gram-Schmidt passes), then orthonormalizes it column by column. Columns
// that collapse are replaced by fresh random directions so the block keeps
// full rank even inside invariant subspaces.
void orthonormalize_block(const DenseMatrix& basis, int k, DenseMatrix& block,
                          std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto v = basis.leftCols(k);
  for (int pass = 0; pass < 2; ++pass) {
    if (k > 0) block -= v * (v.transpose() * block);
  }
  for (int j = 0; j < block.cols(); ++j) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      for (int p = 0; p < j; ++p) {
        block.col(j) -= block.col(p).dot(block.col(j)) * block.col(p);
      }
      const double norm = block.col(j).norm();
      if (norm > 1e-8) {
        block.col(j) /= norm;
        // second sweep against earlier columns for safety
        for (int p = 0; p < j; ++p) {
          block.col(j) -= block.col(p).dot(block.col(j)) * block.col(p);
        }
        block.col(j).normalize();
        break;
      }
      for (int i = 0; i < block.rows(); ++i) block(i, j) = gauss(rng);
      if (k > 0) {
        for (int pass = 0; pass < 2; ++pass) {
          block.col(j) -= v * (v.transpose() * block.col(j)).eval();
        }
      }
    }
  }
}

EigenSystem assemble_result(const DenseMatrix& ritz_vectors, const Vector& ritz_values,
                            const Vector& residuals, double tol) {
  EigenSystem out;
  out.eigenvalues = ritz_values;
  out.eigenvectors = ritz_vectors;
  out.residuals = residuals;
  out.converged.resize(ritz_values.size());
  for (int i = 0; i < ritz_values.size(); ++i) {
    out.converged[i] = residuals[i] <= tol ? 1 : 0;
  }
  sign_normalize_columns(out.eigenvectors);
  return out;
}

}  // namespace

EigenSystem truncated_eigh(const SparseMatrix& matrix, int r, const EigenOptions& options) {
  const int dim = static_cast<int>(matrix.rows());
  if (matrix.cols() != dim) throw std::invalid_argument("truncated_eigh: matrix must be square");
  if (r < 1 || r > dim) {
    throw std::invalid_argument("truncated_eigh: r must be in [1, dim]");
  }

  const int block = options.block > 0 ? std::min(options.block, dim)
                                      : std::min(dim, std::max(2, std::min(r, 8)));
  int ncv = options.max_basis > 0 ? std::min(options.max_basis, dim)
                                  : std::min(dim, std::max(2 * r + 2 * block, 64));
  ncv = std::max(ncv, std::min(dim, r + 2 * block));
  const int max_steps = options.max_iter > 0 ? options.max_iter : 50 * r;
  const double tol = options.tol;

  std::mt19937_64 rng(options.seed ^ 0x5eed5eedULL);
  std::normal_distribution<double> gauss(0.0, 1.0);

  DenseMatrix basis(dim, ncv);     // V, orthonormal columns
  DenseMatrix applied(dim, ncv);   // L * V, kept in lockstep
  DenseMatrix projected = DenseMatrix::Zero(ncv, ncv);  // V^T L V
  int k = 0;

  DenseMatrix expansion(dim, block);
  for (int j = 0; j < block; ++j) {
    for (int i = 0; i < dim; ++i) expansion(i, j) = gauss(rng);
  }
  orthonormalize_block(basis, 0, expansion, rng);

  Vector ritz_values;
  DenseMatrix ritz_vectors;
  Vector residuals;

  for (int step = 0; step < max_steps; ++step) {
    const int bcur = std::min(static_cast<int>(expansion.cols()), dim - k);
    if (bcur > 0) {
      basis.middleCols(k, bcur) = expansion.leftCols(bcur);
      applied.middleCols(k, bcur) = matrix * expansion.leftCols(bcur);
      const int k_new = k + bcur;
      // extend V^T L V with the new columns
      projected.block(0, k, k_new, bcur) =
          basis.leftCols(k_new).transpose() * applied.middleCols(k, bcur);
      projected.block(k, 0, bcur, k) = projected.block(0, k, k, bcur).transpose();
      k = k_new;
    }

    Eigen::SelfAdjointEigenSolver<DenseMatrix> small_eig(
        0.5 * (projected.topLeftCorner(k, k) + projected.topLeftCorner(k, k).transpose()));
    const Vector& theta = small_eig.eigenvalues();  // ascending
    const DenseMatrix& y = small_eig.eigenvectors();

    const int tracked = std::min(r + block, k);
    ritz_vectors = basis.leftCols(k) * y.leftCols(tracked);
    DenseMatrix residual_block =
        applied.leftCols(k) * y.leftCols(tracked) -
        ritz_vectors * theta.head(tracked).asDiagonal();
    residuals = residual_block.colwise().norm().transpose();
    ritz_values = theta.head(tracked);

    const int wanted = std::min(r, k);
    const bool done = wanted == r &&
                      (residuals.head(wanted).array() <= tol).all();
    if (done || k == dim || step + 1 == max_steps) {
      return assemble_result(ritz_vectors.leftCols(wanted), ritz_values.head(wanted),
                             residuals.head(wanted), tol);
    }

    // Thick restart once the basis is full: keep the leading Ritz vectors.
    if (k + 1 > ncv - block) {
      const int keep = std::min(r + block, ncv - block);
      basis.leftCols(keep) = (basis.leftCols(k) * y.leftCols(keep)).eval();
      applied.leftCols(keep) = (applied.leftCols(k) * y.leftCols(keep)).eval();
      projected.setZero();
      projected.topLeftCorner(keep, keep) = theta.head(keep).asDiagonal();
      k = keep;
    }

    // Expand with residual directions of the unconverged tracked pairs;
    // orthogonalization against the basis turns L*z into the residual of z.
    std::vector<int> picks;
    for (int i = 0; i < tracked && static_cast<int>(picks.size()) < block; ++i) {
      if (residuals[i] > tol) picks.push_back(i);
    }
    for (int i = 0; i < tracked && static_cast<int>(picks.size()) < block; ++i) {
      if (residuals[i] <= tol) picks.push_back(i);
    }
    const int bnext = std::min<int>(static_cast<int>(picks.size()), dim - k);
    if (bnext <= 0) {
      return assemble_result(ritz_vectors.leftCols(wanted), ritz_values.head(wanted),
                             residuals.head(wanted), tol);
    }
    expansion.resize(dim, bnext);
    for (int j = 0; j < bnext; ++j) {
      expansion.col(j) = matrix * ritz_vectors.col(picks[j]);
    }
    orthonormalize_block(basis, k, expansion, rng);
  }

  return assemble_result(ritz_vectors.leftCols(std::min(r, k)),
                         ritz_values.head(std::min(r, k)),
                         residuals.head(std::min(r, k)), tol);
}

EigenSystem dense_eigh_oracle(const DenseMatrix& matrix) {
  const int dim = static_cast<int>(matrix.rows());
  if (matrix.cols() != dim) {
    throw std::invalid_argument("dense_eigh_oracle: matrix must be square");
  }
  if (dim > 2000) {
    throw std::invalid_argument("dense_eigh_oracle: guard exceeded (dim > 2000)");
  }
  Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(matrix);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("dense_eigh_oracle: dense solver failed");
  }
  EigenSystem out;
  out.eigenvalues = solver.eigenvalues();
  out.eigenvectors = solver.eigenvectors();
  sign_normalize_columns(out.eigenvectors);
  DenseMatrix resid = matrix * out.eigenvectors -
                      out.eigenvectors * out.eigenvalues.asDiagonal();
  out.residuals = resid.colwise().norm().transpose();
  out.converged.assign(dim, 1);
  return out;
}

SpectralEnergyProfile spectral_energy_profile(const EigenSystem& system, const Vector& signal) {
  if (signal.size() != system.dim()) {
    throw std::invalid_argument("spectral_energy_profile: signal length mismatch");
  }
  SpectralEnergyProfile profile;
  Vector coeffs = system.eigenvectors.transpose() * signal;
  profile.coefficients = coeffs.cwiseAbs();
  for (int i = 0; i < system.count(); ++i) {
    const double energy = coeffs[i] * coeffs[i];
    const double lambda = system.eigenvalues[i];
    if (lambda < 0.3) {
      profile.low_energy += energy;
    } else if (lambda < 0.8) {
      profile.mid_energy += energy;
    } else {
      profile.high_energy += energy;
    }
  }
  return profile;
}

// ---- cache ---------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'S', 'R', 'E', 'C', 'E', 'I', 'G', '1'};
constexpr std::uint32_t kVersion = 1;

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ull;
  }
  return h;
}

std::string cache_path(std::uint64_t key, const std::string& dir) {
  char name[32];
  std::snprintf(name, sizeof(name), "eig_%016llx.bin", static_cast<unsigned long long>(key));
  return (std::filesystem::path(dir) / name).string();
}

}  // namespace

std::uint64_t laplacian_cache_key(const SparseMatrix& matrix, int r) {
  SparseMatrix m = matrix;
  m.makeCompressed();
  std::uint64_t h = 0xCBF29CE484222325ull;
  const std::int64_t dims[3] = {m.rows(), m.cols(), static_cast<std::int64_t>(r)};
  h = fnv1a(dims, sizeof(dims), h);
  h = fnv1a(m.outerIndexPtr(), sizeof(m.outerIndexPtr()[0]) * (m.outerSize() + 1), h);
  h = fnv1a(m.innerIndexPtr(), sizeof(m.innerIndexPtr()[0]) * m.nonZeros(), h);
  h = fnv1a(m.valuePtr(), sizeof(double) * m.nonZeros(), h);
  return h;
}

bool cache_store(const EigenSystem& system, std::uint64_t key, const std::string& cache_dir) {
  if (cache_dir.empty()) return false;
  std::error_code ec;
  std::filesystem::create_directories(cache_dir, ec);
  const std::string final_path = cache_path(key, cache_dir);
  const std::string tmp_path = final_path + ".tmp";
  {
    std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
    if (!out) return false;
    const std::uint64_t dim = static_cast<std::uint64_t>(system.dim());
    const std::uint64_t r = static_cast<std::uint64_t>(system.count());
    out.write(kMagic, sizeof(kMagic));
    out.write(reinterpret_cast<const char*>(&kVersion), sizeof(kVersion));
    out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
    out.write(reinterpret_cast<const char*>(&r), sizeof(r));
    out.write(reinterpret_cast<const char*>(&key), sizeof(key));
    out.write(reinterpret_cast<const char*>(system.eigenvalues.data()),
              static_cast<std::streamsize>(sizeof(double) * r));
    out.write(reinterpret_cast<const char*>(system.eigenvectors.data()),
              static_cast<std::streamsize>(sizeof(double) * dim * r));
    if (!out) return false;
  }
  std::filesystem::rename(tmp_path, final_path, ec);
  return !ec;
}

std::optional<EigenSystem> cache_load(std::uint64_t key, const std::string& cache_dir,
                                      std::vector<std::string>* warnings) {
  if (cache_dir.empty()) return std::nullopt;
  const std::string path = cache_path(key, cache_dir);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;

  auto corrupt = [&](const char* why) -> std::optional<EigenSystem> {
    if (warnings) {
      warnings->push_back("eigen cache: ignoring " + path + " (" + why + ")");
    }
    return std::nullopt;
  };

  char magic[8];
  std::uint32_t version = 0;
  std::uint64_t dim = 0, r = 0, stored_key = 0;
  in.read(magic, sizeof(magic));
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  in.read(reinterpret_cast<char*>(&dim), sizeof(dim));
  in.read(reinterpret_cast<char*>(&r), sizeof(r));
  in.read(reinterpret_cast<char*>(&stored_key), sizeof(stored_key));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0 || version != kVersion) {
    return corrupt("bad header");
  }
  if (stored_key != key) return std::nullopt;  // stale entry for another matrix
  if (dim == 0 || r == 0 || r > dim || dim > (1ull << 32)) return corrupt("bad dimensions");

  EigenSystem out;
  out.eigenvalues.resize(static_cast<Eigen::Index>(r));
  out.eigenvectors.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(r));
  in.read(reinterpret_cast<char*>(out.eigenvalues.data()),
          static_cast<std::streamsize>(sizeof(double) * r));
  in.read(reinterpret_cast<char*>(out.eigenvectors.data()),
          static_cast<std::streamsize>(sizeof(double) * dim * r));
  if (!in || in.gcount() != static_cast<std::streamsize>(sizeof(double) * dim * r)) {
    return corrupt("truncated payload");
  }
  return out;
}

EigenSystem eigh_with_cache(const SparseMatrix& matrix, int r, const EigenOptions& options,
                            const std::string& cache_dir, std::vector<std::string>* warnings) {
  const std::uint64_t key = laplacian_cache_key(matrix, r);
  if (auto cached = cache_load(key, cache_dir, warnings)) {
    EigenSystem system = std::move(*cached);
    DenseMatrix resid = matrix * system.eigenvectors -
                        system.eigenvectors * system.eigenvalues.asDiagonal();
    system.residuals = resid.colwise().norm().transpose();
    system.converged.resize(system.count());
    for (int i = 0; i < system.count(); ++i) {
      system.converged[i] = system.residuals[i] <= std::max(options.tol, 2e-6) ? 1 : 0;
    }
    return system;
  }
  EigenSystem system = truncated_eigh(matrix, r, options);
  cache_store(system, key, cache_dir);
  return system;
}

}  // namespace specrec
