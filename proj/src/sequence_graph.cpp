#include "specrec/sequence_graph.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace specrec {

namespace {

void clamp_nonzeros_to_one(SparseMatrix& m) {
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      it.valueRef() = 1.0;
    }
  }
}

// Classical work estimate for P * S in compressed column storage:
// sum over nonzeros (k, j) of S of nnz(column k of P). Upper-bounds both
// the flop count and the output nonzero count.
std::int64_t product_work_estimate(const SparseMatrix& p, const SparseMatrix& s) {
  std::vector<std::int64_t> col_nnz(p.outerSize(), 0);
  for (int k = 0; k < p.outerSize(); ++k) {
    col_nnz[k] = p.outerIndexPtr()[k + 1] - p.outerIndexPtr()[k];
  }
  std::int64_t work = 0;
  for (int j = 0; j < s.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(s, j); it; ++it) {
      work += col_nnz[it.row()];
    }
  }
  return work;
}

}  // namespace

SparseMatrix build_transition_matrix(const UserSequences& seqs, int item_count) {
  std::vector<Eigen::Triplet<double>> triplets;
  for (const auto& seq : seqs) {
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
      const int from = seq[i];
      const int to = seq[i + 1];
      if (from < 0 || from >= item_count || to < 0 || to >= item_count) {
        throw std::out_of_range("build_transition_matrix: item id out of range");
      }
      if (from == to) continue;  // repeated consecutive item, no self loop
      triplets.emplace_back(from, to, 1.0);
    }
  }
  SparseMatrix s(item_count, item_count);
  s.setFromTriplets(triplets.begin(), triplets.end());
  clamp_nonzeros_to_one(s);
  return s;
}

SparseMatrix symmetrize(const SparseMatrix& transitions) {
  SparseMatrix sym = transitions + SparseMatrix(transitions.transpose());
  clamp_nonzeros_to_one(sym);
  return sym;
}

SpectralRadiusEstimate estimate_spectral_radius(const SparseMatrix& sym, double tol,
                                                int max_iter) {
  if (sym.rows() < 1) {
    throw std::invalid_argument("estimate_spectral_radius: empty matrix");
  }
  SpectralRadiusEstimate est;
  if (sym.nonZeros() == 0) {
    est.converged = true;
    return est;
  }
  // Non-negative symmetric matrix: the Perron vector is non-negative, so the
  // all-ones start cannot be orthogonal to it.
  Eigen::VectorXd v = Eigen::VectorXd::Ones(sym.rows());
  v.normalize();
  double prev = 0.0;
  for (int iter = 1; iter <= max_iter; ++iter) {
    Eigen::VectorXd w = sym * v;
    const double norm = w.norm();
    est.iterations = iter;
    if (norm == 0.0) {
      est.value = 0.0;
      est.converged = true;
      return est;
    }
    v = w / norm;
    const double rho = v.dot(sym * v);
    est.value = rho;
    if (iter > 1 && std::abs(rho - prev) <= tol * std::max(std::abs(rho), 1e-300)) {
      est.converged = true;
      return est;
    }
    prev = rho;
  }
  est.converged = false;
  return est;
}

SparseMatrix diffuse(const SparseMatrix& sym, const DiffusionParams& params,
                     double spectral_radius, std::vector<std::string>* warnings) {
  if (!(params.alpha > 0.0 && params.alpha < 1.0)) {
    throw std::invalid_argument("diffuse: alpha must be in (0, 1)");
  }
  if (params.depth < 1) {
    throw std::invalid_argument("diffuse: depth must be >= 1");
  }
  if (warnings && spectral_radius > 0.0 && params.alpha >= 1.0 / spectral_radius) {
    warnings->push_back("diffuse: alpha = " + std::to_string(params.alpha) +
                        " >= 1/spectral-radius = " + std::to_string(1.0 / spectral_radius) +
                        "; the infinite diffusion series would diverge (finite depth is fine)");
  }
  const int n = static_cast<int>(sym.rows());

  // Accumulate alpha^{k-1} * (S')^k power by power. Powers of the 0/1 base
  // are integer-valued and therefore exact, which keeps the accumulated sum
  // bitwise symmetric.
  SparseMatrix power = sym;
  SparseMatrix acc = sym;
  Eigen::MatrixXd power_dense;
  Eigen::MatrixXd acc_dense;
  bool dense = false;
  double alpha_pow = 1.0;

  for (int k = 2; k <= params.depth; ++k) {
    alpha_pow *= params.alpha;
    if (!dense) {
      const std::int64_t work = product_work_estimate(power, sym);
      if (work > params.nnz_budget) {
        if (n > kDenseFallbackLimit) {
          throw std::runtime_error(
              "diffuse: power " + std::to_string(k) + " exceeds the sparsity budget (" +
              std::to_string(work) + " > " + std::to_string(params.nnz_budget) +
              ") and the graph is too large for the dense fallback");
        }
        dense = true;
        power_dense = Eigen::MatrixXd(power);
        acc_dense = Eigen::MatrixXd(acc);
      }
    }
    if (dense) {
      power_dense = (power_dense * Eigen::MatrixXd(sym)).eval();
      acc_dense += alpha_pow * power_dense;
    } else {
      power = (power * sym).pruned();
      acc = acc + SparseMatrix(alpha_pow * power);
    }
  }

  if (dense) {
    return acc_dense.sparseView();
  }
  acc.makeCompressed();
  return acc;
}

NormalizedItemGraph normalize_symmetric(const SparseMatrix& diffused) {
  const int n = static_cast<int>(diffused.rows());
  NormalizedItemGraph out;
  out.degrees = diffused * Eigen::VectorXd::Ones(n);
  Eigen::VectorXd inv_sqrt(n);
  for (int i = 0; i < n; ++i) {
    inv_sqrt[i] = out.degrees[i] > 0.0 ? 1.0 / std::sqrt(out.degrees[i]) : 0.0;
  }
  out.matrix = diffused;
  for (int k = 0; k < out.matrix.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(out.matrix, k); it; ++it) {
      it.valueRef() *= inv_sqrt[it.row()] * inv_sqrt[it.col()];
    }
  }
  out.matrix.prune(0.0);
  return out;
}

void write_coordinate_list(const SparseMatrix& matrix, std::ostream& out) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  for (int k = 0; k < matrix.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(matrix, k); it; ++it) {
      out << it.row() << '\t' << it.col() << '\t' << it.value() << '\n';
    }
  }
  out.precision(old_precision);
}

}  // namespace specrec
