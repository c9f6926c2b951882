#include "specrec/unified_graph.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace specrec {

SparseMatrix assemble_adjacency(const SparseMatrix& interactions,
                                const SparseMatrix& item_graph) {
  const int m = static_cast<int>(interactions.rows());
  const int n = static_cast<int>(interactions.cols());
  if (item_graph.rows() != n || item_graph.cols() != n) {
    throw std::invalid_argument("assemble_adjacency: item graph must be n x n");
  }

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * interactions.nonZeros() + item_graph.nonZeros());
  for (int k = 0; k < interactions.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(interactions, k); it; ++it) {
      const int u = static_cast<int>(it.row());
      const int i = m + static_cast<int>(it.col());
      triplets.emplace_back(u, i, it.value());
      triplets.emplace_back(i, u, it.value());
    }
  }
  for (int k = 0; k < item_graph.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(item_graph, k); it; ++it) {
      triplets.emplace_back(m + static_cast<int>(it.row()), m + static_cast<int>(it.col()),
                            it.value());
    }
  }
  SparseMatrix a(m + n, m + n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  return a;
}

NormalizedLaplacian normalized_laplacian(const SparseMatrix& adjacency) {
  const int dim = static_cast<int>(adjacency.rows());
  NormalizedLaplacian out;
  out.degrees = adjacency * Eigen::VectorXd::Ones(dim);
  Eigen::VectorXd inv_sqrt(dim);
  for (int i = 0; i < dim; ++i) {
    inv_sqrt[i] = out.degrees[i] > 0.0 ? 1.0 / std::sqrt(out.degrees[i]) : 0.0;
  }

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(adjacency.nonZeros() + dim);
  for (int i = 0; i < dim; ++i) triplets.emplace_back(i, i, 1.0);
  for (int k = 0; k < adjacency.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(adjacency, k); it; ++it) {
      const double v = -it.value() * inv_sqrt[it.row()] * inv_sqrt[it.col()];
      if (v != 0.0) triplets.emplace_back(it.row(), it.col(), v);
    }
  }
  out.matrix.resize(dim, dim);
  out.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

int connected_components(const SparseMatrix& adjacency) {
  const int dim = static_cast<int>(adjacency.rows());
  std::vector<int> parent(dim);
  std::iota(parent.begin(), parent.end(), 0);

  auto find = [&parent](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };

  int components = dim;
  for (int k = 0; k < adjacency.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(adjacency, k); it; ++it) {
      if (it.value() == 0.0 || it.row() == it.col()) continue;
      int a = find(static_cast<int>(it.row()));
      int b = find(static_cast<int>(it.col()));
      if (a != b) {
        parent[a] = b;
        --components;
      }
    }
  }
  return components;
}

}  // namespace specrec
