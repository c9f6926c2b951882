#pragma once

#include <Eigen/Dense>

#include "specrec/sequence_graph.hpp"

namespace specrec {

struct NormalizedLaplacian {
  SparseMatrix matrix;      // (m+n) x (m+n), symmetric
  Eigen::VectorXd degrees;  // row sums of the adjacency
};

// Block adjacency [[0, X], [X^T, S~]] over users then items. The user-user
// block carries no edges; X enters unnormalized.
SparseMatrix assemble_adjacency(const SparseMatrix& interactions,
                                const SparseMatrix& item_graph);

// L = I - D^{-1/2} A D^{-1/2}. Zero-degree nodes get an identity row.
NormalizedLaplacian normalized_laplacian(const SparseMatrix& adjacency);

// Union-find over the nonzero pattern; isolated nodes count as components.
int connected_components(const SparseMatrix& adjacency);

}  // namespace specrec
