#pragma once

#include <functional>
#include <string>
#include <vector>

#include "specrec/eigensolver.hpp"

namespace specrec {

// Per-user top-k item lists: descending score, ties by ascending item id,
// train-seen items excluded.
struct RankingResult {
  std::vector<std::vector<int>> items;
};

struct MetricTable {
  struct Row {
    std::string metric;
    int k = 0;
    double mean = 0.0;
    double se = 0.0;
    int users = 0;
  };
  std::vector<Row> rows;
};

// "metric,k,mean,se,users" with full-precision doubles; byte-stable for
// identical inputs.
std::string to_csv(const MetricTable& table);

RankingResult rank_topk(const DenseMatrix& scores, const std::vector<std::vector<int>>& seen,
                        int k);

// Binary-relevance NDCG/MRR for one ranked list. `relevant` must be sorted.
double ndcg_at_k(const std::vector<int>& ranked, const std::vector<int>& relevant, int k);
double mrr_at_k(const std::vector<int>& ranked, const std::vector<int>& relevant, int k);

struct MetricSummary {
  std::vector<double> per_user;  // indexed by user; NaN for ineligible users
  double mean = 0.0;
  double se = 0.0;
  int users = 0;
};

MetricSummary ndcg_at_k(const RankingResult& ranked,
                        const std::vector<std::vector<int>>& relevant, int k);
MetricSummary mrr_at_k(const RankingResult& ranked,
                       const std::vector<std::vector<int>>& relevant, int k);

MetricTable evaluate(const DenseMatrix& scores, const InteractionLog& train,
                     const InteractionLog& test, const std::vector<int>& ks = {5, 10, 20},
                     std::vector<std::string>* warnings = nullptr);

// Streaming form: the scorer fills score rows for users [first, first+rows);
// evaluation never holds more than one user block of scores per worker.
// Users with no relevant items are skipped. Deterministic for any thread
// count: per-user values land in preallocated slots and are reduced in user
// order.
using BlockScorer = std::function<void(int first_user, int rows, DenseMatrix& out)>;

MetricTable evaluate_streaming(const BlockScorer& scorer, int user_count, int item_count,
                               const std::vector<std::vector<int>>& seen,
                               const std::vector<std::vector<int>>& relevant,
                               const std::vector<int>& ks, int threads, int block_users,
                               std::vector<std::string>* warnings = nullptr);

// Sorted distinct item lists per user from a fold.
std::vector<std::vector<int>> items_per_user(const InteractionLog& fold);

}  // namespace specrec
