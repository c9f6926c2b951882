#include "specrec/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <thread>

namespace specrec {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::vector<int> top_items_for_row(const double* scores, int item_count,
                                   const std::vector<int>& seen_sorted, int k) {
  std::vector<std::pair<double, int>> candidates;
  candidates.reserve(item_count - seen_sorted.size());
  std::size_t s = 0;
  for (int i = 0; i < item_count; ++i) {
    while (s < seen_sorted.size() && seen_sorted[s] < i) ++s;
    if (s < seen_sorted.size() && seen_sorted[s] == i) continue;
    candidates.emplace_back(scores[i], i);
  }
  const int take = std::min<int>(k, static_cast<int>(candidates.size()));
  auto better = [](const std::pair<double, int>& a, const std::pair<double, int>& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  };
  std::partial_sort(candidates.begin(), candidates.begin() + take, candidates.end(), better);
  std::vector<int> out(take);
  for (int i = 0; i < take; ++i) out[i] = candidates[i].second;
  return out;
}

bool is_relevant(const std::vector<int>& relevant_sorted, int item) {
  return std::binary_search(relevant_sorted.begin(), relevant_sorted.end(), item);
}

MetricSummary summarize(std::vector<double> per_user) {
  MetricSummary s;
  double sum = 0.0;
  int count = 0;
  for (double v : per_user) {
    if (!std::isnan(v)) {
      sum += v;
      ++count;
    }
  }
  s.users = count;
  s.mean = count > 0 ? sum / count : 0.0;
  if (count > 1) {
    double ss = 0.0;
    for (double v : per_user) {
      if (!std::isnan(v)) ss += (v - s.mean) * (v - s.mean);
    }
    s.se = std::sqrt(ss / (count - 1)) / std::sqrt(static_cast<double>(count));
  }
  s.per_user = std::move(per_user);
  return s;
}

void append_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace

std::string to_csv(const MetricTable& table) {
  std::string out = "metric,k,mean,se,users\n";
  for (const auto& row : table.rows) {
    out += row.metric;
    out += ',';
    out += std::to_string(row.k);
    out += ',';
    append_double(out, row.mean);
    out += ',';
    append_double(out, row.se);
    out += ',';
    out += std::to_string(row.users);
    out += '\n';
  }
  return out;
}

RankingResult rank_topk(const DenseMatrix& scores, const std::vector<std::vector<int>>& seen,
                        int k) {
  if (k < 1) throw std::invalid_argument("rank_topk: k must be >= 1");
  const int m = static_cast<int>(scores.rows());
  const int n = static_cast<int>(scores.cols());
  if (static_cast<int>(seen.size()) != m) {
    throw std::invalid_argument("rank_topk: seen list count must equal user count");
  }
  RankingResult result;
  result.items.resize(m);
  Eigen::VectorXd row(n);
  for (int u = 0; u < m; ++u) {
    row = scores.row(u);
    result.items[u] = top_items_for_row(row.data(), n, seen[u], k);
  }
  return result;
}

double ndcg_at_k(const std::vector<int>& ranked, const std::vector<int>& relevant, int k) {
  if (relevant.empty()) return 0.0;
  const int len = std::min<int>(k, static_cast<int>(ranked.size()));
  double dcg = 0.0;
  for (int i = 0; i < len; ++i) {
    if (is_relevant(relevant, ranked[i])) dcg += 1.0 / std::log2(i + 2.0);
  }
  const int ideal = std::min<int>(k, static_cast<int>(relevant.size()));
  double idcg = 0.0;
  for (int i = 0; i < ideal; ++i) idcg += 1.0 / std::log2(i + 2.0);
  return dcg / idcg;
}

double mrr_at_k(const std::vector<int>& ranked, const std::vector<int>& relevant, int k) {
  const int len = std::min<int>(k, static_cast<int>(ranked.size()));
  for (int i = 0; i < len; ++i) {
    if (is_relevant(relevant, ranked[i])) return 1.0 / (i + 1.0);
  }
  return 0.0;
}

MetricSummary ndcg_at_k(const RankingResult& ranked,
                        const std::vector<std::vector<int>>& relevant, int k) {
  std::vector<double> per_user(ranked.items.size(), kNan);
  for (std::size_t u = 0; u < ranked.items.size(); ++u) {
    if (!relevant[u].empty()) per_user[u] = ndcg_at_k(ranked.items[u], relevant[u], k);
  }
  return summarize(std::move(per_user));
}

MetricSummary mrr_at_k(const RankingResult& ranked,
                       const std::vector<std::vector<int>>& relevant, int k) {
  std::vector<double> per_user(ranked.items.size(), kNan);
  for (std::size_t u = 0; u < ranked.items.size(); ++u) {
    if (!relevant[u].empty()) per_user[u] = mrr_at_k(ranked.items[u], relevant[u], k);
  }
  return summarize(std::move(per_user));
}

std::vector<std::vector<int>> items_per_user(const InteractionLog& fold) {
  std::vector<std::vector<int>> out(fold.user_count);
  for (const Interaction& it : fold.interactions) out[it.user].push_back(it.item);
  for (auto& items : out) {
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
  }
  return out;
}

MetricTable evaluate_streaming(const BlockScorer& scorer, int user_count, int item_count,
                               const std::vector<std::vector<int>>& seen,
                               const std::vector<std::vector<int>>& relevant,
                               const std::vector<int>& ks, int threads, int block_users,
                               std::vector<std::string>* warnings) {
  if (ks.empty()) throw std::invalid_argument("evaluate_streaming: no k values");
  const int kmax = *std::max_element(ks.begin(), ks.end());
  if (kmax < 1) throw std::invalid_argument("evaluate_streaming: k must be >= 1");

  bool any_relevant = false;
  for (const auto& r : relevant) {
    if (!r.empty()) {
      any_relevant = true;
      break;
    }
  }
  MetricTable table;
  if (!any_relevant) {
    if (warnings) warnings->push_back("evaluate: empty relevance fold, no metrics computed");
    return table;
  }

  // per (metric, k) per-user value matrix, filled block-by-block
  std::vector<std::vector<double>> ndcg_values(ks.size(),
                                               std::vector<double>(user_count, kNan));
  std::vector<std::vector<double>> mrr_values(ks.size(),
                                              std::vector<double>(user_count, kNan));

  block_users = std::max(1, block_users);
  const int n_blocks = (user_count + block_users - 1) / block_users;
  std::atomic<int> next_block{0};

  auto worker = [&]() {
    DenseMatrix block;
    for (;;) {
      const int b = next_block.fetch_add(1);
      if (b >= n_blocks) break;
      const int first = b * block_users;
      const int rows = std::min(block_users, user_count - first);
      scorer(first, rows, block);
      for (int i = 0; i < rows; ++i) {
        const int u = first + i;
        if (relevant[u].empty()) continue;
        Eigen::VectorXd row = block.row(i);
        std::vector<int> ranked = top_items_for_row(row.data(), item_count, seen[u], kmax);
        for (std::size_t j = 0; j < ks.size(); ++j) {
          ndcg_values[j][u] = ndcg_at_k(ranked, relevant[u], ks[j]);
          mrr_values[j][u] = mrr_at_k(ranked, relevant[u], ks[j]);
        }
      }
    }
  };

  const int n_threads = std::max(1, std::min(threads, n_blocks));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (std::size_t j = 0; j < ks.size(); ++j) {
    MetricSummary s = summarize(std::move(ndcg_values[j]));
    table.rows.push_back({"ndcg", ks[j], s.mean, s.se, s.users});
  }
  for (std::size_t j = 0; j < ks.size(); ++j) {
    MetricSummary s = summarize(std::move(mrr_values[j]));
    table.rows.push_back({"mrr", ks[j], s.mean, s.se, s.users});
  }
  return table;
}

MetricTable evaluate(const DenseMatrix& scores, const InteractionLog& train,
                     const InteractionLog& test, const std::vector<int>& ks,
                     std::vector<std::string>* warnings) {
  const auto seen = items_per_user(train);
  const auto relevant = items_per_user(test);
  BlockScorer scorer = [&scores](int first, int rows, DenseMatrix& out) {
    out = scores.middleRows(first, rows);
  };
  return evaluate_streaming(scorer, static_cast<int>(scores.rows()),
                            static_cast<int>(scores.cols()), seen, relevant, ks, 1,
                            static_cast<int>(scores.rows()), warnings);
}

}  // namespace specrec
