#include "specrec/interactions.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "specrec/rng.hpp"

namespace specrec {

namespace {

std::vector<std::string_view> split_fields(std::string_view line, char delim) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

double parse_timestamp(std::string_view field, std::size_t line_no, const std::string& source) {
  std::string buf(field);
  errno = 0;
  char* end = nullptr;
  double value = std::strtod(buf.c_str(), &end);
  if (end == buf.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(value)) {
    throw std::runtime_error(source + ":" + std::to_string(line_no) +
                             ": non-numeric timestamp '" + buf + "'");
  }
  return value;
}

void sort_log(std::vector<Interaction>& rows) {
  std::sort(rows.begin(), rows.end(), [](const Interaction& a, const Interaction& b) {
    return std::tie(a.timestamp, a.user, a.item) < std::tie(b.timestamp, b.user, b.item);
  });
}

}  // namespace

InteractionLog parse_interactions(const std::string& text, const ColumnFormat& format,
                                  const std::string& source_name) {
  const int max_col = std::max({format.user_column, format.item_column, format.time_column});
  if (format.user_column < 0 || format.item_column < 0 || format.time_column < 0) {
    throw std::invalid_argument("column indices must be non-negative");
  }

  InteractionLog log;
  std::set<std::tuple<int, int, double>> seen;  // exact (user, item, ts) dedup

  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::size_t parsed_rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no <= static_cast<std::size_t>(format.skip_header_lines)) continue;
    if (line.empty()) continue;

    auto fields = split_fields(line, format.delimiter);
    if (static_cast<int>(fields.size()) <= max_col) {
      throw std::runtime_error(source_name + ":" + std::to_string(line_no) +
                               ": expected at least " + std::to_string(max_col + 1) +
                               " fields, got " + std::to_string(fields.size()));
    }
    std::string user_raw(fields[format.user_column]);
    std::string item_raw(fields[format.item_column]);
    if (user_raw.empty() || item_raw.empty()) {
      throw std::runtime_error(source_name + ":" + std::to_string(line_no) + ": empty id field");
    }
    double ts = parse_timestamp(fields[format.time_column], line_no, source_name);

    auto [uit, u_new] = log.user_index.try_emplace(user_raw, log.user_count);
    if (u_new) ++log.user_count;
    auto [iit, i_new] = log.item_index.try_emplace(item_raw, log.item_count);
    if (i_new) ++log.item_count;

    ++parsed_rows;
    if (seen.emplace(uit->second, iit->second, ts).second) {
      log.interactions.push_back({uit->second, iit->second, ts});
    }
  }

  if (parsed_rows == 0) {
    throw std::runtime_error(source_name + ": no interaction rows found");
  }
  sort_log(log.interactions);
  return log;
}

InteractionLog load_interactions(const std::string& path, const ColumnFormat& format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open interaction file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_interactions(buf.str(), format, path);
}

DatasetSplit split(const InteractionLog& log, const SplitRatios& ratios,
                   std::uint64_t seed, SplitStrategy strategy) {
  if (log.interactions.empty()) {
    throw std::invalid_argument("split: empty interaction log");
  }
  const double sum = ratios.train + ratios.validation + ratios.test;
  if (std::abs(sum - 1.0) > 1e-9 || ratios.train < 0 || ratios.validation < 0 || ratios.test < 0) {
    throw std::invalid_argument("split: ratios must be non-negative and sum to 1");
  }

  DatasetSplit out;
  out.seed = seed;
  out.strategy = strategy;
  for (InteractionLog* fold : {&out.train, &out.validation, &out.test}) {
    fold->user_count = log.user_count;
    fold->item_count = log.item_count;
    fold->user_index = log.user_index;
    fold->item_index = log.item_index;
  }

  // Distinct (user, item) units; each keeps every timestamped event and is
  // ordered by its most recent timestamp for the temporal strategy.
  struct Unit {
    int item;
    double last_ts;
    std::vector<Interaction> events;
  };
  std::vector<std::map<int, Unit>> per_user(log.user_count);
  for (const Interaction& it : log.interactions) {
    auto [uit, fresh] = per_user[it.user].try_emplace(it.item, Unit{it.item, it.timestamp, {}});
    Unit& unit = uit->second;
    unit.events.push_back(it);
    unit.last_ts = std::max(unit.last_ts, it.timestamp);
    (void)fresh;
  }

  for (int u = 0; u < log.user_count; ++u) {
    std::vector<Unit*> units;
    units.reserve(per_user[u].size());
    for (auto& [item, unit] : per_user[u]) units.push_back(&unit);
    const std::size_t cnt = units.size();
    if (cnt == 0) continue;

    std::size_t n_val = 0, n_test = 0;
    if (cnt >= 3) {
      n_val = static_cast<std::size_t>(std::floor(static_cast<double>(cnt) * ratios.validation));
      n_test = static_cast<std::size_t>(std::floor(static_cast<double>(cnt) * ratios.test));
    }

    if (strategy == SplitStrategy::kRandomPerUser) {
      SplitMix64 rng(mix_seed(seed, static_cast<std::uint64_t>(u)));
      fisher_yates_shuffle(units, rng);
    } else {
      std::sort(units.begin(), units.end(), [](const Unit* a, const Unit* b) {
        return std::tie(a->last_ts, a->item) < std::tie(b->last_ts, b->item);
      });
    }

    const std::size_t n_train = cnt - n_val - n_test;
    for (std::size_t i = 0; i < cnt; ++i) {
      InteractionLog& fold = i < n_train               ? out.train
                             : i < n_train + n_val     ? out.validation
                                                       : out.test;
      fold.interactions.insert(fold.interactions.end(), units[i]->events.begin(),
                               units[i]->events.end());
    }
  }

  for (InteractionLog* fold : {&out.train, &out.validation, &out.test}) {
    std::sort(fold->interactions.begin(), fold->interactions.end(),
              [](const Interaction& a, const Interaction& b) {
                return std::tie(a.timestamp, a.user, a.item) <
                       std::tie(b.timestamp, b.user, b.item);
              });
  }
  return out;
}

SparseMatrix build_interaction_matrix(const InteractionLog& train) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(train.interactions.size());
  for (const Interaction& it : train.interactions) {
    triplets.emplace_back(it.user, it.item, 1.0);
  }
  SparseMatrix x(train.user_count, train.item_count);
  x.setFromTriplets(triplets.begin(), triplets.end());
  // setFromTriplets sums duplicates; clamp repeated (u,i) pairs back to 1.
  for (int k = 0; k < x.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(x, k); it; ++it) {
      it.valueRef() = 1.0;
    }
  }
  return x;
}

UserSequences build_user_sequences(const InteractionLog& train) {
  UserSequences seqs(train.user_count);
  std::vector<std::vector<std::pair<double, int>>> stamped(train.user_count);
  for (const Interaction& it : train.interactions) {
    stamped[it.user].emplace_back(it.timestamp, it.item);
  }
  for (int u = 0; u < train.user_count; ++u) {
    std::sort(stamped[u].begin(), stamped[u].end());
    seqs[u].reserve(stamped[u].size());
    for (const auto& [ts, item] : stamped[u]) seqs[u].push_back(item);
  }
  return seqs;
}

void write_split_manifest(const DatasetSplit& split, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open split manifest for writing: " + path);
  }
  auto emit = [&out](const InteractionLog& fold, const char* name) {
    std::set<std::pair<int, int>> pairs;
    for (const Interaction& it : fold.interactions) pairs.emplace(it.user, it.item);
    for (const auto& [u, i] : pairs) out << u << '\t' << i << '\t' << name << '\n';
  };
  emit(split.train, "train");
  emit(split.validation, "validation");
  emit(split.test, "test");
}

}  // namespace specrec
