#pragma once

#include <Eigen/Sparse>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace specrec {

using SparseMatrix = Eigen::SparseMatrix<double>;

// One implicit-feedback event. Ratings, if present in the source file, are
// discarded at parse time; any row counts as a positive.
struct Interaction {
  int user = 0;
  int item = 0;
  double timestamp = 0.0;
};

struct InteractionLog {
  std::vector<Interaction> interactions;  // sorted by (timestamp, user, item)
  int user_count = 0;
  int item_count = 0;
  std::unordered_map<std::string, int> user_index;  // raw id -> dense id
  std::unordered_map<std::string, int> item_index;
};

// Column layout of a delimited interaction file.
struct ColumnFormat {
  char delimiter = '\t';
  int user_column = 0;
  int item_column = 1;
  int time_column = 3;  // ML100K u.data order: user, item, rating, timestamp
  int skip_header_lines = 0;
};

enum class SplitStrategy { kRandomPerUser, kTemporalPerUser };

struct SplitRatios {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

// Folds share the full entity index of the source log, so matrix shapes stay
// stable even when an entity only occurs in validation/test.
struct DatasetSplit {
  InteractionLog train;
  InteractionLog validation;
  InteractionLog test;
  std::uint64_t seed = 0;
  SplitStrategy strategy = SplitStrategy::kRandomPerUser;
};

using UserSequences = std::vector<std::vector<int>>;

InteractionLog load_interactions(const std::string& path, const ColumnFormat& format);

// Parses already-loaded text; `source_name` only appears in error messages.
InteractionLog parse_interactions(const std::string& text, const ColumnFormat& format,
                                  const std::string& source_name = "<memory>");

// Per-user holdout on distinct (user, item) pairs: each pair lands in exactly
// one fold and carries all of its timestamped events with it. Users with
// fewer than three pairs keep everything in train.
DatasetSplit split(const InteractionLog& log, const SplitRatios& ratios,
                   std::uint64_t seed, SplitStrategy strategy);

SparseMatrix build_interaction_matrix(const InteractionLog& train);

// Chronological item list per user, one entry per train interaction.
// Equal timestamps are ordered by ascending item id.
UserSequences build_user_sequences(const InteractionLog& train);

// Text manifest of fold assignments: "user<TAB>item<TAB>fold" per line.
void write_split_manifest(const DatasetSplit& split, const std::string& path);

}  // namespace specrec
