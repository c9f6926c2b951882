#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "specrec/filters.hpp"
#include "specrec/interactions.hpp"
#include "specrec/sequence_graph.hpp"

namespace specrec {

enum class AblationMode { kFull, kNoBandpass, kNoLowpass, kNoSequence };
enum class EvalFold { kTest, kValidation };

const char* to_string(AblationMode mode);
const char* to_string(EvalFold fold);
const char* to_string(SplitStrategy strategy);
AblationMode ablation_from_string(const std::string& name);

struct RunConfig {
  std::string data_path;
  ColumnFormat format;
  SplitRatios ratios;
  std::uint64_t seed = 42;
  SplitStrategy strategy = SplitStrategy::kRandomPerUser;
  DiffusionParams diffusion;
  int eigen_count = 32;
  double eigen_tol = 1e-8;
  int eigen_max_iter = 0;
  BandpassParams bandpass;
  double fusion_phi = 0.5;
  AblationMode ablation = AblationMode::kFull;
  std::vector<int> ks = {5, 10, 20};
  std::string cache_dir;
  int threads = 1;
  int eval_block_users = 512;
  EvalFold eval_fold = EvalFold::kTest;
  std::string split_manifest_path;   // optional debug output
  std::string item_graph_dump_path;  // optional debug output

  void validate() const;  // throws on out-of-range values
};

// Flat "key = value" document; '#' starts a comment; unknown keys are
// errors so sweep typos fail fast.
RunConfig parse_run_config(const std::string& text, const std::string& source = "<memory>");
RunConfig load_run_config(const std::string& path);

std::string describe(const RunConfig& config);

// Sweep grid: same key syntax, values are comma-separated lists for
// filter.center, filter.width, fusion.phi and eigen.count. Missing keys
// fall back to the run config's single value.
struct SweepGrid {
  std::vector<double> centers;
  std::vector<double> widths;
  std::vector<double> phis;
  std::vector<int> ranks;
};

SweepGrid parse_sweep_grid(const std::string& text, const std::string& source = "<memory>");
SweepGrid load_sweep_grid(const std::string& path);

}  // namespace specrec
