#pragma once

#include "specrec/config.hpp"
#include "specrec/metrics.hpp"
#include "specrec/unified_graph.hpp"

namespace specrec {

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct RunReport {
  MetricTable metrics;  // for the configured eval fold
  std::vector<StageTiming> stage_timings;
  double total_seconds = 0.0;
  std::string config_echo;
  std::vector<std::string> warnings;
  double spectral_radius = 0.0;  // of the symmetrized transition graph
  int graph_dim = 0;             // m + n
};

// End-to-end: ingest -> split -> item graph -> unified Laplacian ->
// truncated eigendecomposition -> dual filtering -> top-k metrics.
// Stage failures rethrow with the stage name prefixed.
RunReport run(const RunConfig& config);
RunReport run_on_log(const InteractionLog& log, const RunConfig& config);

// Every user scored by global item interaction counts.
DenseMatrix popularity_baseline(const InteractionLog& train);
RunReport run_baseline(const RunConfig& config);
RunReport run_baseline_on_log(const InteractionLog& log, const RunConfig& config);

// One evaluation per grid point, eigenpairs and projection bases shared
// across points with equal rank. Returns CSV text with one row per
// (point, metric, k); failed points get a single row with the error column
// set. Rows are sorted by (center, width, phi, r).
std::string sweep(const RunConfig& config, const SweepGrid& grid);
std::string sweep_on_log(const InteractionLog& log, const RunConfig& config,
                         const SweepGrid& grid);

std::string report_text(const RunReport& report);

// Write-to-temp-then-rename so concurrent readers never observe a partial
// file.
void write_text_atomic(const std::string& path, const std::string& content);

}  // namespace specrec
