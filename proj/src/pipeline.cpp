#include "specrec/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace specrec {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Times consecutive stages so they tile the whole run, and prefixes stage
// names onto any error escaping a stage body.
class StageRunner {
 public:
  explicit StageRunner(std::vector<StageTiming>& timings)
      : timings_(timings), mark_(Clock::now()) {}

  template <typename Fn>
  auto operator()(const std::string& name, Fn&& fn) {
    try {
      if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        close(name);
      } else {
        auto result = fn();
        close(name);
        return result;
      }
    } catch (const std::exception& e) {
      close(name);
      throw std::runtime_error("stage " + name + ": " + e.what());
    }
  }

 private:
  void close(const std::string& name) {
    const auto now = Clock::now();
    timings_.push_back({name, std::chrono::duration<double>(now - mark_).count()});
    mark_ = now;
  }

  std::vector<StageTiming>& timings_;
  Clock::time_point mark_;
};

struct PreparedGraph {
  DatasetSplit folds;
  SparseMatrix interactions;  // X over the full entity index
  NormalizedLaplacian laplacian;
  double spectral_radius = 0.0;
};

PreparedGraph prepare_graph(const InteractionLog& log, const RunConfig& cfg,
                            StageRunner& stage, std::vector<std::string>& warnings) {
  PreparedGraph g;
  g.folds = stage("split", [&] {
    DatasetSplit folds = split(log, cfg.ratios, cfg.seed, cfg.strategy);
    if (!cfg.split_manifest_path.empty()) write_split_manifest(folds, cfg.split_manifest_path);
    return folds;
  });

  const int n = log.item_count;
  SparseMatrix item_graph = stage("item-graph", [&]() -> SparseMatrix {
    if (cfg.ablation == AblationMode::kNoSequence) {
      return SparseMatrix(n, n);
    }
    UserSequences seqs = build_user_sequences(g.folds.train);
    SparseMatrix transitions = build_transition_matrix(seqs, n);
    SparseMatrix sym = symmetrize(transitions);
    SpectralRadiusEstimate rho = estimate_spectral_radius(sym);
    if (!rho.converged) {
      warnings.push_back("spectral-radius estimate did not converge after " +
                         std::to_string(rho.iterations) + " iterations");
    }
    g.spectral_radius = rho.value;
    SparseMatrix diffused = diffuse(sym, cfg.diffusion, rho.value, &warnings);
    NormalizedItemGraph normalized = normalize_symmetric(diffused);
    if (!cfg.item_graph_dump_path.empty()) {
      std::ofstream dump(cfg.item_graph_dump_path, std::ios::binary);
      if (!dump) throw std::runtime_error("cannot open item graph dump path");
      write_coordinate_list(normalized.matrix, dump);
    }
    return normalized.matrix;
  });

  stage("unified-graph", [&] {
    g.interactions = build_interaction_matrix(g.folds.train);
    SparseMatrix adjacency = assemble_adjacency(g.interactions, item_graph);
    g.laplacian = normalized_laplacian(adjacency);
  });
  return g;
}

const InteractionLog& eval_fold_of(const DatasetSplit& folds, EvalFold fold) {
  return fold == EvalFold::kTest ? folds.test : folds.validation;
}

BlockScorer make_scorer(const FilterBasis& basis, const Vector& kernel, AblationMode mode,
                        double phi) {
  switch (mode) {
    case AblationMode::kNoBandpass:
      return [&basis](int first, int rows, DenseMatrix& out) {
        lowpass_block(basis, first, rows, out);
      };
    case AblationMode::kNoLowpass:
      return [&basis, &kernel](int first, int rows, DenseMatrix& out) {
        bandpass_block(basis, kernel, first, rows, out);
      };
    default:
      return [&basis, &kernel, phi](int first, int rows, DenseMatrix& out) {
        bandpass_block(basis, kernel, first, rows, out);
        DenseMatrix low;
        lowpass_block(basis, first, rows, low);
        out = phi * out + (1.0 - phi) * low;
      };
  }
}

}  // namespace

RunReport run_on_log(const InteractionLog& log, const RunConfig& cfg) {
  cfg.validate();
  const auto t0 = Clock::now();
  RunReport report;
  report.config_echo = describe(cfg);
  report.graph_dim = log.user_count + log.item_count;
  StageRunner stage(report.stage_timings);

  PreparedGraph g = prepare_graph(log, cfg, stage, report.warnings);
  report.spectral_radius = g.spectral_radius;

  EigenOptions eig_opts;
  eig_opts.tol = cfg.eigen_tol;
  eig_opts.max_iter = cfg.eigen_max_iter;
  eig_opts.seed = cfg.seed;
  EigenSystem system = stage("eigensolve", [&] {
    EigenSystem s = eigh_with_cache(g.laplacian.matrix, cfg.eigen_count, eig_opts,
                                    cfg.cache_dir, &report.warnings);
    if (!s.all_converged()) {
      int bad = 0;
      for (char c : s.converged) bad += c ? 0 : 1;
      report.warnings.push_back("eigensolve: " + std::to_string(bad) + " of " +
                                std::to_string(s.count()) + " pairs above tolerance");
    }
    return s;
  });

  stage("filter-eval", [&] {
    DegreeVectors degrees = degree_vectors(g.interactions);
    FilterBasis basis = build_filter_basis(g.interactions, degrees, system);
    Vector kernel;
    if (cfg.ablation != AblationMode::kNoBandpass) {
      kernel = gaussian_kernel(system.eigenvalues, cfg.bandpass);
    }
    BlockScorer scorer = make_scorer(basis, kernel, cfg.ablation, cfg.fusion_phi);
    const auto seen = items_per_user(g.folds.train);
    const auto relevant = items_per_user(eval_fold_of(g.folds, cfg.eval_fold));
    report.metrics = evaluate_streaming(scorer, log.user_count, log.item_count, seen, relevant,
                                        cfg.ks, cfg.threads, cfg.eval_block_users,
                                        &report.warnings);
  });

  report.total_seconds = seconds_since(t0);
  return report;
}

RunReport run(const RunConfig& cfg) {
  cfg.validate();
  const auto t0 = Clock::now();
  RunReport report;
  StageRunner stage(report.stage_timings);
  InteractionLog log = stage("ingest", [&] {
    return load_interactions(cfg.data_path, cfg.format);
  });
  RunReport inner = run_on_log(log, cfg);
  inner.stage_timings.insert(inner.stage_timings.begin(), report.stage_timings.begin(),
                             report.stage_timings.end());
  inner.total_seconds = seconds_since(t0);
  return inner;
}

DenseMatrix popularity_baseline(const InteractionLog& train) {
  Vector counts = Vector::Zero(train.item_count);
  for (const Interaction& it : train.interactions) counts[it.item] += 1.0;
  DenseMatrix scores(train.user_count, train.item_count);
  scores.rowwise() = counts.transpose();
  return scores;
}

RunReport run_baseline_on_log(const InteractionLog& log, const RunConfig& cfg) {
  cfg.validate();
  const auto t0 = Clock::now();
  RunReport report;
  report.config_echo = describe(cfg);
  report.graph_dim = log.user_count + log.item_count;
  StageRunner stage(report.stage_timings);

  DatasetSplit folds = stage("split", [&] {
    return split(log, cfg.ratios, cfg.seed, cfg.strategy);
  });

  stage("baseline-eval", [&] {
    Vector counts = Vector::Zero(log.item_count);
    for (const Interaction& it : folds.train.interactions) counts[it.item] += 1.0;
    BlockScorer scorer = [&counts](int /*first*/, int rows, DenseMatrix& out) {
      out.resize(rows, counts.size());
      out.rowwise() = counts.transpose();
    };
    const auto seen = items_per_user(folds.train);
    const auto relevant = items_per_user(eval_fold_of(folds, cfg.eval_fold));
    report.metrics = evaluate_streaming(scorer, log.user_count, log.item_count, seen, relevant,
                                        cfg.ks, cfg.threads, cfg.eval_block_users,
                                        &report.warnings);
  });

  report.total_seconds = seconds_since(t0);
  return report;
}

RunReport run_baseline(const RunConfig& cfg) {
  InteractionLog log = load_interactions(cfg.data_path, cfg.format);
  return run_baseline_on_log(log, cfg);
}

namespace {

void append_csv_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

std::string sanitize_csv_field(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n') c = ';';
  }
  return s;
}

}  // namespace

std::string sweep_on_log(const InteractionLog& log, const RunConfig& cfg,
                         const SweepGrid& grid) {
  cfg.validate();
  auto sorted_unique = [](auto values, auto fallback) {
    if (values.empty()) values.push_back(fallback);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    return values;
  };
  const std::vector<double> centers = sorted_unique(grid.centers, cfg.bandpass.center);
  const std::vector<double> widths = sorted_unique(grid.widths, cfg.bandpass.width);
  const std::vector<double> phis = sorted_unique(grid.phis, cfg.fusion_phi);
  const std::vector<int> ranks = sorted_unique(grid.ranks, cfg.eigen_count);

  std::vector<StageTiming> timings;
  StageRunner stage(timings);
  std::vector<std::string> graph_warnings;
  PreparedGraph g = prepare_graph(log, cfg, stage, graph_warnings);
  const auto seen = items_per_user(g.folds.train);
  const auto relevant = items_per_user(eval_fold_of(g.folds, cfg.eval_fold));
  const DegreeVectors degrees = degree_vectors(g.interactions);

  // One eigensolve and one projection basis per distinct rank.
  struct RankState {
    EigenSystem system;
    FilterBasis basis;
    std::string error;
  };
  std::vector<RankState> states(ranks.size());
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    try {
      EigenOptions opts;
      opts.tol = cfg.eigen_tol;
      opts.max_iter = cfg.eigen_max_iter;
      opts.seed = cfg.seed;
      std::vector<std::string> warnings;
      states[i].system =
          eigh_with_cache(g.laplacian.matrix, ranks[i], opts, cfg.cache_dir, &warnings);
      states[i].basis = build_filter_basis(g.interactions, degrees, states[i].system);
    } catch (const std::exception& e) {
      states[i].error = e.what();
    }
  }

  std::string csv = "center,width,phi,r,metric,k,mean,se,users,error\n";
  auto point_prefix = [&](double c, double w, double phi, int r) {
    std::string line;
    append_csv_double(line, c);
    line += ',';
    append_csv_double(line, w);
    line += ',';
    append_csv_double(line, phi);
    line += ',';
    line += std::to_string(r);
    line += ',';
    return line;
  };

  for (double c : centers) {
    for (double w : widths) {
      for (double phi : phis) {
        for (std::size_t ri = 0; ri < ranks.size(); ++ri) {
          const std::string prefix = point_prefix(c, w, phi, ranks[ri]);
          try {
            if (!states[ri].error.empty()) throw std::runtime_error(states[ri].error);
            RunConfig point = cfg;
            point.bandpass = {c, w};
            point.fusion_phi = phi;
            point.eigen_count = ranks[ri];
            point.validate();
            Vector kernel;
            if (point.ablation != AblationMode::kNoBandpass) {
              kernel = gaussian_kernel(states[ri].system.eigenvalues, point.bandpass);
            }
            BlockScorer scorer =
                make_scorer(states[ri].basis, kernel, point.ablation, point.fusion_phi);
            MetricTable table =
                evaluate_streaming(scorer, log.user_count, log.item_count, seen, relevant,
                                   point.ks, point.threads, point.eval_block_users, nullptr);
            for (const auto& row : table.rows) {
              csv += prefix + row.metric + ',' + std::to_string(row.k) + ',';
              append_csv_double(csv, row.mean);
              csv += ',';
              append_csv_double(csv, row.se);
              csv += ',' + std::to_string(row.users) + ",\n";
            }
          } catch (const std::exception& e) {
            csv += prefix + ",,,,," + sanitize_csv_field(e.what()) + '\n';
          }
        }
      }
    }
  }
  return csv;
}

std::string sweep(const RunConfig& cfg, const SweepGrid& grid) {
  InteractionLog log = load_interactions(cfg.data_path, cfg.format);
  return sweep_on_log(log, cfg, grid);
}

std::string report_text(const RunReport& report) {
  std::ostringstream out;
  out.precision(6);
  out << "== config ==\n" << report.config_echo;
  out << "== graph ==\n"
      << "nodes = " << report.graph_dim
      << ", transition spectral radius = " << report.spectral_radius << '\n';
  if (!report.warnings.empty()) {
    out << "== warnings ==\n";
    for (const auto& w : report.warnings) out << "  " << w << '\n';
  }
  out << "== timings ==\n";
  for (const auto& t : report.stage_timings) {
    out << "  " << t.stage << ": " << t.seconds << " s\n";
  }
  out << "  total: " << report.total_seconds << " s\n";
  out << "== metrics ==\n" << to_csv(report.metrics);
  return out.str();
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open output file: " + tmp);
    out << content;
    if (!out) throw std::runtime_error("failed writing output file: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("failed to move " + tmp + " into place: " + ec.message());
}

}  // namespace specrec
