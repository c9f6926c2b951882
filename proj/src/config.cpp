#include "specrec/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace specrec {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

struct KeyValue {
  std::string key;
  std::string value;
  std::size_t line;
};

std::vector<KeyValue> parse_pairs(const std::string& text, const std::string& source) {
  std::vector<KeyValue> pairs;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(source + ":" + std::to_string(line_no) +
                               ": expected 'key = value'");
    }
    pairs.push_back({trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no});
  }
  return pairs;
}

[[noreturn]] void bad_value(const KeyValue& kv, const std::string& source) {
  throw std::runtime_error(source + ":" + std::to_string(kv.line) + ": bad value '" + kv.value +
                           "' for key '" + kv.key + "'");
}

double to_double(const KeyValue& kv, const std::string& source) {
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(kv.value.c_str(), &end);
  if (end == kv.value.c_str() || *end != '\0' || errno == ERANGE) bad_value(kv, source);
  return v;
}

long long to_int(const KeyValue& kv, const std::string& source) {
  errno = 0;
  char* end = nullptr;
  long long v = std::strtoll(kv.value.c_str(), &end, 10);
  if (end == kv.value.c_str() || *end != '\0' || errno == ERANGE) bad_value(kv, source);
  return v;
}

std::uint64_t to_uint64(const KeyValue& kv, const std::string& source) {
  errno = 0;
  char* end = nullptr;
  unsigned long long v = std::strtoull(kv.value.c_str(), &end, 10);
  if (end == kv.value.c_str() || *end != '\0' || errno == ERANGE) bad_value(kv, source);
  return v;
}

char to_delimiter(const KeyValue& kv, const std::string& source) {
  if (kv.value == "tab") return '\t';
  if (kv.value == "comma") return ',';
  if (kv.value == "space") return ' ';
  if (kv.value == "pipe") return '|';
  if (kv.value == "semicolon") return ';';
  if (kv.value.size() == 1) return kv.value[0];
  bad_value(kv, source);
}

template <typename T, typename Fn>
std::vector<T> to_list(const KeyValue& kv, const std::string& source, Fn convert) {
  std::vector<T> out;
  std::istringstream in(kv.value);
  std::string part;
  while (std::getline(in, part, ',')) {
    KeyValue sub{kv.key, trim(part), kv.line};
    if (sub.value.empty()) bad_value(kv, source);
    out.push_back(convert(sub, source));
  }
  if (out.empty()) bad_value(kv, source);
  return out;
}

}  // namespace

const char* to_string(AblationMode mode) {
  switch (mode) {
    case AblationMode::kFull: return "full";
    case AblationMode::kNoBandpass: return "no-bandpass";
    case AblationMode::kNoLowpass: return "no-lowpass";
    case AblationMode::kNoSequence: return "no-seq";
  }
  return "?";
}

const char* to_string(EvalFold fold) {
  return fold == EvalFold::kTest ? "test" : "validation";
}

const char* to_string(SplitStrategy strategy) {
  return strategy == SplitStrategy::kRandomPerUser ? "random" : "temporal";
}

AblationMode ablation_from_string(const std::string& name) {
  if (name == "full") return AblationMode::kFull;
  if (name == "no-bandpass") return AblationMode::kNoBandpass;
  if (name == "no-lowpass") return AblationMode::kNoLowpass;
  if (name == "no-seq") return AblationMode::kNoSequence;
  throw std::runtime_error("unknown ablation mode '" + name +
                           "' (expected full|no-bandpass|no-lowpass|no-seq)");
}

void RunConfig::validate() const {
  if (eigen_count < 1) throw std::invalid_argument("eigen.count must be >= 1");
  if (eigen_tol <= 0) throw std::invalid_argument("eigen.tol must be positive");
  if (!(fusion_phi >= 0.0 && fusion_phi <= 1.0)) {
    throw std::invalid_argument("fusion.phi must be in [0, 1]");
  }
  if (!(bandpass.center >= 0.0 && bandpass.center <= 1.0)) {
    throw std::invalid_argument("filter.center must be in [0, 1]");
  }
  if (!(bandpass.width > 0.0)) throw std::invalid_argument("filter.width must be positive");
  if (!(diffusion.alpha > 0.0 && diffusion.alpha < 1.0)) {
    throw std::invalid_argument("diffusion.alpha must be in (0, 1)");
  }
  if (diffusion.depth < 1) throw std::invalid_argument("diffusion.depth must be >= 1");
  if (ks.empty()) throw std::invalid_argument("metrics.ks must be non-empty");
  for (int k : ks) {
    if (k < 1) throw std::invalid_argument("metrics.ks entries must be >= 1");
  }
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  if (eval_block_users < 1) throw std::invalid_argument("eval.block_users must be >= 1");
}

RunConfig parse_run_config(const std::string& text, const std::string& source) {
  RunConfig cfg;
  for (const KeyValue& kv : parse_pairs(text, source)) {
    if (kv.key == "data.path") {
      cfg.data_path = kv.value;
    } else if (kv.key == "data.delimiter") {
      cfg.format.delimiter = to_delimiter(kv, source);
    } else if (kv.key == "data.user_col") {
      cfg.format.user_column = static_cast<int>(to_int(kv, source));
    } else if (kv.key == "data.item_col") {
      cfg.format.item_column = static_cast<int>(to_int(kv, source));
    } else if (kv.key == "data.time_col") {
      cfg.format.time_column = static_cast<int>(to_int(kv, source));
    } else if (kv.key == "data.skip_header") {
      cfg.format.skip_header_lines = static_cast<int>(to_int(kv, source));
    } else if (kv.key == "split.train") {
      cfg.ratios.train = to_double(kv, source);
    } else if (kv.key == "split.val") {
      cfg.ratios.validation = to_double(kv, source);
    } else if (kv.key == "split.test") {
      cfg.ratios.test = to_double(kv, source);
    } else if (kv.key == "split.seed") {
      cfg.seed = to_uint64(kv, source);
    } else if (kv.key == "split.strategy") {
      if (kv.value == "random") {
        cfg.strategy = SplitStrategy::kRandomPerUser;
      } else if (kv.value == "temporal") {
        cfg.strategy = SplitStrategy::kTemporalPerUser;
      } else {
        bad_value(kv, source);
      }
    } else if (kv.key == "diffusion.alpha") {
      cfg.diffusion.alpha = to_double(kv, source);
    } else if (kv.key == "diffusion.depth") {
      cfg.diffusion.depth = static_cast<int>(to_int(kv, source));
    } else if (kv.key == "diffusion.nnz_budget") {
      cfg.diffusion.nnz_budget = to_int(kv, source);
    } else if (kv.key == "eigen.count") {
      cfg.eigen_count = static_cast<int>(to_int(kv, source));
    } else if (kv.key == "eigen.tol") {
      cfg.eigen_tol = to_double(kv, source);
    } else if (kv.key == "eigen.max_iter") {
      cfg.eigen_max_iter = static_cast<int>(to_int(kv, source));
    } else if (kv.key == "filter.center") {
      cfg.bandpass.center = to_double(kv, source);
    } else if (kv.key == "filter.width") {
      cfg.bandpass.width = to_double(kv, source);
    } else if (kv.key == "fusion.phi") {
      cfg.fusion_phi = to_double(kv, source);
    } else if (kv.key == "ablation") {
      cfg.ablation = ablation_from_string(kv.value);
    } else if (kv.key == "metrics.ks") {
      cfg.ks = to_list<int>(kv, source, [](const KeyValue& s, const std::string& src) {
        return static_cast<int>(to_int(s, src));
      });
    } else if (kv.key == "cache.dir") {
      cfg.cache_dir = kv.value;
    } else if (kv.key == "threads") {
      cfg.threads = static_cast<int>(to_int(kv, source));
    } else if (kv.key == "eval.block_users") {
      cfg.eval_block_users = static_cast<int>(to_int(kv, source));
    } else if (kv.key == "eval.fold") {
      if (kv.value == "test") {
        cfg.eval_fold = EvalFold::kTest;
      } else if (kv.value == "validation") {
        cfg.eval_fold = EvalFold::kValidation;
      } else {
        bad_value(kv, source);
      }
    } else if (kv.key == "debug.split_manifest") {
      cfg.split_manifest_path = kv.value;
    } else if (kv.key == "debug.item_graph_dump") {
      cfg.item_graph_dump_path = kv.value;
    } else {
      throw std::runtime_error(source + ":" + std::to_string(kv.line) + ": unknown key '" +
                               kv.key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path);
}

std::string describe(const RunConfig& config) {
  std::ostringstream out;
  out.precision(std::numeric_limits<double>::max_digits10);
  out << "data.path = " << config.data_path << '\n'
      << "split = " << config.ratios.train << ':' << config.ratios.validation << ':'
      << config.ratios.test << " seed=" << config.seed << " strategy="
      << to_string(config.strategy) << '\n'
      << "diffusion alpha=" << config.diffusion.alpha << " depth=" << config.diffusion.depth
      << '\n'
      << "eigen r=" << config.eigen_count << " tol=" << config.eigen_tol << '\n'
      << "filter center=" << config.bandpass.center << " width=" << config.bandpass.width
      << " phi=" << config.fusion_phi << '\n'
      << "ablation = " << to_string(config.ablation) << '\n'
      << "eval fold=" << to_string(config.eval_fold) << " ks=";
  for (std::size_t i = 0; i < config.ks.size(); ++i) {
    out << (i ? "," : "") << config.ks[i];
  }
  out << " threads=" << config.threads << '\n';
  return out.str();
}

SweepGrid parse_sweep_grid(const std::string& text, const std::string& source) {
  SweepGrid grid;
  for (const KeyValue& kv : parse_pairs(text, source)) {
    if (kv.key == "filter.center") {
      grid.centers = to_list<double>(kv, source, to_double);
    } else if (kv.key == "filter.width") {
      grid.widths = to_list<double>(kv, source, to_double);
    } else if (kv.key == "fusion.phi") {
      grid.phis = to_list<double>(kv, source, to_double);
    } else if (kv.key == "eigen.count") {
      grid.ranks = to_list<int>(kv, source, [](const KeyValue& s, const std::string& src) {
        return static_cast<int>(to_int(s, src));
      });
    } else {
      throw std::runtime_error(source + ":" + std::to_string(kv.line) + ": unknown grid key '" +
                               kv.key + "' (expected filter.center, filter.width, fusion.phi, "
                               "eigen.count)");
    }
  }
  return grid;
}

SweepGrid load_sweep_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open grid file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_sweep_grid(buf.str(), path);
}

}  // namespace specrec
