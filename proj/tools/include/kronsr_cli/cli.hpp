#pragma once

// The `kronsr` command line: INI config files plus flag overrides, bound to
// the experiments module.
//
// Config keys are `section.key`; keys before the first section header belong
// to [run]. Sections:
//   [run]       scenario, algorithms, trials, seed, parallel, out, snr, m, sparsity
//   [solver]    max_em_iters, em_tol, prune_threshold, noise_floor,
//               support_threshold, am_inner_iters
//   [synthetic] N, fixed_rows
//   [channel]   R, T, L, N, P_BS, P_MS, K_I, K_P, irs_amplitude, ser_symbols
// List values are separated by commas or spaces.

#include <kronsr/experiments.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace kronsr::cli {

/// Bad flags, config files or settings; maps to exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Override {
  std::string key;
  std::string file_value;
  std::string flag_value;
};

struct RunConfig {
  SweepSpec spec;
  std::vector<double> snr;
  std::vector<Index> m;
  std::vector<Index> sparsity;
  std::filesystem::path out_dir = "kronsr-out";
  std::optional<std::filesystem::path> config_file;
  /// Effective value of every key, canonical text form.
  std::map<std::string, std::string> settings;
  /// Keys given both in the file and as flags; the flag wins.
  std::vector<Override> overrides;

  /// FNV-1a over the sorted settings except run.out and run.parallel, as 16
  /// hex digits.
  std::string config_hash() const;
};

/// Known keys with their defaults (scenario-dependent defaults shown for
/// the synthetic scenario).
const std::map<std::string, std::string>& default_settings();

/// Parses the arguments of `kronsr run` (without the subcommand itself).
RunConfig parse_config(const std::vector<std::string>& args);

/// Builds a config from explicit file text and flag values; used by
/// parse_config and directly testable.
RunConfig make_config(const std::optional<std::string>& file_text,
                      const std::optional<std::filesystem::path>& file_path,
                      const std::map<std::string, std::string>& flags);

/// Executes the sweep and writes records.csv, summary.json and
/// provenance.json into cfg.out_dir. Returns 0, or 2 if any trial failed.
int run(const RunConfig& cfg, std::ostream& log);

/// Entry point of the executable: `kronsr run|info|export-channel ...`.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kronsr::cli
