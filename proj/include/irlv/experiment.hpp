#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "irlv/config.hpp"
#include "irlv/evaluation.hpp"

namespace irlv {

struct RunOptions {
  std::filesystem::path out_dir;  // empty: use the config's output directory
  std::uint64_t seed_offset = 0;  // shifts every realization index
  std::size_t jobs = 1;
};

struct EmittedFile {
  std::string path;  // relative to the output directory
  std::string sha256;
};

/// Written as manifest.json after every other output of a run.
struct RunManifest {
  std::string command;
  std::string config_hash;
  Seeds seeds;
  std::uint64_t seed_offset = 0;
  std::vector<EmittedFile> files;
  nlohmann::json summary;

  nlohmann::json to_json() const;
};

/// Seed for realization k of a stream: derive_seed(base, k + offset).
std::uint64_t realization_seed(std::uint64_t base, std::size_t k, std::uint64_t offset);

RunManifest cmd_roc(const RunConfig& config, const RunOptions& options);
RunManifest cmd_np_compare(const RunConfig& config, const RunOptions& options);
RunManifest cmd_plan(const RunConfig& config, const RunOptions& options);
RunManifest cmd_field(const RunConfig& config, const RunOptions& options);

/// NN and NP test evaluated on one set of held-out samples of the circular
/// scenario, without shadowing.
struct NpComparison {
  std::vector<double> nn_scores;
  std::vector<double> np_scores;      // -llr, larger means farther outside
  std::vector<double> np_posteriors;  // p(H1 | a) with the training class balance
  std::vector<int> labels;
  RocCurve nn_roc;
  RocCurve np_roc;
  double ce_bits = 0.0;
  double posterior_mae = 0.0;
};

NpComparison compare_with_np(const RunConfig& config, int hidden_neurons, std::uint64_t seed_offset);

inline constexpr int kExitOk = 0;
inline constexpr int kExitOther = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

/// Process exit status for an exception escaping a subcommand.
int exit_code_for(std::exception_ptr error);

/// Writes `text` to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace irlv
