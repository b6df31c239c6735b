#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gmrbm/assoc_memory.hpp"
#include "gmrbm/sampler.hpp"
#include "gmrbm/trainer.hpp"

namespace gmrbm::cli {

// Raw `key = value` settings.
using Settings = std::map<std::string, std::string>;

// Parses `key = value` lines; `#` starts a comment. Throws UsageError with
// the line number on malformed lines or duplicate keys.
Settings parse_settings(const std::string& text);
Settings load_settings(const std::filesystem::path& path);

// Every key a RunConfig understands.
const std::vector<std::string>& known_keys();

// Everything a subcommand may need.
struct RunConfig {
  // Model shape; n defaults to the data width.
  std::optional<std::size_t> n;
  std::size_t m = 16;
  std::size_t q = 4;

  TrainConfig train;
  EarlyStopRule early_stop;
  RecallOptions recall;

  // "vectors": plain rows, validated by reconstruction error.
  // "pairs": rows are [stimulus ; response], z-scored, validated by recall.
  std::string task = "vectors";
  std::size_t validation_pairs = 0;

  std::filesystem::path data;
  std::filesystem::path pairs;
  std::filesystem::path model;
  std::filesystem::path out;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  // sample / inspect
  std::size_t samples = 100;
  std::size_t sample_steps = 1000;
  std::size_t diag_steps = 2000;

  // sweep
  std::uint64_t n_w = 50000;
  std::size_t n_v = 100;
  std::vector<std::size_t> q_list = {2, 4};
  std::vector<std::size_t> hidden_list = {8, 16};
  std::vector<std::size_t> sizes = {20};
  std::vector<std::uint64_t> seeds = {1};
  PairStructure structure = PairStructure::kClustered;

  // synth
  std::size_t synth_count = 20;
  std::size_t synth_dim = 10;
};

// Applies settings on top of the defaults. Unknown keys and unparsable
// values throw UsageError naming the key.
RunConfig make_run_config(const Settings& settings);

}  // namespace gmrbm::cli
