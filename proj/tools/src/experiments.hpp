// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "config_reader.hpp"
#include "io.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pld::cli {

inline constexpr int kSchemaVersion = 1;

/// Subcommand names, in help order.
const std::vector<std::string>& experiment_kinds();

struct RunOptions {
  /// Replaces the config's master_seed when set.
  std::optional<std::uint64_t> seed;
  /// Worker threads; 0 uses the hardware concurrency. Never affects results.
  unsigned threads = 0;
  /// Replaces the config's output_dir when set.
  std::optional<std::filesystem::path> out_dir;
};

struct ExperimentOutput {
  std::string kind;
  /// Fully resolved config (defaults and seed filled in); re-running it
  /// reproduces the same files.
  Json resolved_config;
  /// Data files by name, excluding the manifest.
  FileSet files;
  std::vector<std::string> warnings;

  /// manifest.json contents: tool version, resolved config and a digest per file.
  std::string manifest() const;
};

/// Validates `config` against the schema of `kind` and runs it in memory.
/// Throws ConfigError for schema problems (before any computation) and
/// std::runtime_error with experiment context for numerical failures.
ExperimentOutput run_experiment(std::string_view kind, const Json& config,
                                const RunOptions& options);

/// Output directory from --out or the config's "output_dir".
std::filesystem::path resolve_output_dir(const Json& config, const RunOptions& options);

/// Creates `dir` and writes every file plus manifest.json atomically.
void write_outputs(const std::filesystem::path& dir, const ExperimentOutput& output);

}  // namespace pld::cli
