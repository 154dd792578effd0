#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evseq/model.hpp"

namespace evseq {

/// One declared artifact. `kind` is report | eventbox | quality | state |
/// action_log | panel; `format` is json, md (report) or svg (eventbox).
struct OutputSpec {
  std::string kind;
  std::string format = "json";
  std::string path;
  Json params = Json::object();
};

/// {"ingest": {...}} or {"synthetic": {...}}, then "actions" using the
/// service vocabulary, then "outputs".
struct PipelineConfig {
  std::optional<Json> ingest;
  std::optional<Json> synthetic;
  std::vector<Json> actions;
  std::vector<OutputSpec> outputs;

  /// Throws ConfigError.
  static PipelineConfig from_json(const Json& j);
};

struct PipelineOptions {
  std::filesystem::path config_path;
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;
  bool verbose = false;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// Runs the pipeline and writes every output, or none. Per-action timing
/// goes to `log`. Returns 0, 1 (validation) or 2 (runtime).
int run_pipeline(const PipelineOptions& options, std::ostream& log);

/// Executes a parsed config and returns output path -> content without
/// touching the filesystem. Relative ingest paths resolve against
/// `base_dir`. Throws engine errors.
std::map<std::string, std::string> execute_pipeline(const PipelineConfig& config, const std::filesystem::path& base_dir,
                                                    std::optional<std::uint64_t> seed, std::ostream& log, bool verbose);

/// True for errors that mean the config itself is wrong.
bool is_validation_error(const std::exception& e);

}  // namespace evseq
