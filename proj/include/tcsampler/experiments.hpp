#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tcsampler/errors.hpp"
#include "tcsampler/jumpchain.hpp"
#include "tcsampler/target.hpp"

namespace tcs {

using Json = nlohmann::json;

/// Raised for configurations that fail validation (CLI exit code 2).
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

inline constexpr const char* kToolVersion = "1.0.0";

/// Names accepted in the "experiment" key.
const std::vector<std::string>& experiment_names();

/// Full default configuration of an experiment.
Json default_config(const std::string& experiment);

/// Merges `raw` over the defaults of raw["experiment"] (objects merge key by
/// key) and validates the result. Accepts a manifest and uses its "config".
Json resolve_config(const Json& raw);

/// Target and speed described by config objects.
TargetDensity target_from_config(const Json& target);
SpeedFunction speed_from_config(const Json& speed, const TargetDensity& target);

struct Artifacts {
  /// File name and contents, in emission order.
  std::vector<std::pair<std::string, std::string>> files;
  Json summary = Json::object();

  void add(std::string name, std::string contents);
};

/// Runs a resolved configuration. Files are appended to `out` as they are
/// produced, so a failing run leaves its partial outputs behind.
void run_experiment(const Json& config, Artifacts& out);

/// Manifest with tool version, resolved config, file digests and summary.
Json make_manifest(const Json& config, const Artifacts& artifacts, const std::string& status,
                   const std::string& error = {});

/// Writes every file plus manifest.json into `dir` (created if missing).
void write_artifacts(const std::filesystem::path& dir, const Artifacts& artifacts,
                     const Json& manifest);

/// FNV-1a 64-bit digest as 16 hex digits.
std::string fnv1a_hex(const std::string& data);

/// Random connected chain on n states: a ring plus n/2 random chords,
/// weights in [0.1, 10], speeds in [1, 10].
DiscreteChainSpec random_chain_spec(RngStream& rng, std::size_t n, BalanceFunction g);

}  // namespace tcs
