#ifndef RINGLOC_LOCALIZATION_CONFIG_HPP
#define RINGLOC_LOCALIZATION_CONFIG_HPP

#include <cstddef>
#include <string>

#include "json.hpp"

#include "ringloc/features/features.hpp"
#include "ringloc/scan_io/preprocess.hpp"

namespace ringloc {

struct IcpConfig {
  bool enabled = true;
  double max_corr_dist = 1.5;
  int max_iters = 100;
  double eps = 1e-6;
  /// Refinements whose inlier fraction falls below this are reported as not accepted.
  double min_fitness = 0.5;

  bool operator==(const IcpConfig&) const = default;
};

struct PipelineConfig {
  GridConfig grid;
  FeatureOptions features;
  PreprocessConfig preprocess;
  std::size_t top_k = 1;
  /// Best ring score below this means no_match.
  double accept_threshold = 0.994;
  IcpConfig icp;
  bool subpixel = true;

  bool operator==(const PipelineConfig&) const = default;

  /// Throws ConfigError for out-of-range values.
  void validate() const;
};

/// Full representation; every key is emitted.
nlohmann::json config_to_json(const PipelineConfig& cfg);

/// Keys absent from `j` keep their defaults; unknown keys and wrongly typed
/// values throw ConfigError. The result is validated.
PipelineConfig config_from_json(const nlohmann::json& j);
PipelineConfig load_config(const std::string& path);

/// FNV-1a over the canonical dump of the settings that shape stored tensors
/// (grid, features, entropy_normalized, k_neighbors, preprocess), as 16 hex
/// digits. Query-time knobs such as top_k or icp do not affect it.
std::string representation_hash(const PipelineConfig& cfg);

}  // namespace ringloc

#endif  // RINGLOC_LOCALIZATION_CONFIG_HPP
