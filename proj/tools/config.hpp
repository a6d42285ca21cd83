#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "lossmoe/bounds.hpp"
#include "lossmoe/region.hpp"

namespace lossmoe::cli {

/// Everything a subcommand may read. Optional fields are resolved per
/// command (bounds defaults xi to 0.005 and the variant to relaxed).
struct CliConfig {
  SweepConfig sweep;
  std::optional<double> xi;
  std::optional<Variant> variant;
  std::string output;
  bool cache = true;

  int n = 10;
  int q = 0;
  double eta = 1.0;
  std::optional<double> delta;
  std::optional<double> beta;
  std::optional<Flavor> flavor;
  bool integer_k = false;

  double p_step = 0.05;  ///< mixing-weight step for the strategies table
};

/// Applies a flat JSON object. Unknown keys and wrong types raise
/// ParameterError naming the key.
void apply_json(CliConfig& config, const nlohmann::json& doc);
void load_config_file(CliConfig& config, const std::string& path);

/// Cache directory used when caching is on: "<output dir>/.lossmoe-cache",
/// or "./.lossmoe-cache" without an output file.
std::string default_cache_dir(const std::string& output);

}  // namespace lossmoe::cli
