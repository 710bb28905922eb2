#pragma once

#include <filesystem>
#include <string>

#include "based/features.hpp"

namespace based {

/// Reads feature parameters from a JSON object whose keys are FeatureParams
/// field names; missing keys keep their defaults. Unknown keys and wrong
/// types throw ConfigError, invalid values ParamError.
FeatureParams params_from_json(const std::string& text);
FeatureParams load_params(const std::filesystem::path& path);

/// Every field, defaults included.
std::string to_json(const FeatureParams& params);

}  // namespace based
