#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "qvdp/experiments/config.hpp"

namespace qvdp::experiments {

std::vector<std::string_view> preset_names();

/// The preset as a config document in the same format load_config reads.
std::optional<std::string_view> preset_document(std::string_view name);

/// load_config of {"preset": name}. Throws ConfigError for unknown names.
ExperimentConfig preset_config(std::string_view name);

}  // namespace qvdp::experiments
