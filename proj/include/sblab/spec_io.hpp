// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include <json.hpp>

#include "sblab/curves.hpp"

namespace sblab {

/// Parses `{"family": "...", <params>}`. Unknown or missing fields throw
/// SpecError.
DistributionSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const DistributionSpec& spec);
DistributionSpec load_spec(const std::string& path);

}  // namespace sblab
