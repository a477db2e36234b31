// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>

#include <json.hpp>

namespace sblab {

/// Result of a grid certification: the minimum certified revenue bound,
/// where it occurs, and whether it clears the target.
struct CertReport {
    std::string name;
    double alpha = 0.0;
    double target = 0.0;
    double min_bound = 0.0;
    bool pass = false;
    bool certified = false;
    std::size_t cells = 0;
    double seconds = 0.0;
    nlohmann::json argmin = nlohmann::json::object();
    /// Module-specific fields (branch minima, coverage, flags).
    nlohmann::json details = nlohmann::json::object();

    double margin() const { return min_bound - target; }
    nlohmann::json to_json() const;
};

}  // namespace sblab
