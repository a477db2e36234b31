// SPDX-License-Identifier: Apache-2.0
#include "sblab/report.hpp"

namespace sblab {

nlohmann::json CertReport::to_json() const {
    nlohmann::json j;
    j["name"] = name;
    j["alpha"] = alpha;
    j["target"] = target;
    j["min_bound"] = min_bound;
    j["margin"] = margin();
    j["pass"] = pass;
    j["certified"] = certified;
    j["cells"] = cells;
    j["argmin"] = argmin;
    for (const auto& [k, v] : details.items()) j[k] = v;
    return j;
}

}  // namespace sblab
