// SPDX-License-Identifier: Apache-2.0
#include "sblab/spec_io.hpp"

#include <fstream>
#include <initializer_list>
#include <set>

namespace sblab {

namespace {

using nlohmann::json;

void expect_fields(const json& j, std::initializer_list<const char*> names) {
    std::set<std::string> allowed{"family"};
    for (const char* n : names) allowed.insert(n);
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key)) throw SpecError("unknown field '" + key + "'");
    for (const char* n : names)
        if (!j.contains(n)) throw SpecError(std::string("missing field '") + n + "'");
}

double num(const json& j, const char* name) {
    const json& v = j.at(name);
    if (!v.is_number()) throw SpecError(std::string("field '") + name + "' must be a number");
    return v.get<double>();
}

}  // namespace

DistributionSpec spec_from_json(const json& j) {
    if (!j.is_object()) throw SpecError("spec must be a JSON object");
    if (!j.contains("family") || !j["family"].is_string())
        throw SpecError("missing string field 'family'");
    const std::string fam = j["family"].get<std::string>();
    if (fam == "trunc_exp") {
        expect_fields(j, {"T"});
        return TruncExp{num(j, "T")};
    }
    if (fam == "shifted_pareto") {
        expect_fields(j, {"c", "a"});
        return ShiftedPareto{num(j, "c"), num(j, "a")};
    }
    if (fam == "uniform") {
        expect_fields(j, {"l", "h"});
        return Uniform{num(j, "l"), num(j, "h")};
    }
    if (fam == "r0_line") {
        expect_fields(j, {"r0", "q_m"});
        return R0Line{num(j, "r0"), num(j, "q_m")};
    }
    if (fam == "pentagon") {
        expect_fields(j, {"q_m", "q_k", "r_k"});
        return Pentagon{num(j, "q_m"), num(j, "q_k"), num(j, "r_k")};
    }
    if (fam == "triangle") {
        expect_fields(j, {"q_m"});
        return Triangle{num(j, "q_m")};
    }
    if (fam == "piecewise_linear_concave") {
        expect_fields(j, {"points"});
        const json& pts = j["points"];
        if (!pts.is_array()) throw SpecError("'points' must be an array of [q, R] pairs");
        PiecewiseLinearConcave s;
        for (const json& p : pts) {
            if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
                throw SpecError("each point must be [q, R]");
            s.points.emplace_back(p[0].get<double>(), p[1].get<double>());
        }
        return s;
    }
    if (fam == "shifted_exp") {
        expect_fields(j, {"a", "lambda"});
        return ShiftedExp{num(j, "a"), num(j, "lambda")};
    }
    throw SpecError("unknown family '" + fam + "'");
}

json spec_to_json(const DistributionSpec& spec) {
    struct Visitor {
        json operator()(const TruncExp& s) const { return {{"family", "trunc_exp"}, {"T", s.T}}; }
        json operator()(const ShiftedPareto& s) const {
            return {{"family", "shifted_pareto"}, {"c", s.c}, {"a", s.a}};
        }
        json operator()(const Uniform& s) const {
            return {{"family", "uniform"}, {"l", s.l}, {"h", s.h}};
        }
        json operator()(const R0Line& s) const {
            return {{"family", "r0_line"}, {"r0", s.r0}, {"q_m", s.q_m}};
        }
        json operator()(const Pentagon& s) const {
            return {{"family", "pentagon"}, {"q_m", s.q_m}, {"q_k", s.q_k}, {"r_k", s.r_k}};
        }
        json operator()(const Triangle& s) const {
            return {{"family", "triangle"}, {"q_m", s.q_m}};
        }
        json operator()(const PiecewiseLinearConcave& s) const {
            json pts = json::array();
            for (const auto& [q, r] : s.points) pts.push_back({q, r});
            return {{"family", "piecewise_linear_concave"}, {"points", pts}};
        }
        json operator()(const ShiftedExp& s) const {
            return {{"family", "shifted_exp"}, {"a", s.a}, {"lambda", s.lambda}};
        }
    };
    return std::visit(Visitor{}, spec);
}

DistributionSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecError("cannot open spec file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw SpecError("invalid JSON in '" + path + "': " + e.what());
    }
    return spec_from_json(j);
}

}  // namespace sblab
