// SPDX-License-Identifier: Apache-2.0
// sblab: evaluate the sample-bid mechanism, run certifications, print bounds.
//
// Exit codes: 0 ok, 1 certification (or oracle) failure, 2 input error.
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sblab/cert_mhr.hpp"
#include "sblab/cert_regular.hpp"
#include "sblab/curves.hpp"
#include "sblab/lower_bound.hpp"
#include "sblab/pricing.hpp"
#include "sblab/sample_bid.hpp"
#include "sblab/spec_io.hpp"

using nlohmann::json;
using namespace sblab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitInput = 2;

struct Options {
    std::string spec_path;
    double alpha = NAN;
    std::string grid = "default";
    bool certified = false;
    std::string format;
    std::uint64_t seed = 1;
    // best-response
    double v_max = NAN;
    int points = 41;
    // lower-bound
    double l = 1.0, h = 2.0;
    // gap-report
    std::string cls = "all";
    std::string constants_path;
    // oracle-compare
    int samples = 100;
    int n_bids = 4000;
};

std::string fmt_num(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

void flatten(const json& j, const std::string& prefix, std::ostream& os) {
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, os);
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "." + std::to_string(i), os);
    } else if (j.is_number_float()) {
        os << prefix << "," << fmt_num(j.get<double>()) << "\n";
    } else if (j.is_string()) {
        os << prefix << "," << j.get<std::string>() << "\n";
    } else {
        os << prefix << "," << j.dump() << "\n";
    }
}

void emit(const json& j, const std::string& format) {
    if (format == "csv") {
        std::cout << "key,value\n";
        flatten(j, "", std::cout);
    } else {
        std::cout << j.dump(2) << "\n";
    }
}

double alpha_or(const Options& o, double dflt) {
    const double a = std::isnan(o.alpha) ? dflt : o.alpha;
    if (!(a > 0.0 && a <= 1.0)) throw std::invalid_argument("--alpha must be in (0, 1]");
    return a;
}

RevenueCurve load_curve(const Options& o) {
    if (o.spec_path.empty()) throw std::invalid_argument("--spec is required");
    return build(load_spec(o.spec_path));
}

int cmd_eval(const Options& o) {
    const RevenueCurve c = load_curve(o);
    const MechanismEval e = evaluate(c, alpha_or(o, kRegularAlpha));
    json j{{"family", c.label()},
           {"alpha", e.alpha},
           {"revenue", e.revenue},
           {"opt", e.opt_revenue},
           {"ratio", e.ratio}};
    if (o.format == "csv") {
        std::cout << "family,alpha,revenue,opt,ratio\n"
                  << c.label() << "," << fmt_num(e.alpha) << "," << fmt_num(e.revenue) << ","
                  << fmt_num(e.opt_revenue) << "," << fmt_num(e.ratio) << "\n";
    } else {
        emit(j, o.format);
    }
    return kExitOk;
}

int cmd_best_response(const Options& o) {
    const RevenueCurve c = load_curve(o);
    const double alpha = alpha_or(o, kRegularAlpha);
    double v_max = o.v_max;
    if (std::isnan(v_max)) v_max = std::min(c.top_value(), 4.0 * c.v_m());
    if (!(v_max > 0.0) || o.points < 2) throw std::invalid_argument("need --v-max > 0 and --points >= 2");
    json rows = json::array();
    std::ostringstream csv;
    csv << "v,bid,utility,payment,kind\n";
    for (int i = 0; i < o.points; ++i) {
        const double v = v_max * i / (o.points - 1);
        const BestResponse br = best_response(v, c, alpha);
        const std::string bid = br.top ? "TOP" : fmt_num(br.bid);
        csv << fmt_num(v) << "," << bid << "," << fmt_num(br.utility) << "," << fmt_num(br.payment)
            << "," << to_string(br.kind) << "\n";
        rows.push_back({{"v", v},
                        {"bid", br.top ? json("TOP") : json(br.bid)},
                        {"utility", br.utility},
                        {"payment", br.payment},
                        {"kind", to_string(br.kind)}});
    }
    if (o.format == "json") std::cout << json{{"family", c.label()}, {"alpha", alpha}, {"rows", rows}}.dump(2) << "\n";
    else std::cout << csv.str();
    return kExitOk;
}

int cmd_verify(const Options& o, const std::string& which) {
    CertReport rep;
    if (which == "mhr") {
        MhrGridConfig g = mhr_grid(o.grid);
        g.certified = o.certified;
        rep = verify_mhr(alpha_or(o, kMhrAlpha), g);
    } else if (which == "regular") {
        RegularGridConfig g = regular_grid(o.grid);
        g.certified = o.certified;
        const double a = alpha_or(o, kRegularAlpha);
        if (a >= 1.0) throw std::invalid_argument("verify regular needs alpha < 1");
        rep = verify_regular(a, g);
    } else {
        throw std::invalid_argument("verify target must be mhr or regular");
    }
    json j = rep.to_json();
    j["grid"] = o.grid;
    emit(j, o.format);
    if (!rep.pass) std::cerr << "certification failed; argmin " << rep.argmin.dump() << "\n";
    return rep.pass ? kExitOk : kExitFail;
}

int cmd_lower_bound(const Options& o) {
    const LbInstance inst{o.l, o.h};
    inst.check();
    const double beta = solve_beta(inst);
    emit({{"l", inst.l},
          {"h", inst.h},
          {"beta", beta},
          {"gap_at_1", feasibility_gap(1.0, inst)},
          {"gap_at_2", feasibility_gap(2.0, inst)},
          {"reference_instance", inst.reference_instance()}},
         o.format);
    return kExitOk;
}

GapConstants constants_for(const std::string& cls, const json* overrides) {
    GapConstants c = default_gap_constants(cls);
    if (overrides && overrides->contains(cls)) {
        const json& k = overrides->at(cls);
        for (const auto& [key, val] : k.items()) {
            if (key == "truthful_lb") c.truthful_lb = val.get<double>();
            else if (key == "truthful_ub") c.truthful_ub = val.get<double>();
            else if (key == "all_lb") c.all_lb = val.get<double>();
            else if (key == "all_ub") c.all_ub = val.get<double>();
            else throw std::invalid_argument("unknown gap constant: " + key);
        }
    }
    return c;
}

int cmd_gap_report(const Options& o) {
    json overrides;
    if (!o.constants_path.empty()) {
        std::ifstream in(o.constants_path);
        if (!in) throw std::invalid_argument("cannot read constants file: " + o.constants_path);
        try {
            in >> overrides;
        } catch (const json::exception& e) {
            throw std::invalid_argument(std::string("constants file: ") + e.what());
        }
    }
    std::vector<std::string> classes;
    if (o.cls == "all") classes = {"regular", "mhr"};
    else classes = {o.cls};
    json out = json::object();
    for (const std::string& cls : classes) {
        const GapConstants c = constants_for(cls, overrides.is_null() ? nullptr : &overrides);
        const GapInterval g = gap_report(c);
        out[cls] = {{"gap", {g.lo, g.hi}},
                    {"truthful", {c.truthful_lb, c.truthful_ub}},
                    {"all", {c.all_lb, c.all_ub}}};
    }
    emit(out, o.format);
    return kExitOk;
}

int cmd_oracle_compare(const Options& o) {
    const RevenueCurve c = load_curve(o);
    const double alpha = alpha_or(o, kRegularAlpha);
    if (o.samples < 1) throw std::invalid_argument("--samples must be >= 1");
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> u(1e-6, 1.0);
    double worst_gap = -kInf, worst_v = 0.0;
    for (int i = 0; i < o.samples; ++i) {
        const double v = c.value(u(rng));
        const BestResponse exact = best_response(v, c, alpha);
        const BestResponse brute = best_response_brute(v, c, alpha, o.n_bids);
        const double gap = brute.utility - exact.utility;
        if (gap > worst_gap) {
            worst_gap = gap;
            worst_v = v;
        }
    }
    const bool ok = worst_gap <= 1e-6;
    emit({{"family", c.label()},
          {"alpha", alpha},
          {"samples", o.samples},
          {"seed", o.seed},
          {"n_bids", o.n_bids},
          {"max_brute_advantage", worst_gap},
          {"worst_value", worst_v},
          {"myerson_residual", myerson_identity_check(c, alpha)},
          {"ok", ok}},
         o.format);
    return ok ? kExitOk : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sample-bid mechanism toolkit"};
    app.require_subcommand(1);
    Options o;
    app.add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--seed", o.seed, "seed for randomized commands");
    app.fallthrough();

    auto add_spec = [&](CLI::App* c) { c->add_option("--spec", o.spec_path, "distribution spec JSON")->required(); };
    auto add_alpha = [&](CLI::App* c) { c->add_option("--alpha", o.alpha, "payment multiplier"); };

    auto* eval = app.add_subcommand("eval", "revenue, optimum and ratio for a spec");
    add_spec(eval);
    add_alpha(eval);

    auto* br = app.add_subcommand("best-response", "table of optimal bids over a value grid");
    add_spec(br);
    add_alpha(br);
    br->add_option("--v-max", o.v_max, "largest value in the table");
    br->add_option("--points", o.points, "number of values");

    auto* verify = app.add_subcommand("verify", "grid certification");
    std::string which;
    verify->add_option("which", which, "mhr or regular")->required()->check(CLI::IsMember({"mhr", "regular"}));
    add_alpha(verify);
    verify->add_option("--grid", o.grid, "coarse, default or fine")
        ->check(CLI::IsMember({"coarse", "default", "fine"}));
    verify->add_flag("--certified", o.certified, "box bounds instead of node evaluation");

    auto* lb = app.add_subcommand("lower-bound", "ratio lower bound for all mechanisms");
    lb->set_help_flag("--help", "print this help");  // frees -h for --h
    lb->add_option("--l", o.l, "low support point");
    lb->add_option("--h", o.h, "high support point");

    auto* gap = app.add_subcommand("gap-report", "revelation gap intervals");
    gap->add_option("--class", o.cls, "regular, mhr or all")->check(CLI::IsMember({"regular", "mhr", "all"}));
    gap->add_option("--constants", o.constants_path, "JSON overrides {class: {truthful_lb, ...}}");

    auto* oc = app.add_subcommand("oracle-compare", "exact solver against the brute-force bid grid");
    add_spec(oc);
    add_alpha(oc);
    oc->add_option("--samples", o.samples, "random values drawn from the spec");
    oc->add_option("--bids", o.n_bids, "brute-force grid size");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        if (*eval) return cmd_eval(o);
        if (*br) return cmd_best_response(o);
        if (*verify) return cmd_verify(o, which);
        if (*lb) return cmd_lower_bound(o);
        if (*gap) return cmd_gap_report(o);
        if (*oc) return cmd_oracle_compare(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}
