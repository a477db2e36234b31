// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sblab/cert_mhr.hpp"
#include "sblab/cert_regular.hpp"
#include "sblab/curves.hpp"
#include "sblab/lower_bound.hpp"
#include "sblab/pricing.hpp"
#include "sblab/sample_bid.hpp"

using nlohmann::json;
using namespace sblab;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string num(double x, int prec = 6) {
    std::ostringstream os;
    os.precision(prec);
    os << std::fixed << x;
    return os.str();
}

/// Runs the CLI and parses its stdout as JSON; exit status goes to `code`.
json run_cli(const std::string& args, int& code) {
    const std::string cmd = std::string("\"") + SBLAB_CLI_PATH + "\" " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) throw std::runtime_error("cannot start " + cmd);
    std::string out;
    char buf[4096];
    while (std::size_t n = fread(buf, 1, sizeof buf, p)) out.append(buf, n);
    const int st = pclose(p);
    code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return json::parse(out);
}

std::string spec(const char* name) { return std::string("--spec \"") + SBLAB_SPEC_DIR + "/" + name + "\""; }

Outcome c1() {
    int code = 0;
    const json j = run_cli("eval " + spec("trunc_exp_0.43.json") + " --alpha 0.824", code);
    const double opt = j["opt"], rev = j["revenue"], ratio = j["ratio"];
    return {code == 0 && std::abs(opt - 0.2797) <= 1e-3 && std::abs(rev - 0.2159) <= 1e-3 && ratio >= 1.295,
            "opt " + num(opt) + " revenue " + num(rev) + " ratio " + num(ratio)};
}

Outcome c2() {
    int code = 0;
    const json j = run_cli("eval " + spec("pareto_example.json") + " --alpha 0.7", code);
    const double rev = j["revenue"], ratio = j["ratio"];
    return {code == 0 && std::abs(rev - 0.614) <= 5e-3 && std::abs(ratio - 1.628) <= 0.01,
            "revenue " + num(rev) + " ratio " + num(ratio)};
}

Outcome c3() {
    const CertReport r = verify_mhr(kMhrAlpha, mhr_grid("default"));
    std::string where = r.argmin.dump();
    return {r.pass && r.seconds < 120.0,
            "min " + num(r.min_bound) + " target 0.7717 margin " + num(r.margin()) + " at " + where +
                " (" + num(r.seconds, 1) + " s)"};
}

CertReport fine_regular;  // shared by criteria 4 and 5

Outcome c4() {
    const auto t0 = std::chrono::steady_clock::now();
    double a_min = kInf;
    for (int i = 0; i <= 1000; ++i) a_min = std::min(a_min, branch_a_bound(0.62 + 0.38 * i / 1000.0));
    const double a_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool a_ok = a_min >= kRegularTarget && std::abs(a_min - 0.546) < 1e-3 && a_secs < 1.0;

    const CertReport coarse = verify_regular(kRegularAlpha, regular_grid("coarse"));
    const bool coarse_ok = coarse.min_bound >= 0.54 && coarse.seconds < 600.0;

    RegularGridConfig g = regular_grid("fine");
    g.certified = true;
    fine_regular = verify_regular(kRegularAlpha, g);
    const bool fine_ok = fine_regular.pass;
    return {a_ok && coarse_ok && fine_ok,
            "branch A min " + num(a_min, 5) + "; coarse min " + num(coarse.min_bound, 5) + " (" +
                num(coarse.seconds, 1) + " s); fine certified min " + num(fine_regular.min_bound, 5) +
                " margin " + num(fine_regular.margin(), 5) + " (" + num(fine_regular.seconds, 1) + " s)"};
}

Outcome c5() {
    const bool empty = fine_regular.details.at("case_iii_empty").get<bool>();
    const json& small = fine_regular.details.at("small");
    return {empty, "case (iii) cells " + small.at("case_iii_cells").dump() + ", max V/(v_m/0.7) " +
                       num(small.at("max_v_crit_over_vm_alpha").get<double>(), 5)};
}

Outcome c6() {
    int code = 0;
    const json j = run_cli("lower-bound", code);
    const double beta = j["beta"];
    const double g1 = feasibility_gap(1.0), g2 = feasibility_gap(2.0);
    return {code == 0 && std::abs(beta - 1.0737) <= 1e-3 && std::abs(g1 - 0.5) <= 1e-12 && g2 < 0.0 &&
                std::abs(g2 + 1.83211) <= 1e-5,
            "beta " + num(beta) + " gap(1) " + num(g1) + " gap(2) " + num(g2, 5)};
}

Outcome c7() {
    int code = 0;
    const json j = run_cli("gap-report --class all", code);
    const auto close = [](const json& g, double lo, double hi) {
        return std::abs(g[0].get<double>() - lo) <= 1e-3 && std::abs(g[1].get<double>() - hi) <= 1e-3;
    };
    const json& r = j["regular"]["gap"];
    const json& m = j["mhr"]["gap"];
    return {code == 0 && close(r, 1.066, 1.859) && close(m, 1.190, 1.467),
            "regular " + r.dump() + " mhr " + m.dump()};
}

// Compact replay of the property suite; the unit tests hold the full version.
Outcome c8() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(8);
    auto U = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    std::vector<RevenueCurve> curves;
    for (int i = 0; i < 25; ++i) curves.push_back(build(TruncExp{U(0.05, 4.0)}));
    for (int i = 0; i < 25; ++i) curves.push_back(build(ShiftedPareto{U(0.1, 2.0), U(0.0, 2.0)}));
    for (int i = 0; i < 25; ++i) curves.push_back(build(R0Line{U(0.0, 1.0), U(0.05, 1.0)}));
    for (int i = 0; i < 25; ++i) curves.push_back(build(ShiftedExp{U(0.0, 2.0), U(0.3, 3.0)}));

    int ir = 0, mono = 0, scale_bad = 0, myerson = 0, brute = 0, sound = 0, twoapx = 0;
    double worst_brute = -kInf, worst_myerson = 0.0;
    for (const RevenueCurve& c : curves) {
        const double v = c.value(U(1e-4, 1.0)), a = U(0.5, 1.0);
        const BestResponse br = best_response(v, c, a);
        if (br.utility < -1e-9) ++ir;
        const double bb = best_response_brute(v, c, a, 10000).utility - br.utility;
        worst_brute = std::max(worst_brute, bb);
        if (bb > 1e-6) ++brute;
        double prev = 0.0;
        for (int k = 0; k <= 50; ++k) {
            const double p = expected_payment(Bid::at(4.0 * c.v_m() * k / 50.0), c, a);
            if (p < prev - 1e-12) ++mono;
            prev = p;
        }
        const double rho = U(0.2, 5.0);
        const double r1 = mechanism_revenue(c, 0.7), r2 = mechanism_revenue(scale(c, rho), 0.7);
        if (std::abs(r2 - rho * r1) > 1e-6 * rho * std::max(1.0, r1)) ++scale_bad;
        const double m = myerson_identity_check(c, a);
        worst_myerson = std::max(worst_myerson, m);
        if (m > 1e-6) ++myerson;
        if (c.monopoly_revenue() / pricing_revenue(c, 1.0) > 2.0 + 1e-9) ++twoapx;
    }
    // Certified bounds against direct evaluation on 50 sampled curves.
    for (int i = 0; i < 50; ++i) {
        const RevenueCurve te = normalize(build(TruncExp{U(0.05, 4.0)}));
        const double w = expected_value(te);
        if (mechanism_revenue(te, kMhrAlpha) < cell_revenue_lb(te.q_m(), w, kMhrAlpha).cert_revenue_lb - 1e-6) ++sound;
        const double qm = U(0.62, 1.0), r0 = U(0.0, 1.0);
        if (r0line::v_star(qm, r0) >= 1.0 / qm &&
            mechanism_revenue(build(R0Line{r0, qm}), kRegularAlpha) < r0line::tau(qm, r0) - 1e-6)
            ++sound;
        const RevenueCurve sp = normalize(build(ShiftedPareto{U(0.1, 2.0), U(0.0, 2.0)}));
        for (int k = 0; k <= 10; ++k) {
            const double b = sp.v_m() * k / 10.0;
            if (payment_lb_low(b, sp.q_m()) > expected_payment(Bid::at(b), sp, kRegularAlpha) + 1e-6) ++sound;
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const int bad = ir + mono + scale_bad + myerson + brute + sound + twoapx;
    return {bad == 0 && secs < 300.0,
            "violations: IR " + std::to_string(ir) + ", payment " + std::to_string(mono) + ", scale " +
                std::to_string(scale_bad) + ", myerson " + std::to_string(myerson) + " (max " +
                num(worst_myerson, 9) + "), brute " + std::to_string(brute) + " (max adv " +
                num(worst_brute, 9) + "), soundness " + std::to_string(sound) + ", 2-apx " +
                std::to_string(twoapx)};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"1 truncated exponential reproduction", c1}, {"2 shifted Pareto reproduction", c2},
        {"3 MHR certification", c3},        {"4 regular certification", c4},
        {"5 case (iii) emptiness", c5},     {"6 lower bound", c6},
        {"7 gap report", c7},               {"8 property suite", c8}};
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << " [" << num(secs, 2) << " s] " << o.detail
                  << std::endl;
        failed += !o.pass;
    }
    std::cout << (failed ? std::to_string(failed) + " criterion(s) failed" : "all criteria passed") << "\n";
    return failed ? 1 : 0;
}
