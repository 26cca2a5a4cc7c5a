// Acceptance suite: one PASS/FAIL line per criterion.
// usage: acceptance <path-to-reclab> <configs-dir>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "reclab/config.hpp"
#include "reclab/estimation.hpp"
#include "reclab/experiments.hpp"
#include "test_support.hpp"

using namespace reclab;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

fs::path g_cli;
fs::path g_configs;

nlohmann::json cfg(const std::string& name) { return load_config(g_configs / name); }

Verdict lattice_oracle() {
    Stream rng(101, 0);
    std::size_t bad = 0;
    for (int t = 0; t < 1000; ++t) {
        const auto p = testing::dyadic_lottery(rng);
        const auto q = testing::dyadic_lottery(rng);
        const auto r = testing::dyadic_lottery(rng);
        const auto j = lottery_join(p, q);
        const auto m = lottery_meet(p, q);
        for (double x : testing::oracle_merged({&p, &q})) {
            bad += cdf_eval(j, x) != std::min(testing::oracle_cdf(p, x), testing::oracle_cdf(q, x));
            bad += cdf_eval(m, x) != std::max(testing::oracle_cdf(p, x), testing::oracle_cdf(q, x));
        }
        bad += !(lottery_join(lottery_join(p, q), r) == lottery_join(p, lottery_join(q, r)));
        bad += !(lottery_meet(lottery_meet(p, q), r) == lottery_meet(p, lottery_meet(q, r)));
        bad += !(lottery_join(p, q) == lottery_join(q, p));
        bad += !(lottery_meet(p, q) == lottery_meet(q, p));
        bad += !(lottery_join(p, lottery_meet(p, q)) == p);
        bad += !(lottery_meet(p, lottery_join(p, q)) == p);
    }
    return {bad == 0, "mismatches=" + std::to_string(bad)};
}

Verdict standard_representation() {
    Stream rng(102, 0);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const auto prefs = testing::random_prefs(rng, 3);
        const auto& pref = prefs[static_cast<std::size_t>(t) % 3];
        const auto p = testing::dyadic_lottery(rng);
        worst = std::max(worst, std::abs(act_value(pref, Act::constant(p, 3)) -
                                         expected_utility(pref.index(), p)));
    }
    return {worst <= 1e-9, "max_err=" + num(worst)};
}

Verdict aggregator_normalization() {
    Stream rng(103, 0);
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
        for (const auto& pref : testing::random_prefs(rng, 3)) {
            for (double c : {0.0, 0.25, 0.5, 1.0}) {
                worst = std::max(worst, std::abs(aggregator_eval(pref, std::vector<double>(3, c)) - c));
            }
        }
    }
    return {worst <= 1e-9, "max_err=" + num(worst)};
}

Verdict monotonicity() {
    Stream rng(104, 0);
    std::size_t act_viol = 0;
    for (int t = 0; t < 1000; ++t) {
        std::vector<Lottery> fs_, gs;
        for (int s = 0; s < 2; ++s) {
            const auto a = testing::dyadic_lottery(rng);
            const auto b = testing::dyadic_lottery(rng);
            fs_.push_back(lottery_join(a, b));
            gs.push_back(lottery_meet(a, b));
        }
        const Act f(fs_), g(gs);
        for (const auto& pref : testing::random_prefs(rng, 2)) {
            act_viol += act_value(pref, f) < act_value(pref, g);
        }
    }
    const auto box = Domain::unit_box(2);
    std::vector<WaldUtility> family;
    for (auto kind : {WaldKind::Linear, WaldKind::CES, WaldKind::CobbDouglas}) {
        const auto fam = UtilityFamily::grid(kind, box, 5, kind == WaldKind::CES
                                                               ? std::vector<double>{-2, -0.5, 0.5, 2}
                                                               : std::vector<double>{});
        family.insert(family.end(), fam.members().begin(), fam.members().end());
    }
    std::size_t bundle_viol = 0;
    for (int t = 0; t < 1000; ++t) {
        const auto y = box.sample(rng);
        auto x = y;
        for (double& v : x) {
            v = std::min(1.0, v + rng.uniform(0.0, 0.2));
        }
        for (const auto& u : family) {
            bundle_viol += u_value(u, box, x) < u_value(u, box, y);
        }
    }
    return {act_viol == 0 && bundle_viol == 0,
            "act_violations=" + std::to_string(act_viol) +
                " bundle_violations=" + std::to_string(bundle_viol)};
}

Verdict noise_contract() {
    const NoiseModel flip(ConstantFlip{0.75});
    const NoiseModel bounded(BoundedResponse{0.6, 0.9, 0.5});
    Stream rng(105, 0);
    std::size_t bad = 0;
    for (int t = 0; t < 10000; ++t) {
        const double a = rng.uniform();
        const double b = rng.uniform();
        for (const auto* n : {&flip, &bounded}) {
            bad += q_eval(*n, a, b) + q_eval(*n, b, a) != 1.0;
            if (a != b) {
                bad += q_eval(*n, std::max(a, b), std::min(a, b)) < n->floor() || n->floor() <= 0.5;
            }
        }
    }
    const auto box = Domain::unit_box(2);
    const auto u = WaldUtility::linear({0.3, 0.7});
    const std::size_t n = 100000;
    const auto ds = generate_dataset(box, u, flip, n, 105);
    std::size_t follow = 0;
    for (const auto& r : ds.records) {
        follow += u_value(u, box, r.chosen) > u_value(u, box, r.rejected);
    }
    const double freq = static_cast<double>(follow) / n;
    const double sigma = std::sqrt(0.75 * 0.25 / n);
    return {bad == 0 && std::abs(freq - 0.75) <= 3 * sigma,
            "contract_violations=" + std::to_string(bad) + " freq=" + num(freq) +
                " 3sigma=" + num(3 * sigma)};
}

Verdict key_identification() {
    const auto rep = run_separation(cfg("separation.json"), {});
    const auto& r = rep.results;
    const bool ok = r["pairs"].size() == 10 && r["insignificant"].get<std::size_t>() == 0 &&
                    r["skipped_identical"].get<std::size_t>() == 0;
    return {ok, "pairs=" + std::to_string(r["pairs"].size()) +
                    " insignificant=" + std::to_string(r["insignificant"].get<std::size_t>()) +
                    " min_ratio=" + num(r["min_ratio"].get<double>())};
}

Verdict analytic_mu() {
    const auto box = Domain::unit_box(2);
    const auto u = WaldUtility::ces({0.4, 0.6}, 0.5);
    bool ok = true;
    std::string detail;
    for (double theta : {0.6, 0.75, 0.9}) {
        const auto mc = mu_estimate(u, u, NoiseModel(ConstantFlip{theta}), box, 200000, 107);
        const double z = (mc.estimate - theta / 2) / mc.std_error;
        ok = ok && std::abs(z) <= 3.0;
        detail += "z(" + num(theta) + ")=" + num(z) + " ";
    }
    return {ok, detail};
}

nlohmann::json g_consistency;

Verdict consistency() {
    g_consistency = run_consistency(cfg("consistency.json"), {}).results;
    const auto med = g_consistency["median_rho"].get<std::vector<double>>();
    const bool ok = g_consistency["median_weakly_decreasing"].get<bool>() &&
                    med.back() <= 0.5 * med.front();
    std::string detail = "medians=";
    for (double m : med) {
        detail += num(m) + " ";
    }
    return {ok, detail};
}

Verdict bound_shape() {
    if (g_consistency.is_null()) {
        g_consistency = run_consistency(cfg("consistency.json"), {}).results;
    }
    bool ok = true;
    std::string detail = "V=" + num(g_consistency["bound"]["V"].get<double>()) +
                         " D=" + std::to_string(g_consistency["bound"]["D"].get<int>()) + " coverage:";
    for (const auto& [n, frac] : g_consistency["coverage"].items()) {
        ok = ok && frac.get<double>() >= 0.95;
        detail += " " + n + "=" + num(frac.get<double>());
    }
    return {ok, detail};
}

Verdict bound_regression() {
    const double b = bound_eval(BoundParams{1.0, 1.0, 3.0, 2, 0.1}, 100);
    return {std::abs(b - 0.62274) <= 1e-4, "value=" + num(b)};
}

Verdict theorem2() {
    const auto r = run_theorem2_demo(cfg("theorem2.json"), {}).results;
    bool ok = true;
    std::string detail;
    for (const auto& s : r["sequences"]) {
        for (const char* k : {"du", "dV", "dH"}) {
            const bool dec = s[std::string(k) + "_strictly_decreasing"].get<bool>();
            const double fin = s["final"][k].get<double>();
            ok = ok && dec && fin <= 1e-3;
        }
        detail += s["name"].get<std::string>() + ":dV=" + num(s["final"]["dV"].get<double>()) + " ";
    }
    return {ok && r["k_max"].get<int>() == 12, detail};
}

Verdict ce_continuity() {
    const auto r = run_ce_continuity(cfg("ce_continuity.json"), {}).results;
    const double fin = r["final_error"].get<double>();
    return {r["strictly_decreasing"].get<bool>() && fin <= 1e-3, "final_error=" + num(fin)};
}

Verdict nonidentification() {
    const auto r = run_nonidentification_demo(cfg("nonid.json"), {}).results;
    const double f = r["distance_factor_first_last"].get<double>();
    return {r["disagreement_identically_zero"].get<bool>() && f >= 5.0 &&
                r["distance_to_constant"].size() == 50,
            "factor=" + num(f)};
}

Verdict recovery() {
    bool ok = true;
    std::string detail;
    for (const char* name : {"recovery_1state.json", "recovery_2state.json"}) {
        const auto r = run_recovery(cfg(name), {}).results;
        const auto ks = r["k_values"].get<std::vector<std::size_t>>();
        const auto i10 = static_cast<std::size_t>(std::find(ks.begin(), ks.end(), 10) - ks.begin());
        ok = ok && r["candidates"].get<std::size_t>() >= 200 && r["truth_in_grid"].get<bool>() &&
             r["survivor_nesting_holds"].get<bool>() && ks.back() == 500 && i10 < ks.size();
        for (const auto& rep : r["replicates"]) {
            const double at10 = rep["max_disagreement"][i10].get<double>();
            const double last = rep["max_disagreement"].back().get<double>();
            ok = ok && last <= 0.2 * at10;
        }
        const auto& rep0 = r["replicates"][0]["max_disagreement"];
        detail += std::string(name) + ": k10=" + num(rep0[i10].get<double>()) +
                  " final=" + num(rep0.back().get<double>()) + " ";
    }
    return {ok, detail};
}

Verdict dense_uniqueness() {
    const auto r = run_dense_uniqueness_check(cfg("uniqueness.json"), {}).results;
    return {r["unseparated"].get<std::size_t>() == 0 && r["distinct_pairs"].get<std::size_t>() > 0,
            "pairs=" + std::to_string(r["distinct_pairs"].get<std::size_t>()) +
                " unseparated=" + std::to_string(r["unseparated"].get<std::size_t>()) +
                " max_level=" + std::to_string(r["max_level_needed"].get<int>())};
}

bool enumerate_shatters(const std::vector<WaldUtility>& members, const Domain& d,
                        const std::vector<std::pair<Bundle, Bundle>>& pairs) {
    for (std::size_t mask = 0; mask < (std::size_t{1} << pairs.size()); ++mask) {
        bool realized = false;
        for (const auto& u : members) {
            bool all = true;
            for (std::size_t i = 0; i < pairs.size() && all; ++i) {
                const double diff = u_value(u, d, pairs[i].first) - u_value(u, d, pairs[i].second);
                all = (mask >> i & 1) ? diff <= kVcTieTolerance : diff >= -kVcTieTolerance;
            }
            realized = realized || all;
        }
        if (!realized) {
            return false;
        }
    }
    return true;
}

Verdict vc_witnesses() {
    const auto box = Domain::unit_box(2);
    const auto single = UtilityFamily::explicit_members(box, {WaldUtility::linear({0.3, 0.7})});
    const int v_single = vc_lower_bound(single, 3, 20, 116).lower_bound;
    const auto lin = UtilityFamily::grid(WaldKind::Linear, box, 20);
    const int v_lin = vc_lower_bound(lin, 2, 20, 116).lower_bound;
    // Enumeration check on two pairs lying on one member's level lines.
    const auto& anchor = lin.members()[7];
    const double w0 = anchor.weights()[0], w1 = anchor.weights()[1];
    std::vector<std::pair<Bundle, Bundle>> pairs{{{0.2, 0.5}, {0.2 + 0.1 * w1, 0.5 - 0.1 * w0}},
                                                 {{0.6, 0.3}, {0.6 + 0.2 * w1, 0.3 - 0.2 * w0}}};
    const bool confirmed = enumerate_shatters(lin.members(), box, pairs);
    return {v_single == 0 && v_lin >= 2 && confirmed,
            "singleton=" + std::to_string(v_single) + " linear=" + std::to_string(v_lin) +
                " enumeration=" + (confirmed ? "confirmed" : "refuted")};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Verdict determinism() {
    const auto root = fs::temp_directory_path() / "reclab_acceptance_determinism";
    fs::remove_all(root);
    fs::create_directories(root);
    struct Job {
        std::string command;
        std::string config;
    };
    std::vector<Job> jobs{{"gen", "gen.json"},
                          {"fit", ""},
                          {"consistency", "consistency.json"},
                          {"recovery", "recovery_2state.json"},
                          {"theorem2", "theorem2.json"},
                          {"ce-continuity", "ce_continuity.json"},
                          {"nonid", "nonid.json"},
                          {"separation", "separation.json"},
                          {"vc", "vc.json"},
                          {"uniqueness", "uniqueness.json"},
                          {"bound", "bound.json"}};
    std::size_t differing = 0;
    std::size_t failed = 0;
    std::string which;
    for (const auto& job : jobs) {
        std::string config = (g_configs / job.config).string();
        if (job.command == "fit") {
            const auto fit_cfg = root / "fit.json";
            std::ofstream(fit_cfg) << nlohmann::json{
                {"version", 1},
                {"dataset", (root / "gen_t1" / "dataset.jsonl").string()},
                {"family", {{"cobb_douglas", {{"weight_steps", 20}}}}}}.dump();
            config = fit_cfg.string();
        }
        for (int threads : {1, 8}) {
            const auto out = root / (job.command + "_t" + std::to_string(threads));
            const std::string cmd = "\"" + g_cli.string() + "\" " + job.command + " --config \"" +
                                    config + "\" --out \"" + out.string() + "\" --threads " +
                                    std::to_string(threads) + " > /dev/null";
            failed += std::system(cmd.c_str()) != 0;
        }
        const auto a = root / (job.command + "_t1");
        const auto b = root / (job.command + "_t8");
        for (const auto& entry : fs::directory_iterator(a)) {
            const auto name = entry.path().filename();
            if (name.extension() == ".svg") {
                continue;
            }
            if (!fs::exists(b / name) || slurp(entry.path()) != slurp(b / name)) {
                ++differing;
                which += " " + job.command + "/" + name.string();
            }
        }
    }
    return {failed == 0 && differing == 0,
            "commands=" + std::to_string(jobs.size()) + " failed_runs=" + std::to_string(failed) +
                " differing_files=" + std::to_string(differing) + which};
}

} // namespace

int main(int argc, char** argv) {
    if (argc != 3) {
        std::cerr << "usage: acceptance <reclab-binary> <configs-dir>\n";
        return 2;
    }
    g_cli = argv[1];
    g_configs = argv[2];
    struct Criterion {
        int id;
        const char* name;
        double budget_seconds;
        std::function<Verdict()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "FOSD lattice oracle equivalence", 5, lattice_oracle},
        {2, "standard-representation identity", 5, standard_representation},
        {3, "aggregator normalization", 0, aggregator_normalization},
        {4, "monotonicity suite", 0, monotonicity},
        {5, "noise-model contract", 0, noise_contract},
        {6, "key identification", 120, key_identification},
        {7, "analytic mu check", 0, analytic_mu},
        {8, "consistency sweep", 600, consistency},
        {9, "bound shape coverage", 0, bound_shape},
        {10, "bound_eval regression", 0, bound_regression},
        {11, "representation convergence", 60, theorem2},
        {12, "certainty-equivalent continuity", 0, ce_continuity},
        {13, "non-identification demo", 0, nonidentification},
        {14, "finite-experiment recovery", 300, recovery},
        {15, "dense-restriction uniqueness", 0, dense_uniqueness},
        {16, "VC witnesses", 0, vc_witnesses},
        {17, "CLI determinism across thread counts", 0, determinism},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.budget_seconds > 0 && secs > c.budget_seconds) {
            v.pass = false;
            v.detail += " over time budget " + num(c.budget_seconds) + "s";
        }
        failures += v.pass ? 0 : 1;
        std::printf("[%s] %2d %-40s %7.2fs  %s\n", v.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                    v.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
                criteria.size());
    return failures == 0 ? 0 : 1;
}
