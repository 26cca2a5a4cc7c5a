#include "reclab/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "reclab/errors.hpp"
#include "reclab/parallel.hpp"

namespace reclab {

namespace {

bool lex_less(const ParamPoint& a, const ParamPoint& b) { return a.params() < b.params(); }

std::vector<ParamPoint> refinement_neighbours(const UtilityFamily& family, const ParamPoint& at,
                                              int level) {
    std::vector<ParamPoint> out;
    const auto& w = at.weights();
    const std::size_t d = w.size();
    const double step = 1.0 / (std::ldexp(1.0, level) * family.weight_steps());
    const bool positive = at.kind() == WaldKind::CobbDouglas;
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            if (i == j) {
                continue;
            }
            std::vector<double> moved = w;
            moved[i] += step;
            moved[j] -= step;
            if (moved[j] < 0.0 && moved[j] > -1e-15) {
                moved[j] = 0.0;
            }
            if (moved[j] < 0.0 || (positive && !(moved[j] > 0.0))) {
                continue;
            }
            out.emplace_back(at.kind(), std::move(moved), at.rho());
        }
    }
    if (at.kind() == WaldKind::CES) {
        const auto& grid = family.rho_grid();
        double spacing = 1.0;
        for (std::size_t i = 1; i < grid.size(); ++i) {
            spacing = i == 1 ? grid[i] - grid[i - 1] : std::min(spacing, grid[i] - grid[i - 1]);
        }
        const double h = spacing / std::ldexp(1.0, level);
        for (double r : {at.rho() - h, at.rho() + h}) {
            if (std::abs(r) < 1e-12 || r < grid.front() || r > grid.back()) {
                continue;
            }
            out.emplace_back(WaldKind::CES, w, r);
        }
    }
    return out;
}

} // namespace

std::size_t rationalized_count(const ParamPoint& u, const Domain& domain, const Dataset& ds) {
    std::size_t count = 0;
    for (const auto& r : ds.records) {
        if (r.chosen.size() != u.dim()) {
            throw ShapeError("dataset and utility differ in dimension");
        }
        if (u_value(u, domain, r.chosen) >= u_value(u, domain, r.rejected)) {
            ++count;
        }
    }
    return count;
}

double empirical_score(const ParamPoint& u, const Domain& domain, const Dataset& ds) {
    if (ds.records.empty()) {
        return 1.0;
    }
    return static_cast<double>(rationalized_count(u, domain, ds)) /
           static_cast<double>(ds.records.size());
}

nlohmann::json ErmResult::to_json() const {
    return {{"best", best.to_json()},
            {"grid_best", grid_best.to_json()},
            {"score", score},
            {"count", count},
            {"n", n},
            {"ties", ties},
            {"search_log",
             {{"grid_size", log.grid_size},
              {"refinement_levels", log.refinement_levels},
              {"refinement_evaluations", log.refinement_evaluations},
              {"refinement_moves", log.refinement_moves}}}};
}

ErmResult erm_fit(const UtilityFamily& family, const Dataset& ds, int refinements) {
    const auto& members = family.members();
    if (members.empty()) {
        throw ConfigError("erm_fit needs a nonempty parameter grid");
    }
    if (refinements < 0) {
        throw ConfigError("refinement count must be nonnegative");
    }
    const Domain& domain = family.domain();
    const auto counts = parallel_map<std::size_t>(
        members.size(), [&](std::size_t i) { return rationalized_count(members[i], domain, ds); });

    std::size_t best_i = 0;
    std::size_t ties = 0;
    const std::size_t top = *std::max_element(counts.begin(), counts.end());
    for (std::size_t i = 0; i < members.size(); ++i) {
        if (counts[i] == top) {
            if (ties == 0) {
                best_i = i;
            }
            ++ties;
        }
    }

    ErmResult res{members[best_i], members[best_i], 1.0, top, ds.size(), ties, {}};
    res.log.grid_size = members.size();
    if (!family.is_explicit()) {
        res.log.refinement_levels = refinements;
        for (int level = 1; level <= refinements; ++level) {
            auto nbrs = refinement_neighbours(family, res.best, level);
            std::sort(nbrs.begin(), nbrs.end(), lex_less);
            const auto nbr_counts = parallel_map<std::size_t>(nbrs.size(), [&](std::size_t i) {
                return rationalized_count(nbrs[i], domain, ds);
            });
            res.log.refinement_evaluations += nbrs.size();
            std::size_t pick = nbrs.size();
            for (std::size_t i = 0; i < nbrs.size(); ++i) {
                if (nbr_counts[i] > res.count &&
                    (pick == nbrs.size() || nbr_counts[i] > nbr_counts[pick])) {
                    pick = i;
                }
            }
            if (pick != nbrs.size()) {
                res.best = nbrs[pick];
                res.count = nbr_counts[pick];
                ++res.log.refinement_moves;
            }
        }
    }
    res.score = ds.size() == 0 ? 1.0
                               : static_cast<double>(res.count) / static_cast<double>(ds.size());
    return res;
}

double rho(const ParamPoint& u1, const ParamPoint& u2, const Domain& domain,
           const std::vector<Bundle>& grid) {
    if (grid.empty()) {
        throw ConfigError("rho needs a nonempty evaluation grid");
    }
    double best = 0.0;
    for (const auto& x : grid) {
        best = std::max(best, std::abs(u_value(u1, domain, x) - u_value(u2, domain, x)));
    }
    return best;
}

MonteCarlo summarize_terms(const std::vector<double>& terms) {
    MonteCarlo mc;
    mc.m = terms.size();
    if (terms.empty()) {
        return mc;
    }
    const double n = static_cast<double>(terms.size());
    mc.estimate = pairwise_sum(terms) / n;
    if (terms.size() > 1) {
        std::vector<double> sq(terms.size());
        for (std::size_t i = 0; i < terms.size(); ++i) {
            const double dev = terms[i] - mc.estimate;
            sq[i] = dev * dev;
        }
        mc.std_error = std::sqrt(pairwise_sum(sq) / (n - 1.0) / n);
    }
    return mc;
}

void for_each_problem(const Domain& domain, std::size_t m, std::uint64_t seed,
                      const std::function<void(std::size_t, const Bundle&, const Bundle&)>& f) {
    const std::size_t batches = (m + kPairBatch - 1) / kPairBatch;
    parallel_for(batches, [&](std::size_t b) {
        Stream rng(seed, b);
        const std::size_t end = std::min(m, (b + 1) * kPairBatch);
        for (std::size_t i = b * kPairBatch; i < end; ++i) {
            const auto [x, y] = sample_problem(domain, rng);
            f(i, x, y);
        }
    });
}

MonteCarlo mu_estimate(const ParamPoint& pref_eval, const ParamPoint& pref_true,
                       const NoiseModel& noise, const Domain& domain, std::size_t m,
                       std::uint64_t seed) {
    if (m == 0) {
        throw ConfigError("mu_estimate needs m >= 1");
    }
    std::vector<double> terms(m);
    for_each_problem(domain, m, seed, [&](std::size_t i, const Bundle& x, const Bundle& y) {
        if (u_value(pref_eval, domain, x) >= u_value(pref_eval, domain, y)) {
            terms[i] = q_eval(noise, u_value(pref_true, domain, x), u_value(pref_true, domain, y));
        } else {
            terms[i] = 0.0;
        }
    });
    return summarize_terms(terms);
}

SeparationEstimate separation_estimate(const ParamPoint& pref_true, const ParamPoint& pref_other,
                                       const NoiseModel& noise, const Domain& domain,
                                       std::size_t m, std::uint64_t seed,
                                       const std::vector<Bundle>& rho_grid) {
    if (m == 0) {
        throw ConfigError("separation_estimate needs m >= 1");
    }
    std::vector<double> own(m);
    std::vector<double> other(m);
    std::vector<double> diff(m);
    for_each_problem(domain, m, seed, [&](std::size_t i, const Bundle& x, const Bundle& y) {
        const double tx = u_value(pref_true, domain, x);
        const double ty = u_value(pref_true, domain, y);
        const double q = q_eval(noise, tx, ty);
        own[i] = tx >= ty ? q : 0.0;
        other[i] = u_value(pref_other, domain, x) >= u_value(pref_other, domain, y) ? q : 0.0;
        diff[i] = own[i] - other[i];
    });
    const MonteCarlo paired = summarize_terms(diff);
    SeparationEstimate est;
    est.gap = paired.estimate;
    est.std_error = paired.std_error;
    est.mu_true = summarize_terms(own).estimate;
    est.mu_other = summarize_terms(other).estimate;
    est.rho_value = rho(pref_true, pref_other, domain, rho_grid);
    return est;
}

std::string SeparationReport::csv() const {
    std::string out = "rho,gap,stderr\n";
    for (const auto& p : pairs) {
        out += format_double(p.estimate.rho_value) + "," + format_double(p.estimate.gap) + "," +
               format_double(p.estimate.std_error) + "\n";
    }
    return out;
}

SeparationReport separation_exponent_check(const UtilityFamily& family, const NoiseModel& noise,
                                           std::size_t n_pairs, std::size_t m, int D,
                                           std::uint64_t seed, int rho_grid_per_axis) {
    if (n_pairs < 10) {
        throw ConfigError("separation check needs at least 10 pairs");
    }
    if (D < 1) {
        throw ConfigError("separation exponent D must be positive");
    }
    const auto& members = family.members();
    if (members.size() < 2) {
        throw ConfigError("separation check needs a family with at least two members");
    }
    const Domain& domain = family.domain();
    const auto grid = evaluation_grid(domain, rho_grid_per_axis);
    SeparationReport rep;
    rep.D = D;
    rep.n_pairs = n_pairs;
    rep.min_ratio = std::numeric_limits<double>::infinity();
    Stream pick(derive_seed(seed, 0), 0);
    std::size_t draws = 0;
    while (rep.pairs.size() < n_pairs) {
        if (++draws > 1000 * n_pairs) {
            throw NumericalGuardError("separation check could not draw enough distinct pairs");
        }
        const auto i = pick.below(members.size());
        const auto j = pick.below(members.size());
        if (i == j) {
            continue;
        }
        SeparationPair sp{members[i], members[j], {}, 0.0};
        const double r = rho(sp.truth, sp.other, domain, grid);
        if (r < 1e-9) {
            ++rep.skipped_identical;
            continue;
        }
        sp.estimate = separation_estimate(sp.truth, sp.other, noise, domain, m,
                                          derive_seed(seed, rep.pairs.size() + 1), grid);
        sp.ratio = sp.estimate.gap / std::pow(r, D);
        rep.min_ratio = std::min(rep.min_ratio, sp.ratio);
        if (sp.estimate.gap + 3.0 * sp.estimate.std_error < 0.0) {
            ++rep.violations;
        }
        if (sp.estimate.gap - 3.0 * sp.estimate.std_error <= 0.0) {
            ++rep.insignificant;
        }
        rep.pairs.push_back(std::move(sp));
    }
    return rep;
}

const char* to_string(TieRule r) { return r == TieRule::Weak ? "weak" : "strict"; }

nlohmann::json VcResult::to_json() const {
    return {{"lower_bound", lower_bound},
            {"generic_lower_bound", generic_lower_bound},
            {"tie_seeded_lower_bound", tie_seeded_lower_bound},
            {"trials", trials},
            {"excluded_pairs", excluded_pairs},
            {"per_trial", per_trial}};
}

namespace {

/// values[m][i] = u_m(x_i) - u_m(y_i).
std::vector<std::vector<double>> pair_differences(
    const std::vector<ParamPoint>& members, const Domain& domain,
    const std::vector<std::pair<Bundle, Bundle>>& pairs) {
    std::vector<std::vector<double>> out(members.size(), std::vector<double>(pairs.size()));
    for (std::size_t m = 0; m < members.size(); ++m) {
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            out[m][i] = u_value(members[m], domain, pairs[i].first) -
                        u_value(members[m], domain, pairs[i].second);
        }
    }
    return out;
}

/// Whether the first k pairs are shattered, given per-member differences.
bool shattered_prefix(const std::vector<std::vector<double>>& diffs, std::size_t k,
                      TieRule rule) {
    std::vector<char> seen(std::size_t{1} << k, 0);
    std::size_t remaining = seen.size();
    std::vector<unsigned> allowed(k);
    for (const auto& diff : diffs) {
        // allowed[i]: bit 1 = "x chosen" realizable, bit 0 = "y chosen".
        bool any = true;
        for (std::size_t i = 0; i < k; ++i) {
            const double d = diff[i];
            const bool tie = std::abs(d) <= kVcTieTolerance;
            unsigned a = 0;
            if (d > kVcTieTolerance || (tie && rule == TieRule::Weak)) {
                a |= 2u;
            }
            if (d < -kVcTieTolerance || (tie && rule == TieRule::Weak)) {
                a |= 1u;
            }
            allowed[i] = a;
            if (a == 0) {
                any = false;
            }
        }
        if (!any) {
            continue;
        }
        // Enumerate the product of allowed labels.
        std::vector<std::size_t> labels;
        labels.push_back(0);
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t bit = std::size_t{1} << i;
            if (allowed[i] == 3u) {
                const std::size_t sz = labels.size();
                for (std::size_t t = 0; t < sz; ++t) {
                    labels.push_back(labels[t] | bit);
                }
            } else if (allowed[i] == 2u) {
                for (auto& l : labels) {
                    l |= bit;
                }
            }
        }
        for (auto l : labels) {
            if (!seen[l]) {
                seen[l] = 1;
                --remaining;
            }
        }
        if (remaining == 0) {
            return true;
        }
    }
    return remaining == 0;
}

bool all_indifferent(const std::vector<ParamPoint>& members, const Domain& domain, const Bundle& x,
                     const Bundle& y) {
    for (const auto& u : members) {
        if (std::abs(u_value(u, domain, x) - u_value(u, domain, y)) > kVcTieTolerance) {
            return false;
        }
    }
    return true;
}

/// A point y with u(y) = u(x) found by bisection on a random chord, or
/// nothing after a bounded number of chords.
std::optional<Bundle> level_set_point(const ParamPoint& u, const Domain& domain, const Bundle& x,
                                      Stream& rng) {
    const double target = u_value(u, domain, x);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        Bundle lo = domain.sample(rng);
        Bundle hi = domain.sample(rng);
        double flo = u_value(u, domain, lo) - target;
        double fhi = u_value(u, domain, hi) - target;
        if (flo > fhi) {
            std::swap(lo, hi);
            std::swap(flo, fhi);
        }
        if (!(flo < 0.0 && fhi > 0.0)) {
            continue;
        }
        Bundle mid(lo.size());
        for (int it = 0; it < 200; ++it) {
            for (std::size_t c = 0; c < mid.size(); ++c) {
                mid[c] = 0.5 * (lo[c] + hi[c]);
            }
            if (mid == lo || mid == hi) {
                break;
            }
            const double fm = u_value(u, domain, mid) - target;
            if (fm == 0.0) {
                break;
            }
            (fm < 0.0 ? lo : hi) = mid;
        }
        if (std::abs(u_value(u, domain, mid) - target) <= 0.25 * kVcTieTolerance && mid != x) {
            return mid;
        }
    }
    return std::nullopt;
}

} // namespace

bool shatters(const std::vector<ParamPoint>& members, const Domain& domain,
              const std::vector<std::pair<Bundle, Bundle>>& pairs, TieRule rule) {
    if (pairs.size() > 20) {
        throw NumericalGuardError("shattering check limited to 20 pairs");
    }
    return shattered_prefix(pair_differences(members, domain, pairs), pairs.size(), rule);
}

VcResult vc_lower_bound(const UtilityFamily& family, int k, std::size_t trials,
                        std::uint64_t seed, TieRule rule, double budget) {
    if (k < 1 || trials < 1) {
        throw ConfigError("vc_lower_bound needs k >= 1 and trials >= 1");
    }
    const auto& members = family.members();
    const Domain& domain = family.domain();
    const double work = static_cast<double>(k) * std::ldexp(1.0, k) *
                        static_cast<double>(members.size());
    if (k > 24 || work > budget) {
        throw NumericalGuardError("VC search over budget: k * 2^k * |grid| = " +
                                  std::to_string(work));
    }
    VcResult res;
    res.trials = trials;
    const auto ku = static_cast<std::size_t>(k);
    struct TrialOut {
        int shattered = 0;
        std::size_t excluded = 0;
    };
    const auto outs = parallel_map<TrialOut>(trials, [&](std::size_t t) {
        TrialOut out;
        Stream rng(seed, t);
        const bool tie_seeded = t % 2 == 1 && members.size() > 1;
        const ParamPoint& anchor = members[rng.below(members.size())];
        std::vector<std::pair<Bundle, Bundle>> pairs;
        std::size_t guard = 0;
        while (pairs.size() < ku) {
            if (++guard > 100 * ku) {
                throw NumericalGuardError("VC search could not draw informative pairs");
            }
            Bundle x = domain.sample(rng);
            Bundle y;
            if (tie_seeded) {
                auto level = level_set_point(anchor, domain, x, rng);
                if (!level) {
                    continue;
                }
                y = std::move(*level);
            } else {
                y = domain.sample(rng);
            }
            if (all_indifferent(members, domain, x, y)) {
                ++out.excluded;
                continue;
            }
            pairs.emplace_back(std::move(x), std::move(y));
        }
        const auto diffs = pair_differences(members, domain, pairs);
        for (std::size_t kp = 1; kp <= ku; ++kp) {
            if (!shattered_prefix(diffs, kp, rule)) {
                break;
            }
            out.shattered = static_cast<int>(kp);
        }
        return out;
    });
    for (std::size_t t = 0; t < trials; ++t) {
        res.excluded_pairs += outs[t].excluded;
        res.per_trial.push_back(outs[t].shattered);
        const bool tie_seeded = t % 2 == 1 && members.size() > 1;
        int& slot = tie_seeded ? res.tie_seeded_lower_bound : res.generic_lower_bound;
        slot = std::max(slot, outs[t].shattered);
    }
    res.lower_bound = std::max(res.generic_lower_bound, res.tie_seeded_lower_bound);
    return res;
}

nlohmann::json BoundParams::to_json() const {
    return {{"K", K}, {"C_bar", C_bar}, {"V", V}, {"D", D}, {"delta", delta}};
}

double bound_eval(const BoundParams& bp, double n) {
    if (!(n >= 1.0)) {
        throw ConfigError("bound_eval needs n >= 1");
    }
    if (!(bp.K > 0.0) || !(bp.C_bar > 0.0) || !(bp.V > 0.0) || bp.D < 1 ||
        !(bp.delta > 0.0 && bp.delta <= 1.0)) {
        throw ConfigError("bound parameters out of range");
    }
    const double inner = bp.K * std::sqrt(bp.V / n) + std::sqrt(2.0 * std::log(1.0 / bp.delta) / n);
    return bp.C_bar * std::pow(inner, 1.0 / bp.D);
}

MonteCarlo disagreement(const ParamPoint& u1, const ParamPoint& u2, const Domain& domain,
                        std::size_t m, std::uint64_t seed) {
    if (m == 0) {
        throw ConfigError("disagreement needs m >= 1");
    }
    std::vector<double> terms(m);
    for_each_problem(domain, m, seed, [&](std::size_t i, const Bundle& x, const Bundle& y) {
        const double a = u_value(u1, domain, x) - u_value(u1, domain, y);
        const double b = u_value(u2, domain, x) - u_value(u2, domain, y);
        terms[i] = (a > 0.0 && b < 0.0) || (a < 0.0 && b > 0.0) ? 1.0 : 0.0;
    });
    return summarize_terms(terms);
}

Act random_act(std::size_t n_states, Interval interval, Stream& rng) {
    std::vector<Lottery> per_state;
    per_state.reserve(n_states);
    for (std::size_t s = 0; s < n_states; ++s) {
        const double x1 = rng.uniform(interval.a(), interval.b());
        const double x2 = rng.uniform(interval.a(), interval.b());
        const double w = rng.uniform();
        per_state.push_back(Lottery::from_atoms(interval, {{x1, w}, {x2, 1.0 - w}}));
    }
    return Act(std::move(per_state));
}

MonteCarlo disagreement(const AAPreference& p1, const AAPreference& p2, std::size_t m,
                        std::uint64_t seed) {
    if (m == 0) {
        throw ConfigError("disagreement needs m >= 1");
    }
    if (p1.n_states() != p2.n_states() || !(p1.index().interval() == p2.index().interval())) {
        throw ShapeError("preferences differ in state space or interval");
    }
    const std::size_t n_states = p1.n_states();
    const Interval interval = p1.index().interval();
    std::vector<double> terms(m);
    const std::size_t batches = (m + kPairBatch - 1) / kPairBatch;
    parallel_for(batches, [&](std::size_t b) {
        Stream rng(seed, b);
        const std::size_t end = std::min(m, (b + 1) * kPairBatch);
        for (std::size_t i = b * kPairBatch; i < end; ++i) {
            const Act f = random_act(n_states, interval, rng);
            const Act g = random_act(n_states, interval, rng);
            const double a = act_value(p1, f) - act_value(p1, g);
            const double c = act_value(p2, f) - act_value(p2, g);
            terms[i] = (a > 0.0 && c < 0.0) || (a < 0.0 && c > 0.0) ? 1.0 : 0.0;
        }
    });
    return summarize_terms(terms);
}

} // namespace reclab
