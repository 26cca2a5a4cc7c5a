#include "reclab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "reclab/config.hpp"
#include "reclab/errors.hpp"
#include "reclab/parallel.hpp"

namespace reclab {

namespace {

template <class... Ts> struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

std::string join_params(const std::vector<double>& p) {
    std::string out;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i > 0) {
            out += ';';
        }
        out += format_double(p[i]);
    }
    return out;
}

bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (!(v[i] < v[i - 1])) {
            return false;
        }
    }
    return true;
}

bool weakly_decreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[i - 1]) {
            return false;
        }
    }
    return true;
}

std::uint64_t seed_of(const nlohmann::json& cfg, const Overrides& ov, const char* ctx) {
    if (ov.seed) {
        return *ov.seed;
    }
    return get_field<std::uint64_t>(cfg, "seed", ctx, 1);
}

Interval interval_from_json(const nlohmann::json& j, const char* ctx) {
    const auto ab = j.get<std::vector<double>>();
    if (ab.size() != 2) {
        throw ConfigError(std::string(ctx) + ": interval must be [a, b]");
    }
    return Interval(ab[0], ab[1]);
}

/// Strictly increasing tuples of `count` values from {1, ..., steps - 1},
/// lexicographic.
void increasing_tuples(int steps, std::size_t count, int from, std::vector<int>& cur,
                       std::vector<std::vector<int>>& out) {
    if (cur.size() == count) {
        out.push_back(cur);
        return;
    }
    for (int v = from; v <= steps - 1; ++v) {
        cur.push_back(v);
        increasing_tuples(steps, count, v + 1, cur, out);
        cur.pop_back();
    }
}

/// Strict disagreement of two value differences beyond the tie tolerance.
bool opposite(double a, double b) {
    return (a > kChoiceTieTolerance && b < -kChoiceTieTolerance) ||
           (a < -kChoiceTieTolerance && b > kChoiceTieTolerance);
}

} // namespace

std::size_t pair_count(std::size_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

std::vector<IndexPair> diagonal_pairs(std::size_t universe_size, std::size_t k,
                                      std::optional<std::uint64_t> perturbation) {
    const std::size_t total = pair_count(universe_size);
    if (k > total) {
        throw ConfigError("requested " + std::to_string(k) + " pairs but the universe has only " +
                          std::to_string(total) + "; raise the truncation level");
    }
    std::vector<IndexPair> out;
    out.reserve(k);
    const std::size_t n = universe_size;
    for (std::size_t s = 1; out.size() < k && s + 3 <= 2 * n; ++s) {
        std::vector<IndexPair> diag;
        const std::size_t lo = s >= n ? s - (n - 1) : 0;
        for (std::size_t i = lo; 2 * i < s; ++i) {
            diag.emplace_back(i, s - i);
        }
        if (perturbation) {
            Stream rng(*perturbation, s);
            for (std::size_t i = diag.size(); i > 1; --i) {
                std::swap(diag[i - 1], diag[rng.below(i)]);
            }
        }
        for (const auto& p : diag) {
            if (out.size() == k) {
                break;
            }
            out.push_back(p);
        }
    }
    return out;
}

SigmaSequence build_sigma(std::size_t n_states, Interval interval, int denominator_bound,
                          int grid_count, std::size_t k,
                          std::optional<std::uint64_t> perturbation) {
    if (k < 1) {
        throw ConfigError("build_sigma needs k >= 1");
    }
    SigmaSequence sigma;
    sigma.universe = act_grid(n_states, interval, denominator_bound, grid_count);
    sigma.pairs = diagonal_pairs(sigma.universe.size(), k, perturbation);
    sigma.denominator_bound = denominator_bound;
    sigma.grid_count = grid_count;
    sigma.perturbation = perturbation;
    return sigma;
}

unsigned char choice_set(double value_first, double value_second) {
    if (std::abs(value_first - value_second) <= kChoiceTieTolerance) {
        return kChooseFirst | kChooseSecond;
    }
    return value_first > value_second ? kChooseFirst : kChooseSecond;
}

ChoiceFunctionData generated_choices(const AAPreference& pref, const SigmaSequence& sigma) {
    ChoiceFunctionData data;
    data.pairs = sigma.pairs;
    data.chosen.reserve(sigma.pairs.size());
    for (const auto& [i, j] : sigma.pairs) {
        data.chosen.push_back(
            choice_set(act_value(pref, sigma.universe[i]), act_value(pref, sigma.universe[j])));
    }
    return data;
}

namespace {

template <class Accept>
bool rationalizes(const AAPreference& pref, const SigmaSequence& sigma,
                  const ChoiceFunctionData& data, Accept accept) {
    if (data.pairs.size() != data.chosen.size()) {
        throw ShapeError("choice data has mismatched pairs and choices");
    }
    for (std::size_t t = 0; t < data.pairs.size(); ++t) {
        const auto [i, j] = data.pairs[t];
        if (i >= sigma.universe.size() || j >= sigma.universe.size()) {
            throw ShapeError("choice data refers outside the universe");
        }
        const unsigned char own =
            choice_set(act_value(pref, sigma.universe[i]), act_value(pref, sigma.universe[j]));
        if (!accept(data.chosen[t], own)) {
            return false;
        }
    }
    return true;
}

} // namespace

bool strongly_rationalizes(const AAPreference& pref, const SigmaSequence& sigma,
                           const ChoiceFunctionData& data) {
    return rationalizes(pref, sigma, data,
                        [](unsigned char observed, unsigned char own) { return observed == own; });
}

bool weakly_rationalizes(const AAPreference& pref, const SigmaSequence& sigma,
                         const ChoiceFunctionData& data) {
    return rationalizes(pref, sigma, data, [](unsigned char observed, unsigned char own) {
        return (observed & own) == observed;
    });
}

std::vector<AAPreference> aa_family_from_json(const nlohmann::json& j) {
    constexpr const char* ctx = "candidate family";
    check_fields(j, {"states", "interval", "knots", "value_steps", "prior_steps", "members"}, ctx);
    std::vector<AAPreference> out;
    if (j.contains("knots")) {
        const auto n_states = get_field<std::size_t>(j, "states", ctx);
        const Interval interval =
            j.contains("interval") ? interval_from_json(j.at("interval"), ctx) : Interval(0.0, 1.0);
        const auto knots = get_field<std::vector<double>>(j, "knots", ctx);
        if (knots.size() < 2 || knots.front() != interval.a() || knots.back() != interval.b()) {
            throw ConfigError("candidate family knots must run from a to b");
        }
        const int value_steps = get_field<int>(j, "value_steps", ctx, 2);
        const int prior_steps = get_field<int>(j, "prior_steps", ctx, 1);
        if (value_steps < 2 || prior_steps < 1) {
            throw ConfigError("candidate family needs value_steps >= 2 and prior_steps >= 1");
        }
        std::vector<std::vector<int>> tuples;
        std::vector<int> cur;
        increasing_tuples(value_steps, knots.size() - 2, 1, cur, tuples);
        if (tuples.empty()) {
            throw ConfigError("value_steps too small for the interior knots");
        }
        for (const auto& prior : simplex_grid(n_states, prior_steps)) {
            for (const auto& t : tuples) {
                std::vector<double> values{0.0};
                for (int v : t) {
                    values.push_back(static_cast<double>(v) / value_steps);
                }
                values.push_back(1.0);
                out.emplace_back(ExpectedUtility{prior}, BernoulliIndex(knots, values),
                                 StateSpace::numbered(n_states));
            }
        }
    } else if (j.contains("states") || j.contains("value_steps") || j.contains("prior_steps")) {
        throw ConfigError("candidate family grid fields need \"knots\"");
    }
    if (j.contains("members")) {
        for (const auto& m : j.at("members")) {
            out.push_back(aa_preference_from_json(m));
        }
    }
    if (out.empty()) {
        throw ConfigError("candidate family is empty");
    }
    for (const auto& p : out) {
        if (p.n_states() != out.front().n_states() ||
            !(p.index().interval() == out.front().index().interval())) {
            throw ShapeError("candidate family members differ in states or interval");
        }
    }
    return out;
}

AAPreference interpolate_preference(const AAPreference& target, const AAPreference& start,
                                    double t) {
    if (target.n_states() != start.n_states() ||
        target.index().knots() != start.index().knots() ||
        target.aggregator().index() != start.aggregator().index()) {
        throw ShapeError("interpolated preferences must share kind, states and knots");
    }
    auto lerp = [t](const std::vector<double>& a, const std::vector<double>& b) {
        std::vector<double> out(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            out[i] = a[i] + t * (b[i] - a[i]);
        }
        return out;
    };
    auto lerp_prior = [&](const Prior& a, const Prior& b) {
        auto w = lerp(a.weights(), b.weights());
        double s = 0.0;
        for (double x : w) {
            s += x;
        }
        for (double& x : w) {
            x /= s;
        }
        return Prior(std::move(w));
    };
    BernoulliIndex index(target.index().knots(),
                         lerp(target.index().values(), start.index().values()));
    Aggregator agg = std::visit(
        overloaded{
            [&](const ExpectedUtility& eu) -> Aggregator {
                return ExpectedUtility{
                    lerp_prior(eu.prior, std::get<ExpectedUtility>(start.aggregator()).prior)};
            },
            [&](const MaxMin& mm) -> Aggregator {
                const auto& other = std::get<MaxMin>(start.aggregator()).priors;
                if (other.size() != mm.priors.size()) {
                    throw ShapeError("max-min sequences need equally many priors");
                }
                std::vector<Prior> priors;
                for (std::size_t i = 0; i < other.size(); ++i) {
                    priors.push_back(lerp_prior(mm.priors[i], other[i]));
                }
                return MaxMin{std::move(priors)};
            },
            [&](const Variational& v) -> Aggregator {
                const auto& other = std::get<Variational>(start.aggregator()).cost;
                if (!(other.grid() == v.cost.grid())) {
                    throw ShapeError("variational sequences need a common cost grid");
                }
                std::vector<double> costs(v.cost.costs().size());
                for (std::size_t i = 0; i < costs.size(); ++i) {
                    const double a = v.cost.costs()[i];
                    const double b = other.costs()[i];
                    if (std::isinf(a) || std::isinf(b)) {
                        if (a != b) {
                            throw ShapeError("variational sequences need matching infinite costs");
                        }
                        costs[i] = a;
                    } else {
                        costs[i] = a + t * (b - a);
                    }
                }
                return Variational{CostFunction(v.cost.grid(), std::move(costs))};
            },
        },
        target.aggregator());
    return AAPreference(std::move(agg), std::move(index), target.states());
}

double normalization_shift(const std::vector<double>& values, double k) {
    if (values.empty() || !(k > 0.0)) {
        throw ConfigError("normalization needs prizes and k > 0");
    }
    double sum = 0.0;
    double sq = 0.0;
    for (double v : values) {
        sum += v;
        sq += v * v;
    }
    const double a = static_cast<double>(values.size());
    const double b = 2.0 * sum / k;
    const double c = sq / (k * k) - 1.0;
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) {
        throw NumericalGuardError("normalization has no real solution");
    }
    return (-b + std::sqrt(disc)) / (2.0 * a);
}

// ---------------------------------------------------------------- gen / fit

RunReport run_gen(const nlohmann::json& cfg, const Overrides& ov, std::string* dataset_text) {
    constexpr const char* ctx = "gen config";
    check_fields(cfg, {"version", "domain", "truth", "noise", "n", "seed"}, ctx);
    const Domain domain = Domain::from_json(cfg.at("domain"));
    const WaldUtility truth = WaldUtility::from_json(cfg.at("truth"));
    const NoiseModel noise = NoiseModel::from_json(cfg.at("noise"));
    const auto n = get_field<std::size_t>(cfg, "n", ctx);
    const std::uint64_t seed = seed_of(cfg, ov, ctx);
    const Dataset ds = generate_dataset(domain, truth, noise, n, seed);
    if (dataset_text) {
        *dataset_text = serialize_dataset(ds);
    }
    RunReport rep;
    rep.command = "gen";
    rep.config = cfg;
    rep.seeds = {{"base", seed}, {"derivation", "record i draws from stream (seed, i)"}};
    rep.notes = {"problems are i.i.d. uniform on the domain; records store (chosen, rejected)"};
    rep.sweep_variable = "n";
    rep.metric = "fraction of records rationalized by the true utility";
    const double score = empirical_score(truth, domain, ds);
    rep.cells.push_back(make_cell(static_cast<double>(n), {score}));
    rep.results = {{"n", n}, {"rationalized_by_truth", score}, {"noise_floor", noise.floor()}};
    rep.csv = "i,u_chosen,u_rejected\n";
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        rep.csv += std::to_string(i) + "," +
                   format_double(u_value(truth, domain, ds.records[i].chosen)) + "," +
                   format_double(u_value(truth, domain, ds.records[i].rejected)) + "\n";
    }
    return rep;
}

RunReport run_fit(const nlohmann::json& cfg, const Overrides& /*ov*/) {
    constexpr const char* ctx = "fit config";
    check_fields(cfg, {"version", "dataset", "family", "domain", "refinements"}, ctx);
    const Dataset ds = read_dataset(get_field<std::string>(cfg, "dataset", ctx));
    nlohmann::json domain_json = cfg.contains("domain") ? cfg.at("domain") : ds.meta.domain;
    if (!domain_json.is_object()) {
        throw ConfigError("fit: the dataset carries no domain; give \"domain\" in the config");
    }
    const Domain domain = Domain::from_json(domain_json);
    const UtilityFamily family = UtilityFamily::from_json(cfg.at("family"), domain);
    const int refinements = get_field<int>(cfg, "refinements", ctx, kDefaultRefinements);
    const ErmResult res = erm_fit(family, ds, refinements);

    RunReport rep;
    rep.command = "fit";
    rep.config = cfg;
    rep.seeds = {{"dataset_seed", ds.meta.seed}};
    rep.notes = {"exhaustive grid search, ties to the lexicographically smallest parameters, "
                 "then local refinement at halved steps"};
    rep.sweep_variable = "n";
    rep.metric = "empirical score of the fitted utility";
    rep.cells.push_back(make_cell(static_cast<double>(ds.size()), {res.score}));
    rep.results = res.to_json();
    if (ds.meta.truth.is_object()) {
        const WaldUtility truth = WaldUtility::from_json(ds.meta.truth);
        if (truth.dim() == domain.dim()) {
            rep.results["rho_to_truth"] =
                rho(res.best, truth, domain, evaluation_grid(domain, kDefaultRhoGridPerAxis));
        }
    }
    rep.csv = "member,params,count\n";
    const auto& members = family.members();
    const auto counts = parallel_map<std::size_t>(
        members.size(), [&](std::size_t i) { return rationalized_count(members[i], domain, ds); });
    for (std::size_t i = 0; i < members.size(); ++i) {
        rep.csv += std::to_string(i) + "," + join_params(members[i].params()) + "," +
                   std::to_string(counts[i]) + "\n";
    }
    return rep;
}

// ---------------------------------------------------------------- consistency

RunReport run_consistency(const nlohmann::json& cfg, const Overrides& ov) {
    constexpr const char* ctx = "consistency config";
    check_fields(cfg,
                 {"version", "domain", "family", "truth", "noise", "n_values", "replicates", "seed",
                  "refinements", "rho_grid_per_axis", "bound"},
                 ctx);
    const Domain domain = Domain::from_json(cfg.at("domain"));
    const UtilityFamily family = UtilityFamily::from_json(cfg.at("family"), domain);
    const WaldUtility truth = WaldUtility::from_json(cfg.at("truth"));
    if (truth.dim() != domain.dim()) {
        throw ConfigError("consistency: truth and domain differ in dimension");
    }
    const NoiseModel noise = NoiseModel::from_json(cfg.at("noise"));
    auto n_values = get_field<std::vector<std::size_t>>(cfg, "n_values", ctx);
    if (n_values.empty() || std::find(n_values.begin(), n_values.end(), 0) != n_values.end()) {
        throw ConfigError("consistency: n_values must be a nonempty list of positive sizes");
    }
    std::sort(n_values.begin(), n_values.end());
    const std::size_t replicates =
        ov.replicates ? *ov.replicates : get_field<std::size_t>(cfg, "replicates", ctx, 20);
    if (replicates < 1) {
        throw ConfigError("consistency: replicates must be positive");
    }
    const std::uint64_t seed = seed_of(cfg, ov, ctx);
    const int refinements = get_field<int>(cfg, "refinements", ctx, kDefaultRefinements);
    const int per_axis = get_field<int>(cfg, "rho_grid_per_axis", ctx, kDefaultRhoGridPerAxis);
    const nlohmann::json bound_cfg = cfg.value("bound", nlohmann::json::object());
    check_fields(bound_cfg, {"K", "delta", "D", "V", "vc_k", "vc_trials"}, "consistency bound");

    const auto grid = evaluation_grid(domain, per_axis);
    const std::size_t n_max = n_values.back();
    struct Outcome {
        double rho = 0.0;
        double score = 0.0;
    };
    // Replicate r draws one dataset of size n_max; smaller n use its prefix.
    const std::size_t cells = n_values.size() * replicates;
    std::vector<Dataset> full(replicates);
    parallel_for(replicates, [&](std::size_t r) {
        full[r] = generate_dataset(domain, truth, noise, n_max, derive_seed(seed, r));
    });
    const auto outcomes = parallel_map<Outcome>(cells, [&](std::size_t c) {
        const std::size_t ni = c / replicates;
        const std::size_t r = c % replicates;
        Dataset ds = full[r];
        ds.records.resize(n_values[ni]);
        ds.meta.n = n_values[ni];
        const ErmResult fit = erm_fit(family, ds, refinements);
        return Outcome{rho(fit.best, truth, domain, grid), fit.score};
    });

    BoundParams bp;
    bp.K = get_field<double>(bound_cfg, "K", "consistency bound", 1.0);
    bp.delta = get_field<double>(bound_cfg, "delta", "consistency bound", 0.05);
    bp.D = get_field<int>(bound_cfg, "D", "consistency bound", domain.default_bound_exponent());
    nlohmann::json vc_json;
    if (bound_cfg.contains("V")) {
        bp.V = get_field<double>(bound_cfg, "V", "consistency bound");
    } else {
        const VcResult vc = vc_lower_bound(
            family, get_field<int>(bound_cfg, "vc_k", "consistency bound", 3),
            get_field<std::size_t>(bound_cfg, "vc_trials", "consistency bound", 8),
            derive_seed(seed, 0xC0FFEE));
        bp.V = std::max(1, vc.lower_bound);
        vc_json = vc.to_json();
    }
    bp.C_bar = 1.0;
    double worst_first = 0.0;
    for (std::size_t r = 0; r < replicates; ++r) {
        worst_first = std::max(worst_first, outcomes[r].rho);
    }
    const double unit_bound = bound_eval(bp, static_cast<double>(n_values.front()));
    bp.C_bar = std::max(worst_first / unit_bound, 1e-12);

    RunReport rep;
    rep.command = "consistency";
    rep.config = cfg;
    rep.seeds = {{"base", seed},
                 {"replicate_seed", "derive_seed(base, replicate)"},
                 {"vc_seed", "derive_seed(base, 0xC0FFEE)"}};
    rep.notes = {
        "each replicate draws one dataset of the largest size; smaller sizes use its prefix",
        "rho is the sup of |u_n - u*| over an evaluation lattice of the domain",
        "bound constants: K fixed, C_bar fitted so the bound equals the worst rho at the "
        "smallest n; coverage at larger n is a shape test, not an absolute-constant test",
        "bound exponent D defaults to d on boxes and 2d on cones; the gap exponent in the "
        "separation step is stated with d but derived with 2d, so D is configurable"};
    rep.sweep_variable = "n";
    rep.metric = "rho(u_n, u*)";
    rep.csv = "n,replicate,rho,score,bound\n";
    std::vector<double> medians;
    nlohmann::json coverage = nlohmann::json::object();
    Series median_series{"median rho", {}, {}};
    Series bound_series{"fitted bound", {}, {}};
    for (std::size_t ni = 0; ni < n_values.size(); ++ni) {
        const double n = static_cast<double>(n_values[ni]);
        const double b = bound_eval(bp, n);
        std::vector<double> rhos;
        std::size_t covered = 0;
        for (std::size_t r = 0; r < replicates; ++r) {
            const Outcome& o = outcomes[ni * replicates + r];
            rhos.push_back(o.rho);
            if (o.rho <= b + 1e-12) {
                ++covered;
            }
            rep.csv += std::to_string(n_values[ni]) + "," + std::to_string(r) + "," +
                       format_double(o.rho) + "," + format_double(o.score) + "," +
                       format_double(b) + "\n";
        }
        rep.cells.push_back(make_cell(n, rhos));
        medians.push_back(rep.cells.back().stats.median);
        if (ni > 0) {
            coverage[std::to_string(n_values[ni])] =
                static_cast<double>(covered) / static_cast<double>(replicates);
        }
        median_series.x.push_back(n);
        median_series.y.push_back(medians.back());
        bound_series.x.push_back(n);
        bound_series.y.push_back(b);
    }
    rep.results = {{"n_values", n_values},
                   {"replicates", replicates},
                   {"median_rho", medians},
                   {"median_weakly_decreasing", weakly_decreasing(medians)},
                   {"median_ratio_last_first",
                    medians.front() > 0.0 ? medians.back() / medians.front() : 0.0},
                   {"bound", bp.to_json()},
                   {"bound_fitted_at", n_values.front()},
                   {"coverage", coverage},
                   {"grid_size", family.size()},
                   {"rho_grid_points", grid.size()}};
    if (!vc_json.is_null()) {
        rep.results["vc"] = vc_json;
    }
    rep.chart = Chart{"consistency", "n", "rho", true, {median_series, bound_series}};
    return rep;
}

// ---------------------------------------------------------------- recovery

RunReport run_recovery(const nlohmann::json& cfg, const Overrides& ov) {
    constexpr const char* ctx = "recovery config";
    check_fields(cfg,
                 {"version", "truth", "candidates", "truncation", "k_values", "replicates", "seed",
                  "disagreement_m"},
                 ctx);
    const AAPreference truth = aa_preference_from_json(cfg.at("truth"));
    const auto candidates = aa_family_from_json(cfg.at("candidates"));
    const auto& trunc = cfg.at("truncation");
    check_fields(trunc, {"denominator", "grid"}, "recovery truncation");
    const int D = get_field<int>(trunc, "denominator", "recovery truncation");
    const int G = get_field<int>(trunc, "grid", "recovery truncation");
    auto k_values = get_field<std::vector<std::size_t>>(cfg, "k_values", ctx);
    if (k_values.empty()) {
        throw ConfigError("recovery: k_values must be nonempty");
    }
    std::sort(k_values.begin(), k_values.end());
    const std::size_t replicates =
        ov.replicates ? *ov.replicates : get_field<std::size_t>(cfg, "replicates", ctx, 3);
    const std::uint64_t seed = seed_of(cfg, ov, ctx);
    const auto m = get_field<std::size_t>(cfg, "disagreement_m", ctx, 20000);
    if (replicates < 1 || m < 1) {
        throw ConfigError("recovery: replicates and disagreement_m must be positive");
    }
    for (const auto& c : candidates) {
        if (c.n_states() != truth.n_states() || !(c.index().interval() == truth.index().interval())) {
            throw ConfigError("recovery: candidates and truth differ in states or interval");
        }
    }
    const Interval interval = truth.index().interval();
    const nlohmann::json truth_json = to_json(truth);
    bool truth_in_grid = false;
    for (const auto& c : candidates) {
        truth_in_grid = truth_in_grid || to_json(c) == truth_json;
    }

    const std::size_t k_max = std::max<std::size_t>(k_values.back(), 1);
    const auto universe = act_grid(truth.n_states(), interval, D, G);
    const std::uint64_t dis_seed = derive_seed(seed, 0xD15A);
    const auto dis = parallel_map<double>(candidates.size(), [&](std::size_t c) {
        return disagreement(candidates[c], truth, m, dis_seed).estimate;
    });
    const auto reps = parallel_map<RepDistance>(candidates.size(), [&](std::size_t c) {
        return rep_distance(candidates[c], truth, universe);
    });

    struct KCell {
        std::size_t survivors = 0;
        double max_dis = 0.0;
        double max_dV = 0.0;
        double max_du = 0.0;
        bool truth_survives = false;
        std::vector<char> alive;
    };
    std::vector<std::vector<KCell>> table(replicates, std::vector<KCell>(k_values.size()));
    parallel_for(replicates, [&](std::size_t r) {
        const std::optional<std::uint64_t> perturb =
            r == 0 ? std::nullopt : std::optional<std::uint64_t>(derive_seed(seed, r));
        const SigmaSequence sigma = build_sigma(truth.n_states(), interval, D, G, k_max, perturb);
        const ChoiceFunctionData data = generated_choices(truth, sigma);
        for (std::size_t ki = 0; ki < k_values.size(); ++ki) {
            const std::size_t k = k_values[ki];
            ChoiceFunctionData prefix{
                {data.pairs.begin(), data.pairs.begin() + static_cast<std::ptrdiff_t>(k)},
                {data.chosen.begin(), data.chosen.begin() + static_cast<std::ptrdiff_t>(k)}};
            KCell& cell = table[r][ki];
            cell.alive.assign(candidates.size(), 0);
            for (std::size_t c = 0; c < candidates.size(); ++c) {
                if (!strongly_rationalizes(candidates[c], sigma, prefix)) {
                    continue;
                }
                cell.alive[c] = 1;
                ++cell.survivors;
                cell.max_dis = std::max(cell.max_dis, dis[c]);
                cell.max_dV = std::max(cell.max_dV, reps[c].dV);
                cell.max_du = std::max(cell.max_du, reps[c].du);
                cell.truth_survives = cell.truth_survives || to_json(candidates[c]) == truth_json;
            }
            if (!strongly_rationalizes(truth, sigma, prefix)) {
                throw NumericalGuardError("recovery: the generator fails its own choices");
            }
        }
    });

    RunReport rep;
    rep.command = "recovery";
    rep.config = cfg;
    rep.seeds = {{"base", seed},
                 {"perturbation", "replicate 0 is the canonical order; replicate r > 0 shuffles "
                                  "pairs inside each diagonal with derive_seed(base, r)"},
                 {"disagreement_seed", "derive_seed(base, 0xD15A)"}};
    rep.notes = {
        "pairs of the finite experiment are enumerated along Cantor diagonals of the universe "
        "index (index sum, then first index)",
        "choices are noiseless; a candidate survives at k when its choice sets equal the "
        "observed ones on the first k pairs",
        "convergence is tracked through the worst survivor: strict-disagreement probability "
        "over random acts, and rep_distance on the act universe"};
    rep.sweep_variable = "k";
    rep.metric = "worst-survivor disagreement";
    rep.csv = "k,replicate,survivors,max_disagreement,max_dV,max_du,truth_survives\n";
    bool nesting = true;
    std::vector<std::size_t> empty_cells;
    nlohmann::json per_rep = nlohmann::json::array();
    Series worst{"median worst disagreement", {}, {}};
    for (std::size_t r = 0; r < replicates; ++r) {
        nlohmann::json series = nlohmann::json::array();
        nlohmann::json surv = nlohmann::json::array();
        for (std::size_t ki = 0; ki < k_values.size(); ++ki) {
            const KCell& cell = table[r][ki];
            if (ki > 0) {
                const KCell& prev = table[r][ki - 1];
                for (std::size_t c = 0; c < candidates.size(); ++c) {
                    nesting = nesting && (!cell.alive[c] || prev.alive[c]);
                }
            }
            if (cell.survivors == 0) {
                empty_cells.push_back(k_values[ki]);
            }
            series.push_back(cell.max_dis);
            surv.push_back(cell.survivors);
            rep.csv += std::to_string(k_values[ki]) + "," + std::to_string(r) + "," +
                       std::to_string(cell.survivors) + "," + format_double(cell.max_dis) + "," +
                       format_double(cell.max_dV) + "," + format_double(cell.max_du) + "," +
                       (cell.truth_survives ? "1" : "0") + "\n";
        }
        per_rep.push_back({{"max_disagreement", series}, {"survivors", surv}});
    }
    for (std::size_t ki = 0; ki < k_values.size(); ++ki) {
        std::vector<double> vals;
        for (std::size_t r = 0; r < replicates; ++r) {
            vals.push_back(table[r][ki].max_dis);
        }
        rep.cells.push_back(make_cell(static_cast<double>(k_values[ki]), vals));
        worst.x.push_back(static_cast<double>(k_values[ki]));
        worst.y.push_back(rep.cells.back().stats.median);
    }
    std::sort(empty_cells.begin(), empty_cells.end());
    empty_cells.erase(std::unique(empty_cells.begin(), empty_cells.end()), empty_cells.end());
    double grid_diameter = 0.0;
    for (double d : dis) {
        grid_diameter = std::max(grid_diameter, d);
    }
    rep.results = {{"k_values", k_values},
                   {"candidates", candidates.size()},
                   {"universe_size", universe.size()},
                   {"pairs_available", pair_count(universe.size())},
                   {"truth_in_grid", truth_in_grid},
                   {"survivor_nesting_holds", nesting},
                   {"no_survivor_k", empty_cells},
                   {"grid_diameter", grid_diameter},
                   {"disagreement_m", m},
                   {"replicates", per_rep}};
    rep.chart = Chart{"recovery", "k (pairs observed)", "max disagreement", false, {worst}};
    return rep;
}

// ---------------------------------------------------------------- representation sequences

RunReport run_theorem2_demo(const nlohmann::json& cfg, const Overrides& /*ov*/) {
    constexpr const char* ctx = "theorem2 config";
    check_fields(cfg, {"version", "k_max", "act_grid", "h_steps", "sequences"}, ctx);
    const int k_max = get_field<int>(cfg, "k_max", ctx, 12);
    const int h_steps = get_field<int>(cfg, "h_steps", ctx, 8);
    const auto& ag = cfg.at("act_grid");
    check_fields(ag, {"denominator", "grid"}, "theorem2 act_grid");
    const int D = get_field<int>(ag, "denominator", "theorem2 act_grid");
    const int G = get_field<int>(ag, "grid", "theorem2 act_grid");
    if (k_max < 1 || h_steps < 1) {
        throw ConfigError("theorem2: k_max and h_steps must be positive");
    }
    const auto& seqs = cfg.at("sequences");
    if (!seqs.is_array() || seqs.empty()) {
        throw ConfigError("theorem2: sequences must be a nonempty array");
    }

    RunReport rep;
    rep.command = "theorem2";
    rep.config = cfg;
    rep.seeds = nlohmann::json::object();
    rep.notes = {"parameters approach the target geometrically: target + 2^-k (start - target)",
                 "du: sup over knots; dV: sup over the act grid; dH: sup over "
                 "{0, 1/h, ..., 1}^S"};
    rep.sweep_variable = "k";
    rep.metric = "dV across sequences";
    rep.csv = "sequence,k,du,dV,dH\n";
    nlohmann::json out = nlohmann::json::array();
    std::vector<std::vector<double>> dv_by_k(static_cast<std::size_t>(k_max) + 1);
    Chart chart{"representation convergence", "k", "distance", true, {}};
    for (const auto& s : seqs) {
        check_fields(s, {"name", "target", "start"}, "theorem2 sequence");
        const auto name = get_field<std::string>(s, "name", "theorem2 sequence");
        const AAPreference target = aa_preference_from_json(s.at("target"));
        const AAPreference start = aa_preference_from_json(s.at("start"));
        const auto grid = act_grid(target.n_states(), target.index().interval(), D, G);
        std::vector<double> du, dv, dh;
        for (int k = 0; k <= k_max; ++k) {
            const AAPreference pk = interpolate_preference(target, start, std::ldexp(1.0, -k));
            const RepDistance rd = rep_distance(pk, target, grid);
            du.push_back(rd.du);
            dv.push_back(rd.dV);
            dh.push_back(aggregator_distance(pk, target, h_steps));
            dv_by_k[static_cast<std::size_t>(k)].push_back(rd.dV);
            rep.csv += name + "," + std::to_string(k) + "," + format_double(rd.du) + "," +
                       format_double(rd.dV) + "," + format_double(dh.back()) + "\n";
        }
        std::vector<double> ks(du.size());
        for (std::size_t k = 0; k < ks.size(); ++k) {
            ks[k] = static_cast<double>(k);
        }
        chart.series.push_back({name + " dV", ks, dv});
        chart.series.push_back({name + " dH", ks, dh});
        out.push_back({{"name", name},
                       {"kind", target.kind_name()},
                       {"du", du},
                       {"dV", dv},
                       {"dH", dh},
                       {"du_strictly_decreasing", strictly_decreasing(du)},
                       {"dV_strictly_decreasing", strictly_decreasing(dv)},
                       {"dH_strictly_decreasing", strictly_decreasing(dh)},
                       {"final", {{"du", du.back()}, {"dV", dv.back()}, {"dH", dh.back()}}}});
    }
    for (int k = 0; k <= k_max; ++k) {
        rep.cells.push_back(make_cell(k, dv_by_k[static_cast<std::size_t>(k)]));
    }
    rep.results = {{"k_max", k_max}, {"h_steps", h_steps}, {"sequences", out}};
    rep.chart = chart;
    return rep;
}

RunReport run_ce_continuity(const nlohmann::json& cfg, const Overrides& /*ov*/) {
    constexpr const char* ctx = "ce-continuity config";
    check_fields(cfg, {"version", "k_max", "index", "p", "q"}, ctx);
    const int k_max = get_field<int>(cfg, "k_max", ctx, 12);
    const auto& idx = cfg.at("index");
    check_fields(idx, {"knots", "target_values", "start_values"}, "ce-continuity index");
    const auto knots = get_field<std::vector<double>>(idx, "knots", "ce-continuity index");
    const BernoulliIndex target(knots, get_field<std::vector<double>>(idx, "target_values",
                                                                      "ce-continuity index"));
    const BernoulliIndex start(knots, get_field<std::vector<double>>(idx, "start_values",
                                                                     "ce-continuity index"));
    const Interval interval = target.interval();
    const Lottery p = lottery_from_json(cfg.at("p"), interval);
    const Lottery q = lottery_from_json(cfg.at("q"), interval);
    if (k_max < 1) {
        throw ConfigError("ce-continuity: k_max must be positive");
    }
    const double ce_limit = ce_lottery(target, p);

    RunReport rep;
    rep.command = "ce-continuity";
    rep.config = cfg;
    rep.notes = {"index values approach the target as target + 2^-k (start - target)",
                 "lotteries approach p as (1 - 2^-k) p + 2^-k q",
                 "certainty equivalents by bisection to 1e-10"};
    rep.sweep_variable = "k";
    rep.metric = "|ce_k - ce|";
    rep.csv = "k,ce_k,ce_limit,abs_error\n";
    std::vector<double> errors;
    Series s{"|ce_k - ce|", {}, {}};
    for (int k = 0; k <= k_max; ++k) {
        const double t = std::ldexp(1.0, -k);
        std::vector<double> vals(knots.size());
        for (std::size_t i = 0; i < vals.size(); ++i) {
            vals[i] = target.values()[i] + t * (start.values()[i] - target.values()[i]);
        }
        const BernoulliIndex uk(knots, vals);
        const Lottery pk = lottery_mixture(p, q, 1.0 - t);
        const double ce_k = ce_lottery(uk, pk);
        const double err = std::abs(ce_k - ce_limit);
        errors.push_back(err);
        rep.cells.push_back(make_cell(k, {err}));
        s.x.push_back(k);
        s.y.push_back(err);
        rep.csv += std::to_string(k) + "," + format_double(ce_k) + "," + format_double(ce_limit) +
                   "," + format_double(err) + "\n";
    }
    rep.results = {{"ce_limit", ce_limit},
                   {"abs_error", errors},
                   {"strictly_decreasing", strictly_decreasing(errors)},
                   {"final_error", errors.back()}};
    rep.chart = Chart{"certainty-equivalent continuity", "k", "|ce_k - ce|", true, {s}};
    return rep;
}

RunReport run_nonidentification_demo(const nlohmann::json& cfg, const Overrides& ov) {
    constexpr const char* ctx = "nonid config";
    check_fields(cfg, {"version", "k_max", "values", "prior", "m", "seed"}, ctx);
    const int k_max = get_field<int>(cfg, "k_max", ctx, 50);
    const auto v = get_field<std::vector<double>>(cfg, "values", ctx, {0.0, 0.5, 1.0});
    const Prior prior(get_field<std::vector<double>>(cfg, "prior", ctx, {0.5, 0.5}));
    const auto m = get_field<std::size_t>(cfg, "m", ctx, 20000);
    const std::uint64_t seed = seed_of(cfg, ov, ctx);
    if (k_max < 1 || v.size() < 2 || m < 1) {
        throw ConfigError("nonid: needs k_max >= 1, at least two prizes and m >= 1");
    }
    const std::size_t n_states = prior.size();
    const std::size_t n_prizes = v.size();

    // Acts: one distribution over the prizes per state, uniform on the simplex.
    auto random_dist = [&](Stream& rng) {
        std::vector<double> w(n_prizes);
        double s = 0.0;
        for (double& x : w) {
            x = -std::log(1.0 - rng.uniform());
            s += x;
        }
        for (double& x : w) {
            x /= s;
        }
        return w;
    };
    std::vector<std::vector<double>> f_acts(m), g_acts(m);
    {
        const std::size_t batches = (m + kPairBatch - 1) / kPairBatch;
        parallel_for(batches, [&](std::size_t b) {
            Stream rng(seed, b);
            for (std::size_t i = b * kPairBatch; i < std::min(m, (b + 1) * kPairBatch); ++i) {
                for (auto* act : {&f_acts[i], &g_acts[i]}) {
                    act->clear();
                    for (std::size_t s = 0; s < n_states; ++s) {
                        const auto d = random_dist(rng);
                        act->insert(act->end(), d.begin(), d.end());
                    }
                }
            }
        });
    }
    auto value = [&](const std::vector<double>& act, const std::vector<double>& util) {
        double total = 0.0;
        for (std::size_t s = 0; s < n_states; ++s) {
            double e = 0.0;
            for (std::size_t j = 0; j < n_prizes; ++j) {
                e += act[s * n_prizes + j] * util[j];
            }
            total += prior[s] * e;
        }
        return total;
    };

    RunReport rep;
    rep.command = "nonid";
    rep.config = cfg;
    rep.seeds = {{"base", seed}, {"derivation", "act pair batch b draws from stream (seed, b)"}};
    rep.notes = {"prize set of size " + std::to_string(n_prizes) +
                     "; representations v_k = beta_k 1 + v / k with |v_k| = 1 (Euclidean)",
                 "disagreement: strict ranking reversals against v over random act pairs",
                 "distance to constant: Euclidean distance of v_k to the nearest constant vector"};
    rep.sweep_variable = "k";
    rep.metric = "distance of v_k to the constants";
    rep.csv = "k,beta,norm,disagreement,distance_to_constant\n";
    std::vector<double> dis_series, dist_series;
    Series s{"distance to constant", {}, {}};
    for (int k = 1; k <= k_max; ++k) {
        const double beta = normalization_shift(v, k);
        std::vector<double> vk(n_prizes);
        double norm = 0.0;
        double mean = 0.0;
        for (std::size_t j = 0; j < n_prizes; ++j) {
            vk[j] = beta + v[j] / k;
            norm += vk[j] * vk[j];
            mean += vk[j];
        }
        norm = std::sqrt(norm);
        mean /= static_cast<double>(n_prizes);
        double dist = 0.0;
        for (double x : vk) {
            dist += (x - mean) * (x - mean);
        }
        dist = std::sqrt(dist);
        std::vector<double> terms(m);
        parallel_for(m, [&](std::size_t i) {
            const double a = value(f_acts[i], v) - value(g_acts[i], v);
            const double b = value(f_acts[i], vk) - value(g_acts[i], vk);
            terms[i] = (a > 0.0 && b < 0.0) || (a < 0.0 && b > 0.0) ? 1.0 : 0.0;
        });
        const double d = summarize_terms(terms).estimate;
        dis_series.push_back(d);
        dist_series.push_back(dist);
        rep.cells.push_back(make_cell(k, {dist}));
        s.x.push_back(k);
        s.y.push_back(dist);
        rep.csv += std::to_string(k) + "," + format_double(beta) + "," + format_double(norm) +
                   "," + format_double(d) + "," + format_double(dist) + "\n";
    }
    const bool all_zero = std::all_of(dis_series.begin(), dis_series.end(),
                                      [](double d) { return d == 0.0; });
    rep.results = {{"disagreement", dis_series},
                   {"distance_to_constant", dist_series},
                   {"disagreement_identically_zero", all_zero},
                   {"distance_factor_first_last", dist_series.front() / dist_series.back()}};
    rep.chart = Chart{"non-identification", "k", "distance to constant", true, {s}};
    return rep;
}

// ---------------------------------------------------------------- separation / vc / bound

RunReport run_separation(const nlohmann::json& cfg, const Overrides& ov) {
    constexpr const char* ctx = "separation config";
    check_fields(cfg,
                 {"version", "domain", "family", "noise", "n_pairs", "m", "D", "seed",
                  "rho_grid_per_axis"},
                 ctx);
    const Domain domain = Domain::from_json(cfg.at("domain"));
    const UtilityFamily family = UtilityFamily::from_json(cfg.at("family"), domain);
    const NoiseModel noise = NoiseModel::from_json(cfg.at("noise"));
    const auto n_pairs = get_field<std::size_t>(cfg, "n_pairs", ctx, 10);
    const auto m = get_field<std::size_t>(cfg, "m", ctx, 200000);
    const int D = get_field<int>(cfg, "D", ctx, domain.default_bound_exponent());
    const std::uint64_t seed = seed_of(cfg, ov, ctx);
    const int per_axis = get_field<int>(cfg, "rho_grid_per_axis", ctx, kDefaultRhoGridPerAxis);
    const SeparationReport sr =
        separation_exponent_check(family, noise, n_pairs, m, D, seed, per_axis);

    RunReport rep;
    rep.command = "separation";
    rep.config = cfg;
    rep.seeds = {{"base", seed},
                 {"pair_choice", "stream (derive_seed(base, 0), 0)"},
                 {"pair_i_sample", "derive_seed(base, i + 1)"}};
    rep.notes = {"gap = mu(u, u) - mu(u', u) on a common sample of problems; standard error "
                 "from the paired differences",
                 "exponent D defaults to d on boxes and 2d on cones; the gap bound is stated "
                 "with exponent d but derived with 2d, so D is configurable"};
    rep.sweep_variable = "rho";
    rep.metric = "separation gap";
    rep.csv = sr.csv();
    std::vector<std::size_t> order(sr.pairs.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return sr.pairs[a].estimate.rho_value < sr.pairs[b].estimate.rho_value;
    });
    Series gaps{"gap", {}, {}};
    nlohmann::json pairs = nlohmann::json::array();
    for (std::size_t i : order) {
        const auto& p = sr.pairs[i];
        rep.cells.push_back(make_cell(p.estimate.rho_value, {p.estimate.gap}));
        gaps.x.push_back(p.estimate.rho_value);
        gaps.y.push_back(p.estimate.gap);
    }
    for (const auto& p : sr.pairs) {
        pairs.push_back({{"truth", p.truth.to_json()},
                         {"other", p.other.to_json()},
                         {"rho", p.estimate.rho_value},
                         {"gap", p.estimate.gap},
                         {"std_error", p.estimate.std_error},
                         {"mu_true", p.estimate.mu_true},
                         {"mu_other", p.estimate.mu_other},
                         {"ratio", p.ratio}});
    }
    rep.results = {{"D", D},
                   {"n_pairs", n_pairs},
                   {"m", m},
                   {"min_ratio", sr.min_ratio},
                   {"violations", sr.violations},
                   {"insignificant", sr.insignificant},
                   {"skipped_identical", sr.skipped_identical},
                   {"all_significant", sr.insignificant == 0},
                   {"pairs", pairs}};
    rep.chart = Chart{"separation", "rho", "gap", false, {gaps}};
    return rep;
}

RunReport run_vc(const nlohmann::json& cfg, const Overrides& ov) {
    constexpr const char* ctx = "vc config";
    check_fields(cfg, {"version", "domain", "family", "k", "trials", "seed", "tie_rule"}, ctx);
    const Domain domain = Domain::from_json(cfg.at("domain"));
    const UtilityFamily family = UtilityFamily::from_json(cfg.at("family"), domain);
    const int k = get_field<int>(cfg, "k", ctx, 3);
    const auto trials = get_field<std::size_t>(cfg, "trials", ctx, 20);
    const std::uint64_t seed = seed_of(cfg, ov, ctx);
    const auto rule_name = get_field<std::string>(cfg, "tie_rule", ctx, "weak");
    if (rule_name != "weak" && rule_name != "strict") {
        throw ConfigError("vc: tie_rule must be \"weak\" or \"strict\"");
    }
    const TieRule rule = rule_name == "weak" ? TieRule::Weak : TieRule::Strict;
    const VcResult vc = vc_lower_bound(family, k, trials, seed, rule);

    RunReport rep;
    rep.command = "vc";
    rep.config = cfg;
    rep.seeds = {{"base", seed}, {"trial_t", "stream (base, t)"}};
    rep.notes = {"a labeling is realized when some grid member rationalizes every pair with "
                 "the configured tie rule; pairs every member is indifferent on are redrawn",
                 "even trials draw generic pairs, odd trials place pairs on level sets of one "
                 "random member",
                 "a lower bound: the search may miss witnesses"};
    rep.sweep_variable = "k";
    rep.metric = "fraction of trials shattering the first k pairs";
    rep.csv = "trial,placement,shattered\n";
    for (std::size_t t = 0; t < vc.per_trial.size(); ++t) {
        rep.csv += std::to_string(t) + "," + (t % 2 == 1 && family.size() > 1 ? "level_set" : "generic") +
                   "," + std::to_string(vc.per_trial[t]) + "\n";
    }
    Series frac{"shattered fraction", {}, {}};
    for (int kp = 1; kp <= k; ++kp) {
        std::size_t hit = 0;
        for (int s : vc.per_trial) {
            hit += s >= kp ? 1 : 0;
        }
        const double f = static_cast<double>(hit) / static_cast<double>(vc.per_trial.size());
        rep.cells.push_back(make_cell(kp, {f}));
        frac.x.push_back(kp);
        frac.y.push_back(f);
    }
    rep.results = vc.to_json();
    rep.results["tie_rule"] = rule_name;
    rep.results["grid_size"] = family.size();
    rep.chart = Chart{"vc witnesses", "k", "fraction shattered", false, {frac}};
    return rep;
}

RunReport run_bound(const nlohmann::json& cfg, const Overrides& /*ov*/) {
    constexpr const char* ctx = "bound config";
    check_fields(cfg, {"version", "K", "C_bar", "V", "D", "delta", "n_values"}, ctx);
    BoundParams bp;
    bp.K = get_field<double>(cfg, "K", ctx, 1.0);
    bp.C_bar = get_field<double>(cfg, "C_bar", ctx, 1.0);
    bp.V = get_field<double>(cfg, "V", ctx, 1.0);
    bp.D = get_field<int>(cfg, "D", ctx, 1);
    bp.delta = get_field<double>(cfg, "delta", ctx, 0.05);
    auto n_values = get_field<std::vector<double>>(cfg, "n_values", ctx);
    if (n_values.empty()) {
        throw ConfigError("bound: n_values must be nonempty");
    }
    std::sort(n_values.begin(), n_values.end());
    RunReport rep;
    rep.command = "bound";
    rep.config = cfg;
    rep.notes = {"C_bar (K sqrt(V/n) + sqrt(2 ln(1/delta)/n))^(1/D)"};
    rep.sweep_variable = "n";
    rep.metric = "bound";
    rep.csv = "n,bound\n";
    std::vector<double> values;
    Series s{"bound", {}, {}};
    for (double n : n_values) {
        const double b = bound_eval(bp, n);
        values.push_back(b);
        rep.cells.push_back(make_cell(n, {b}));
        s.x.push_back(n);
        s.y.push_back(b);
        rep.csv += format_double(n) + "," + format_double(b) + "\n";
    }
    rep.results = {{"params", bp.to_json()}, {"values", values}};
    rep.chart = Chart{"bound", "n", "bound", true, {s}};
    return rep;
}

// ---------------------------------------------------------------- dense uniqueness

RunReport run_dense_uniqueness_check(const nlohmann::json& cfg, const Overrides& /*ov*/) {
    constexpr const char* ctx = "uniqueness config";
    check_fields(cfg, {"version", "candidates", "schedule"}, ctx);
    const auto members = aa_family_from_json(cfg.at("candidates"));
    const auto schedule = get_field<std::vector<std::vector<int>>>(cfg, "schedule", ctx);
    if (schedule.empty()) {
        throw ConfigError("uniqueness: schedule must be nonempty");
    }
    for (const auto& lvl : schedule) {
        if (lvl.size() != 2) {
            throw ConfigError("uniqueness: schedule entries are [denominator, grid]");
        }
    }
    const std::size_t n = members.size();
    std::vector<nlohmann::json> jsons;
    for (const auto& p : members) {
        jsons.push_back(to_json(p));
    }
    std::vector<IndexPair> todo;
    std::size_t identical = 0;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            if (jsons[a] == jsons[b]) {
                ++identical;
            } else {
                todo.emplace_back(a, b);
            }
        }
    }
    std::vector<int> level(todo.size(), -1);
    const Interval interval = members.front().index().interval();
    for (std::size_t L = 0; L < schedule.size(); ++L) {
        const auto universe =
            act_grid(members.front().n_states(), interval, schedule[L][0], schedule[L][1]);
        std::vector<std::vector<double>> values(n);
        parallel_for(n, [&](std::size_t i) {
            values[i].resize(universe.size());
            for (std::size_t f = 0; f < universe.size(); ++f) {
                values[i][f] = act_value(members[i], universe[f]);
            }
        });
        parallel_for(todo.size(), [&](std::size_t t) {
            if (level[t] >= 0) {
                return;
            }
            const auto& va = values[todo[t].first];
            const auto& vb = values[todo[t].second];
            for (std::size_t f = 0; f < universe.size(); ++f) {
                for (std::size_t g = f + 1; g < universe.size(); ++g) {
                    if (opposite(va[f] - va[g], vb[f] - vb[g])) {
                        level[t] = static_cast<int>(L);
                        return;
                    }
                }
            }
        });
    }

    RunReport rep;
    rep.command = "uniqueness";
    rep.config = cfg;
    rep.notes = {"two members are separated at a level when some pair of acts from that "
                 "level's universe is strictly ranked in opposite directions",
                 "level L uses act_grid with the L-th (denominator, grid) of the schedule"};
    rep.sweep_variable = "level";
    rep.metric = "pairs first separated at the level";
    rep.csv = "member_a,member_b,level\n";
    std::vector<std::size_t> per_level(schedule.size(), 0);
    std::size_t unseparated = 0;
    int max_level = -1;
    for (std::size_t t = 0; t < todo.size(); ++t) {
        rep.csv += std::to_string(todo[t].first) + "," + std::to_string(todo[t].second) + "," +
                   std::to_string(level[t]) + "\n";
        if (level[t] < 0) {
            ++unseparated;
        } else {
            ++per_level[static_cast<std::size_t>(level[t])];
            max_level = std::max(max_level, level[t]);
        }
    }
    Series s{"first separated", {}, {}};
    for (std::size_t L = 0; L < schedule.size(); ++L) {
        rep.cells.push_back(make_cell(static_cast<double>(L), {static_cast<double>(per_level[L])}));
        s.x.push_back(static_cast<double>(L));
        s.y.push_back(static_cast<double>(per_level[L]));
    }
    rep.results = {{"members", n},
                   {"distinct_pairs", todo.size()},
                   {"skipped_identical", identical},
                   {"unseparated", unseparated},
                   {"max_level_needed", max_level},
                   {"first_separated_per_level", per_level}};
    rep.chart = Chart{"dense uniqueness", "schedule level", "pairs first separated", false, {s}};
    return rep;
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"gen",        "fit",      "consistency",
                                                "recovery",   "theorem2", "ce-continuity",
                                                "nonid",      "separation", "vc",
                                                "uniqueness", "bound"};
    return names;
}

} // namespace reclab
