#include "reclab/aa_prefs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace reclab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts> struct overloaded : Ts... {
    using Ts::operator()...;
};

} // namespace

StateSpace::StateSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.empty()) {
        throw ConfigError("state space needs at least one state");
    }
}

StateSpace StateSpace::numbered(std::size_t n) {
    std::vector<std::string> labels;
    for (std::size_t s = 0; s < n; ++s) {
        labels.push_back("s" + std::to_string(s + 1));
    }
    return StateSpace(std::move(labels));
}

Act::Act(std::vector<Lottery> per_state) : per_state_(std::move(per_state)) {
    if (per_state_.empty()) {
        throw ConfigError("an act needs at least one state");
    }
    for (const auto& p : per_state_) {
        if (!(p.interval() == per_state_.front().interval())) {
            throw ShapeError("all lotteries of an act must share one interval");
        }
    }
}

Act Act::constant(const Lottery& p, std::size_t n_states) {
    return Act(std::vector<Lottery>(n_states, p));
}

BernoulliIndex::BernoulliIndex(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
    if (knots_.size() < 2 || knots_.size() != values_.size()) {
        throw ConfigError("Bernoulli index needs >= 2 knots with one value each");
    }
    Interval(knots_.front(), knots_.back()); // validates a < b
    for (std::size_t i = 1; i < knots_.size(); ++i) {
        if (!(knots_[i - 1] < knots_[i])) {
            throw ConfigError("Bernoulli index knots must be strictly increasing");
        }
        if (!(values_[i - 1] <= values_[i])) {
            throw ConfigError("Bernoulli index values must be weakly increasing");
        }
        if (!(values_[i - 1] < values_[i])) {
            strict_ = false;
        }
    }
    if (values_.front() != 0.0 || values_.back() != 1.0) {
        throw ConfigError("Bernoulli index must satisfy u(a) = 0 and u(b) = 1");
    }
}

BernoulliIndex BernoulliIndex::identity(Interval interval) {
    return BernoulliIndex({interval.a(), interval.b()}, {0.0, 1.0});
}

double BernoulliIndex::operator()(double x) const {
    if (x <= knots_.front()) {
        return values_.front();
    }
    if (x >= knots_.back()) {
        return values_.back();
    }
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
    const auto hi = static_cast<std::size_t>(it - knots_.begin());
    const std::size_t lo = hi - 1;
    const double t = (x - knots_[lo]) / (knots_[hi] - knots_[lo]);
    return values_[lo] + t * (values_[hi] - values_[lo]);
}

Prior::Prior(std::vector<double> weights) : weights_(std::move(weights)) {
    if (weights_.empty()) {
        throw ConfigError("prior needs at least one state");
    }
    double total = 0.0;
    for (double w : weights_) {
        if (!(w >= 0.0)) {
            throw ConfigError("prior weights must be nonnegative");
        }
        total += w;
    }
    if (std::abs(total - 1.0) > kProbTol) {
        throw ConfigError("prior weights sum to " + std::to_string(total));
    }
}

double Prior::dot(std::span<const double> z) const {
    if (z.size() != weights_.size()) {
        throw ShapeError("prior and utility vector differ in state count");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        s += weights_[i] * z[i];
    }
    return s;
}

namespace {

void simplex_counts(std::size_t n, int remaining, std::vector<int>& counts, std::size_t pos,
                    std::vector<std::vector<int>>& out) {
    if (pos + 1 == n) {
        counts[pos] = remaining;
        out.push_back(counts);
        return;
    }
    for (int c = remaining; c >= 0; --c) {
        counts[pos] = c;
        simplex_counts(n, remaining - c, counts, pos + 1, out);
    }
}

std::vector<std::vector<int>> simplex_count_vectors(std::size_t n_states, int resolution) {
    if (n_states == 0 || resolution < 1) {
        throw ConfigError("simplex grid needs >= 1 state and resolution >= 1");
    }
    std::vector<std::vector<int>> out;
    std::vector<int> counts(n_states, 0);
    simplex_counts(n_states, resolution, counts, 0, out);
    return out;
}

Prior prior_from_counts(const std::vector<int>& counts, int resolution) {
    std::vector<double> w;
    w.reserve(counts.size());
    for (int c : counts) {
        w.push_back(static_cast<double>(c) / resolution);
    }
    return Prior(std::move(w));
}

} // namespace

std::vector<Prior> simplex_grid(std::size_t n_states, int resolution) {
    std::vector<Prior> out;
    for (const auto& counts : simplex_count_vectors(n_states, resolution)) {
        out.push_back(prior_from_counts(counts, resolution));
    }
    return out;
}

CostFunction::CostFunction(std::vector<Prior> grid, std::vector<double> costs)
    : grid_(std::move(grid)), costs_(std::move(costs)) {
    if (grid_.empty() || grid_.size() != costs_.size()) {
        throw ConfigError("cost function needs one cost per grid prior");
    }
    double lowest = kInf;
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        if (grid_[i].size() != grid_.front().size()) {
            throw ShapeError("cost grid priors differ in state count");
        }
        if (std::isnan(costs_[i]) || costs_[i] == -kInf) {
            throw ConfigError("costs must be finite or +infinity");
        }
        lowest = std::min(lowest, costs_[i]);
    }
    if (lowest == kInf) {
        throw ConfigError("cost function must be finite somewhere");
    }
    for (double& c : costs_) {
        if (c != kInf) {
            c = std::max(0.0, c - lowest);
        }
    }
}

CostFunction CostFunction::from_function(std::size_t n_states, int resolution,
                                         const std::function<double(const Prior&)>& cost) {
    auto grid = simplex_grid(n_states, resolution);
    std::vector<double> costs;
    costs.reserve(grid.size());
    for (const auto& p : grid) {
        costs.push_back(cost(p));
    }
    CostFunction out(std::move(grid), std::move(costs));
    out.resolution_ = resolution;
    return out;
}

CostFunction CostFunction::quadratic(std::vector<double> center, double scale, int resolution) {
    if (!(scale >= 0.0) || center.empty()) {
        throw ConfigError("quadratic cost needs a center and scale >= 0");
    }
    return from_function(center.size(), resolution, [&](const Prior& p) {
        double s = 0.0;
        for (std::size_t i = 0; i < center.size(); ++i) {
            s += (p[i] - center[i]) * (p[i] - center[i]);
        }
        return scale * s;
    });
}

CostFunction CostFunction::indicator(const std::vector<Prior>& priors, std::size_t n_states,
                                     int resolution) {
    if (priors.empty()) {
        throw ConfigError("indicator cost needs at least one prior");
    }
    auto grid = simplex_grid(n_states, resolution);
    std::vector<double> costs(grid.size(), kInf);
    for (const auto& p : priors) {
        if (p.size() != n_states) {
            throw ShapeError("indicator prior has the wrong state count");
        }
        const auto it = std::find(grid.begin(), grid.end(), p);
        if (it == grid.end()) {
            grid.push_back(p);
            costs.push_back(0.0);
        } else {
            costs[static_cast<std::size_t>(it - grid.begin())] = 0.0;
        }
    }
    CostFunction out(std::move(grid), std::move(costs));
    out.resolution_ = resolution;
    return out;
}

double CostFunction::max_finite_cost() const {
    double m = 0.0;
    for (double c : costs_) {
        if (c != kInf) {
            m = std::max(m, c);
        }
    }
    return m;
}

bool CostFunction::convex_on_grid() const {
    if (resolution_ < 1) {
        return true;
    }
    std::map<std::vector<int>, double> by_counts;
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        std::vector<int> counts;
        bool on_lattice = true;
        for (double w : grid_[i].weights()) {
            const double scaled = w * resolution_;
            const double r = std::round(scaled);
            on_lattice = on_lattice && std::abs(scaled - r) < 1e-9;
            counts.push_back(static_cast<int>(r));
        }
        if (on_lattice) {
            by_counts[counts] = costs_[i];
        }
    }
    const std::size_t n = n_states();
    for (const auto& [counts, mid] : by_counts) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j || counts[i] == 0 || counts[j] == 0) {
                    continue;
                }
                auto lo = counts;
                auto hi = counts;
                --lo[i];
                ++lo[j];
                ++hi[i];
                --hi[j];
                const auto a = by_counts.find(lo);
                const auto b = by_counts.find(hi);
                if (a == by_counts.end() || b == by_counts.end() || a->second == kInf ||
                    b->second == kInf) {
                    continue;
                }
                if (a->second + b->second < 2.0 * mid - 1e-12) {
                    return false;
                }
            }
        }
    }
    return true;
}

AAPreference::AAPreference(Aggregator aggregator, BernoulliIndex index, StateSpace states)
    : aggregator_(std::move(aggregator)), index_(std::move(index)), states_(std::move(states)) {
    const std::size_t n = states_.size();
    std::visit(overloaded{
                   [&](const ExpectedUtility& eu) {
                       if (eu.prior.size() != n) {
                           throw ShapeError("EU prior does not match the state space");
                       }
                   },
                   [&](const MaxMin& mm) {
                       if (mm.priors.empty()) {
                           throw ConfigError("max-min preference needs at least one prior");
                       }
                       for (const auto& p : mm.priors) {
                           if (p.size() != n) {
                               throw ShapeError("max-min prior does not match the state space");
                           }
                       }
                   },
                   [&](const Variational& v) {
                       if (v.cost.n_states() != n) {
                           throw ShapeError("cost grid does not match the state space");
                       }
                   },
               },
               aggregator_);
}

const char* AAPreference::kind_name() const {
    return std::visit(overloaded{
                          [](const ExpectedUtility&) { return "eu"; },
                          [](const MaxMin&) { return "maxmin"; },
                          [](const Variational&) { return "variational"; },
                      },
                      aggregator_);
}

double expected_utility(const BernoulliIndex& u, const Lottery& p) {
    if (!(p.interval() == u.interval())) {
        throw ShapeError("lottery interval differs from the index interval");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        s += p.probs()[i] * u(p.support()[i]);
    }
    return s;
}

double aggregator_eval(const AAPreference& pref, std::span<const double> z) {
    if (z.size() != pref.n_states()) {
        throw ShapeError("utility vector does not match the state space");
    }
    return std::visit(overloaded{
                          [&](const ExpectedUtility& eu) { return eu.prior.dot(z); },
                          [&](const MaxMin& mm) {
                              double best = kInf;
                              for (const auto& p : mm.priors) {
                                  best = std::min(best, p.dot(z));
                              }
                              return best;
                          },
                          [&](const Variational& v) {
                              double best = kInf;
                              const auto& grid = v.cost.grid();
                              const auto& costs = v.cost.costs();
                              for (std::size_t i = 0; i < grid.size(); ++i) {
                                  if (costs[i] != kInf) {
                                      best = std::min(best, grid[i].dot(z) + costs[i]);
                                  }
                              }
                              return best;
                          },
                      },
                      pref.aggregator());
}

double act_value(const AAPreference& pref, const Act& f) {
    if (f.size() != pref.n_states()) {
        throw ShapeError("act does not match the state space");
    }
    std::vector<double> z(f.size());
    for (std::size_t s = 0; s < f.size(); ++s) {
        z[s] = expected_utility(pref.index(), f[s]);
    }
    return aggregator_eval(pref, z);
}

double invert_index(const BernoulliIndex& u, double level) {
    if (!u.strictly_increasing()) {
        throw NotStrictlyIncreasing("certainty equivalents need a strictly increasing index");
    }
    double lo = u.knots().front();
    double hi = u.knots().back();
    if (level <= 0.0) {
        return lo;
    }
    if (level >= 1.0) {
        return hi;
    }
    while (hi - lo > kCeTolerance) {
        const double mid = 0.5 * (lo + hi);
        if (u(mid) < level) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double ce_lottery(const BernoulliIndex& u, const Lottery& p) {
    if (!u.strictly_increasing()) {
        throw NotStrictlyIncreasing("certainty equivalents need a strictly increasing index");
    }
    if (p.is_degenerate()) {
        return p.support().front();
    }
    return invert_index(u, expected_utility(u, p));
}

double ce_act(const AAPreference& pref, const Act& f) {
    return invert_index(pref.index(), act_value(pref, f));
}

DominanceVerdict act_dominates(const Act& f, const Act& g) {
    if (f.size() != g.size()) {
        throw ShapeError("acts differ in state count");
    }
    bool all_equal = true;
    bool all_weak_up = true;
    bool all_strict_up = true;
    bool all_weak_down = true;
    bool all_strict_down = true;
    for (std::size_t s = 0; s < f.size(); ++s) {
        const auto v = fosd_compare(f[s], g[s]);
        all_equal = all_equal && v == DominanceVerdict::Equal;
        all_weak_up = all_weak_up && weakly_dominates(v);
        all_strict_up = all_strict_up && v == DominanceVerdict::StrictlyDominates;
        all_weak_down = all_weak_down && weakly_dominates(swapped(v));
        all_strict_down = all_strict_down && v == DominanceVerdict::StrictlyDominatedBy;
    }
    if (all_equal) {
        return DominanceVerdict::Equal;
    }
    if (all_strict_up) {
        return DominanceVerdict::StrictlyDominates;
    }
    if (all_weak_up) {
        return DominanceVerdict::Dominates;
    }
    if (all_strict_down) {
        return DominanceVerdict::StrictlyDominatedBy;
    }
    if (all_weak_down) {
        return DominanceVerdict::DominatedBy;
    }
    return DominanceVerdict::Incomparable;
}

RepDistance rep_distance(const AAPreference& pref1, const AAPreference& pref2,
                         std::span<const Act> grid) {
    if (pref1.n_states() != pref2.n_states()) {
        throw ShapeError("rep_distance needs a common state space");
    }
    if (grid.empty()) {
        throw ConfigError("rep_distance needs a nonempty act grid");
    }
    const auto& u1 = pref1.index();
    const auto& u2 = pref2.index();
    if (!(u1.interval() == u2.interval())) {
        throw ShapeError("indices live on different intervals");
    }
    RepDistance out;
    std::vector<double> knots;
    std::set_union(u1.knots().begin(), u1.knots().end(), u2.knots().begin(), u2.knots().end(),
                   std::back_inserter(knots));
    for (double x : knots) {
        out.du = std::max(out.du, std::abs(u1(x) - u2(x)));
    }
    for (const auto& f : grid) {
        out.dV = std::max(out.dV, std::abs(act_value(pref1, f) - act_value(pref2, f)));
    }
    return out;
}

double aggregator_distance(const AAPreference& pref1, const AAPreference& pref2, int steps) {
    if (pref1.n_states() != pref2.n_states() || steps < 1) {
        throw ShapeError("aggregator_distance needs a common state space and steps >= 1");
    }
    const std::size_t n = pref1.n_states();
    std::vector<int> idx(n, 0);
    std::vector<double> z(n, 0.0);
    double out = 0.0;
    while (true) {
        for (std::size_t s = 0; s < n; ++s) {
            z[s] = static_cast<double>(idx[s]) / steps;
        }
        out = std::max(out, std::abs(aggregator_eval(pref1, z) - aggregator_eval(pref2, z)));
        std::size_t s = 0;
        while (s < n && idx[s] == steps) {
            idx[s] = 0;
            ++s;
        }
        if (s == n) {
            break;
        }
        ++idx[s];
    }
    return out;
}

std::vector<Act> act_grid(std::size_t n_states, Interval interval, int denominator_bound,
                          int grid_count, std::size_t cap) {
    const auto lotteries = enumerate_rational_lotteries(interval, denominator_bound, grid_count, cap);
    std::size_t total = 1;
    for (std::size_t s = 0; s < n_states; ++s) {
        if (total > cap / lotteries.size()) {
            throw NumericalGuardError("act grid exceeds the enumeration cap");
        }
        total *= lotteries.size();
    }
    std::vector<Act> out;
    out.reserve(total);
    std::vector<std::size_t> idx(n_states, 0);
    for (std::size_t k = 0; k < total; ++k) {
        std::size_t rest = k;
        for (std::size_t s = n_states; s-- > 0;) {
            idx[s] = rest % lotteries.size();
            rest /= lotteries.size();
        }
        std::vector<Lottery> per_state;
        per_state.reserve(n_states);
        for (std::size_t s = 0; s < n_states; ++s) {
            per_state.push_back(lotteries[idx[s]]);
        }
        out.emplace_back(std::move(per_state));
    }
    return out;
}

namespace {

nlohmann::json prior_list(const std::vector<Prior>& priors) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& p : priors) {
        out.push_back(p.weights());
    }
    return out;
}

std::vector<Prior> priors_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.empty()) {
        throw ConfigError("\"priors\" must be a nonempty array of weight vectors");
    }
    std::vector<Prior> out;
    for (const auto& w : j) {
        out.emplace_back(w.get<std::vector<double>>());
    }
    return out;
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                    const char* what) {
    for (const auto& [key, value] : j.items()) {
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* a) { return key == a; }) == allowed.end()) {
            throw ConfigError(std::string("unknown field \"") + key + "\" in " + what);
        }
    }
}

CostFunction cost_from_json(const nlohmann::json& j, std::size_t n_states) {
    if (!j.is_object()) {
        throw ConfigError("\"cost\" must be an object");
    }
    reject_unknown(j, {"grid", "costs", "resolution", "quadratic", "indicator"}, "cost");
    if (j.contains("grid")) {
        std::vector<double> costs;
        for (const auto& c : j.at("costs")) {
            costs.push_back(c.is_null() ? kInf : c.get<double>());
        }
        return CostFunction(priors_from_json(j.at("grid")), std::move(costs));
    }
    const int resolution = j.value("resolution", kDefaultSimplexResolution);
    if (j.contains("quadratic")) {
        const auto& q = j.at("quadratic");
        reject_unknown(q, {"center", "scale"}, "quadratic cost");
        auto center = q.at("center").get<std::vector<double>>();
        if (center.size() != n_states) {
            throw ShapeError("quadratic cost center does not match the state space");
        }
        return CostFunction::quadratic(std::move(center), q.at("scale").get<double>(), resolution);
    }
    if (j.contains("indicator")) {
        return CostFunction::indicator(priors_from_json(j.at("indicator")), n_states, resolution);
    }
    throw ConfigError("cost needs \"grid\"/\"costs\", \"quadratic\" or \"indicator\"");
}

} // namespace

nlohmann::json to_json(const AAPreference& pref) {
    nlohmann::json j;
    j["kind"] = pref.kind_name();
    j["states"] = pref.n_states();
    j["index"] = {{"knots", pref.index().knots()}, {"values", pref.index().values()}};
    std::visit(overloaded{
                   [&](const ExpectedUtility& eu) { j["priors"] = prior_list({eu.prior}); },
                   [&](const MaxMin& mm) { j["priors"] = prior_list(mm.priors); },
                   [&](const Variational& v) {
                       nlohmann::json costs = nlohmann::json::array();
                       for (double c : v.cost.costs()) {
                           costs.push_back(c == kInf ? nlohmann::json(nullptr) : nlohmann::json(c));
                       }
                       j["cost"] = {{"grid", prior_list(v.cost.grid())}, {"costs", costs}};
                   },
               },
               pref.aggregator());
    return j;
}

AAPreference aa_preference_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw ConfigError("preference must be a JSON object");
    }
    reject_unknown(j, {"kind", "states", "index", "priors", "cost"}, "preference");
    const auto kind = j.at("kind").get<std::string>();
    const auto n = j.at("states").get<std::size_t>();
    const auto& idx = j.at("index");
    reject_unknown(idx, {"knots", "values"}, "index");
    BernoulliIndex index(idx.at("knots").get<std::vector<double>>(),
                         idx.at("values").get<std::vector<double>>());
    auto states = StateSpace::numbered(n);
    if (kind == "eu") {
        auto priors = priors_from_json(j.at("priors"));
        if (priors.size() != 1) {
            throw ConfigError("an \"eu\" preference takes exactly one prior");
        }
        return AAPreference(ExpectedUtility{priors.front()}, std::move(index), std::move(states));
    }
    if (kind == "maxmin") {
        return AAPreference(MaxMin{priors_from_json(j.at("priors"))}, std::move(index),
                            std::move(states));
    }
    if (kind == "variational") {
        return AAPreference(Variational{cost_from_json(j.at("cost"), n)}, std::move(index),
                            std::move(states));
    }
    throw ConfigError("unknown preference kind \"" + kind + "\"");
}

} // namespace reclab
