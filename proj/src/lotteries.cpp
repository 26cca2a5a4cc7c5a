#include "reclab/lotteries.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "reclab/errors.hpp"

namespace reclab {

Interval::Interval(double a, double b) : a_(a), b_(b) {
    if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
        throw ConfigError("interval requires finite a < b, got [" + std::to_string(a) + ", " +
                          std::to_string(b) + "]");
    }
}

Lottery::Lottery(Interval interval, std::vector<double> support, std::vector<double> probs)
    : interval_(interval), support_(std::move(support)), probs_(std::move(probs)) {
    if (support_.empty() || support_.size() != probs_.size()) {
        throw ConfigError("lottery needs a nonempty support with one probability per point");
    }
    double total = 0.0;
    cdf_.reserve(probs_.size());
    for (std::size_t i = 0; i < support_.size(); ++i) {
        if (!interval_.contains(support_[i])) {
            throw ConfigError("lottery support point " + std::to_string(support_[i]) +
                              " outside interval");
        }
        if (i > 0 && !(support_[i - 1] < support_[i])) {
            throw ConfigError("lottery support must be strictly increasing");
        }
        if (!(probs_[i] >= 0.0)) {
            throw ConfigError("lottery probabilities must be nonnegative");
        }
        total += probs_[i];
        cdf_.push_back(total);
    }
    if (std::abs(total - 1.0) > kProbTol) {
        throw ConfigError("lottery probabilities sum to " + std::to_string(total));
    }
    cdf_.back() = 1.0;
    for (double& c : cdf_) {
        c = std::min(c, 1.0);
    }
}

Lottery Lottery::from_atoms(Interval interval, std::vector<std::pair<double, double>> atoms) {
    std::sort(atoms.begin(), atoms.end(),
              [](const auto& l, const auto& r) { return l.first < r.first; });
    std::vector<double> support;
    std::vector<double> probs;
    for (const auto& [x, w] : atoms) {
        if (!support.empty() && support.back() == x) {
            probs.back() += w;
        } else {
            support.push_back(x);
            probs.push_back(w);
        }
    }
    std::vector<double> kept_support;
    std::vector<double> kept_probs;
    for (std::size_t i = 0; i < support.size(); ++i) {
        if (probs[i] != 0.0) {
            kept_support.push_back(support[i]);
            kept_probs.push_back(probs[i]);
        }
    }
    return Lottery(interval, std::move(kept_support), std::move(kept_probs));
}

Lottery Lottery::from_cdf(Interval interval, std::span<const double> support,
                          std::span<const double> cdf) {
    if (support.empty() || support.size() != cdf.size()) {
        throw ConfigError("from_cdf needs matching nonempty support and cdf");
    }
    Lottery out;
    out.interval_ = interval;
    double previous = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
        const double level = i + 1 == support.size() ? 1.0 : cdf[i];
        if (level < previous || level > 1.0 || !interval.contains(support[i]) ||
            (i > 0 && !(support[i - 1] < support[i]))) {
            throw ConfigError("from_cdf: cdf must be nondecreasing on an increasing support");
        }
        if (level > previous) {
            out.support_.push_back(support[i]);
            out.probs_.push_back(level - previous);
            out.cdf_.push_back(level);
        }
        previous = level;
    }
    return out;
}

Lottery Lottery::degenerate(Interval interval, double x) { return Lottery(interval, {x}, {1.0}); }

const char* to_string(DominanceVerdict v) {
    switch (v) {
    case DominanceVerdict::Equal:
        return "Equal";
    case DominanceVerdict::Dominates:
        return "Dominates";
    case DominanceVerdict::StrictlyDominates:
        return "StrictlyDominates";
    case DominanceVerdict::DominatedBy:
        return "DominatedBy";
    case DominanceVerdict::StrictlyDominatedBy:
        return "StrictlyDominatedBy";
    case DominanceVerdict::Incomparable:
        return "Incomparable";
    }
    return "?";
}

DominanceVerdict swapped(DominanceVerdict v) {
    switch (v) {
    case DominanceVerdict::Dominates:
        return DominanceVerdict::DominatedBy;
    case DominanceVerdict::StrictlyDominates:
        return DominanceVerdict::StrictlyDominatedBy;
    case DominanceVerdict::DominatedBy:
        return DominanceVerdict::Dominates;
    case DominanceVerdict::StrictlyDominatedBy:
        return DominanceVerdict::StrictlyDominates;
    default:
        return v;
    }
}

bool weakly_dominates(DominanceVerdict v) {
    return v == DominanceVerdict::Equal || v == DominanceVerdict::Dominates ||
           v == DominanceVerdict::StrictlyDominates;
}

double cdf_eval(const Lottery& p, double r) {
    const auto& s = p.support();
    const auto it = std::upper_bound(s.begin(), s.end(), r);
    if (it == s.begin()) {
        return 0.0;
    }
    return p.cumulative()[static_cast<std::size_t>(it - s.begin()) - 1];
}

namespace {

void require_same_interval(const Lottery& p, const Lottery& q) {
    if (!(p.interval() == q.interval())) {
        throw ShapeError("lotteries live on different intervals");
    }
}

/// CDF of `p` evaluated on a sorted grid that contains p's support.
std::vector<double> cdf_on(const Lottery& p, const std::vector<double>& grid) {
    std::vector<double> out(grid.size());
    const auto& s = p.support();
    const auto& c = p.cumulative();
    std::size_t k = 0;
    double level = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        while (k < s.size() && s[k] <= grid[i]) {
            level = c[k];
            ++k;
        }
        out[i] = level;
    }
    return out;
}

} // namespace

std::vector<double> merged_support(const Lottery& p, const Lottery& q) {
    std::vector<double> out;
    out.reserve(p.size() + q.size());
    std::set_union(p.support().begin(), p.support().end(), q.support().begin(), q.support().end(),
                   std::back_inserter(out));
    return out;
}

DominanceVerdict fosd_compare(const Lottery& p, const Lottery& q) {
    require_same_interval(p, q);
    const auto grid = merged_support(p, q);
    const auto fp = cdf_on(p, grid);
    const auto fq = cdf_on(q, grid);
    bool p_below = false; // F_p < F_q somewhere: p is strictly better there
    bool p_above = false;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (fp[i] < fq[i] - kProbTol) {
            p_below = true;
        } else if (fp[i] > fq[i] + kProbTol) {
            p_above = true;
        }
    }
    if (p_below && p_above) {
        return DominanceVerdict::Incomparable;
    }
    if (p_below) {
        return DominanceVerdict::StrictlyDominates;
    }
    if (p_above) {
        return DominanceVerdict::StrictlyDominatedBy;
    }
    return DominanceVerdict::Equal;
}

namespace {

template <class Pick> Lottery combine_cdfs(const Lottery& p, const Lottery& q, Pick pick) {
    require_same_interval(p, q);
    const auto grid = merged_support(p, q);
    const auto fp = cdf_on(p, grid);
    const auto fq = cdf_on(q, grid);
    std::vector<double> f(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        f[i] = pick(fp[i], fq[i]);
    }
    return Lottery::from_cdf(p.interval(), grid, f);
}

} // namespace

Lottery lottery_join(const Lottery& p, const Lottery& q) {
    return combine_cdfs(p, q, [](double x, double y) { return std::min(x, y); });
}

Lottery lottery_meet(const Lottery& p, const Lottery& q) {
    return combine_cdfs(p, q, [](double x, double y) { return std::max(x, y); });
}

Lottery lottery_mixture(const Lottery& p, const Lottery& q, double w) {
    require_same_interval(p, q);
    if (!(w >= 0.0 && w <= 1.0)) {
        throw ConfigError("mixture weight must lie in [0, 1]");
    }
    std::vector<std::pair<double, double>> atoms;
    for (std::size_t i = 0; i < p.size(); ++i) {
        atoms.emplace_back(p.support()[i], w * p.probs()[i]);
    }
    for (std::size_t i = 0; i < q.size(); ++i) {
        atoms.emplace_back(q.support()[i], (1.0 - w) * q.probs()[i]);
    }
    return Lottery::from_atoms(p.interval(), std::move(atoms));
}

SqueezeBounds squeeze_bounds(std::span<const Lottery> seq) {
    if (seq.empty()) {
        throw ConfigError("squeeze_bounds needs a nonempty sequence");
    }
    SqueezeBounds out;
    out.lower.reserve(seq.size());
    out.upper.reserve(seq.size());
    // Tail folds, built from the back.
    std::vector<Lottery> lower{seq.back()};
    std::vector<Lottery> upper{seq.back()};
    for (std::size_t i = seq.size() - 1; i-- > 0;) {
        lower.push_back(lottery_meet(seq[i], lower.back()));
        upper.push_back(lottery_join(seq[i], upper.back()));
    }
    out.lower.assign(lower.rbegin(), lower.rend());
    out.upper.assign(upper.rbegin(), upper.rend());
    return out;
}

std::size_t rational_lottery_count(int denominator_bound, int grid_count) {
    // C(D + G - 1, G - 1) with saturation.
    const auto n = static_cast<std::uint64_t>(denominator_bound + grid_count - 1);
    auto k = static_cast<std::uint64_t>(grid_count - 1);
    k = std::min(k, n - k);
    __extension__ typedef unsigned __int128 u128;
    u128 acc = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        acc = acc * (n - k + i) / i;
        if (acc > std::numeric_limits<std::size_t>::max()) {
            return std::numeric_limits<std::size_t>::max();
        }
    }
    return static_cast<std::size_t>(acc);
}

std::vector<Lottery> enumerate_rational_lotteries(Interval interval, int denominator_bound,
                                                  int grid_count, std::size_t cap) {
    if (denominator_bound < 1 || grid_count < 2) {
        throw ConfigError("enumerate_rational_lotteries needs denominator >= 1 and grid >= 2");
    }
    const std::size_t total = rational_lottery_count(denominator_bound, grid_count);
    if (total > cap) {
        throw NumericalGuardError("truncation level too fine: " + std::to_string(total) +
                                  " lotteries exceed the cap of " + std::to_string(cap));
    }
    const auto g = static_cast<std::size_t>(grid_count);
    std::vector<double> points(g);
    for (std::size_t j = 0; j < g; ++j) {
        points[j] = j + 1 == g ? interval.b()
                               : interval.a() + (interval.b() - interval.a()) *
                                                    static_cast<double>(j) /
                                                    static_cast<double>(g - 1);
    }

    std::vector<Lottery> out;
    out.reserve(total);
    std::vector<int> counts(g, 0);
    // Depth-first over count vectors, largest count on the lowest point first.
    auto recurse = [&](auto&& self, std::size_t pos, int remaining) -> void {
        if (pos + 1 == g) {
            counts[pos] = remaining;
            std::vector<double> support;
            std::vector<double> probs;
            for (std::size_t j = 0; j < g; ++j) {
                if (counts[j] > 0) {
                    support.push_back(points[j]);
                    probs.push_back(static_cast<double>(counts[j]) / denominator_bound);
                }
            }
            out.emplace_back(interval, std::move(support), std::move(probs));
            return;
        }
        for (int c = remaining; c >= 0; --c) {
            counts[pos] = c;
            self(self, pos + 1, remaining - c);
        }
    };
    recurse(recurse, 0, denominator_bound);
    return out;
}

nlohmann::json to_json(const Lottery& p) {
    return nlohmann::json{{"support", p.support()}, {"probs", p.probs()}};
}

Lottery lottery_from_json(const nlohmann::json& j, Interval interval) {
    if (!j.is_object() || !j.contains("support") || !j.contains("probs") || j.size() != 2) {
        throw ConfigError("lottery JSON must be {\"support\": [...], \"probs\": [...]}");
    }
    return Lottery(interval, j.at("support").get<std::vector<double>>(),
                   j.at("probs").get<std::vector<double>>());
}

} // namespace reclab
