#pragma once

// Anscombe-Aumann acts over monetary lotteries and the three aggregative
// preference families used throughout the lab: subjective expected utility,
// max-min expected utility and variational preferences. Every family is
// represented as V(f) = H((E_{f(s)} u)_s) with a piecewise-linear Bernoulli
// index u normalized to u(a) = 0, u(b) = 1.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "reclab/errors.hpp"
#include "reclab/lotteries.hpp"

namespace reclab {

/// Raised by certainty-equivalent operations on an index that is only weakly
/// increasing.
class NotStrictlyIncreasing : public ConfigError {
  public:
    using ConfigError::ConfigError;
};

class StateSpace {
  public:
    explicit StateSpace(std::vector<std::string> labels);
    /// States labelled s1..sn.
    static StateSpace numbered(std::size_t n);

    std::size_t size() const { return labels_.size(); }
    const std::vector<std::string>& labels() const { return labels_; }

    friend bool operator==(const StateSpace&, const StateSpace&) = default;

  private:
    std::vector<std::string> labels_;
};

class Act {
  public:
    explicit Act(std::vector<Lottery> per_state);
    static Act constant(const Lottery& p, std::size_t n_states);

    std::size_t size() const { return per_state_.size(); }
    const Lottery& operator[](std::size_t s) const { return per_state_[s]; }
    const std::vector<Lottery>& per_state() const { return per_state_; }
    const Interval& interval() const { return per_state_.front().interval(); }

    friend bool operator==(const Act&, const Act&) = default;

  private:
    std::vector<Lottery> per_state_;
};

/// Piecewise-linear utility of money on explicit knots.
class BernoulliIndex {
  public:
    /// knots strictly increasing from a to b; values weakly increasing from 0
    /// to 1.
    BernoulliIndex(std::vector<double> knots, std::vector<double> values);

    static BernoulliIndex identity(Interval interval);

    double operator()(double x) const;

    Interval interval() const { return Interval(knots_.front(), knots_.back()); }
    const std::vector<double>& knots() const { return knots_; }
    const std::vector<double>& values() const { return values_; }
    bool strictly_increasing() const { return strict_; }

    friend bool operator==(const BernoulliIndex& l, const BernoulliIndex& r) {
        return l.knots_ == r.knots_ && l.values_ == r.values_;
    }

  private:
    std::vector<double> knots_;
    std::vector<double> values_;
    bool strict_ = true;
};

class Prior {
  public:
    explicit Prior(std::vector<double> weights);

    std::size_t size() const { return weights_.size(); }
    double operator[](std::size_t s) const { return weights_[s]; }
    const std::vector<double>& weights() const { return weights_; }

    double dot(std::span<const double> z) const;

    friend bool operator==(const Prior&, const Prior&) = default;

  private:
    std::vector<double> weights_;
};

/// All priors over n_states whose weights are multiples of 1/resolution, in
/// lexicographically decreasing order.
std::vector<Prior> simplex_grid(std::size_t n_states, int resolution);

inline constexpr int kDefaultSimplexResolution = 32;

/// Grounded cost on a finite set of priors. Infinite costs mark priors that
/// are excluded (indicator costs).
class CostFunction {
  public:
    /// Shifts the costs so that the minimum is exactly 0.
    CostFunction(std::vector<Prior> grid, std::vector<double> costs);

    /// c(pi) = scale * ||pi - center||^2 on simplex_grid(n, resolution),
    /// then grounded.
    static CostFunction quadratic(std::vector<double> center, double scale,
                                  int resolution = kDefaultSimplexResolution);

    /// 0 on `priors`, +inf on every other point of the simplex grid.
    static CostFunction indicator(const std::vector<Prior>& priors, std::size_t n_states,
                                  int resolution = kDefaultSimplexResolution);

    static CostFunction from_function(std::size_t n_states, int resolution,
                                      const std::function<double(const Prior&)>& cost);

    const std::vector<Prior>& grid() const { return grid_; }
    const std::vector<double>& costs() const { return costs_; }
    std::size_t n_states() const { return grid_.front().size(); }
    int resolution() const { return resolution_; }
    double max_finite_cost() const;

    /// Whether costs are convex along every grid edge (reported, never
    /// enforced).
    bool convex_on_grid() const;

  private:
    std::vector<Prior> grid_;
    std::vector<double> costs_;
    int resolution_ = 0;
};

struct ExpectedUtility {
    Prior prior;
};

struct MaxMin {
    std::vector<Prior> priors;
};

struct Variational {
    CostFunction cost;
};

using Aggregator = std::variant<ExpectedUtility, MaxMin, Variational>;

class AAPreference {
  public:
    AAPreference(Aggregator aggregator, BernoulliIndex index, StateSpace states);

    const Aggregator& aggregator() const { return aggregator_; }
    const BernoulliIndex& index() const { return index_; }
    const StateSpace& states() const { return states_; }
    std::size_t n_states() const { return states_.size(); }
    const char* kind_name() const;

  private:
    Aggregator aggregator_;
    BernoulliIndex index_;
    StateSpace states_;
};

/// Sum_i p_i u(x_i).
double expected_utility(const BernoulliIndex& u, const Lottery& p);

/// H(z): prior dot product, minimum over priors, or grid infimum of dot + cost.
double aggregator_eval(const AAPreference& pref, std::span<const double> z);

/// V(f) = H((E_{f(s)} u)_s).
double act_value(const AAPreference& pref, const Act& f);

/// Certainty equivalents by bisection on [a, b] to 1e-10.
inline constexpr double kCeTolerance = 1e-10;
double ce_lottery(const BernoulliIndex& u, const Lottery& p);
double ce_act(const AAPreference& pref, const Act& f);

/// Inverse of a strictly increasing index at utility level `level`.
double invert_index(const BernoulliIndex& u, double level);

/// Statewise FOSD; StrictlyDominates needs strict dominance in every state.
DominanceVerdict act_dominates(const Act& f, const Act& g);

struct RepDistance {
    double dV = 0.0;
    double du = 0.0;
};

/// du: sup |u1 - u2| over the union of both knot sets (exact for piecewise
/// linear indices). dV: max |V1 - V2| over `grid`.
RepDistance rep_distance(const AAPreference& pref1, const AAPreference& pref2,
                         std::span<const Act> grid);

/// max |H1(z) - H2(z)| over the lattice {0, 1/steps, ..., 1}^S.
double aggregator_distance(const AAPreference& pref1, const AAPreference& pref2, int steps);

/// Product over states of enumerate_rational_lotteries, state 0 most
/// significant.
std::vector<Act> act_grid(std::size_t n_states, Interval interval, int denominator_bound,
                          int grid_count, std::size_t cap = kDefaultEnumerationCap);

nlohmann::json to_json(const AAPreference& pref);
AAPreference aa_preference_from_json(const nlohmann::json& j);

} // namespace reclab
