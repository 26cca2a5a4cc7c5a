#pragma once

// Finite-support monetary lotteries on a closed interval [a, b], ordered by
// first-order stochastic dominance (FOSD).
//
// A lottery stores its support, the atom probabilities, and the cumulative
// distribution at each support point. Lattice operations work directly on
// the stored CDF values, so join and meet are exact min/max operations and
// the lattice laws hold bit-for-bit.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

namespace reclab {

/// Tolerance for probability comparisons (sums, CDF equality).
inline constexpr double kProbTol = 1e-12;

class Interval {
  public:
    Interval(double a, double b);

    double a() const { return a_; }
    double b() const { return b_; }
    bool contains(double x) const { return a_ <= x && x <= b_; }

    friend bool operator==(const Interval&, const Interval&) = default;

  private:
    double a_;
    double b_;
};

class Lottery {
  public:
    /// Validating constructor: support strictly increasing and inside the
    /// interval, probabilities nonnegative summing to one within kProbTol.
    Lottery(Interval interval, std::vector<double> support, std::vector<double> probs);

    /// Sorts atoms, merges repeated points and drops zero-mass atoms before
    /// validating.
    static Lottery from_atoms(Interval interval, std::vector<std::pair<double, double>> atoms);

    /// Builds a lottery from CDF values F(support[i]); the last value is
    /// taken to be 1. Points that carry no mass are dropped.
    static Lottery from_cdf(Interval interval, std::span<const double> support,
                            std::span<const double> cdf);

    static Lottery degenerate(Interval interval, double x);

    const Interval& interval() const { return interval_; }
    const std::vector<double>& support() const { return support_; }
    const std::vector<double>& probs() const { return probs_; }
    /// cumulative()[i] = P[X <= support()[i]]; the last entry is exactly 1.
    const std::vector<double>& cumulative() const { return cdf_; }
    std::size_t size() const { return support_.size(); }

    bool is_degenerate() const { return support_.size() == 1; }

    /// Same interval, support and CDF values (the probabilities are derived).
    friend bool operator==(const Lottery& l, const Lottery& r) {
        return l.interval_ == r.interval_ && l.support_ == r.support_ && l.cdf_ == r.cdf_;
    }

  private:
    Lottery() : interval_(0.0, 1.0) {}

    Interval interval_;
    std::vector<double> support_;
    std::vector<double> probs_;
    std::vector<double> cdf_;
};

enum class DominanceVerdict {
    Equal,
    Dominates,
    StrictlyDominates,
    DominatedBy,
    StrictlyDominatedBy,
    Incomparable
};

const char* to_string(DominanceVerdict v);

/// Verdict seen from the other argument's side (Dominates <-> DominatedBy).
DominanceVerdict swapped(DominanceVerdict v);

/// True for Dominates, StrictlyDominates and Equal.
bool weakly_dominates(DominanceVerdict v);

/// P[X <= r]. Right-continuous step function.
double cdf_eval(const Lottery& p, double r);

/// Compares CDFs on the merged support. Dominates means F_p <= F_q
/// everywhere; for a single lottery pair "weak but not strict" collapses into
/// Equal, so only acts ever produce the plain Dominates verdict.
DominanceVerdict fosd_compare(const Lottery& p, const Lottery& q);

/// FOSD supremum: pointwise minimum of the two CDFs.
Lottery lottery_join(const Lottery& p, const Lottery& q);

/// FOSD infimum: pointwise maximum of the CDFs (right-continuous because both
/// inputs are step functions on a finite merged support).
Lottery lottery_meet(const Lottery& p, const Lottery& q);

/// w * p + (1 - w) * q.
Lottery lottery_mixture(const Lottery& p, const Lottery& q, double w);

/// Sorted union of the two supports.
std::vector<double> merged_support(const Lottery& p, const Lottery& q);

struct SqueezeBounds {
    std::vector<Lottery> lower; ///< lower[n] = meet of seq[n..]
    std::vector<Lottery> upper; ///< upper[n] = join of seq[n..]
};

SqueezeBounds squeeze_bounds(std::span<const Lottery> seq);

/// Default enumeration cap for enumerate_rational_lotteries.
inline constexpr std::size_t kDefaultEnumerationCap = 2'000'000;

/// Number of lotteries enumerate_rational_lotteries(denominator, grid) would
/// return: C(denominator + grid - 1, grid - 1), saturating at SIZE_MAX.
std::size_t rational_lottery_count(int denominator_bound, int grid_count);

/// Lotteries on the grid_count evenly spaced points of [a, b] whose atom
/// masses are multiples of 1/denominator_bound. Order: lexicographically
/// decreasing count vector, so delta_a comes first and delta_b last.
/// Throws NumericalGuardError when the count exceeds `cap`.
std::vector<Lottery> enumerate_rational_lotteries(Interval interval, int denominator_bound,
                                                  int grid_count,
                                                  std::size_t cap = kDefaultEnumerationCap);

nlohmann::json to_json(const Lottery& p);
Lottery lottery_from_json(const nlohmann::json& j, Interval interval);

} // namespace reclab
