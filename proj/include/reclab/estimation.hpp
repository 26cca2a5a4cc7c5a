#pragma once

// Estimation over Wald families: the 0/1-score ERM estimator, the grid
// sup-norm metric, Monte Carlo integrals over pairs of problems, separation
// gaps, VC witnesses by brute force, and the finite-sample bound.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "reclab/aa_prefs.hpp"
#include "reclab/noisy_choice.hpp"
#include "reclab/wald_env.hpp"

namespace reclab {

/// A family member is addressed by its parameter vector; WaldUtility::params
/// gives the lexicographic key.
using ParamPoint = WaldUtility;

/// Fraction of records with u(chosen) >= u(rejected); 1.0 on an empty set.
double empirical_score(const ParamPoint& u, const Domain& domain, const Dataset& ds);

/// Count form of empirical_score.
std::size_t rationalized_count(const ParamPoint& u, const Domain& domain, const Dataset& ds);

struct ErmSearchLog {
    std::size_t grid_size = 0;
    int refinement_levels = 0;
    std::size_t refinement_evaluations = 0;
    std::size_t refinement_moves = 0;
};

struct ErmResult {
    ParamPoint best;
    ParamPoint grid_best; ///< incumbent before refinement
    double score = 1.0;
    std::size_t count = 0;
    std::size_t n = 0;
    std::size_t ties = 0; ///< grid members attaining the grid maximum
    ErmSearchLog log;

    nlohmann::json to_json() const;
};

inline constexpr int kDefaultRefinements = 2;

/// Exhaustive search over the family grid, ties to the lexicographically
/// smallest parameters, followed by `refinements` local passes at step
/// sizes halved each level. A refinement move is taken only on a strict
/// improvement.
ErmResult erm_fit(const UtilityFamily& family, const Dataset& ds,
                  int refinements = kDefaultRefinements);

/// max over `grid` of |u1 - u2| in normalized coordinates.
double rho(const ParamPoint& u1, const ParamPoint& u2, const Domain& domain,
           const std::vector<Bundle>& grid);

inline constexpr int kDefaultRhoGridPerAxis = 41;

struct MonteCarlo {
    double estimate = 0.0;
    double std_error = 0.0;
    std::size_t m = 0;
};

/// Mean and standard error of per-sample terms (n - 1 denominator; 0 for a
/// single sample). Terms are summed pairwise in index order.
MonteCarlo summarize_terms(const std::vector<double>& terms);

/// Batch size used by the pair samplers below; batch b draws from
/// Stream(seed, b).
inline constexpr std::size_t kPairBatch = 4096;

/// Calls f(i, x, y) for m i.i.d. problems, batched and parallel; the draw of
/// pair i never depends on the thread count.
void for_each_problem(const Domain& domain, std::size_t m, std::uint64_t seed,
                      const std::function<void(std::size_t, const Bundle&, const Bundle&)>& f);

/// E[1{u_eval(x) >= u_eval(y)} q(x, y; truth)] over m pairs.
MonteCarlo mu_estimate(const ParamPoint& pref_eval, const ParamPoint& pref_true,
                       const NoiseModel& noise, const Domain& domain, std::size_t m,
                       std::uint64_t seed);

struct SeparationEstimate {
    double gap = 0.0;
    double std_error = 0.0;
    double rho_value = 0.0;
    double mu_true = 0.0;  ///< same-sample estimate of mu(truth, truth)
    double mu_other = 0.0; ///< same-sample estimate of mu(other, truth)
};

/// mu(truth, truth) - mu(other, truth) on one common sample of m pairs.
SeparationEstimate separation_estimate(const ParamPoint& pref_true, const ParamPoint& pref_other,
                                       const NoiseModel& noise, const Domain& domain,
                                       std::size_t m, std::uint64_t seed,
                                       const std::vector<Bundle>& rho_grid);

struct SeparationPair {
    ParamPoint truth;
    ParamPoint other;
    SeparationEstimate estimate;
    double ratio = 0.0; ///< gap / rho^D
};

struct SeparationReport {
    int D = 0;
    std::size_t n_pairs = 0;
    std::size_t skipped_identical = 0; ///< pairs with rho < 1e-9
    std::size_t violations = 0;        ///< gap + 3 se < 0
    std::size_t insignificant = 0;     ///< gap - 3 se <= 0
    double min_ratio = 0.0;            ///< empirical constant C
    std::vector<SeparationPair> pairs;

    /// "rho,gap,stderr" scatter.
    std::string csv() const;
};

SeparationReport separation_exponent_check(const UtilityFamily& family, const NoiseModel& noise,
                                           std::size_t n_pairs, std::size_t m, int D,
                                           std::uint64_t seed,
                                           int rho_grid_per_axis = kDefaultRhoGridPerAxis);

enum class TieRule {
    Weak,  ///< u(x) >= u(y) rationalizes "x chosen" (ties realize both labels)
    Strict ///< a label is realized only by a strict ranking
};

const char* to_string(TieRule r);

struct VcResult {
    int lower_bound = 0;
    int generic_lower_bound = 0;    ///< best over uniformly drawn pair sets
    int tie_seeded_lower_bound = 0; ///< best over sets placed on a member's level sets
    std::size_t trials = 0;
    std::size_t excluded_pairs = 0; ///< pairs every member is indifferent on
    std::vector<int> per_trial;     ///< largest shattered prefix of each trial

    nlohmann::json to_json() const;
};

/// Utility differences at most this far apart count as indifference.
inline constexpr double kVcTieTolerance = 1e-12;

inline constexpr double kDefaultVcBudget = 2e8;

/// Largest k' <= k such that some trial's first k' pairs are shattered:
/// every labeling is perfectly rationalized by some grid member. Trials
/// alternate between generic pairs and pairs on a random member's level
/// sets. Throws NumericalGuardError when k * 2^k * |grid| exceeds budget.
VcResult vc_lower_bound(const UtilityFamily& family, int k, std::size_t trials,
                        std::uint64_t seed, TieRule rule = TieRule::Weak,
                        double budget = kDefaultVcBudget);

/// True when every labeling of `pairs` is perfectly rationalized by some
/// member of `members`. Exhaustive.
bool shatters(const std::vector<ParamPoint>& members, const Domain& domain,
              const std::vector<std::pair<Bundle, Bundle>>& pairs, TieRule rule);

struct BoundParams {
    double K = 1.0;
    double C_bar = 1.0;
    double V = 1.0;
    int D = 1;
    double delta = 0.05;

    nlohmann::json to_json() const;
};

/// C_bar * (K sqrt(V / n) + sqrt(2 ln(1 / delta) / n))^(1 / D).
double bound_eval(const BoundParams& bp, double n);

/// Strict-disagreement probability of two Wald utilities over uniform pairs.
MonteCarlo disagreement(const ParamPoint& u1, const ParamPoint& u2, const Domain& domain,
                        std::size_t m, std::uint64_t seed);

/// Random act with, in each state, a lottery on two uniform support points
/// with a uniform weight. Used as the problem law for AA preferences.
Act random_act(std::size_t n_states, Interval interval, Stream& rng);

/// Strict-disagreement probability of two AA preferences over pairs of
/// random acts.
MonteCarlo disagreement(const AAPreference& p1, const AAPreference& p2, std::size_t m,
                        std::uint64_t seed);

} // namespace reclab
