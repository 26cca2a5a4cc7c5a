#pragma once

// Finite experiments on Anscombe-Aumann acts (pair sequences, generated
// choices, rationalization) and the sweep drivers behind every CLI
// subcommand. Each driver takes a parsed config and returns a RunReport.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "reclab/aa_prefs.hpp"
#include "reclab/estimation.hpp"
#include "reclab/report.hpp"

namespace reclab {

using IndexPair = std::pair<std::size_t, std::size_t>;

/// Number of unordered pairs of a universe of size n.
std::size_t pair_count(std::size_t n);

/// First k unordered pairs {i, j}, i < j, ordered by the index sum i + j and
/// then by i. With a perturbation seed, pairs inside each diagonal are
/// shuffled; every pair still appears exactly once.
std::vector<IndexPair> diagonal_pairs(std::size_t universe_size, std::size_t k,
                                      std::optional<std::uint64_t> perturbation = std::nullopt);

struct SigmaSequence {
    std::vector<Act> universe;
    std::vector<IndexPair> pairs;
    int denominator_bound = 1;
    int grid_count = 2;
    std::optional<std::uint64_t> perturbation;
};

/// Universe: act_grid(n_states, interval, D, G). Throws ConfigError when k
/// exceeds the number of pairs at this truncation.
SigmaSequence build_sigma(std::size_t n_states, Interval interval, int denominator_bound,
                          int grid_count, std::size_t k,
                          std::optional<std::uint64_t> perturbation = std::nullopt);

/// Values closer than this are treated as indifference when forming choice
/// sets.
inline constexpr double kChoiceTieTolerance = 1e-12;

/// Bit 1: first element of the pair chosen; bit 2: second element chosen.
inline constexpr unsigned char kChooseFirst = 1;
inline constexpr unsigned char kChooseSecond = 2;

unsigned char choice_set(double value_first, double value_second);

struct ChoiceFunctionData {
    std::vector<IndexPair> pairs;
    std::vector<unsigned char> chosen;
};

ChoiceFunctionData generated_choices(const AAPreference& pref, const SigmaSequence& sigma);

bool strongly_rationalizes(const AAPreference& pref, const SigmaSequence& sigma,
                           const ChoiceFunctionData& data);
bool weakly_rationalizes(const AAPreference& pref, const SigmaSequence& sigma,
                         const ChoiceFunctionData& data);

/// Parses an AA candidate family. Accepted fields:
///   "states", "interval", "knots", "value_steps", "prior_steps": expected
///   utility members over every prior on the simplex lattice and every
///   strictly increasing index with interior knot values in
///   {1, ..., value_steps - 1} / value_steps;
///   "members": explicit preference objects appended after the grid.
std::vector<AAPreference> aa_family_from_json(const nlohmann::json& j);

/// Linear interpolation target + t * (start - target) of every parameter:
/// index values, priors, or finite costs. Shapes must match.
AAPreference interpolate_preference(const AAPreference& target, const AAPreference& start,
                                    double t);

/// Positive root of 3 b^2 + 2 b sum(v) / k + |v|^2 / k^2 - 1 = 0 for
/// |v| = values.size() prizes; that is, b with |b 1 + v / k| = 1.
double normalization_shift(const std::vector<double>& values, double k);

/// Flag overrides applied on top of a config file.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> replicates;
};

RunReport run_gen(const nlohmann::json& cfg, const Overrides& ov, std::string* dataset_text);
RunReport run_fit(const nlohmann::json& cfg, const Overrides& ov);
RunReport run_consistency(const nlohmann::json& cfg, const Overrides& ov);
RunReport run_recovery(const nlohmann::json& cfg, const Overrides& ov);
RunReport run_theorem2_demo(const nlohmann::json& cfg, const Overrides& ov);
RunReport run_ce_continuity(const nlohmann::json& cfg, const Overrides& ov);
RunReport run_nonidentification_demo(const nlohmann::json& cfg, const Overrides& ov);
RunReport run_separation(const nlohmann::json& cfg, const Overrides& ov);
RunReport run_vc(const nlohmann::json& cfg, const Overrides& ov);
RunReport run_dense_uniqueness_check(const nlohmann::json& cfg, const Overrides& ov);
RunReport run_bound(const nlohmann::json& cfg, const Overrides& ov);

/// Subcommand names in CLI order.
const std::vector<std::string>& command_names();

} // namespace reclab
