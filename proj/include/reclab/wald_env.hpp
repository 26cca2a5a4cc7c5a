#pragma once

// Euclidean choice environments: a convex compact box (Lipschitz
// environment) or the truncated cone D = {t x : |x| = M, x >= alpha 1,
// t in [0, 1]} (homothetic environment), uniform sampling on either, and
// parametric Wald utilities u with x ~ u(x) 1.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "reclab/random.hpp"

namespace reclab {

using Bundle = std::vector<double>;

struct BoxDomain {
    std::vector<double> lo;
    std::vector<double> hi;
};

struct ConeDomain {
    double alpha = 0.0;
    double M = 1.0;
    std::size_t d = 2;
};

class Domain {
  public:
    /// Validates lo < hi componentwise.
    explicit Domain(BoxDomain box);
    /// Validates 0 < alpha * sqrt(d) < M.
    explicit Domain(ConeDomain cone);

    static Domain unit_box(std::size_t d);

    std::size_t dim() const;
    bool is_cone() const { return std::holds_alternative<ConeDomain>(shape_); }
    const BoxDomain* box() const { return std::get_if<BoxDomain>(&shape_); }
    const ConeDomain* cone() const { return std::get_if<ConeDomain>(&shape_); }

    bool contains(std::span<const double> x) const;

    /// Uniform draw. Cones use rejection from [0, M]^d and throw
    /// NumericalGuardError after kMaxRejections failures.
    Bundle sample(Stream& rng) const;

    /// Smallest axis-aligned box holding the domain.
    std::pair<Bundle, Bundle> bounding_box() const;

    /// Coordinates utilities are evaluated in: boxes map affinely onto
    /// [0, 1]^d, cones are used as is.
    Bundle normalize(std::span<const double> x) const;

    /// Inverse of normalize for a diagonal point c * 1.
    Bundle diagonal_point(double c) const;

    /// Default exponent of the separation bound: d for boxes, 2d for cones.
    int default_bound_exponent() const;

    nlohmann::json to_json() const;
    static Domain from_json(const nlohmann::json& j);

    static constexpr std::size_t kMaxRejections = 1'000'000;

  private:
    std::variant<BoxDomain, ConeDomain> shape_;
};

enum class WaldKind { Linear, CES, CobbDouglas };

const char* to_string(WaldKind k);
WaldKind wald_kind_from_string(const std::string& s);

class WaldUtility {
  public:
    /// Weights must be a probability vector; CES needs rho != 0 and
    /// Cobb-Douglas strictly positive weights.
    WaldUtility(WaldKind kind, std::vector<double> weights, double rho = 1.0);

    static WaldUtility linear(std::vector<double> w) { return {WaldKind::Linear, std::move(w)}; }
    static WaldUtility ces(std::vector<double> w, double rho) {
        return {WaldKind::CES, std::move(w), rho};
    }
    static WaldUtility cobb_douglas(std::vector<double> w) {
        return {WaldKind::CobbDouglas, std::move(w)};
    }

    WaldKind kind() const { return kind_; }
    const std::vector<double>& weights() const { return weights_; }
    double rho() const { return rho_; }
    std::size_t dim() const { return weights_.size(); }

    /// Parameter vector: weights, followed by rho for CES.
    std::vector<double> params() const;

    nlohmann::json to_json() const;
    static WaldUtility from_json(const nlohmann::json& j);

    friend bool operator==(const WaldUtility&, const WaldUtility&) = default;

  private:
    WaldKind kind_;
    std::vector<double> weights_;
    double rho_;
};

/// Raw formula: dot(w, x), (sum w_i x_i^rho)^(1/rho) or prod x_i^w_i.
/// Throws DomainViolation for negative coordinates where a fractional power
/// is taken.
double u_eval(const WaldUtility& u, std::span<const double> x);

/// u_eval in the domain's normalized coordinates.
double u_value(const WaldUtility& u, const Domain& domain, std::span<const double> x);

/// Uniform sample of a choice problem {x, y}.
std::pair<Bundle, Bundle> sample_problem(const Domain& domain, Stream& rng);

struct WaldCheckReport {
    std::size_t n_points = 0;
    double max_wald_violation = 0.0;        ///< max |u(u(x) 1) - u(x)|
    double max_homogeneity_violation = 0.0; ///< max |u(t x) - t u(x)|
    std::size_t diagonal_outside = 0;       ///< points whose u(x) 1 leaves the domain
};

WaldCheckReport wald_check(const WaldUtility& u, const Domain& domain, std::size_t n_points,
                           std::uint64_t seed);

/// Largest finite-difference slope over the lattice with spacing grid_step
/// covering the bounding box: per cell, the norm of the forward-difference
/// gradient when all forward neighbours are in the domain, otherwise the
/// single-axis ratios |du| / step. A lower-bound estimate of the Lipschitz
/// constant (exact for linear utilities).
double lipschitz_estimate(const WaldUtility& u, const Domain& domain, double grid_step);

/// A searchable class of Wald utilities: a weight simplex lattice, optionally
/// crossed with a list of CES exponents, or an explicit member list.
class UtilityFamily {
  public:
    static UtilityFamily grid(WaldKind kind, Domain domain, int weight_steps,
                              std::vector<double> rho_grid = {},
                              std::optional<double> kappa = std::nullopt);
    static UtilityFamily explicit_members(Domain domain, std::vector<WaldUtility> members,
                                          std::optional<double> kappa = std::nullopt);

    WaldKind kind() const { return kind_; }
    const Domain& domain() const { return domain_; }
    int weight_steps() const { return weight_steps_; }
    const std::vector<double>& rho_grid() const { return rho_grid_; }
    const std::optional<double>& kappa() const { return kappa_; }
    bool is_explicit() const { return explicit_; }

    /// Members in lexicographic order of their parameter vectors.
    const std::vector<WaldUtility>& members() const { return members_; }
    std::size_t size() const { return members_.size(); }

    nlohmann::json to_json() const;
    static UtilityFamily from_json(const nlohmann::json& j, Domain domain);

  private:
    UtilityFamily(WaldKind kind, Domain domain) : kind_(kind), domain_(std::move(domain)) {}

    WaldKind kind_;
    Domain domain_;
    int weight_steps_ = 0;
    std::vector<double> rho_grid_;
    std::optional<double> kappa_;
    bool explicit_ = false;
    std::vector<WaldUtility> members_;
};

/// Lattice of domain points with `per_axis` points per coordinate of the
/// bounding box, restricted to the domain. Used as the sup-norm grid for rho.
std::vector<Bundle> evaluation_grid(const Domain& domain, int per_axis);

} // namespace reclab
