#include "reclab/wald_env.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "reclab/errors.hpp"

namespace reclab {

namespace {

double norm2(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) {
        s += v * v;
    }
    return std::sqrt(s);
}

void require_dim(std::size_t expected, std::size_t got) {
    if (expected != got) {
        throw ShapeError("dimension mismatch: expected " + std::to_string(expected) + ", got " +
                         std::to_string(got));
    }
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                    const char* what) {
    if (!j.is_object()) {
        throw ConfigError(std::string(what) + " must be a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* a) { return key == a; }) == allowed.end()) {
            throw ConfigError(std::string("unknown field \"") + key + "\" in " + what);
        }
    }
}

/// Lattice points of the probability simplex in dimension d with spacing
/// 1/steps; `min_count` > 0 keeps only interior points.
void weight_lattice(std::size_t d, int steps, int min_count, std::vector<int>& counts,
                    std::size_t pos, int remaining, std::vector<std::vector<double>>& out) {
    if (pos + 1 == d) {
        if (remaining < min_count) {
            return;
        }
        counts[pos] = remaining;
        std::vector<double> w(d);
        for (std::size_t i = 0; i < d; ++i) {
            w[i] = static_cast<double>(counts[i]) / steps;
        }
        out.push_back(std::move(w));
        return;
    }
    for (int c = min_count; c <= remaining; ++c) {
        counts[pos] = c;
        weight_lattice(d, steps, min_count, counts, pos + 1, remaining - c, out);
    }
}

} // namespace

Domain::Domain(BoxDomain box) : shape_(std::move(box)) {
    const auto& b = std::get<BoxDomain>(shape_);
    if (b.lo.empty() || b.lo.size() != b.hi.size()) {
        throw ConfigError("box domain needs matching nonempty lo and hi");
    }
    for (std::size_t i = 0; i < b.lo.size(); ++i) {
        if (!std::isfinite(b.lo[i]) || !std::isfinite(b.hi[i]) || !(b.lo[i] < b.hi[i])) {
            throw ConfigError("box domain needs finite lo < hi in every coordinate");
        }
    }
}

Domain::Domain(ConeDomain cone) : shape_(cone) {
    if (cone.d < 1 || !(cone.alpha > 0.0) || !(cone.M > 0.0) ||
        !(cone.alpha * std::sqrt(static_cast<double>(cone.d)) < cone.M)) {
        throw ConfigError("cone domain needs 0 < alpha * sqrt(d) < M");
    }
}

Domain Domain::unit_box(std::size_t d) {
    return Domain(BoxDomain{std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)});
}

std::size_t Domain::dim() const {
    if (const auto* b = box()) {
        return b->lo.size();
    }
    return cone()->d;
}

bool Domain::contains(std::span<const double> x) const {
    require_dim(dim(), x.size());
    if (const auto* b = box()) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (!(b->lo[i] <= x[i] && x[i] <= b->hi[i])) {
                return false;
            }
        }
        return true;
    }
    const auto& c = *cone();
    const double r = norm2(x);
    const double lowest = *std::min_element(x.begin(), x.end());
    return r <= c.M && lowest >= (c.alpha / c.M) * r;
}

Bundle Domain::sample(Stream& rng) const {
    const std::size_t d = dim();
    Bundle x(d);
    if (const auto* b = box()) {
        for (std::size_t i = 0; i < d; ++i) {
            x[i] = rng.uniform(b->lo[i], b->hi[i]);
        }
        return x;
    }
    const auto& c = *cone();
    for (std::size_t attempt = 0; attempt < kMaxRejections; ++attempt) {
        for (std::size_t i = 0; i < d; ++i) {
            x[i] = rng.uniform(0.0, c.M);
        }
        if (contains(x)) {
            return x;
        }
    }
    throw NumericalGuardError("cone sampling exceeded the rejection cap; parameters degenerate");
}

std::pair<Bundle, Bundle> Domain::bounding_box() const {
    if (const auto* b = box()) {
        return {b->lo, b->hi};
    }
    const auto& c = *cone();
    return {Bundle(c.d, 0.0), Bundle(c.d, c.M)};
}

Bundle Domain::normalize(std::span<const double> x) const {
    require_dim(dim(), x.size());
    if (const auto* b = box()) {
        Bundle t(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            t[i] = (x[i] - b->lo[i]) / (b->hi[i] - b->lo[i]);
        }
        return t;
    }
    return Bundle(x.begin(), x.end());
}

Bundle Domain::diagonal_point(double c) const {
    if (const auto* b = box()) {
        Bundle x(b->lo.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = b->lo[i] + c * (b->hi[i] - b->lo[i]);
        }
        return x;
    }
    return Bundle(dim(), c);
}

int Domain::default_bound_exponent() const {
    const int d = static_cast<int>(dim());
    return is_cone() ? 2 * d : d;
}

nlohmann::json Domain::to_json() const {
    if (const auto* b = box()) {
        return {{"box", {{"lo", b->lo}, {"hi", b->hi}}}};
    }
    const auto& c = *cone();
    return {{"cone", {{"alpha", c.alpha}, {"M", c.M}, {"d", c.d}}}};
}

Domain Domain::from_json(const nlohmann::json& j) {
    reject_unknown(j, {"box", "cone"}, "domain");
    if (j.size() != 1) {
        throw ConfigError("domain must name exactly one of \"box\" or \"cone\"");
    }
    if (j.contains("cone")) {
        const auto& c = j.at("cone");
        reject_unknown(c, {"alpha", "M", "d"}, "cone domain");
        return Domain(ConeDomain{c.at("alpha").get<double>(), c.at("M").get<double>(),
                                 c.at("d").get<std::size_t>()});
    }
    const auto& b = j.at("box");
    reject_unknown(b, {"lo", "hi", "d"}, "box domain");
    if (b.contains("d")) {
        if (b.contains("lo") || b.contains("hi")) {
            throw ConfigError("box domain takes either \"d\" or \"lo\"/\"hi\"");
        }
        return unit_box(b.at("d").get<std::size_t>());
    }
    return Domain(BoxDomain{b.at("lo").get<std::vector<double>>(),
                            b.at("hi").get<std::vector<double>>()});
}

const char* to_string(WaldKind k) {
    switch (k) {
    case WaldKind::Linear:
        return "linear";
    case WaldKind::CES:
        return "ces";
    case WaldKind::CobbDouglas:
        return "cobb_douglas";
    }
    return "?";
}

WaldKind wald_kind_from_string(const std::string& s) {
    if (s == "linear") {
        return WaldKind::Linear;
    }
    if (s == "ces") {
        return WaldKind::CES;
    }
    if (s == "cobb_douglas") {
        return WaldKind::CobbDouglas;
    }
    throw ConfigError("unknown utility kind \"" + s + "\"");
}

WaldUtility::WaldUtility(WaldKind kind, std::vector<double> weights, double rho)
    : kind_(kind), weights_(std::move(weights)), rho_(kind == WaldKind::CES ? rho : 1.0) {
    if (weights_.empty()) {
        throw ConfigError("Wald utility needs at least one weight");
    }
    double total = 0.0;
    for (double w : weights_) {
        if (!(w >= 0.0)) {
            throw ConfigError("Wald utility weights must be nonnegative");
        }
        if (kind_ == WaldKind::CobbDouglas && !(w > 0.0)) {
            throw ConfigError("Cobb-Douglas weights must be strictly positive");
        }
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw ConfigError("Wald utility weights must sum to 1");
    }
    if (kind_ == WaldKind::CES && (rho_ == 0.0 || !std::isfinite(rho_))) {
        throw ConfigError("CES exponent must be finite and nonzero");
    }
}

std::vector<double> WaldUtility::params() const {
    std::vector<double> p = weights_;
    if (kind_ == WaldKind::CES) {
        p.push_back(rho_);
    }
    return p;
}

nlohmann::json WaldUtility::to_json() const {
    nlohmann::json j{{"kind", reclab::to_string(kind_)}, {"weights", weights_}};
    if (kind_ == WaldKind::CES) {
        j["rho"] = rho_;
    }
    return j;
}

WaldUtility WaldUtility::from_json(const nlohmann::json& j) {
    reject_unknown(j, {"kind", "weights", "rho"}, "utility");
    const auto kind = wald_kind_from_string(j.at("kind").get<std::string>());
    if (kind == WaldKind::CES && !j.contains("rho")) {
        throw ConfigError("a CES utility needs \"rho\"");
    }
    return WaldUtility(kind, j.at("weights").get<std::vector<double>>(), j.value("rho", 1.0));
}

double u_eval(const WaldUtility& u, std::span<const double> x) {
    require_dim(u.dim(), x.size());
    const auto& w = u.weights();
    switch (u.kind()) {
    case WaldKind::Linear: {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            s += w[i] * x[i];
        }
        return s;
    }
    case WaldKind::CES: {
        const double rho = u.rho();
        const bool integral = rho == std::round(rho);
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (w[i] == 0.0) {
                continue;
            }
            if (x[i] < 0.0 && (rho < 1.0 || !integral)) {
                throw DomainViolation("CES utility evaluated at a negative coordinate");
            }
            if (x[i] == 0.0 && rho < 0.0) {
                return 0.0;
            }
            s += w[i] * std::pow(x[i], rho);
        }
        if (s <= 0.0) {
            return 0.0;
        }
        return std::pow(s, 1.0 / rho);
    }
    case WaldKind::CobbDouglas: {
        double p = 1.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] < 0.0) {
                throw DomainViolation("Cobb-Douglas utility evaluated at a negative coordinate");
            }
            p *= std::pow(x[i], w[i]);
        }
        return p;
    }
    }
    return 0.0;
}

double u_value(const WaldUtility& u, const Domain& domain, std::span<const double> x) {
    if (domain.is_cone()) {
        return u_eval(u, x);
    }
    const auto t = domain.normalize(x);
    return u_eval(u, t);
}

std::pair<Bundle, Bundle> sample_problem(const Domain& domain, Stream& rng) {
    Bundle x = domain.sample(rng);
    Bundle y = domain.sample(rng);
    return {std::move(x), std::move(y)};
}

WaldCheckReport wald_check(const WaldUtility& u, const Domain& domain, std::size_t n_points,
                           std::uint64_t seed) {
    require_dim(domain.dim(), u.dim());
    WaldCheckReport report;
    report.n_points = n_points;
    Stream rng(seed, 0);
    constexpr double thetas[] = {0.25, 0.5, 0.75};
    for (std::size_t k = 0; k < n_points; ++k) {
        const Bundle x = domain.sample(rng);
        const Bundle t = domain.normalize(x);
        const double level = u_eval(u, t);
        const Bundle diag(t.size(), level);
        report.max_wald_violation =
            std::max(report.max_wald_violation, std::abs(u_eval(u, diag) - level));
        if (!domain.contains(domain.diagonal_point(level))) {
            ++report.diagonal_outside;
        }
        for (double theta : thetas) {
            Bundle scaled = t;
            for (double& v : scaled) {
                v *= theta;
            }
            report.max_homogeneity_violation = std::max(
                report.max_homogeneity_violation, std::abs(u_eval(u, scaled) - theta * level));
        }
    }
    return report;
}

double lipschitz_estimate(const WaldUtility& u, const Domain& domain, double grid_step) {
    if (!(grid_step > 0.0)) {
        throw ConfigError("lipschitz_estimate needs a positive grid step");
    }
    const std::size_t d = domain.dim();
    require_dim(d, u.dim());
    const auto [lo, hi] = domain.bounding_box();
    std::vector<std::size_t> counts(d);
    double total = 1.0;
    for (std::size_t i = 0; i < d; ++i) {
        counts[i] = static_cast<std::size_t>(std::floor((hi[i] - lo[i]) / grid_step + 1e-9)) + 1;
        total *= static_cast<double>(counts[i]);
    }
    if (total > 5e6) {
        throw NumericalGuardError("lipschitz_estimate lattice too fine");
    }
    std::vector<std::size_t> idx(d, 0);
    Bundle x(d);
    Bundle nb(d);
    double best = 0.0;
    while (true) {
        for (std::size_t i = 0; i < d; ++i) {
            x[i] = lo[i] + grid_step * static_cast<double>(idx[i]);
        }
        if (domain.contains(x)) {
            const double ux = u_value(u, domain, x);
            double grad2 = 0.0;
            bool complete = true;
            for (std::size_t i = 0; i < d; ++i) {
                nb = x;
                nb[i] += grid_step;
                if (!domain.contains(nb)) {
                    complete = false;
                    continue;
                }
                const double slope = (u_value(u, domain, nb) - ux) / grid_step;
                grad2 += slope * slope;
                best = std::max(best, std::abs(slope));
            }
            if (complete) {
                best = std::max(best, std::sqrt(grad2));
            }
        }
        std::size_t i = 0;
        while (i < d && idx[i] + 1 == counts[i]) {
            idx[i] = 0;
            ++i;
        }
        if (i == d) {
            break;
        }
        ++idx[i];
    }
    return best;
}

namespace {

void check_kappa(const std::vector<WaldUtility>& members, const Domain& domain,
                 std::optional<double> kappa) {
    if (!kappa) {
        return;
    }
    if (!(*kappa > 0.0)) {
        throw ConfigError("family kappa must be positive");
    }
    const auto [lo, hi] = domain.bounding_box();
    double extent = 0.0;
    for (std::size_t i = 0; i < lo.size(); ++i) {
        extent = std::max(extent, hi[i] - lo[i]);
    }
    const double step = extent / 40.0;
    for (const auto& m : members) {
        const double est = lipschitz_estimate(m, domain, step);
        if (est > *kappa * (1.0 + 1e-6)) {
            throw ConfigError("family member " + m.to_json().dump() + " has Lipschitz estimate " +
                              std::to_string(est) + " above kappa " + std::to_string(*kappa));
        }
    }
}

} // namespace

UtilityFamily UtilityFamily::grid(WaldKind kind, Domain domain, int weight_steps,
                                  std::vector<double> rho_grid, std::optional<double> kappa) {
    if (weight_steps < 1) {
        throw ConfigError("family needs weight_steps >= 1");
    }
    if (kind == WaldKind::CES && rho_grid.empty()) {
        throw ConfigError("CES family needs a nonempty rho_grid");
    }
    if (kind != WaldKind::CES && !rho_grid.empty()) {
        throw ConfigError("rho_grid only applies to CES families");
    }
    UtilityFamily fam(kind, std::move(domain));
    fam.weight_steps_ = weight_steps;
    fam.rho_grid_ = std::move(rho_grid);
    std::sort(fam.rho_grid_.begin(), fam.rho_grid_.end());
    fam.kappa_ = kappa;
    const std::size_t d = fam.domain_.dim();
    std::vector<std::vector<double>> weights;
    std::vector<int> counts(d, 0);
    weight_lattice(d, weight_steps, kind == WaldKind::CobbDouglas ? 1 : 0, counts, 0, weight_steps,
                   weights);
    if (weights.empty()) {
        throw ConfigError("family weight lattice is empty");
    }
    for (const auto& w : weights) {
        if (kind == WaldKind::CES) {
            for (double rho : fam.rho_grid_) {
                fam.members_.emplace_back(kind, w, rho);
            }
        } else {
            fam.members_.emplace_back(kind, w);
        }
    }
    std::sort(fam.members_.begin(), fam.members_.end(),
              [](const WaldUtility& l, const WaldUtility& r) { return l.params() < r.params(); });
    check_kappa(fam.members_, fam.domain_, kappa);
    return fam;
}

UtilityFamily UtilityFamily::explicit_members(Domain domain, std::vector<WaldUtility> members,
                                              std::optional<double> kappa) {
    if (members.empty()) {
        throw ConfigError("family needs at least one member");
    }
    UtilityFamily fam(members.front().kind(), std::move(domain));
    for (const auto& m : members) {
        require_dim(fam.domain_.dim(), m.dim());
        if (m.kind() != fam.kind_) {
            throw ConfigError("explicit family members must share one kind");
        }
    }
    fam.explicit_ = true;
    fam.kappa_ = kappa;
    fam.members_ = std::move(members);
    std::sort(fam.members_.begin(), fam.members_.end(),
              [](const WaldUtility& l, const WaldUtility& r) { return l.params() < r.params(); });
    check_kappa(fam.members_, fam.domain_, kappa);
    return fam;
}

nlohmann::json UtilityFamily::to_json() const {
    nlohmann::json inner;
    if (explicit_) {
        nlohmann::json members = nlohmann::json::array();
        for (const auto& m : members_) {
            members.push_back(m.to_json());
        }
        inner["members"] = members;
    } else {
        inner["weight_steps"] = weight_steps_;
        if (kind_ == WaldKind::CES) {
            inner["rho_grid"] = rho_grid_;
        }
    }
    if (kappa_) {
        inner["kappa"] = *kappa_;
    }
    return {{explicit_ ? "explicit" : reclab::to_string(kind_), inner}};
}

UtilityFamily UtilityFamily::from_json(const nlohmann::json& j, Domain domain) {
    reject_unknown(j, {"linear", "ces", "cobb_douglas", "explicit"}, "family");
    if (j.size() != 1) {
        throw ConfigError("family must name exactly one kind");
    }
    const auto& [name, inner] = *j.items().begin();
    std::optional<double> kappa;
    if (inner.contains("kappa")) {
        kappa = inner.at("kappa").get<double>();
    }
    if (name == "explicit") {
        reject_unknown(inner, {"members", "kappa"}, "explicit family");
        std::vector<WaldUtility> members;
        for (const auto& m : inner.at("members")) {
            members.push_back(WaldUtility::from_json(m));
        }
        return explicit_members(std::move(domain), std::move(members), kappa);
    }
    const auto kind = wald_kind_from_string(name);
    if (kind == WaldKind::CES) {
        reject_unknown(inner, {"weight_steps", "rho_grid", "kappa"}, "ces family");
        return grid(kind, std::move(domain), inner.at("weight_steps").get<int>(),
                    inner.at("rho_grid").get<std::vector<double>>(), kappa);
    }
    reject_unknown(inner, {"weight_steps", "kappa"}, "family");
    return grid(kind, std::move(domain), inner.at("weight_steps").get<int>(), {}, kappa);
}

std::vector<Bundle> evaluation_grid(const Domain& domain, int per_axis) {
    if (per_axis < 2) {
        throw ConfigError("evaluation grid needs at least 2 points per axis");
    }
    const std::size_t d = domain.dim();
    if (std::pow(static_cast<double>(per_axis), static_cast<double>(d)) > 5e6) {
        throw NumericalGuardError("evaluation grid too fine for this dimension");
    }
    const auto [lo, hi] = domain.bounding_box();
    std::vector<Bundle> out;
    std::vector<int> idx(d, 0);
    Bundle x(d);
    while (true) {
        for (std::size_t i = 0; i < d; ++i) {
            x[i] = lo[i] + (hi[i] - lo[i]) * idx[i] / (per_axis - 1);
        }
        if (domain.contains(x)) {
            out.push_back(x);
        }
        std::size_t i = 0;
        while (i < d && idx[i] + 1 == per_axis) {
            idx[i] = 0;
            ++i;
        }
        if (i == d) {
            break;
        }
        ++idx[i];
    }
    return out;
}

} // namespace reclab
