#include <gtest/gtest.h>

#include <cmath>

#include "reclab/errors.hpp"
#include "reclab/wald_env.hpp"

using namespace reclab;

namespace {

Domain cone() { return Domain(ConeDomain{0.1, 1.0, 2}); }

/// Chi-square statistic of counts against equal expected cells.
double chi_square(const std::vector<std::size_t>& counts, double expected) {
    double s = 0.0;
    for (auto c : counts) {
        s += (static_cast<double>(c) - expected) * (static_cast<double>(c) - expected) / expected;
    }
    return s;
}

std::vector<WaldUtility> sample_members() {
    return {WaldUtility::linear({0.3, 0.7}),        WaldUtility::ces({0.5, 0.5}, 2.0),
            WaldUtility::ces({0.2, 0.8}, -1.0),     WaldUtility::ces({0.6, 0.4}, 0.5),
            WaldUtility::cobb_douglas({0.4, 0.6}), WaldUtility::linear({1.0, 0.0})};
}

} // namespace

TEST(Domain, Validates) {
    EXPECT_THROW(Domain(BoxDomain{{0.0, 1.0}, {1.0, 1.0}}), ConfigError);
    EXPECT_THROW(Domain(ConeDomain{0.8, 1.0, 2}), ConfigError);
    EXPECT_THROW(Domain(ConeDomain{0.0, 1.0, 2}), ConfigError);
}

TEST(Domain, ConeMembershipExamples) {
    const auto d = cone();
    EXPECT_TRUE(d.contains(std::vector<double>{0.5, 0.5}));
    EXPECT_TRUE(d.contains(std::vector<double>{0.0, 0.0}));
    EXPECT_FALSE(d.contains(std::vector<double>{1.0, 0.0}));
    EXPECT_FALSE(d.contains(std::vector<double>{0.8, 0.8}));
}

TEST(Domain, BoxSamplesAreReproducibleAndInside) {
    const auto d = Domain::unit_box(2);
    Stream a(5, 1), b(5, 1);
    const auto x = d.sample(a);
    EXPECT_EQ(x, d.sample(b));
    EXPECT_TRUE(d.contains(x));
}

TEST(Domain, BoxSamplingIsUniform) {
    const auto d = Domain(BoxDomain{{-1.0, 2.0}, {1.0, 3.0}});
    Stream rng(6, 0);
    std::vector<std::size_t> cells(16, 0);
    const std::size_t n = 32000;
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = d.sample(rng);
        const auto ix = static_cast<std::size_t>((x[0] + 1.0) / 2.0 * 4.0);
        const auto iy = static_cast<std::size_t>((x[1] - 2.0) * 4.0);
        ++cells[ix * 4 + iy];
    }
    // 15 degrees of freedom; 99.9% quantile is 37.7.
    EXPECT_LT(chi_square(cells, n / 16.0), 37.7);
}

TEST(Domain, ConeSamplingMatchesAreaOracle) {
    const auto d = cone();
    // Area fraction of the cone section inside [0, 1]^2 by midpoint counting.
    const int g = 2000;
    std::size_t inside = 0;
    for (int i = 0; i < g; ++i) {
        for (int j = 0; j < g; ++j) {
            const std::vector<double> x{(i + 0.5) / g, (j + 0.5) / g};
            inside += d.contains(x) ? 1 : 0;
        }
    }
    const double area = static_cast<double>(inside) / (static_cast<double>(g) * g);
    // Uniformity: the mass of the left half-box relative to its area share.
    std::size_t left_inside = 0;
    for (int i = 0; i < g / 2; ++i) {
        for (int j = 0; j < g; ++j) {
            const std::vector<double> x{(i + 0.5) / g, (j + 0.5) / g};
            left_inside += d.contains(x) ? 1 : 0;
        }
    }
    const double left_share = static_cast<double>(left_inside) / static_cast<double>(inside);
    Stream rng(7, 0);
    const std::size_t n = 40000;
    std::size_t left = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = d.sample(rng);
        ASSERT_TRUE(d.contains(x));
        left += x[0] < 0.5 ? 1 : 0;
    }
    const double se = std::sqrt(left_share * (1 - left_share) / n);
    EXPECT_NEAR(static_cast<double>(left) / n, left_share, 4 * se);
    EXPECT_GT(area, 0.5);
}

TEST(WaldUtility, Validates) {
    EXPECT_THROW(WaldUtility::linear({0.5, 0.6}), ConfigError);
    EXPECT_THROW(WaldUtility::linear({-0.1, 1.1}), ConfigError);
    EXPECT_THROW(WaldUtility::ces({0.5, 0.5}, 0.0), ConfigError);
    EXPECT_THROW(WaldUtility::cobb_douglas({0.0, 1.0}), ConfigError);
}

TEST(WaldUtility, Examples) {
    for (const auto& u : sample_members()) {
        EXPECT_NEAR(u_eval(u, std::vector<double>{0.37, 0.37}), 0.37, 1e-12);
    }
    EXPECT_DOUBLE_EQ(u_eval(WaldUtility::linear({0.3, 0.7}), std::vector<double>{1.0, 0.0}), 0.3);
    EXPECT_NEAR(u_eval(WaldUtility::ces({0.5, 0.5}, 2.0), std::vector<double>{1.0, 0.0}),
                std::sqrt(0.5), 1e-15);
    EXPECT_THROW(u_eval(WaldUtility::cobb_douglas({0.5, 0.5}), std::vector<double>{-1.0, 1.0}),
                 DomainViolation);
}

TEST(WaldUtility, WaldPropertyOnSampledPoints) {
    const auto box = Domain::unit_box(2);
    for (const auto& u : sample_members()) {
        const auto rep = wald_check(u, box, 1000, 3);
        EXPECT_LE(rep.max_wald_violation, 1e-12) << u.to_json();
        const auto rc = wald_check(u, cone(), 1000, 3);
        EXPECT_LE(rc.max_wald_violation, 1e-12) << u.to_json();
        EXPECT_LE(rc.max_homogeneity_violation, 1e-12) << u.to_json();
    }
}

TEST(WaldUtility, MonotoneOnDominatingBundles) {
    Stream rng(8, 0);
    const auto box = Domain::unit_box(2);
    std::size_t violations = 0;
    for (int t = 0; t < 1000; ++t) {
        auto y = box.sample(rng);
        auto x = y;
        for (double& v : x) {
            v = std::min(1.0, v + rng.uniform(0.0, 0.3));
        }
        for (const auto& u : sample_members()) {
            violations += u_value(u, box, x) < u_value(u, box, y) ? 1 : 0;
        }
    }
    EXPECT_EQ(violations, 0u);
}

TEST(Lipschitz, Examples) {
    const auto box = Domain::unit_box(2);
    const auto w = WaldUtility::linear({0.3, 0.7});
    EXPECT_NEAR(lipschitz_estimate(w, box, 0.05), std::hypot(0.3, 0.7), 1e-9);
    EXPECT_NEAR(lipschitz_estimate(WaldUtility::linear({1.0, 0.0}), box, 0.1), 1.0, 1e-12);

    const Domain shifted(BoxDomain{{0.1, 0.1}, {1.0, 1.0}});
    const auto ces = WaldUtility::ces({0.5, 0.5}, 2.0);
    const double coarse = lipschitz_estimate(ces, shifted, 0.05);
    const double fine = lipschitz_estimate(ces, shifted, 0.005);
    EXPECT_TRUE(std::isfinite(coarse));
    EXPECT_LE(coarse, 1.01 * fine);
}

TEST(UtilityFamily, GridIsSortedAndRespectsKappa) {
    const auto box = Domain::unit_box(2);
    const auto fam = UtilityFamily::grid(WaldKind::CES, box, 4, {2.0, -1.0});
    EXPECT_EQ(fam.size(), 10u);
    for (std::size_t i = 1; i < fam.size(); ++i) {
        EXPECT_LT(fam.members()[i - 1].params(), fam.members()[i].params());
    }
    const auto lin = UtilityFamily::grid(WaldKind::Linear, box, 10, {}, 1.0);
    for (const auto& u : lin.members()) {
        EXPECT_LE(lipschitz_estimate(u, box, 0.05), 1.0 * (1 + 1e-6));
    }
    // (1, 0) has slope 1
    EXPECT_THROW(UtilityFamily::grid(WaldKind::Linear, box, 10, {}, 0.8), ConfigError);
    EXPECT_THROW(UtilityFamily::explicit_members(box, {WaldUtility::linear({1.0, 0.0})}, 0.9),
                 ConfigError);
    const auto cd = UtilityFamily::grid(WaldKind::CobbDouglas, box, 4);
    EXPECT_EQ(cd.size(), 3u);
}

TEST(UtilityFamily, JsonRoundTrip) {
    const auto d = cone();
    const auto fam = UtilityFamily::grid(WaldKind::CES, d, 5, {0.5, 2.0});
    const auto back = UtilityFamily::from_json(fam.to_json(), d);
    EXPECT_EQ(back.members(), fam.members());
    EXPECT_THROW(UtilityFamily::from_json(nlohmann::json{{"ces", {{"bogus", 1}}}}, d), ConfigError);
}

TEST(EvaluationGrid, StaysInsideDomain) {
    const auto d = cone();
    const auto grid = evaluation_grid(d, 21);
    EXPECT_FALSE(grid.empty());
    for (const auto& x : grid) {
        EXPECT_TRUE(d.contains(x));
    }
    EXPECT_EQ(evaluation_grid(Domain::unit_box(2), 11).size(), 121u);
}
