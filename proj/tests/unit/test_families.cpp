#include <doctest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <random>

#include "ipu/families.hpp"
#include "ipu/random.hpp"
#include "support.hpp"

using namespace ipu;

namespace {

const FamilyParams nb5 = FamilyParams::negative_binomial(5);
const FamilyParams po6 = FamilyParams::poisson(6.0);

// Direct partial sum of phi_i(u) over i, stopped once the geometric bound on
// the remainder (successive ratios are decreasing in i) drops below 1e-13.
double phi_series(const FamilyParams& p, double u, double& remainder_bound) {
    const double a = p.a();
    const double lu = -std::log1p(-u);
    double sum = 0.0;
    for (ComponentIndex i = 0;; ++i) {
        const double term = phi_weight(p, i, u);
        sum += term;
        const double ratio = p.kind() == FamilyKind::NegativeBinomial ? (a + i) / (i + 1.0) * u : a * lu / (i + 1.0);
        if (ratio < 1.0) {
            remainder_bound = term * ratio / (1.0 - ratio);
            if (remainder_bound < 1e-13) return sum;
        }
    }
}

double component_cdf_oracle(const FamilyParams& p, ComponentIndex i, double u) {
    if (p.kind() == FamilyKind::NegativeBinomial) return boost::math::ibeta(i + 1.0, p.a() + 1.0, u);
    return boost::math::gamma_p(i + 1.0, (p.a() + 1.0) * -std::log1p(-u));
}

}  // namespace

TEST_CASE("family construction") {
    CHECK_THROWS_AS(FamilyParams::negative_binomial(0), std::invalid_argument);
    CHECK_THROWS_AS(FamilyParams::poisson(0.0), std::invalid_argument);
    CHECK_THROWS_AS(FamilyParams::make(FamilyKind::NegativeBinomial, 2.5), std::invalid_argument);
    CHECK(FamilyParams::make(FamilyKind::Poisson, 2.5).a() == 2.5);
}

TEST_CASE("phi weights") {
    CHECK(phi_weight(nb5, 0, 0.5) == doctest::Approx(0.03125).epsilon(1e-12));
    CHECK(phi_weight(nb5, 1, 0.5) == doctest::Approx(0.078125).epsilon(1e-12));
    CHECK(phi_weight(po6, 0, 0.5) == doctest::Approx(0.015625).epsilon(1e-12));
    CHECK(phi_weight(nb5, 2000, 0.999) > 0.0);
    CHECK_THROWS_AS(phi_weight(nb5, 0, 1.0), std::domain_error);
    CHECK_THROWS_AS(phi_weight(nb5, -1, 0.5), std::domain_error);
}

TEST_CASE("marginal masses") {
    CHECK(marginal_alpha(nb5, 0) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    CHECK(marginal_alpha(po6, 0) == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
    CHECK(marginal_alpha(po6, 1) == doctest::Approx(6.0 / 49.0).epsilon(1e-12));
}

TEST_CASE("component densities") {
    CHECK(component_density(nb5, 0, 0.5) == doctest::Approx(0.1875).epsilon(1e-12));
    CHECK(component_density(po6, 0, 1e-12) == doctest::Approx(7.0).epsilon(1e-9));

    boost::math::quadrature::tanh_sinh<double> integrator;
    for (const auto& p : {nb5, po6, FamilyParams::negative_binomial(15), FamilyParams::poisson(2.5)}) {
        for (ComponentIndex i : {0, 1, 4, 17, 60}) {
            const double total = integrator.integrate([&](double u) { return component_density(p, i, u); }, 0.0, 1.0);
            CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
        }
    }
}

TEST_CASE("closed-form component density sum") {
    for (const auto& p : {nb5, po6}) {
        for (double u : {0.05, 0.4, 0.9}) {
            double s = 0.0;
            for (ComponentIndex i = 0; i < 4000; ++i) s += component_density(p, i, u);
            CHECK(component_density_sum(p, u) == doctest::Approx(s).epsilon(1e-9));
        }
    }
}

TEST_CASE("partition of unity at random points") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        const bool nb = t % 2 == 0;
        const auto p = nb ? FamilyParams::negative_binomial(1 + static_cast<int>(gen() % 20))
                          : FamilyParams::poisson(0.2 + 20.0 * unit(gen));
        const double u = 0.001 + 0.998 * unit(gen);
        double bound = 0.0;
        const double s = phi_series(p, u, bound);
        CHECK(bound < 1e-12);
        CHECK(std::abs(s - 1.0) < 1e-9);
    }
}

TEST_CASE("phi equals alpha times f") {
    std::mt19937_64 gen(12);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int t = 0; t < 500; ++t) {
        const auto p = t % 2 ? nb5 : po6;
        const ComponentIndex i = static_cast<ComponentIndex>(gen() % 300);
        const double u = 0.01 + 0.98 * unit(gen);
        const double lhs = phi_weight(p, i, u);
        const double rhs = marginal_alpha(p, i) * component_density(p, i, u);
        if (lhs > 1e-300) CHECK(std::abs(lhs - rhs) <= 1e-12 * lhs);
    }
}

TEST_CASE("driver quantile and cdf") {
    CHECK(driver_quantile(nb5, 0.5) == 5);
    CHECK(driver_quantile(nb5, 1.0 / 6.0) == 1);
    CHECK(driver_quantile(po6, 0.5) == 4);
    CHECK(driver_quantile(nb5, 1e-300) == 0);
    CHECK(driver_quantile(po6, 1e-300) == 0);

    CHECK(driver_cdf(nb5, 0) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
    CHECK(driver_cdf(nb5, -1) == 0.0);
    CHECK(driver_cdf(nb5, 1'000'000'000) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(driver_cdf(po6, 1) == doctest::Approx(13.0 / 49.0).epsilon(1e-14));

    for (const auto& p : {nb5, po6}) {
        double prev = 0.0;
        double acc = 0.0;
        for (ComponentIndex i = 0; i < 100; ++i) {
            acc += marginal_alpha(p, i);
            const double c = driver_cdf(p, i);
            CHECK(c > prev);
            CHECK(c == doctest::Approx(acc).epsilon(1e-12));
            prev = c;
        }
    }
}

TEST_CASE("quantile/cdf duality") {
    std::mt19937_64 gen(13);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (const auto& p : {nb5, po6, FamilyParams::negative_binomial(1), FamilyParams::poisson(0.3)}) {
        for (int t = 0; t < 10'000; ++t) {
            double u = unit(gen);
            if (u == 0.0) continue;
            if (t % 10 == 0) u = driver_cdf(p, static_cast<ComponentIndex>(gen() % 50));  // exact boundaries
            if (u >= 1.0) continue;
            const ComponentIndex i = driver_quantile(p, u);
            CHECK(driver_cdf(p, i - 1) <= u);
            CHECK(u < driver_cdf(p, i));
        }
    }
}

TEST_CASE("driver quantile frequencies match the marginal masses") {
    std::mt19937_64 gen(14);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t n = 1'000'000;
    for (const auto& p : {nb5, po6}) {
        std::vector<double> counts(31, 0.0);
        for (std::size_t t = 0; t < n; ++t) {
            double u;
            do u = unit(gen);
            while (u == 0.0);
            const auto i = driver_quantile(p, u);
            if (i <= 30) counts[i] += 1.0;
        }
        const double a = p.a();
        for (int i = 0; i <= 30; ++i) {
            const double expected = p.kind() == FamilyKind::NegativeBinomial ? a / ((a + i) * (a + i + 1))
                                                                              : std::pow(a, i) / std::pow(a + 1, i + 1);
            CHECK(std::abs(counts[i] / n - expected) < 4.0 * testsupport::binomial_se(expected, n));
        }
    }
}

TEST_CASE("driver cutoff and phi windows") {
    const auto c = driver_cutoff(po6, 1e-10, 100'000);
    CHECK(driver_cdf(po6, c) > 1.0 - 1e-10);
    CHECK(driver_cdf(po6, c - 1) <= 1.0 - 1e-10);
    CHECK(driver_cutoff(nb5, 1e-10, 10'000) == 10'000);

    for (const auto& p : {nb5, po6}) {
        for (double u : {0.01, 0.5, 0.97}) {
            const auto w = phi_window(p, u, 1e-12, 1'000'000);
            double inside = 0.0;
            for (ComponentIndex i = w.lo; i <= w.hi; ++i) inside += phi_weight(p, i, u);
            CHECK(!w.capped);
            CHECK(w.tail_mass <= 1e-12);
            CHECK(1.0 - inside <= w.tail_mass + 1e-13);
        }
    }
    const auto capped = phi_window(nb5, 0.999, 1e-12, 100);
    CHECK(capped.capped);
    CHECK(capped.hi == 100);
}

TEST_CASE("component sampler") {
    SUBCASE("negative binomial, i = 0: mean of Beta(1, 6)") {
        boost::math::quadrature::tanh_sinh<double> integrator;
        const double mean = integrator.integrate([](double u) { return u * component_density(nb5, 0, u); }, 0.0, 1.0);
        CHECK(mean == doctest::Approx(1.0 / 7.0).epsilon(1e-10));
        const double var = integrator.integrate(
            [&](double u) { return (u - mean) * (u - mean) * component_density(nb5, 0, u); }, 0.0, 1.0);

        Rng rng(101);
        const std::size_t n = 1'000'000;
        double s = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            const double x = sample_component(nb5, 0, rng);
            REQUIRE(x > 0.0);
            REQUIRE(x < 1.0);
            s += x;
        }
        CHECK(std::abs(s / n - mean) < 3.0 * std::sqrt(var / n));
    }
    SUBCASE("poisson, i = 0: cdf at one half") {
        Rng rng(102);
        const std::size_t n = 1'000'000;
        double below = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            const double x = sample_component(po6, 0, rng);
            REQUIRE(x > 0.0);
            REQUIRE(x < 1.0);
            if (x <= 0.5) below += 1.0;
        }
        const double expected = 1.0 - std::pow(0.5, 7);
        CHECK(std::abs(below / n - expected) < 3.0 * testsupport::binomial_se(expected, n));
    }
    SUBCASE("kolmogorov-smirnov against the component cdf") {
        Rng rng(103);
        const std::size_t n = 100'000;
        for (const auto& p : {nb5, po6, FamilyParams::negative_binomial(15)}) {
            for (ComponentIndex i : {0, 3, 40}) {
                std::vector<double> xs(n);
                for (auto& x : xs) x = sample_component(p, i, rng);
                const double d = testsupport::ks_distance(xs, [&](double u) { return component_cdf_oracle(p, i, u); });
                CHECK(d < 1.95 / std::sqrt(static_cast<double>(n)));
            }
        }
    }
}
