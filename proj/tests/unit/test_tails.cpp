#include <doctest.h>

#include <cmath>
#include <random>

#include "ipu/data_model.hpp"
#include "ipu/engine.hpp"
#include "ipu/tails.hpp"

using namespace ipu;

namespace {

// 1 - C(2a, a) / 4^a with the binomial coefficient built exactly in integers.
double lambda_oracle(int a) {
    unsigned long long c = 1;
    for (int k = 1; k <= a; ++k) c = c * static_cast<unsigned long long>(a + k) / static_cast<unsigned long long>(k);
    return 1.0 - static_cast<double>(c) / std::ldexp(1.0, 2 * a);
}

Matrix<double> uniforms(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Matrix<double> x(n, 2);
    for (auto& v : x.data()) v = unit(gen);
    return x;
}

}  // namespace

TEST_CASE("exact upper tail coefficient") {
    CHECK(lambda_u_nb_exact(1) == 0.5);
    CHECK(lambda_u_nb_exact(5) == 0.75390625);
    CHECK(lambda_u_nb_exact(10) == doctest::Approx(1.0 - 184756.0 / 1048576.0).epsilon(1e-15));
    CHECK(std::abs(lambda_u_nb_exact(10) - 0.823797) < 1e-5);
    for (int a = 1; a <= 30; ++a) CHECK(lambda_u_nb_exact(a) == doctest::Approx(lambda_oracle(a)).epsilon(1e-14));
    for (int a = 1; a < 50; ++a) CHECK(lambda_u_nb_exact(a) < lambda_u_nb_exact(a + 1));
    CHECK(lambda_u_nb_exact(5000) < 1.0);
    CHECK(lambda_u_nb_exact(5000) > lambda_u_nb_exact(4999));
    CHECK_THROWS_AS(lambda_u_nb_exact(0), std::domain_error);
}

TEST_CASE("asymptotic upper tail coefficient") {
    const double pi = 3.14159265358979323846;
    CHECK(lambda_u_nb_asymptotic(5) == doctest::Approx(1.0 - 1.0 / std::sqrt(5.0 * pi)).epsilon(1e-15));
    CHECK(lambda_u_nb_asymptotic(100) == doctest::Approx(1.0 - 1.0 / std::sqrt(100.0 * pi)).epsilon(1e-15));
    CHECK(std::abs(lambda_u_nb_asymptotic(5) - 0.74765) < 1e-4);
    CHECK(std::abs(lambda_u_nb_asymptotic(100) - 0.943591) < 1e-4);
    CHECK(lambda_u_nb_asymptotic(0.01) == 0.0);
    CHECK(std::abs(lambda_u_nb_exact(100) - lambda_u_nb_asymptotic(100)) <
          std::abs(lambda_u_nb_exact(5) - lambda_u_nb_asymptotic(5)));
}

TEST_CASE("empirical estimator") {
    SUBCASE("corner mass is clamped") {
        Matrix<double> x(100, 2, 0.999);
        const auto e = empirical_lambda_u(x, 0.99);
        CHECK(e.estimate == 1.0);
        CHECK(e.sample_count == 100);
        CHECK(e.threshold == 0.99);
    }
    SUBCASE("independent uniforms") {
        const auto e = empirical_lambda_u(uniforms(1'000'000, 3), 0.9);
        CHECK(std::abs(e.estimate - 0.1) < 0.005);
    }
    SUBCASE("symmetric negative binomial model") {
        const FamilyParams nb5 = FamilyParams::negative_binomial(5);
        const IpuModel m(DriverSpec(BaseCopula::comonotone(2), {nb5, nb5}));
        const auto e = empirical_lambda_u(sample_copula(m, 1'000'000, 4), 0.99);
        CHECK(std::abs(e.estimate - 0.754) < 0.08);
    }
}

TEST_CASE("poisson models show decaying tail ratios") {
    const FamilyParams po6 = FamilyParams::poisson(6.0);
    const FamilyParams nb5 = FamilyParams::negative_binomial(5);
    const auto po = sample_copula(IpuModel(DriverSpec(BaseCopula::comonotone(2), {po6, po6})), 1'000'000, 5);
    const auto nb = sample_copula(IpuModel(DriverSpec(BaseCopula::comonotone(2), {nb5, nb5})), 1'000'000, 5);
    const double l1 = empirical_lambda_u(po, 0.9).estimate;
    const double l2 = empirical_lambda_u(po, 0.99).estimate;
    const double l3 = empirical_lambda_u(po, 0.999).estimate;
    CHECK(l1 > l2);
    CHECK(l2 > l3);
    CHECK(l3 < empirical_lambda_u(nb, 0.999).estimate);
}

TEST_CASE("asymmetric negative binomial models keep the tail coefficient") {
    const auto s = shuffle_of_m(compute_ranks(cottin_pfeifer_fixture()));
    for (int a : {5, 10, 15}) {
        const auto f = FamilyParams::negative_binomial(a);
        const auto x = sample_copula(IpuModel(DriverSpec(s, {f, f})), 1'000'000, 6);
        CHECK(std::abs(empirical_lambda_u(x, 0.99).estimate - lambda_u_nb_exact(a)) < 0.1);
    }
}
