#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "ipu/data_model.hpp"
#include "support.hpp"

using namespace ipu;

namespace {

ObservationSet parse(const std::string& text, bool header = false) {
    std::istringstream in(text);
    return parse_observations(in, header);
}

std::string error_of(const std::string& text) {
    try {
        parse(text);
    } catch (const DataError& e) {
        return e.what();
    }
    return {};
}

Matrix<double> single_column(std::initializer_list<double> xs) {
    Matrix<double> m(xs.size(), 2);
    std::size_t r = 0;
    for (double x : xs) {
        m(r, 0) = x;
        m(r, 1) = static_cast<double>(r);
        ++r;
    }
    return m;
}

}  // namespace

TEST_CASE("fixture holds the twenty published observations") {
    const auto& obs = cottin_pfeifer_fixture();
    CHECK(obs.n() == 20);
    CHECK(obs.d() == 2);
    CHECK(obs.values()(0, 0) == doctest::Approx(0.468));
    CHECK(obs.values()(0, 1) == doctest::Approx(0.966));
    CHECK(obs.values()(16, 0) == doctest::Approx(0.063));
    CHECK(resolve_dataset("fixture:cottin-pfeifer-4.2").values() == obs.values());
    CHECK_THROWS_AS(resolve_dataset("fixture:nope"), DataError);
}

TEST_CASE("csv parsing") {
    SUBCASE("three columns, five rows") {
        auto obs = parse("1,2,3\n4,5,6\n7,8,9\n1.5,2.5,3.5\n-1,0,1e3\n");
        CHECK(obs.n() == 5);
        CHECK(obs.d() == 3);
        CHECK(obs.values()(4, 2) == 1000.0);
    }
    SUBCASE("header and blank lines") {
        auto obs = parse("x,y\n1,2\n\n3,4\n", true);
        CHECK(obs.n() == 2);
        CHECK(obs.values()(1, 0) == 3.0);
    }
    SUBCASE("single column is rejected") {
        CHECK(error_of("1\n2\n3\n").find("d < 2") != std::string::npos);
    }
    SUBCASE("ragged row carries its line") {
        std::istringstream in("1,2\n3,4\n5\n");
        try {
            parse_observations(in, false);
            FAIL("expected DataError");
        } catch (const DataError& e) {
            CHECK(e.row() == 3);
        }
    }
    SUBCASE("non-numeric cell") {
        CHECK(error_of("1,2\n3,abc\n").find("row 2") != std::string::npos);
    }
    SUBCASE("too few rows") {
        CHECK(error_of("1,2\n").find("n < 2") != std::string::npos);
    }
}

TEST_CASE("load_observations reads a file and sniffs the header") {
    const auto path = std::filesystem::temp_directory_path() / "ipucop_data_model_test.csv";
    {
        std::ofstream f(path);
        f << "x,y\n0.468,0.966\n9.951,2.679\n0.866,0.897\n";
    }
    CHECK(sniff_header(path));
    auto obs = resolve_dataset(path.string());
    CHECK(obs.n() == 3);
    CHECK(obs.values()(1, 1) == doctest::Approx(2.679));
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_observations(path, false), DataError);
}

TEST_CASE("ranks of the fixture match the published table") {
    auto r = compute_ranks(cottin_pfeifer_fixture());
    for (std::size_t i = 0; i < 20; ++i) {
        CHECK(r(i, 0) == testsupport::kRanksX[i]);
        CHECK(r(i, 1) == testsupport::kRanksY[i]);
    }
    CHECK(r(16, 0) == 1);
    CHECK(r(1, 0) == 20);
    CHECK(r(16, 1) == 1);
    CHECK(r(1, 1) == 20);
}

TEST_CASE("ties are broken by row order") {
    auto r = compute_ranks(ObservationSet(single_column({5, 5, 1})));
    CHECK(r(0, 0) == 2);
    CHECK(r(1, 0) == 3);
    CHECK(r(2, 0) == 1);
}

TEST_CASE("rank matrix rejects non-permutations") {
    Matrix<int> m(3, 2);
    m(0, 0) = 1; m(1, 0) = 2; m(2, 0) = 2;
    m(0, 1) = 1; m(1, 1) = 2; m(2, 1) = 3;
    CHECK_THROWS_AS(RankMatrix{m}, DataError);
}

TEST_CASE("pseudo-observations") {
    auto r = compute_ranks(cottin_pfeifer_fixture());
    auto p = pseudo_observations(r);
    CHECK(p.values(1, 0) == 1.0);
    CHECK(p.values(1, 1) == 1.0);
    CHECK(p.values(16, 0) == doctest::Approx(0.05));

    Matrix<int> m(19, 2);
    for (int i = 0; i < 19; ++i) {
        m(i, 0) = i + 1;
        m(i, 1) = 19 - i;
    }
    auto q = pseudo_observations(RankMatrix(m), RankConvention::RankOverNPlus1);
    CHECK(q.values(9, 0) == doctest::Approx(0.5));
    CHECK(q.convention == RankConvention::RankOverNPlus1);
}

TEST_CASE("rank properties on random data") {
    std::mt19937_64 gen(7);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + gen() % 60;
        Matrix<double> m(n, 3);
        for (auto& v : m.data()) v = std::round(nd(gen) * 4.0) / 4.0;  // coarse grid forces ties
        ObservationSet obs(m);
        auto r = compute_ranks(obs);

        Matrix<double> t(n, 3);
        for (std::size_t i = 0; i < n; ++i) {
            t(i, 0) = std::exp(m(i, 0));
            t(i, 1) = m(i, 1) * m(i, 1) * m(i, 1);
            t(i, 2) = 2.0 * m(i, 2) + 5.0;
        }
        auto rt = compute_ranks(ObservationSet(t));
        CHECK(rt.ranks() == r.ranks());

        for (std::size_t k = 0; k < 3; ++k) {
            std::vector<int> seen(n + 1, 0);
            std::vector<double> by_rank(n);
            for (std::size_t i = 0; i < n; ++i) {
                const int rk = r(i, k);
                REQUIRE(rk >= 1);
                REQUIRE(rk <= static_cast<int>(n));
                ++seen[rk];
                by_rank[rk - 1] = m(i, k);
            }
            for (std::size_t j = 1; j <= n; ++j) CHECK(seen[j] == 1);
            CHECK(std::is_sorted(by_rank.begin(), by_rank.end()));
        }
    }
}
