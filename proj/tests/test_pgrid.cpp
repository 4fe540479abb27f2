#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "qdf/pgrid.hpp"

using namespace qdf;

TEST_CASE("log axis hits its endpoints exactly") {
    ParameterAxis t1("T1", 5.0, 6000.0, 13, Spacing::Log);
    CHECK(t1.to_param(1.0) == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(t1.to_param(13.0) == doctest::Approx(6000.0).epsilon(1e-14));
}

TEST_CASE("log midpoint is the geometric mean") {
    ParameterAxis t1("T1", 5.0, 6000.0, 13, Spacing::Log);
    CHECK(t1.to_param(7.0) == doctest::Approx(std::sqrt(5.0 * 6000.0)).epsilon(1e-12));
}

TEST_CASE("linear midpoint") {
    ParameterAxis b1("B1", 0.5, 1.5, 20, Spacing::Linear);
    CHECK(b1.to_param(10.5) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("round trip is identity to 1e-12 relative") {
    ParameterGrid grid({ParameterAxis("T1", 5.0, 6000.0, 13, Spacing::Log),
                        ParameterAxis("T2", 5.0, 2000.0, 8, Spacing::Log),
                        ParameterAxis("B1", 0.5, 1.5, 20, Spacing::Linear)});
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd theta(3);
        for (int p = 0; p < 3; ++p) {
            const auto& a = grid.axes[p];
            theta[p] = a.fraction_to_param(u(rng));
        }
        Eigen::VectorXd back = grid.to_params(grid.to_coords(theta));
        for (int p = 0; p < 3; ++p)
            CHECK(std::abs(back[p] - theta[p]) <= 1e-12 * std::abs(theta[p]));
    }
}

TEST_CASE("axis minimum maps to coordinate 1, geometric mean to the center") {
    ParameterAxis a("T2", 5.0, 2000.0, 9, Spacing::Log);
    CHECK(a.to_coord(5.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(a.to_coord(std::sqrt(5.0 * 2000.0)) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("canonical index order, last axis fastest") {
    ParameterGrid grid({ParameterAxis("T1", 1.0, 2.0, 2, Spacing::Linear),
                        ParameterAxis("T2", 1.0, 2.0, 2, Spacing::Linear)});
    auto idx = grid.iter_indices();
    REQUIRE(idx.size() == 4);
    CHECK(idx[0] == std::vector<int>{1, 1});
    CHECK(idx[1] == std::vector<int>{1, 2});
    CHECK(idx[2] == std::vector<int>{2, 1});
    CHECK(idx[3] == std::vector<int>{2, 2});
}

TEST_CASE("index enumeration length matches the atom count") {
    ParameterGrid grid({ParameterAxis("T1", 5.0, 6000.0, 13, Spacing::Log),
                        ParameterAxis("T2", 5.0, 2000.0, 8, Spacing::Log),
                        ParameterAxis("B1", 0.5, 1.5, 20, Spacing::Linear)});
    CHECK(grid.atom_count() == 2080);
    CHECK(grid.iter_indices().size() == 2080);

    ParameterGrid one({ParameterAxis("T1", 1.0, 3.0, 3, Spacing::Linear)});
    auto idx = one.iter_indices();
    REQUIRE(idx.size() == 3);
    CHECK(idx[0] == std::vector<int>{1});
    CHECK(idx[2] == std::vector<int>{3});
}

TEST_CASE("linear index round trip") {
    ParameterGrid grid({ParameterAxis("T1", 5.0, 6000.0, 5, Spacing::Log),
                        ParameterAxis("T2", 5.0, 2000.0, 4, Spacing::Log),
                        ParameterAxis("B1", 0.5, 1.5, 3, Spacing::Linear)});
    for (std::int64_t i = 0; i < grid.atom_count(); ++i)
        CHECK(grid.linear_index(grid.index_vector(i)) == i);
}

TEST_CASE("node spacing law: constant ratio on log axes, constant step on linear") {
    ParameterAxis lg("T1", 5.0, 6000.0, 13, Spacing::Log);
    double ratio = lg.to_param(2) / lg.to_param(1);
    for (int k = 2; k < 13; ++k) {
        double r = lg.to_param(k + 1) / lg.to_param(k);
        CHECK(std::abs(r - ratio) <= 1e-12 * ratio);
    }
    ParameterAxis ln("B1", 0.5, 1.5, 20, Spacing::Linear);
    double step = ln.to_param(2) - ln.to_param(1);
    for (int k = 2; k < 20; ++k)
        CHECK(std::abs(ln.to_param(k + 1) - ln.to_param(k) - step) <= 1e-12);
}

TEST_CASE("monotonicity of f per axis") {
    for (auto spacing : {Spacing::Log, Spacing::Linear}) {
        ParameterAxis a("T1", 5.0, 6000.0, 17, spacing);
        double prev = a.to_param(1.0);
        for (double v = 1.1; v <= 17.0; v += 0.1) {
            double cur = a.to_param(v);
            CHECK(cur > prev);
            prev = cur;
        }
    }
}

TEST_CASE("domain errors") {
    ParameterAxis a("T1", 5.0, 6000.0, 13, Spacing::Log);
    CHECK_THROWS_AS(a.to_param(0.5), OutOfDomain);
    CHECK_THROWS_AS(a.to_param(13.5), OutOfDomain);
    CHECK_NOTHROW(a.to_param(0.5, 1.0)); // extension widens the box
    CHECK_THROWS_AS(a.to_coord(4.0), OutOfDomain);
    CHECK_THROWS_AS(ParameterAxis("bad", -1.0, 5.0, 4, Spacing::Log), InvalidParams);
    CHECK_THROWS_AS(ParameterAxis("bad", 5.0, 5.0, 4, Spacing::Linear), InvalidParams);
    CHECK_THROWS_AS(ParameterAxis("bad", 1.0, 5.0, 1, Spacing::Linear), InvalidParams);
}

TEST_CASE("axis declaration parsing") {
    ParameterAxis a = parse_axis("T1 log 5 6000 13");
    CHECK(a.name == "T1");
    CHECK(a.spacing == Spacing::Log);
    CHECK(a.K == 13);
    CHECK_THROWS_AS(parse_axis("T1 cubic 5 6000 13"), InvalidParams);
    CHECK_THROWS_AS(parse_axis("T1 log 5"), InvalidParams);
}
