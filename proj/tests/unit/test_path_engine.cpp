#include <doctest.h>

#include <cmath>
#include <set>

#include "shs/path_engine.hpp"
#include "shs/stats.hpp"

using namespace shs;

TEST_SUITE("path_engine") {

TEST_CASE("grid") {
    const TimeGrid g{2.0, 8};
    CHECK(g.dt() == 0.25);
    CHECK(g.time(8) == 2.0);
    CHECK(g.n_nodes() == 9);
    CHECK_THROWS_AS((TimeGrid{1.0, 0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((TimeGrid{-1.0, 4}.validate()), std::invalid_argument);
}

TEST_CASE("seeds are distinct and stable") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(path_seed(42, i));
    CHECK(seen.size() == 10000);
    CHECK(path_seed(42, 7) == path_seed(42, 7));
    CHECK(path_seed(42, 7) != path_seed(43, 7));
}

TEST_CASE("brownian path is reproducible and has the right variance") {
    const TimeGrid g{1.0, 1000};
    const BrownianPath a = sample_brownian(g, 99), b = sample_brownian(g, 99);
    REQUIRE(a.w.size() == g.n_nodes());
    CHECK(a.w[0] == 0.0);
    CHECK(a.w == b.w);
    CHECK(sample_brownian(g, 100).w != a.w);

    std::vector<double> sq;
    for (std::uint64_t p = 0; p < 200; ++p) {
        const BrownianPath w = sample_brownian(g, path_seed(5, p));
        for (std::size_t k = 0; k < g.n_steps; ++k) sq.push_back(std::pow(w.w[k + 1] - w.w[k], 2) / g.dt());
    }
    const MeanStderr m = mean_stderr(sq);
    CHECK(std::abs(m.mean - 1.0) < 4.0 * m.stderr_);
}

TEST_CASE("bridge refinement keeps coarse nodes") {
    const TimeGrid g{1.0, 50};
    const BrownianPath c = sample_brownian(g, 3);
    const BrownianPath f = refine_bridge(c);
    REQUIRE(f.grid.n_steps == 100);
    for (std::size_t k = 0; k <= 50; ++k) CHECK(f.w[2 * k] == c.w[k]);
    CHECK(refine_bridge(c).w == f.w);

    // Midpoint given its neighbours: mean of the ends, variance dt/4.
    std::vector<double> r;
    for (std::uint64_t p = 0; p < 400; ++p) {
        const BrownianPath cp = sample_brownian(g, path_seed(8, p));
        const BrownianPath fp = refine_bridge(cp);
        for (std::size_t k = 0; k < 50; ++k) {
            const double dev = fp.w[2 * k + 1] - 0.5 * (cp.w[k] + cp.w[k + 1]);
            r.push_back(dev * dev / (0.25 * g.dt()));
        }
    }
    const MeanStderr m = mean_stderr(r);
    CHECK(std::abs(m.mean - 1.0) < 4.0 * m.stderr_);
}

TEST_CASE("exponential functionals on the zero path") {
    const TimeGrid g{3.0, 30};
    const ExpFunctionals e = exp_functionals(zero_path(g), 1.7);
    for (std::size_t k = 0; k <= 30; ++k) {
        CHECK(e.z[k] == 1.0);
        CHECK(e.a[k] == doctest::Approx(0.5 * g.time(k)).epsilon(1e-14));
    }
    const double mu = 0.4, t = 2.0;
    const double exact = std::expm1(2.0 * mu * t) / (2.0 * mu);
    const BrownianPath fine = zero_path({3.0, 30000});
    CHECK(a_mu_functional(fine, mu, t) == doctest::Approx(exact).epsilon(1e-7));
}

TEST_CASE("exponential functionals follow the path") {
    // A(t) = 1/2 int_0^t Z by trapezoid.
    const TimeGrid g{1.0, 4};
    BrownianPath p = zero_path(g);
    p.w = {0.0, 0.5, -0.25, 0.1, 0.3};
    const ExpFunctionals e = exp_functionals(p, 2.0);
    double a = 0.0;
    for (std::size_t k = 0; k <= 4; ++k) {
        CHECK(e.z[k] == doctest::Approx(std::exp(-2.0 * p.w[k])));
        if (k > 0) a += 0.25 * g.dt() * (std::exp(-2.0 * p.w[k - 1]) + std::exp(-2.0 * p.w[k]));
        CHECK(e.a[k] == doctest::Approx(a));
    }
    p.w[2] = -400.0;
    CHECK_THROWS_AS(exp_functionals(p, 2.0), std::overflow_error);
}

}
