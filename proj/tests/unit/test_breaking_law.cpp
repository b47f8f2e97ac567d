#include <doctest.h>

#include <cmath>

#include "shs/breaking_law.hpp"

using namespace shs;

namespace {

struct ThetaRef {
    double y, t, value;
};

// tests/oracles/gen_theta_reference.py (mpmath, 60 digits, real axis).
const ThetaRef kTheta[] = {
    {0.3, 1, 0.075592708346534621},   {2, 1, 0.74088833861319974},    {10, 1, 0.00055666698702993783},
    {50, 1, 1.6688667840803324e-21},  {0.3, 0.5, 0.00029538707843948103}, {2, 0.5, 4.0453290901483014},
    {10, 0.5, 0.058631367818879681},  {50, 0.5, 4.8155689682524793e-19}, {2, 0.2, 0.055297955718435492},
    {10, 0.2, 385.13551258463293},    {50, 0.2, 7.3069640713334629e-13},
};

struct CdfRef {
    double tau, c, value;
};

// mpmath double integral of the joint (A, W) density.
const CdfRef kCdf[] = {
    {1.0, 0.5, 0.2021811136},  {1.0, 1.0, 0.4332568352},  {1.0, 2.0, 0.6602657012}, {1.0, 1e4, 0.9999999913},
    {0.25, 0.5, 0.8535023011}, {0.25, 1.0, 0.9811455339}, {0.25, 2.0, 0.9987774255},
    {5.0, 0.5, 0.04818282507}, {5.0, 1.0, 0.120488017},   {5.0, 2.0, 0.2189645126},
};

}  // namespace

TEST_SUITE("breaking_law") {

TEST_CASE("breaking time of a tabulated functional") {
    ExpFunctionals e;
    e.grid = {1.0, 4};
    e.z = {1, 1, 1, 1, 1};
    e.a = {0.0, 0.125, 0.25, 0.375, 0.5};
    const BreakingTime bt = breaking_time(e, -1.0 / 0.3);
    CHECK(bt.finite());
    CHECK(bt.value == doctest::Approx(0.6));
    CHECK(bt.bracket == 2);
    CHECK_FALSE(breaking_time(e, -1.0).finite());
    CHECK_FALSE(breaking_time(e, 0.5).finite());
}

TEST_CASE("streamed crossing times match the stored path") {
    const TimeGrid g{3.0, 3000};
    for (std::uint64_t seed : {1ull, 77ull, 12345ull}) {
        const ExpFunctionals e = exp_functionals(sample_brownian(g, seed), 1.3);
        const std::vector<double> q0{-0.5, -1.0, -2.0};
        std::vector<double> thr;
        for (double q : q0) thr.push_back(-1.0 / q);
        const std::vector<double> ct = crossing_times(g, seed, 1.3, thr);
        for (std::size_t j = 0; j < q0.size(); ++j) CHECK(ct[j] == breaking_time(e, q0[j]).value);
    }
}

TEST_CASE("theta on the shifted contour matches the mpmath reference") {
    for (const auto& r : kTheta) {
        INFO("y=" << r.y << " t=" << r.t);
        CHECK(hartman_watson_theta(r.y, r.t) == doctest::Approx(r.value).epsilon(1e-8));
    }
    // Moderate t: the real-axis route agrees.
    CHECK(hartman_watson_theta_real_axis(2.0, 1.0) == doctest::Approx(0.74088833861319974).epsilon(1e-8));
}

TEST_CASE("density and CDF of A(t)") {
    CHECK(yor_density(1.0, 1.0) == doctest::Approx(0.350568560572144).epsilon(1e-8));
    for (const auto& r : kCdf) {
        INFO("tau=" << r.tau << " c=" << r.c);
        CHECK(yor_cdf(r.c, r.tau) == doctest::Approx(r.value).epsilon(2e-9).scale(1.0));
    }
    const std::vector<double> batch = yor_cdf({2.0, 0.5, 1.0}, 1.0);
    CHECK(batch[0] == doctest::Approx(0.6602657012).epsilon(1e-8));
    CHECK(batch[1] == doctest::Approx(0.2021811136).epsilon(1e-8));
    for (double c : {0.3, 1.0, 3.0}) CHECK(yor_cdf_reduced(c, 1.0) == doctest::Approx(yor_cdf(c, 1.0)).epsilon(1e-7));
}

TEST_CASE("small-time refusal") {
    CHECK_THROWS_AS(yor_cdf(1.0, 0.01), SmallTimeRefusal);
    CHECK_THROWS_AS(breaking_cdf(0.1, -1.0, 1.0), SmallTimeRefusal);
    YorQuadratureParams p;
    p.min_t = 0.005;
    CHECK_NOTHROW(yor_cdf(1.0, 0.01, p));
}

TEST_CASE("breaking CDF is the time-changed CDF of A") {
    // A(t) = 1/2 int exp(-s' W) = (2/s'^2) A0(s'^2 t / 4) in law; t* >= t iff A(t) <= -1/q0.
    for (double sp : {0.5, 1.0, 2.0})
        for (double q0 : {-0.5, -2.0}) {
            const double t = 2.0;
            CHECK(breaking_cdf(t, q0, sp) == doctest::Approx(yor_cdf(-sp * sp / (2.0 * q0), sp * sp * t / 4.0)));
        }
    const std::vector<double> many = breaking_cdf(2.0, std::vector<double>{-0.5, -1.0}, 1.0);
    CHECK(many[1] == doctest::Approx(breaking_cdf(2.0, -1.0, 1.0)).epsilon(1e-9));
    CHECK(breaking_cdf_reduced(2.0, -1.0, 1.0) == doctest::Approx(many[1]).epsilon(1e-7));
}

TEST_CASE("Monte Carlo agrees with the quadrature law") {
    const McEstimate mc = mc_breaking_cdf(1.0, -1.0, 1.0, 4000, 11, {1e-3, 1});
    CHECK(std::abs(mc.p - breaking_cdf(1.0, -1.0, 1.0)) < 4.0 * mc.stderr_ + 2e-3);
    const McEstimate again = mc_breaking_cdf(1.0, -1.0, 1.0, 4000, 11, {1e-3, 3});
    CHECK(again.p == mc.p);
    CHECK(mc_breaking_cdf(1.0, 0.5, 1.0, 10, 1).p == 1.0);
}

}
