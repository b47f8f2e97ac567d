#include <doctest.h>

#include <cmath>
#include <limits>

#include "shs/quadrature.hpp"
#include "shs/stats.hpp"

using namespace shs;

TEST_SUITE("stats") {

TEST_CASE("compensated sum") {
    const std::vector<double> xs{1e16, 1.0, -1e16, 1.0};
    CHECK(compensated_sum(xs) == 2.0);
}

TEST_CASE("mean, stderr, quantiles") {
    const std::vector<double> xs{1, 2, 3, 4, 5};
    const MeanStderr m = mean_stderr(xs);
    CHECK(m.mean == 3.0);
    CHECK(m.sd == doctest::Approx(std::sqrt(2.5)));
    CHECK(m.stderr_ == doctest::Approx(std::sqrt(2.5 / 5.0)));
    CHECK(median({5, 1, 3}) == 3.0);
    CHECK(median({4, 1, 3, 2}) == 2.5);
    const Moments mo = sample_moments(std::vector<double>{-1, 1, -1, 1});
    CHECK(mo.skewness == doctest::Approx(0.0));
}

TEST_CASE("slope fit and KS helpers") {
    const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
    CHECK(fit_slope(x, y) == doctest::Approx(2.0));
    CHECK(ks_coefficient(0.01) == doctest::Approx(1.6276).epsilon(1e-3));
    CHECK(ks_coefficient(0.05) == doctest::Approx(1.3581).epsilon(1e-3));
    const auto uniform = [](double t) { return std::clamp(t, 0.0, 1.0); };
    CHECK(ks_one_sample({0.5}, uniform, 0.0, 1.0) == doctest::Approx(0.5));
    CHECK(ks_one_sample({0.25, 0.75, std::numeric_limits<double>::infinity()}, uniform, 0.0, 1.0) ==
          doctest::Approx(5.0 / 12.0));
    CHECK(ks_two_sample({1, 2, 3}, {1, 2, 3}) == 0.0);
    CHECK(ks_two_sample({1, 2}, {3, 4}) == 1.0);
}

TEST_CASE("parallel_for results do not depend on the worker count") {
    std::vector<double> a(1000), b(1000);
    parallel_for(a.size(), 1, [&](std::size_t i) { a[i] = std::sin(double(i)); });
    parallel_for(b.size(), 4, [&](std::size_t i) { b[i] = std::sin(double(i)); });
    CHECK(a == b);
}

}

TEST_SUITE("quadrature") {

TEST_CASE("16-point Gauss-Legendre rule") {
    const GaussRule16& g = gauss16();
    double wsum = 0.0;
    for (std::size_t i = 0; i < 16; ++i) {
        wsum += g.w[i];
        CHECK(g.w[i] > 0.0);
        CHECK(std::abs(g.x[i]) < 1.0);
    }
    CHECK(wsum == doctest::Approx(2.0).epsilon(1e-15));
    std::vector<double> nodes(g.x.begin(), g.x.end());
    std::sort(nodes.begin(), nodes.end());
    for (std::size_t i = 0; i < 16; ++i) CHECK(nodes[i] == doctest::Approx(-nodes[15 - i]).epsilon(1e-15));
    // Largest node of P16.
    CHECK(nodes[15] == doctest::Approx(0.9894009349916499).epsilon(1e-15));
    // Exact through degree 31.
    for (int p = 0; p <= 31; ++p) {
        double s = 0.0;
        for (std::size_t i = 0; i < 16; ++i) s += g.w[i] * std::pow(g.x[i], p);
        CHECK(s == doctest::Approx(p % 2 ? 0.0 : 2.0 / (p + 1)).epsilon(1e-14).scale(1.0));
    }
}

TEST_CASE("composite panels") {
    const double v = integrate_panels([](double x) { return std::exp(-x * x); }, -6.0, 6.0, 8);
    CHECK(v == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-14));
}

}
