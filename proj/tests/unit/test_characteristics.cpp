#include <doctest.h>

#include <cmath>

#include "shs/characteristics.hpp"

using namespace shs;

namespace {

// W(t) = 0.8 sin(3t): a smooth driver, for which the Stratonovich equations are ODEs.
BrownianPath smooth_path(const TimeGrid& g) {
    BrownianPath p = zero_path(g);
    for (std::size_t k = 0; k < g.n_nodes(); ++k) p.w[k] = 0.8 * std::sin(3.0 * g.time(k));
    return p;
}

double smooth_dw(double t) { return 2.4 * std::cos(3.0 * t); }

}  // namespace

TEST_SUITE("characteristics") {

TEST_CASE("initial data") {
    const StepInitialData box = StepInitialData::box(-1.0, 0.0, 1.0);
    CHECK(box.n_boxes() == 1);
    CHECK(box(0.5) == -1.0);
    CHECK(box(1.5) == 0.0);
    CHECK(box(-0.1) == 0.0);
    CHECK(box.l2_norm_sq() == 1.0);
    StepInitialData bad{{0.0, 1.0, 1.0}, {1.0, 2.0}};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    CHECK(parse_mode("dissipative") == ContinuationMode::Dissipative);
    CHECK(to_string(ContinuationMode::Conservative) == "conservative");
    CHECK_THROWS_AS(parse_mode("lossy"), std::invalid_argument);

    const StepInitialData p = project_initial([](double x) { return x < 0.5 ? 2.0 : -1.0; }, {0.0, 0.5, 1.0});
    CHECK(p.values[0] == doctest::Approx(2.0));
    CHECK(p.values[1] == doctest::Approx(-1.0));
    const StepInitialData lin = project_initial([](double x) { return x; }, {0.0, 1.0, 3.0});
    CHECK(lin.values[0] == doctest::Approx(0.5));
    CHECK(lin.values[1] == doctest::Approx(2.0));
}

TEST_CASE("closed forms on the zero path") {
    const TimeGrid g{3.0, 300};
    const ExpFunctionals e = exp_functionals(zero_path(g), 1.0);
    for (double v : {-1.0, 0.7, -0.4}) {
        for (std::size_t k : {0u, 100u, 150u, 300u}) {
            const double t = g.time(k);
            if (std::abs(2.0 + v * t) < 1e-9) continue;
            CHECK(q_lagrangian(e, v, k, ContinuationMode::Conservative) == doctest::Approx(2 * v / (2 + v * t)));
            CHECK(u_frak(e, v, k, ContinuationMode::Conservative) == doctest::Approx(v * (2 + v * t) / 2));
            CHECK(dxdx(e, v, k, ContinuationMode::Conservative) == doctest::Approx((2 + v * t) * (2 + v * t) / 4));
        }
    }
    // V = -1 breaks at t = 2, node 200.
    const LagrangianState at = lagrangian_state(e, -1.0, 200, ContinuationMode::Conservative);
    CHECK(at.singular);
    CHECK(std::isnan(at.q));
    CHECK(at.dxdx == doctest::Approx(0.0).epsilon(1e-12));
    const LagrangianState after = lagrangian_state(e, -1.0, 250, ContinuationMode::Dissipative);
    CHECK(after.q == 0.0);
    CHECK(after.u == 0.0);
    CHECK(after.dxdx == 0.0);
    const LagrangianState cons = lagrangian_state(e, -1.0, 300, ContinuationMode::Conservative);
    CHECK(cons.q == doctest::Approx(2.0));
    CHECK(cons.dxdx == doctest::Approx(0.25));
}

TEST_CASE("closed forms solve the characteristic ODEs for a smooth driver") {
    // dQ = -s' Q dW - Q^2/2 dt and d log dxdx = (Q + s' dW/dt) dt, integrated by RK4.
    const double sp = 0.9, v = 0.6, T = 2.0;
    const TimeGrid g{T, 20000};
    const ExpFunctionals e = exp_functionals(smooth_path(g), sp);
    auto rhs = [&](double t, double q, double) {
        return std::pair{-sp * smooth_dw(t) * q - 0.5 * q * q, q + sp * smooth_dw(t)};
    };
    double q = v, l = 0.0, t = 0.0;
    const double h = 1e-4;
    for (int i = 0; i < 20000; ++i) {
        const auto [k1q, k1l] = rhs(t, q, l);
        const auto [k2q, k2l] = rhs(t + h / 2, q + h / 2 * k1q, l + h / 2 * k1l);
        const auto [k3q, k3l] = rhs(t + h / 2, q + h / 2 * k2q, l + h / 2 * k2l);
        const auto [k4q, k4l] = rhs(t + h, q + h * k3q, l + h * k3l);
        q += h / 6 * (k1q + 2 * k2q + 2 * k3q + k4q);
        l += h / 6 * (k1l + 2 * k2l + 2 * k3l + k4l);
        t += h;
    }
    CHECK(q_lagrangian(e, v, g.n_steps, ContinuationMode::Conservative) == doctest::Approx(q).epsilon(1e-6));
    CHECK(std::log(dxdx(e, v, g.n_steps, ContinuationMode::Conservative)) == doctest::Approx(l).epsilon(1e-6));
    // u_frak = q0^2 D is the Lagrangian velocity increment: d u_frak / dt = q0^2 Z / 2.
    const double du = u_frak(e, v, 10001, ContinuationMode::Conservative) - u_frak(e, v, 9999, ContinuationMode::Conservative);
    CHECK(du / (2 * g.dt()) == doctest::Approx(0.5 * v * v * e.z[10000]).epsilon(1e-6));
}

TEST_CASE("base characteristic") {
    const TimeGrid g{1.0, 1000};
    const BrownianPath p = sample_brownian(g, 4);
    const SigmaSpec affine{0.7, 0.3};
    const std::vector<double> x = base_characteristic(p, affine, 0.2);
    for (std::size_t k = 0; k < g.n_nodes(); k += 100) {
        const double c = affine.intercept / affine.slope;
        CHECK(x[k] == doctest::Approx((0.2 + c) * std::exp(affine.slope * p.w[k]) - c));
    }
    const std::vector<double> shift = base_characteristic(p, {0.0, 1.0}, 0.2);
    CHECK(shift[500] == doctest::Approx(0.2 + p.w[500]));
    const std::vector<double> heun = heun_base_characteristic(p, affine, 0.2);
    CHECK(std::abs(heun.back() - x.back()) < 1e-3);
}

TEST_CASE("field assembly") {
    const TimeGrid g{3.0, 3000};
    const BrownianPath p = sample_brownian(g, 21);
    const StepInitialData data{{-1.0, -0.5, 0.0, 0.3, 1.0}, {-1.0, 0.5, -2.0, 1.0}};
    const SigmaSpec sigma{1.0, 0.2};
    for (auto mode : {ContinuationMode::Conservative, ContinuationMode::Dissipative}) {
        const CharacteristicField f = build_field(p, sigma, data, mode);
        const std::vector<double> base = base_characteristic(p, sigma, -1.0);
        for (std::size_t k = 0; k < g.n_nodes(); k += 250) {
            CHECK(f.X[0][k] == doctest::Approx(base[k]));
            const std::vector<double> cu = f.cumulative_u(k);
            CHECK(cu[0] == 0.0);
            for (std::size_t i = 0; i < f.n_boxes(); ++i) {
                CHECK(f.X[i + 1][k] - f.X[i][k] == doctest::Approx(f.image_width(i, k)).epsilon(1e-9).scale(1.0));
                CHECK(cu[i + 1] - cu[i] == doctest::Approx(data.width(i) * f.u_frak[i][k]).scale(1.0));
                CHECK(eulerian_u(f, k, f.X[i + 1][k]) == doctest::Approx(cu[i + 1]).scale(1.0));
            }
            CHECK(f.X_at(k, 0.0) == doctest::Approx(f.X[2][k]));
            // Left of the support X is affine with slope e^{s' W}.
            CHECK(f.X_at(k, -2.0) == doctest::Approx(base_characteristic(p, sigma, -2.0)[k]));
        }
        CHECK(f.t_star[1].value == kInfinity);
        CHECK(f.t_star[2].value < f.t_star[0].value);
    }
}

TEST_CASE("Heun cross-check converges") {
    const StepInitialData box = StepInitialData::box(-1.0, 0.0, 1.0);
    const BrownianPath coarse = sample_brownian({1.0, 100}, 9);
    const BrownianPath fine = refine_bridge(refine_bridge(refine_bridge(coarse)));
    const double d0 = sde_cross_check(box, coarse, {1.0, 0.0}, ContinuationMode::Conservative);
    const double d3 = sde_cross_check(box, fine, {1.0, 0.0}, ContinuationMode::Conservative);
    CHECK(d3 < d0);
    CHECK(d3 < 1e-3);
}

}
