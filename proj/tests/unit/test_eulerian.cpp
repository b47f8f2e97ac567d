#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "shs/deterministic.hpp"
#include "shs/eulerian.hpp"

using namespace shs;

namespace {

const StepInitialData kMixed{{-1.0, -0.5, 0.0, 0.3, 0.7, 1.0, 1.4, 1.8, 2.0},
                             {-1.0, 0.5, -2.0, 1.0, 0.3, -0.7, 2.0, -0.4}};

}  // namespace

TEST_SUITE("eulerian") {

TEST_CASE("inverse of X") {
    const BrownianPath p = sample_brownian({2.0, 2000}, 5);
    const CharacteristicField f = build_field(p, {1.0, 0.1}, kMixed, ContinuationMode::Conservative);
    for (std::size_t k : {0u, 700u, 2000u}) {
        for (double y : {-1.7, -0.8, 0.1, 0.65, 1.9, 2.6}) {
            const Preimage pre = invert_X(f, k, f.X_at(k, y));
            if (pre.ambiguous) continue;
            CHECK(pre.y == doctest::Approx(y).epsilon(1e-9));
        }
        CHECK(invert_X(f, k, f.X[0][k] - 1.0).box == -1);
        CHECK(invert_X(f, k, f.X.back()[k] + 1.0).box == static_cast<long>(kMixed.n_boxes()));
    }
}

TEST_CASE("three energies agree before breaking") {
    const BrownianPath p = sample_brownian({0.5, 500}, 8);
    const CharacteristicField f = build_field(p, {1.0, 0.0}, kMixed, ContinuationMode::Conservative);
    for (std::size_t k : {0u, 250u, 500u}) {
        REQUIRE_FALSE(f.any_singular(k));
        const double lag = energy(f, k);
        CHECK(lag == doctest::Approx(kMixed.l2_norm_sq() * f.expf.z[k]));
        CHECK(eulerian_energy(f, k) == doctest::Approx(lag).epsilon(1e-12));
        CHECK(midpoint_energy(f, k) == doctest::Approx(lag).epsilon(1e-9));
    }
}

TEST_CASE("slice of the deterministic box") {
    const TimeGrid g{1.0, 10};
    const CharacteristicField f =
        build_field(zero_path(g), {0.0, 0.0}, StepInitialData::box(-1.0, 0.0, 1.0), ContinuationMode::Conservative);
    const EulerianSlice s = eulerian_slice(f, 10);
    CHECK(s.t == 1.0);
    CHECK(std::is_sorted(s.x.begin(), s.x.end()));
    REQUIRE(s.knot_x.size() == 2);
    CHECK(s.knot_x[1] - s.knot_x[0] == doctest::Approx(0.25));
    CHECK(s.piece_q[0] == doctest::Approx(-2.0));
    CHECK(s.knot_u[1] == doctest::Approx(-0.5));
    for (std::size_t j = 0; j < s.x.size(); ++j) {
        if (s.box[j] == 0) CHECK(s.q[j] == doctest::Approx(-2.0));
        if (s.box[j] == -1) CHECK(s.u[j] == 0.0);
        if (s.box[j] == 1) CHECK(s.u[j] == doctest::Approx(-0.5));
    }
}

TEST_CASE("velocity increments in Lagrangian labels") {
    const TimeGrid g{1.0, 1000};
    const BrownianPath p = sample_brownian(g, 13);
    const StepInitialData box = StepInitialData::box(-1.0, 0.0, 1.0);
    const CharacteristicField f = build_field(p, {1.0, 0.0}, box, ContinuationMode::Conservative);
    const Window b{0.0, 1.0};
    for (std::size_t ks : {0u, 300u})
        for (std::size_t kt : {500u, 1000u})
            CHECK(u_l2_increment(f, ks, kt, b) == doctest::Approx(u_l2_increment_closed(box, f.expf, ks, kt, b)));
    // u at time 0 is -y on [0, 1], so the Eulerian square integral over [0, 1] is 1/3.
    CHECK(u_l2_sq(f, 0, b) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("Oleinik bound") {
    CHECK(oleinik_bound(1.0, 0.5, 2.0) == doctest::Approx(1.0));
    CHECK(oleinik_bound(2.0, 1.0, 1.0) == doctest::Approx(1.0));
    CHECK(oleinik_bound(1.0, 0.5, -1.0) == 0.0);
    const BrownianPath p = sample_brownian({3.0, 600}, 2);
    const CharacteristicField f = build_field(p, {1.0, 0.2}, kMixed, ContinuationMode::Dissipative);
    for (std::size_t k = 0; k <= 600; k += 20) {
        const OleinikMargins m = oleinik_margins(f, k);
        CHECK(m.pointwise <= 1e-12);
        CHECK(m.weak <= 1e-12);
        CHECK(m.global <= 1e-12);
    }
}

}

TEST_SUITE("deterministic") {

TEST_CASE("box regression") {
    const StepInitialData box = StepInitialData::box(-1.0, 0.0, 1.0);
    CHECK(det_breaking_time(-1.0) == 2.0);
    CHECK(det_breaking_time(0.5) == kInfinity);
    CHECK(det_q(-1.0, 1.0, ContinuationMode::Conservative) == -2.0);
    CHECK(std::isnan(det_q(-1.0, 2.0, ContinuationMode::Conservative)));
    CHECK(det_q(-1.0, 3.0, ContinuationMode::Conservative) == doctest::Approx(2.0));
    CHECK(det_q(-1.0, 3.0, ContinuationMode::Dissipative) == 0.0);
    for (double t : {0.0, 1.0, 3.0}) {
        CHECK(std::abs(det_energy(box, t, ContinuationMode::Conservative) - 1.0) <= 1e-12);
        CHECK(std::abs(det_energy(box, t, ContinuationMode::Dissipative) + defect_ledger(box, t).total - 1.0) <= 1e-12);
    }
    const DefectLedger led = defect_ledger(box, 3.0);
    REQUIRE(led.atoms.size() == 1);
    CHECK(led.atoms[0].t_break == 2.0);
    CHECK(led.atoms[0].mass == 1.0);
    CHECK(led.atoms[0].position == doctest::Approx(0.0));
    CHECK(defect_ledger(box, 1.0).atoms.empty());

    const std::vector<double> x = det_characteristics(box, 1.0, ContinuationMode::Conservative);
    CHECK(x[1] - x[0] == doctest::Approx(0.25));
    const EulerianSlice s = det_solution(box, 1.0);
    CHECK(s.piece_q[0] == -2.0);
    for (std::size_t j = 0; j < s.x.size(); ++j)
        if (s.x[j] > s.knot_x[0] && s.x[j] < s.knot_x[1]) CHECK(s.q[j] == doctest::Approx(-2.0));
}

TEST_CASE("stochastic modules reduce to the deterministic solution") {
    const SigmaZeroReport r = sigma_zero_consistency(StepInitialData::box(-1.0, 0.0, 1.0), {4.0, 800}, 1e-10);
    CHECK(r.zero_path <= 1e-10);
    CHECK(r.shifted <= 1e-10);
    CHECK(r.tiny_slope <= 1e-6);
    CHECK(sigma_zero_consistency(kMixed, {3.0, 600}, 1e-10).pass());
}

}
