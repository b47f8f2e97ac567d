#include "shs/deterministic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace shs {

double det_breaking_time(double v) { return v < 0.0 ? -2.0 / v : kInfinity; }

double det_q(double v, double t, ContinuationMode mode) {
    const double g = 2.0 + v * t;
    if (g > 0.0) return 2.0 * v / g;
    if (mode == ContinuationMode::Dissipative) return 0.0;
    if (g == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return 2.0 * v / g;
}

namespace {

/// (2 + V t)^2 / 4 = dX/dx on a box, zero once broken in dissipative mode.
double det_stretch(double v, double t, ContinuationMode mode) {
    const double g = 2.0 + v * t;
    if (mode == ContinuationMode::Dissipative && g <= 0.0) return 0.0;
    return 0.25 * g * g;
}

/// u increment across a box: q * image width = width * V (2 + V t) / 2.
double det_du(double v, double w, double t, ContinuationMode mode) {
    const double g = 2.0 + v * t;
    if (mode == ContinuationMode::Dissipative && g <= 0.0) return 0.0;
    return 0.5 * w * v * g;
}

double rel_dev(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

std::vector<double> det_characteristics(const StepInitialData& initial, double t, ContinuationMode mode) {
    std::vector<double> x(initial.breakpoints.size());
    x[0] = initial.breakpoints[0];
    for (std::size_t i = 0; i < initial.n_boxes(); ++i)
        x[i + 1] = x[i] + initial.width(i) * det_stretch(initial.values[i], t, mode);
    return x;
}

EulerianSlice det_solution(const StepInitialData& initial, double t, ContinuationMode mode, std::size_t refine,
                           double margin) {
    refine = std::max<std::size_t>(refine, 1);
    const std::size_t n = initial.n_boxes();
    EulerianSlice s;
    s.t = t;
    s.knot_x = det_characteristics(initial, t, mode);
    s.knot_u.assign(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = initial.values[i];
        s.knot_u[i + 1] = s.knot_u[i] + det_du(v, initial.width(i), t, mode);
        s.piece_q.push_back(det_q(v, t, mode));
        const bool alive = mode == ContinuationMode::Conservative || 2.0 + v * t > 0.0;
        s.piece_energy.push_back(alive ? initial.width(i) * v * v : 0.0);
    }
    auto push = [&](double x, double q, double u, long b) {
        s.x.push_back(x);
        s.q.push_back(q);
        s.u.push_back(u);
        s.box.push_back(b);
    };
    push(s.knot_x.front() - margin, 0.0, 0.0, -1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= refine; ++j) {
            const double f = static_cast<double>(j) / static_cast<double>(refine);
            // q = 0 on the characteristic points themselves.
            const bool edge = j == 0 || j == refine;
            push(s.knot_x[i] + f * (s.knot_x[i + 1] - s.knot_x[i]), edge ? 0.0 : s.piece_q[i],
                 s.knot_u[i] + f * (s.knot_u[i + 1] - s.knot_u[i]), static_cast<long>(i));
        }
    }
    push(s.knot_x.back() + margin, 0.0, s.knot_u.back(), static_cast<long>(n));
    return s;
}

double det_energy(const StepInitialData& initial, double t, ContinuationMode mode) {
    double e = 0.0;
    for (std::size_t i = 0; i < initial.n_boxes(); ++i) {
        const double v = initial.values[i];
        if (mode == ContinuationMode::Dissipative && 2.0 + v * t <= 0.0) continue;
        e += initial.width(i) * v * v;
    }
    return e;
}

DefectLedger defect_ledger(const StepInitialData& initial, double t) {
    DefectLedger led;
    led.t = t;
    for (std::size_t i = 0; i < initial.n_boxes(); ++i) {
        const double v = initial.values[i];
        const double tb = det_breaking_time(v);
        if (!(t >= tb)) continue;
        const double pos = det_characteristics(initial, tb, ContinuationMode::Dissipative)[i];
        led.atoms.push_back({i, tb, initial.width(i) * v * v, pos});
        led.total += led.atoms.back().mass;
    }
    return led;
}

namespace {

/// Largest relative deviation between a field and the sigma = 0 solution over all nodes.
/// `shift` follows the centre of the frame, so the comparison is q(t, x) vs q_det(t, x - shift(k)).
template <class Shift>
double field_vs_det(const CharacteristicField& f, Shift shift) {
    const auto& init = f.initial;
    double worst = 0.0;
    for (std::size_t k = 0; k < f.grid.n_nodes(); ++k) {
        const double t = f.grid.time(k);
        const std::vector<double> xd = det_characteristics(init, t, f.mode);
        const std::vector<double> ud = det_solution(init, t, f.mode, 1).knot_u;
        const std::vector<double> us = f.cumulative_u(k);
        bool near_break = false;
        for (std::size_t i = 0; i <= init.n_boxes(); ++i) {
            worst = std::max(worst, rel_dev(f.X[i][k] - shift(k), xd[i]));
            worst = std::max(worst, rel_dev(us[i], ud[i]));
        }
        for (std::size_t i = 0; i < init.n_boxes(); ++i) {
            const double v = init.values[i];
            const double g = 2.0 + v * t;
            if (std::abs(g) < 0.1) {
                if (v < 0.0) near_break = true;
                continue;
            }
            worst = std::max(worst, rel_dev(f.q_lag[i][k], det_q(v, t, f.mode)));
            // Sampled points: the midpoint of each surviving image piece.
            if (xd[i + 1] > xd[i]) {
                const Preimage p = invert_X(f, k, shift(k) + 0.5 * (xd[i] + xd[i + 1]));
                const double qs = p.box == static_cast<long>(i) ? f.q_lag[i][k] : kInfinity;
                worst = std::max(worst, rel_dev(qs, det_q(v, t, f.mode)));
            }
        }
        if (!near_break) worst = std::max(worst, rel_dev(energy(f, k), det_energy(init, t, f.mode)));
    }
    return worst;
}

}  // namespace

SigmaZeroReport sigma_zero_consistency(const StepInitialData& initial, const TimeGrid& grid, double tol,
                                       std::uint64_t seed) {
    SigmaZeroReport r;
    r.tol = tol;
    const BrownianPath zero = zero_path(grid);
    const BrownianPath path = sample_brownian(grid, seed);
    for (ContinuationMode mode : {ContinuationMode::Conservative, ContinuationMode::Dissipative}) {
        const auto none = [](std::size_t) { return 0.0; };
        r.zero_path = std::max(r.zero_path, field_vs_det(build_field(zero, {0.0, 0.0}, initial, mode), none));
        r.tiny_slope = std::max(r.tiny_slope, field_vs_det(build_field(path, {1e-8, 0.0}, initial, mode), none));
        const auto shift = [&](std::size_t k) { return path.w[k]; };
        r.shifted = std::max(r.shifted, field_vs_det(build_field(path, {0.0, 1.0}, initial, mode), shift));
    }
    return r;
}

}  // namespace shs
