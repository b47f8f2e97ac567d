#include "shs/eulerian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace shs {

namespace {

/// int_lo^hi g^2 for g piecewise linear on the knots, constant beyond the end knots.
double pl_sq_integral(const std::vector<double>& xs, const std::vector<double>& vs, double lo, double hi) {
    if (!(hi > lo)) return 0.0;
    auto value = [&](std::size_t j, double x) {
        const double span = xs[j + 1] - xs[j];
        return vs[j] + (vs[j + 1] - vs[j]) * (x - xs[j]) / span;
    };
    double s = 0.0;
    if (lo < xs.front()) s += (std::min(hi, xs.front()) - lo) * vs.front() * vs.front();
    if (hi > xs.back()) s += (hi - std::max(lo, xs.back())) * vs.back() * vs.back();
    for (std::size_t j = 0; j + 1 < xs.size(); ++j) {
        const double a = std::max(lo, xs[j]), b = std::min(hi, xs[j + 1]);
        if (!(b > a)) continue;
        const double fa = value(j, a), fb = value(j, b);
        s += (b - a) * (fa * fa + fa * fb + fb * fb) / 3.0;
    }
    return s;
}

std::vector<double> knots_x(const CharacteristicField& f, std::size_t k) {
    std::vector<double> x;
    x.reserve(f.X.size());
    for (const auto& col : f.X) x.push_back(col[k]);
    return x;
}

}  // namespace

Preimage invert_X(const CharacteristicField& field, std::size_t k, double x) {
    const auto& bp = field.initial.breakpoints;
    const std::size_t n = field.n_boxes();
    const double z = field.expf.z[k];
    if (x < field.X[0][k]) return {bp.front() + (x - field.X[0][k]) * z, false, -1};
    if (x > field.X[n][k]) return {bp.back() + (x - field.X[n][k]) * z, false, static_cast<long>(n)};
    std::size_t lo = 0, hi = n;
    // First knot with X >= x.
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (field.X[mid][k] < x)
            lo = mid + 1;
        else
            hi = mid;
    }
    const std::size_t j = lo;
    if (field.X[j][k] == x) {
        const bool amb = j < n && field.X[j + 1][k] == x;
        return {bp[j], amb, j < n ? static_cast<long>(j) : static_cast<long>(n)};
    }
    const std::size_t i = j - 1;
    const double frac = (x - field.X[i][k]) / (field.X[j][k] - field.X[i][k]);
    return {bp[i] + frac * field.initial.width(i), false, static_cast<long>(i)};
}

EulerianSlice eulerian_slice(const CharacteristicField& field, std::size_t k, std::size_t refine, double margin) {
    refine = std::max<std::size_t>(refine, 1);
    const std::size_t n = field.n_boxes();
    EulerianSlice s;
    s.t = field.grid.time(k);
    s.knot_x = knots_x(field, k);
    s.knot_u = field.cumulative_u(k);
    for (std::size_t i = 0; i < n; ++i) {
        s.piece_q.push_back(field.q_lag[i][k]);
        s.piece_energy.push_back(field.singular[i][k] ? field.initial.width(i) * field.initial.values[i] *
                                                            field.initial.values[i] * field.expf.z[k]
                                                      : field.q_lag[i][k] * field.u_frak[i][k] *
                                                            field.initial.width(i));
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
            push(s.knot_x[i] + f * (s.knot_x[i + 1] - s.knot_x[i]), s.piece_q[i],
                 s.knot_u[i] + f * (s.knot_u[i + 1] - s.knot_u[i]), static_cast<long>(i));
        }
    }
    push(s.knot_x.back() + margin, 0.0, s.knot_u.back(), static_cast<long>(n));
    return s;
}

double energy(const CharacteristicField& field, std::size_t k) {
    const double t = field.grid.time(k);
    double e = 0.0;
    for (std::size_t i = 0; i < field.n_boxes(); ++i) {
        if (field.mode == ContinuationMode::Dissipative && t > field.t_star[i].value) continue;
        const double v = field.initial.values[i];
        e += field.initial.width(i) * v * v;
    }
    return e * field.expf.z[k];
}

double eulerian_energy(const CharacteristicField& field, std::size_t k) {
    double e = 0.0;
    for (std::size_t i = 0; i < field.n_boxes(); ++i) {
        if (field.singular[i][k]) continue;
        const double q = field.q_lag[i][k];
        e += q * q * field.image_width(i, k);
    }
    return e;
}

double midpoint_energy(const CharacteristicField& field, std::size_t k, std::size_t m) {
    double e = 0.0;
    for (std::size_t i = 0; i < field.n_boxes(); ++i) {
        const double a = field.X[i][k], b = field.X[i + 1][k];
        if (!(b > a)) continue;
        const double h = (b - a) / static_cast<double>(m);
        for (std::size_t j = 0; j < m; ++j) {
            const Preimage p = invert_X(field, k, a + (static_cast<double>(j) + 0.5) * h);
            if (p.box < 0 || p.box >= static_cast<long>(field.n_boxes())) continue;
            const auto bi = static_cast<std::size_t>(p.box);
            if (field.singular[bi][k]) continue;
            e += h * field.q_lag[bi][k] * field.q_lag[bi][k];
        }
    }
    return e;
}

double u_l2_increment(const CharacteristicField& field, std::size_t ks, std::size_t kt, Window b) {
    const std::vector<double> us = field.cumulative_u(ks), ut = field.cumulative_u(kt);
    std::vector<double> d(us.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = ut[i] - us[i];
    return std::sqrt(pl_sq_integral(field.initial.breakpoints, d, b.lo, b.hi));
}

double u_l2_increment_closed(const StepInitialData& initial, const ExpFunctionals& expf, std::size_t ks,
                             std::size_t kt, Window b) {
    std::vector<double> p(initial.breakpoints.size(), 0.0);
    for (std::size_t i = 0; i < initial.n_boxes(); ++i)
        p[i + 1] = p[i] + 0.5 * initial.width(i) * initial.values[i] * initial.values[i];
    const double clock = 2.0 * (expf.a[kt] - expf.a[ks]);
    return std::sqrt(pl_sq_integral(initial.breakpoints, p, b.lo, b.hi)) * std::abs(clock);
}

double u_l2_sq(const CharacteristicField& field, std::size_t k, Window b) {
    return pl_sq_integral(knots_x(field, k), field.cumulative_u(k), b.lo, b.hi);
}

double oleinik_bound(double z, double a, double q0x) {
    if (q0x <= 0.0) return 0.0;
    return z / (1.0 / q0x + a);
}

OleinikMargins oleinik_margins(const CharacteristicField& field, std::size_t k, std::size_t refine) {
    const EulerianSlice s = eulerian_slice(field, k, refine);
    const double z = field.expf.z[k], a = field.expf.a[k];
    const double sup_q0 = *std::max_element(field.initial.values.begin(), field.initial.values.end());
    const double global = oleinik_bound(z, a, sup_q0);
    const double weak_neg = a > 0.0 ? z / a : std::numeric_limits<double>::infinity();
    OleinikMargins m{-kInfinity, -kInfinity, -kInfinity};
    for (std::size_t j = 0; j < s.x.size(); ++j) {
        const double q = s.q[j];
        if (std::isnan(q)) continue;
        const long b = s.box[j];
        const double q0 = b >= 0 && b < static_cast<long>(field.n_boxes())
                              ? field.initial.values[static_cast<std::size_t>(b)]
                              : 0.0;
        const double pw = oleinik_bound(z, a, q0);
        m.pointwise = std::max(m.pointwise, q - pw);
        m.weak = std::max(m.weak, q - (q0 > 0.0 ? pw : weak_neg));
        m.global = std::max(m.global, q - global);
    }
    return m;
}

}  // namespace shs
