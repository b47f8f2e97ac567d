#include "shs/characteristics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace shs {

StepInitialData StepInitialData::box(double v0, double a, double b) { return {{a, b}, {v0}}; }

double StepInitialData::operator()(double x) const {
    if (breakpoints.empty() || x < breakpoints.front() || x >= breakpoints.back()) return 0.0;
    const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
    return values[static_cast<std::size_t>(it - breakpoints.begin()) - 1];
}

double StepInitialData::l2_norm_sq() const {
    double s = 0.0;
    for (std::size_t i = 0; i < n_boxes(); ++i) s += width(i) * values[i] * values[i];
    return s;
}

void StepInitialData::validate() const {
    if (breakpoints.size() < 2 || breakpoints.size() != values.size() + 1)
        throw std::invalid_argument("initial data: need n+1 breakpoints for n values (n >= 1)");
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
        if (!(breakpoints[i] < breakpoints[i + 1]))
            throw std::invalid_argument("initial data: breakpoints must be strictly increasing");
    for (double x : breakpoints)
        if (!std::isfinite(x)) throw std::invalid_argument("initial data: breakpoints must be finite");
    for (double v : values)
        if (!std::isfinite(v)) throw std::invalid_argument("initial data: values must be finite");
}

std::string to_string(ContinuationMode mode) {
    return mode == ContinuationMode::Conservative ? "conservative" : "dissipative";
}

ContinuationMode parse_mode(const std::string& s) {
    if (s == "conservative") return ContinuationMode::Conservative;
    if (s == "dissipative") return ContinuationMode::Dissipative;
    throw std::invalid_argument("unknown continuation mode '" + s + "'");
}

StepInitialData project_initial(const std::function<double(double)>& q0, const std::vector<double>& partition) {
    StepInitialData d{partition, {}};
    for (std::size_t i = 0; i + 1 < partition.size(); ++i) {
        if (!(partition[i] < partition[i + 1])) throw std::invalid_argument("project_initial: partition must increase");
        const double a = partition[i], h = (partition[i + 1] - a) / 16.0;
        double s = 0.0;
        for (int j = 0; j < 16; ++j) s += q0(a + (j + 0.5) * h);
        d.values.push_back(s / 16.0);
    }
    d.validate();
    return d;
}

LagrangianState lagrangian_state(const ExpFunctionals& expf, double q0x, std::size_t k, ContinuationMode mode,
                                 const BreakingTime& t_star, double singular_tol) {
    LagrangianState st;
    const double z = expf.z[k];
    if (q0x == 0.0) {
        st.dxdx = 1.0 / z;
        return st;
    }
    // Everything from one D so that q * dxdx = u and q^2 * dxdx = q0^2 z hold to rounding.
    const double d = 1.0 / q0x + expf.a[k];
    if (mode == ContinuationMode::Dissipative &&
        (expf.grid.time(k) >= t_star.value || std::abs(d) < singular_tol / std::abs(q0x))) {
        st.dxdx = 0.0;
        return st;
    }
    const double qd = q0x * d;
    st.u = q0x * qd;
    st.dxdx = qd * qd / z;
    if (mode == ContinuationMode::Conservative && std::abs(d) < singular_tol / std::abs(q0x)) {
        st.singular = true;
        st.q = std::numeric_limits<double>::quiet_NaN();
    } else {
        st.q = z / d;
    }
    return st;
}

LagrangianState lagrangian_state(const ExpFunctionals& expf, double q0x, std::size_t k, ContinuationMode mode,
                                 double singular_tol) {
    const BreakingTime bt = mode == ContinuationMode::Dissipative ? breaking_time(expf, q0x) : BreakingTime{};
    return lagrangian_state(expf, q0x, k, mode, bt, singular_tol);
}

double q_lagrangian(const ExpFunctionals& expf, double q0x, std::size_t k, ContinuationMode mode, double singular_tol) {
    return lagrangian_state(expf, q0x, k, mode, singular_tol).q;
}

double u_frak(const ExpFunctionals& expf, double q0x, std::size_t k, ContinuationMode mode) {
    return lagrangian_state(expf, q0x, k, mode).u;
}

double dxdx(const ExpFunctionals& expf, double q0x, std::size_t k, ContinuationMode mode) {
    return lagrangian_state(expf, q0x, k, mode).dxdx;
}

std::vector<double> base_characteristic(const BrownianPath& path, const SigmaSpec& sigma, double x_base) {
    std::vector<double> x(path.w.size());
    const double a = sigma.slope, b = sigma.intercept;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double aw = a * path.w[k];
        x[k] = a == 0.0 ? x_base + b * path.w[k] : x_base * std::exp(aw) + (b / a) * std::expm1(aw);
    }
    return x;
}

std::vector<double> heun_base_characteristic(const BrownianPath& path, const SigmaSpec& sigma, double x_base) {
    std::vector<double> x(path.w.size());
    x[0] = x_base;
    for (std::size_t k = 0; k + 1 < x.size(); ++k) {
        const double dw = path.w[k + 1] - path.w[k];
        const double pred = x[k] + sigma(x[k]) * dw;
        x[k + 1] = x[k] + 0.5 * (sigma(x[k]) + sigma(pred)) * dw;
    }
    return x;
}

double CharacteristicField::X_at(std::size_t k, double y) const {
    const auto& bp = initial.breakpoints;
    const std::size_t n = n_boxes();
    if (y <= bp.front()) return X[0][k] + stretch(k) * (y - bp.front());
    if (y >= bp.back()) return X[n][k] + stretch(k) * (y - bp.back());
    const auto i = static_cast<std::size_t>(std::upper_bound(bp.begin(), bp.end(), y) - bp.begin()) - 1;
    return X[i][k] + (y - bp[i]) * dxdx[i][k];
}

std::vector<double> CharacteristicField::cumulative_u(std::size_t k) const {
    std::vector<double> u(n_boxes() + 1, 0.0);
    for (std::size_t i = 0; i < n_boxes(); ++i) u[i + 1] = u[i] + initial.width(i) * u_frak[i][k];
    return u;
}

bool CharacteristicField::any_singular(std::size_t k) const {
    for (const auto& s : singular)
        if (s[k]) return true;
    return false;
}

CharacteristicField build_field(const BrownianPath& path, const SigmaSpec& sigma, const StepInitialData& initial,
                                ContinuationMode mode, double singular_tol) {
    initial.validate();
    CharacteristicField f;
    f.grid = path.grid;
    f.mode = mode;
    f.sigma = sigma;
    f.initial = initial;
    f.expf = exp_functionals(path, sigma.slope);
    const std::size_t n = initial.n_boxes(), nodes = path.grid.n_nodes();
    f.t_star.resize(n);
    f.q_lag.assign(n, std::vector<double>(nodes));
    f.u_frak.assign(n, std::vector<double>(nodes));
    f.dxdx.assign(n, std::vector<double>(nodes));
    f.singular.assign(n, std::vector<std::uint8_t>(nodes, 0));
    for (std::size_t i = 0; i < n; ++i) {
        const double v = initial.values[i];
        f.t_star[i] = breaking_time(f.expf, v);
        for (std::size_t k = 0; k < nodes; ++k) {
            const LagrangianState st = lagrangian_state(f.expf, v, k, mode, f.t_star[i], singular_tol);
            f.q_lag[i][k] = st.q;
            f.u_frak[i][k] = st.u;
            f.dxdx[i][k] = st.dxdx;
            f.singular[i][k] = st.singular;
        }
    }
    build_X(f, path);
    return f;
}

void build_X(CharacteristicField& field, const BrownianPath& path) {
    const std::size_t n = field.n_boxes();
    field.X.assign(n + 1, {});
    field.X[0] = base_characteristic(path, field.sigma, field.initial.breakpoints.front());
    for (std::size_t i = 0; i < n; ++i) {
        field.X[i + 1].resize(field.X[0].size());
        const double w = field.initial.width(i);
        for (std::size_t k = 0; k < field.X[0].size(); ++k)
            field.X[i + 1][k] = field.X[i][k] + w * field.dxdx[i][k];
    }
}

namespace {

/// Knot positions and u values at one node.
struct VelocityKnots {
    std::vector<double> x, u;

    double operator()(double q) const {
        if (q <= x.front()) return 0.0;
        if (q >= x.back()) return u.back();
        const auto j = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), q) - x.begin());
        const double span = x[j] - x[j - 1];
        if (span <= 0.0) return u[j - 1];
        return u[j - 1] + (u[j] - u[j - 1]) * (q - x[j - 1]) / span;
    }
};

VelocityKnots knots_at(const CharacteristicField& f, std::size_t k) {
    VelocityKnots v;
    v.u = f.cumulative_u(k);
    for (const auto& col : f.X) v.x.push_back(col[k]);
    return v;
}

}  // namespace

double eulerian_u(const CharacteristicField& field, std::size_t k, double x) { return knots_at(field, k)(x); }

double sde_cross_check(const StepInitialData& initial, const BrownianPath& path, const SigmaSpec& sigma,
                       ContinuationMode mode, double t_window) {
    const CharacteristicField f = build_field(path, sigma, initial, mode);
    const std::size_t nodes = path.grid.n_nodes();
    const double dt = path.grid.dt();
    std::vector<VelocityKnots> knots;
    knots.reserve(nodes);
    for (std::size_t k = 0; k < nodes; ++k) knots.push_back(knots_at(f, k));
    double worst = 0.0;
    for (std::size_t i = 0; i < f.X.size(); ++i) {
        double x = initial.breakpoints[i];
        for (std::size_t k = 0; k + 1 < nodes && path.grid.time(k + 1) <= t_window * (1.0 + 1e-12); ++k) {
            const double dw = path.w[k + 1] - path.w[k];
            const double u0 = knots[k](x);
            const double pred = x + u0 * dt + sigma(x) * dw;
            x += 0.5 * (u0 + knots[k + 1](pred)) * dt + 0.5 * (sigma(x) + sigma(pred)) * dw;
            worst = std::max(worst, std::abs(x - f.X[i][k + 1]));
        }
    }
    return worst;
}

}  // namespace shs
