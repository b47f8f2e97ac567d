#include "shs/breaking_law.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "shs/quadrature.hpp"
#include "shs/stats.hpp"

namespace shs {

BreakingTime breaking_time(const ExpFunctionals& expf, double q0x) {
    BreakingTime bt;
    if (q0x >= 0.0) return bt;
    const double target = -1.0 / q0x;
    const double dt = expf.grid.dt();
    for (std::size_t k = 1; k < expf.a.size(); ++k) {
        if (expf.a[k] >= target) {
            bt.value = expf.grid.time(k - 1) + (target - expf.a[k - 1]) / (expf.a[k] - expf.a[k - 1]) * dt;
            bt.bracket = k - 1;
            return bt;
        }
    }
    return bt;
}

std::vector<double> crossing_times(const TimeGrid& grid, std::uint64_t seed, double sigma_prime,
                                   const std::vector<double>& a_thresholds) {
    grid.validate();
    std::vector<double> out(a_thresholds.size(), kInfinity);
    std::size_t remaining = a_thresholds.size();
    NormalStream normals(seed);
    const double dt = grid.dt();
    const double sd = std::sqrt(dt);
    const double half_dt = 0.5 * dt;
    double w = 0.0, z = 1.0, a = 0.0;
    // Same arithmetic as sample_brownian + exp_functionals + breaking_time.
    for (std::size_t k = 1; k <= grid.n_steps && remaining > 0; ++k) {
        w = w + sd * normals.next();
        const double z_new = std::exp(-sigma_prime * w);
        const double a_new = a + 0.5 * half_dt * (z + z_new);
        for (std::size_t j = 0; j < a_thresholds.size(); ++j) {
            if (out[j] < kInfinity || a_new < a_thresholds[j]) continue;
            out[j] = grid.time(k - 1) + (a_thresholds[j] - a) / (a_new - a) * dt;
            --remaining;
        }
        z = z_new;
        a = a_new;
    }
    return out;
}

namespace {

constexpr double kPi = std::numbers::pi;
/// Log-magnitude below which contributions are dropped.
constexpr double kNegligible = -60.0;
constexpr double kNoiseFactor = 64.0 * std::numeric_limits<double>::epsilon();

/// Contour from i*phi: along Im xi = phi to s1, down to the real axis, then along it to s_max.
/// Exactly equivalent to the real-axis integral; the imaginary-axis leg contributes nothing to Im.
struct Contour {
    double phi = 0.0, cphi = 1.0, sphi = 0.0;
    /// Log-modulus of exp(-(xi - i pi)^2/(2t) - y cosh xi) at xi = i*phi.
    double peak = 0.0;
    /// Bound on the log-modulus of the integrand relative to `peak`.
    double lmax = 0.0;
    double s1 = 0.0, s_max = 0.0;
    std::size_t panels_h = 0, panels_v = 0, panels_t = 0;
};

double optimal_phi(double y, double tau) {
    const double half = 0.5 * kPi;
    auto h = [&](double p) { return y * std::sin(p) - (kPi - p) / tau; };
    if (h(half) <= 0.0) return half;
    double lo = 0.0, hi = half;
    for (int i = 0; i < 60; ++i) {
        const double m = 0.5 * (lo + hi);
        (h(m) < 0.0 ? lo : hi) = m;
    }
    return 0.5 * (lo + hi);
}

/// Real part of the exponent at s + i*eta, relative to the peak at i*phi.
double rel_exponent(double s, double eta, double y, double tau, double phi) {
    const double sh = std::sinh(0.5 * s);
    const double gauss = ((phi - eta) * (2.0 * kPi - eta - phi) - s * s) / (2.0 * tau);
    const double hyper = std::cos(eta) * 2.0 * sh * sh - 2.0 * std::sin(0.5 * (eta + phi)) * std::sin(0.5 * (eta - phi));
    return gauss - y * hyper;
}

std::size_t panel_count(double variation, double length, double width, std::size_t minimum, int level) {
    const auto by_phase = static_cast<std::size_t>(std::ceil(variation / 8.0));
    const auto by_width = static_cast<std::size_t>(std::ceil(length / (3.0 * width)));
    return std::max({minimum, by_phase, by_width}) << level;
}

Contour make_contour(double y, double tau, double phi, const YorQuadratureParams& p, int level) {
    Contour C;
    C.phi = phi;
    C.cphi = std::cos(phi);
    C.sphi = std::sin(phi);
    C.peak = (kPi - phi) * (kPi - phi) / (2.0 * tau) - y * C.cphi;
    const double s_up = tau + std::sqrt(tau * tau + 2.0 * tau * (-kNegligible + 0.5 * tau + 1.0) + kPi * kPi);
    auto real_axis = [&](double s) { return rel_exponent(s, 0.0, y, tau, phi) + std::log(std::cosh(s)); };
    constexpr int n = 256;
    // s1: beyond it the real axis never exceeds the peak by more than e.
    C.s1 = 0.0;
    if (phi > 0.0)
        for (int k = n; k >= 0; --k) {
            const double s = s_up * k / n;
            if (real_axis(s) > 1.0) {
                C.s1 = std::min(s_up, s_up * (k + 1) / n);
                break;
            }
        }
    double lmax = 1.0;
    for (int k = 0; k <= 64; ++k) {
        const double s = C.s1 * k / 64.0;
        lmax = std::max(lmax, rel_exponent(s, phi, y, tau, phi) + std::log(std::cosh(s)));
    }
    if (p.xi_max > 0.0) {
        C.s_max = std::max(p.xi_max, C.s1);
    } else {
        C.s_max = s_up;
        for (int k = 1; k <= n; ++k) {
            const double s = C.s1 + (s_up - C.s1) * k / n;
            if (real_axis(s) < lmax + kNegligible) {
                C.s_max = s;
                break;
            }
        }
    }
    C.lmax = lmax;
    const double width = 1.0 / std::sqrt(1.0 / tau + std::max(0.0, y * C.cphi));
    const double freq = kPi / tau;
    C.panels_h = C.s1 > 0.0 ? panel_count(C.s1 * (kPi - phi) / tau + y * C.sphi * std::sinh(C.s1), C.s1, width,
                                          p.panels_xi, level)
                            : 0;
    C.panels_v = C.s1 > 0.0 ? panel_count(C.s1 * phi / tau + y * C.sphi * std::sinh(C.s1), phi, std::sqrt(tau),
                                          p.panels_xi, level)
                            : 0;
    const double width_t = 1.0 / std::sqrt(1.0 / tau + y);
    C.panels_t = panel_count((C.s_max - C.s1) * freq, C.s_max - C.s1, width_t, p.panels_xi, level);
    return C;
}

/// Im and |.| integrals of exp(E(xi) - peak) * sinh(xi) * mult(xi) over the contour.
template <class Mult>
std::pair<double, double> contour_integral(const Contour& C, double y, double tau, Mult&& mult) {
    const GaussRule16& g = gauss16();
    auto integrand = [&](double s, double eta) {
        const double re = rel_exponent(s, eta, y, tau, C.phi);
        const double sh = std::sinh(s), ch = std::cosh(s);
        const double ce = std::cos(eta), se = std::sin(eta);
        const double im = s * (kPi - eta) / tau - y * sh * se;
        const std::complex<double> xi(s, eta);
        return std::polar(std::exp(re), im) * std::complex<double>(sh * ce, ch * se) * mult(xi);
    };
    double val = 0.0, mag = 0.0;
    auto leg = [&](double a, double b, std::size_t panels, auto&& point, auto&& take) {
        if (panels == 0 || b <= a) return;
        const double h = (b - a) / static_cast<double>(panels);
        for (std::size_t k = 0; k < panels; ++k) {
            const double mid = a + (static_cast<double>(k) + 0.5) * h;
            for (std::size_t i = 0; i < 16; ++i) {
                const std::complex<double> f = point(mid + 0.5 * h * g.x[i]);
                const double wt = 0.5 * h * g.w[i];
                val += wt * take(f);
                mag += wt * std::abs(f);
            }
        }
    };
    auto imag = [](std::complex<double> f) { return f.imag(); };
    leg(0.0, C.s1, C.panels_h, [&](double s) { return integrand(s, C.phi); }, imag);
    // Downward leg s1 + i*phi -> s1: the xi integral is -i times the eta integral.
    leg(0.0, C.phi, C.panels_v, [&](double eta) { return integrand(C.s1, eta); },
        [](std::complex<double> f) { return -f.real(); });
    leg(C.s1, C.s_max, C.panels_t, [&](double s) { return integrand(s, 0.0); }, imag);
    return {val, mag};
}

struct Scaled {
    double mant = 0.0;
    double log_scale = 0.0;
    double l1 = 0.0;
};

const auto kUnit = [](std::complex<double>) { return std::complex<double>(1.0, 0.0); };

double log_theta_prefactor(double y, double tau) { return std::log(y) - 0.5 * std::log(2.0 * kPi * kPi * kPi * tau); }

Scaled theta_scaled(double y, double tau, double phi, const YorQuadratureParams& p, int level) {
    const Contour C = make_contour(y, tau, phi, p, level);
    const auto [val, l1] = contour_integral(C, y, tau, kUnit);
    return {val, C.peak + log_theta_prefactor(y, tau), l1};
}

double theta_converged(double y, double t, bool shifted, const YorQuadratureParams& p) {
    if (!(y > 0.0) || !(t > 0.0)) throw std::invalid_argument("hartman_watson_theta: y and t must be positive");
    const double phi = shifted ? optimal_phi(y, t) : 0.0;
    Scaled prev = theta_scaled(y, t, phi, p, 0);
    double diff = 0.0;
    for (int level = 1; level <= p.max_level; ++level) {
        const Scaled cur = theta_scaled(y, t, phi, p, level);
        diff = std::abs(cur.mant - prev.mant);
        if (diff <= p.rel_tol * std::abs(cur.mant) + kNoiseFactor * cur.l1) return cur.mant * std::exp(cur.log_scale);
        prev = cur;
    }
    std::ostringstream msg;
    msg << "hartman_watson_theta: no convergence at y=" << y << ", t=" << t;
    throw QuadratureError(msg.str(), diff * std::exp(prev.log_scale));
}

/// theta values on Gauss nodes in v = log y, for use at chi in [chi_lo, chi_hi].
struct ThetaNode {
    double v, w, mant, log_scale, l1;
};

double max_chi_exponent(double v, double chi_lo, double chi_hi) {
    // max over chi of -1/(2 chi) - chi e^{2v}/2 is attained at chi = e^{-v}.
    const double chi = std::clamp(std::exp(-v), chi_lo, chi_hi);
    return -0.5 / chi - 0.5 * chi * std::exp(2.0 * v);
}

std::vector<ThetaNode> theta_table(double tau, double v_lo, double v_hi, double chi_lo, double chi_hi,
                                   const YorQuadratureParams& p, int level) {
    const double h0 = std::min(0.5, std::sqrt(tau));
    const auto base = std::max(p.panels_r, static_cast<std::size_t>(std::ceil((v_hi - v_lo) / h0)));
    const std::size_t panels = base << level;
    const double h = (v_hi - v_lo) / static_cast<double>(panels);
    const double log_chi_bound = std::max(std::abs(std::log(chi_lo)), std::abs(std::log(chi_hi)));
    const GaussRule16& g = gauss16();
    std::vector<ThetaNode> nodes;
    nodes.reserve(panels * 16);
    for (std::size_t k = 0; k < panels; ++k) {
        const double mid = v_lo + (static_cast<double>(k) + 0.5) * h;
        for (std::size_t i = 0; i < 16; ++i) {
            const double v = mid + 0.5 * h * g.x[i];
            const double y = std::exp(v);
            const double phi = optimal_phi(y, tau);
            const Contour C = make_contour(y, tau, phi, p, level);
            const double ls = C.peak + log_theta_prefactor(y, tau);
            const double env = ls + std::log(C.s_max + C.phi) + C.lmax + max_chi_exponent(v, chi_lo, chi_hi) + log_chi_bound;
            if (env < kNegligible) continue;
            const auto [val, l1] = contour_integral(C, y, tau, kUnit);
            nodes.push_back({v, 0.5 * h * g.w[i], val, ls, l1});
        }
    }
    return nodes;
}

/// chi * density(chi) and its roundoff floor.
std::pair<double, double> chi_density(const std::vector<ThetaNode>& table, double chi) {
    double sum = 0.0, noise = 0.0;
    for (const ThetaNode& n : table) {
        const double e = std::exp(n.log_scale - 0.5 / chi - 0.5 * chi * std::exp(2.0 * n.v));
        sum += n.w * n.mant * e;
        noise += n.w * n.l1 * e;
    }
    return {sum, kNoiseFactor * noise};
}

/// The outer variable r is the endpoint value of the driving Brownian motion at time t, so
/// P(|r| > R) < 2 exp(-70) bounds the probability mass dropped by trimming the window to R.
double effective_r(double t, const YorQuadratureParams& p) {
    return std::min(p.r_halfwidth, std::sqrt(2.0 * t * (10.0 - kNegligible)));
}

void require_time(double t, const YorQuadratureParams& p, const char* who) {
    if (!(t >= p.min_t)) {
        std::ostringstream msg;
        msg << who << ": t = " << t << " is below the small-time floor min_t = " << p.min_t;
        throw SmallTimeRefusal(msg.str());
    }
}

}  // namespace

double hartman_watson_theta(double y, double t, const YorQuadratureParams& params) {
    return theta_converged(y, t, true, params);
}

double hartman_watson_theta_real_axis(double y, double t, const YorQuadratureParams& params) {
    return theta_converged(y, t, false, params);
}

double yor_density(double chi, double t, const YorQuadratureParams& params) {
    require_time(t, params, "yor_density");
    if (!(chi > 0.0)) throw std::invalid_argument("yor_density: chi must be positive");
    const double lc = std::log(chi);
    const double R = effective_r(t, params);
    const double v_lo = -R - lc, v_hi = R - lc;
    double prev = 0.0, diff = 0.0;
    for (int level = 0; level <= params.max_level; ++level) {
        const auto table = theta_table(t, v_lo, v_hi, chi, chi, params, level);
        const auto [cd, noise] = chi_density(table, chi);
        const double f = cd / chi;
        if (level > 0) {
            diff = std::abs(f - prev);
            if (diff <= params.rel_tol * std::abs(f) + params.abs_tol + noise / chi) return f;
        }
        prev = f;
    }
    std::ostringstream msg;
    msg << "yor_density: no convergence at chi=" << chi << ", t=" << t << " (change " << diff << ")";
    throw QuadratureError(msg.str(), diff);
}

std::vector<double> yor_cdf(const std::vector<double>& c, double t, const YorQuadratureParams& params) {
    require_time(t, params, "yor_cdf");
    for (double ci : c)
        if (!(ci > 0.0)) throw std::invalid_argument("yor_cdf: thresholds must be positive");
    std::vector<double> result(c.size(), 0.0);
    if (c.empty()) return result;
    // A(t) >= t exp(2 min W), so P(A(t) <= chi) is below 1e-15 for log chi < u_lo.
    const double u_lo = std::log(t) - 16.0 * std::sqrt(t);
    std::vector<std::size_t> order(c.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return c[i] < c[j]; });
    std::vector<double> knots{u_lo};
    for (std::size_t i : order) knots.push_back(std::max(u_lo, std::log(c[i])));
    const double u_hi = knots.back();
    if (u_hi <= u_lo) return result;

    const double R = effective_r(t, params);
    const double v_lo = -R - u_hi, v_hi = R - u_lo;
    const double h0 = std::min(0.5, std::sqrt(t));
    const GaussRule16& g = gauss16();
    std::vector<double> prev;
    double worst = 0.0;
    for (int level = 0; level <= params.max_level; ++level) {
        const auto table = theta_table(t, v_lo, v_hi, std::exp(u_lo), std::exp(u_hi), params, level);
        std::vector<double> cum(order.size(), 0.0), noise(order.size(), 0.0);
        double acc = 0.0, acc_noise = 0.0;
        for (std::size_t seg = 0; seg + 1 < knots.size(); ++seg) {
            const double a = knots[seg], b = knots[seg + 1];
            if (b > a) {
                const std::size_t panels = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((b - a) / h0)))
                                           << level;
                const double h = (b - a) / static_cast<double>(panels);
                for (std::size_t k = 0; k < panels; ++k) {
                    const double mid = a + (static_cast<double>(k) + 0.5) * h;
                    for (std::size_t i = 0; i < 16; ++i) {
                        const double chi = std::exp(mid + 0.5 * h * g.x[i]);
                        // f(chi) dchi = chi f(chi) du.
                        const auto [cd, nz] = chi_density(table, chi);
                        acc += 0.5 * h * g.w[i] * cd;
                        acc_noise += 0.5 * h * g.w[i] * nz;
                    }
                }
            }
            cum[seg] = acc;
            noise[seg] = acc_noise;
        }
        if (level > 0) {
            bool ok = true;
            worst = 0.0;
            for (std::size_t j = 0; j < cum.size(); ++j) {
                const double d = std::abs(cum[j] - prev[j]);
                worst = std::max(worst, d);
                if (d > params.rel_tol * std::abs(cum[j]) + params.abs_tol + noise[j]) ok = false;
            }
            if (ok) {
                for (std::size_t j = 0; j < order.size(); ++j) result[order[j]] = std::clamp(cum[j], 0.0, 1.0);
                return result;
            }
        }
        prev = cum;
    }
    std::ostringstream msg;
    msg << "yor_cdf: no convergence at t=" << t << " (change " << worst << ")";
    throw QuadratureError(msg.str(), worst);
}

double yor_cdf(double c, double t, const YorQuadratureParams& params) { return yor_cdf(std::vector<double>{c}, t, params)[0]; }

double yor_cdf_reduced(double c, double t, const YorQuadratureParams& params) {
    require_time(t, params, "yor_cdf_reduced");
    if (!(c > 0.0)) throw std::invalid_argument("yor_cdf_reduced: threshold must be positive");
    const double R = effective_r(t, params);
    const double h0 = std::min(0.5, std::sqrt(t));
    const GaussRule16& g = gauss16();
    double prev = 0.0, diff = 0.0;
    for (int level = 0; level <= params.max_level; ++level) {
        const std::size_t panels =
            std::max(params.panels_r, static_cast<std::size_t>(std::ceil(2.0 * R / h0))) << level;
        const double h = 2.0 * R / static_cast<double>(panels);
        double total = 0.0, noise = 0.0;
        for (std::size_t k = 0; k < panels; ++k) {
            const double mid = -R + (static_cast<double>(k) + 0.5) * h;
            for (std::size_t i = 0; i < 16; ++i) {
                const double r = mid + 0.5 * h * g.x[i];
                const double er = std::exp(r);
                const double y = er / c;
                const Contour C = make_contour(y, t, optimal_phi(y, t), params, level);
                const double base = 1.0 + er * er;
                const double ls = C.peak - base / (2.0 * c) - 0.5 * std::log(2.0 * kPi * kPi * kPi * t);
                const double env = ls + std::log(C.s_max + C.phi) + C.lmax + std::log(2.0 * er / base);
                if (env < kNegligible) continue;
                // 2 e^r / K(xi) with K = 1 + e^{2r} + 2 e^r cosh(xi).
                auto mult = [&](std::complex<double> xi) { return 2.0 * er / (base + 2.0 * er * std::cosh(xi)); };
                const auto [val, l1] = contour_integral(C, y, t, mult);
                const double scale = std::exp(ls);
                total += 0.5 * h * g.w[i] * val * scale;
                noise += 0.5 * h * g.w[i] * l1 * scale;
            }
        }
        if (level > 0) {
            diff = std::abs(total - prev);
            if (diff <= params.rel_tol * std::abs(total) + params.abs_tol + kNoiseFactor * noise)
                return std::clamp(total, 0.0, 1.0);
        }
        prev = total;
    }
    std::ostringstream msg;
    msg << "yor_cdf_reduced: no convergence at c=" << c << ", t=" << t << " (change " << diff << ")";
    throw QuadratureError(msg.str(), diff);
}

namespace {
void require_breaking_args(double q0x, double sigma_prime) {
    if (!(q0x < 0.0)) throw std::invalid_argument("breaking_cdf: q0x must be negative");
    if (sigma_prime == 0.0) throw std::invalid_argument("breaking_cdf: sigma_prime must be nonzero");
}
}  // namespace

std::vector<double> breaking_cdf(double t, const std::vector<double>& q0x, double sigma_prime,
                                 const YorQuadratureParams& params) {
    std::vector<double> c;
    for (double q : q0x) {
        require_breaking_args(q, sigma_prime);
        c.push_back(-sigma_prime * sigma_prime / (2.0 * q));
    }
    return yor_cdf(c, sigma_prime * sigma_prime * t / 4.0, params);
}

double breaking_cdf(double t, double q0x, double sigma_prime, const YorQuadratureParams& params) {
    return breaking_cdf(t, std::vector<double>{q0x}, sigma_prime, params)[0];
}

double breaking_cdf_reduced(double t, double q0x, double sigma_prime, const YorQuadratureParams& params) {
    require_breaking_args(q0x, sigma_prime);
    return yor_cdf_reduced(-sigma_prime * sigma_prime / (2.0 * q0x), sigma_prime * sigma_prime * t / 4.0, params);
}

McEstimate mc_breaking_cdf(double t, double q0x, double sigma_prime, std::size_t n_paths, std::uint64_t master_seed,
                           const McOptions& options) {
    McEstimate est;
    est.n = n_paths;
    if (q0x >= 0.0) {
        est.p = 1.0;
        return est;
    }
    const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(t / options.dt - 1e-9)));
    const TimeGrid grid{t, steps};
    std::vector<double> survived(n_paths, 0.0);
    parallel_for(n_paths, options.threads, [&](std::size_t i) {
        const double tb = crossing_times(grid, path_seed(master_seed, i), sigma_prime, {-1.0 / q0x})[0];
        survived[i] = tb >= t ? 1.0 : 0.0;
    });
    const MeanStderr ms = mean_stderr(survived);
    est.p = ms.mean;
    est.stderr_ = std::sqrt(std::max(ms.mean * (1.0 - ms.mean), 0.0) / static_cast<double>(n_paths));
    return est;
}

}  // namespace shs
