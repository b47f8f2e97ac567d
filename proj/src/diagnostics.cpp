#include "shs/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

// Boost 1.74's pchip calls isnan unqualified.
namespace boost::math::interpolators {
using std::isnan;
}
#include <boost/math/interpolators/pchip.hpp>

#include "shs/quadrature.hpp"

namespace shs {

namespace {

struct Bump {
    double v = 0.0, d1 = 0.0, d2 = 0.0;
};

Bump bump(const TestFunction& phi, double x) {
    const double h = phi.halfwidth;
    const double r = (x - phi.center) / h;
    if (!(std::abs(r) < 1.0)) return {};
    const double s = 1.0 - r * r;
    const double v = std::exp(-1.0 / s);
    const double g1 = -2.0 * r / (s * s);
    const double g2 = -2.0 / (s * s) - 8.0 * r * r / (s * s * s);
    return {v, v * g1 / h, v * (g1 * g1 + g2) / (h * h)};
}

/// Averages over one image piece x = x0 + ell * s, s in [0, 1], of the integrands the residuals need.
struct PieceMeans {
    double phi = 0.0;      // <phi>
    double d1u = 0.0;      // <phi' u>
    double d1sig = 0.0;    // <phi' sigma>
    double ito = 0.0;      // <sigma (a phi' + sigma phi'')>
    double d1u_e = 0.0;    // <phi' (u - a sigma / 2)>
    double d2sig2 = 0.0;   // <phi'' sigma^2>
};

PieceMeans piece_means(const TestFunction& phi, const SigmaSpec& sigma, double x0, double ell, double u0, double du,
                       std::size_t panels) {
    PieceMeans m;
    const double a = sigma.slope;
    auto add = [&](double s, double w) {
        const double x = x0 + ell * s;
        const Bump b = bump(phi, x);
        if (b.v == 0.0) return;
        const double u = u0 + du * s;
        const double sg = sigma(x);
        m.phi += w * b.v;
        m.d1u += w * b.d1 * u;
        m.d1sig += w * b.d1 * sg;
        m.ito += w * sg * (a * b.d1 + sg * b.d2);
        m.d1u_e += w * b.d1 * (u - 0.5 * a * sg);
        m.d2sig2 += w * b.d2 * sg * sg;
    };
    if (!(ell > 0.0)) {
        add(0.0, 1.0);
        return m;
    }
    const double s0 = std::clamp((phi.lo() - x0) / ell, 0.0, 1.0);
    const double s1 = std::clamp((phi.hi() - x0) / ell, 0.0, 1.0);
    if (!(s1 > s0)) return m;
    const GaussRule16& g = gauss16();
    const double h = (s1 - s0) / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
        const double mid = s0 + (static_cast<double>(p) + 0.5) * h;
        for (std::size_t i = 0; i < 16; ++i) add(mid + 0.5 * h * g.x[i], 0.5 * h * g.w[i]);
    }
    return m;
}

/// Spatial integrals at one node, written through width * u_frak = Q * ell and E = Q^2 * ell so that
/// nothing divides by a vanishing image width.
struct NodeTerms {
    double mass = 0.0;     // int phi q
    double drift = 0.0;    // int phi' u q + phi q^2 / 2
    double noise = 0.0;    // int phi' sigma q
    double ito = 0.0;      // int sigma q (sigma phi')'
    double energy = 0.0;   // int phi q^2
    double e_drift = 0.0;  // Ito drift of int phi q^2
    double e_noise = 0.0;  // Ito noise of int phi q^2
};

NodeTerms node_terms(const CharacteristicField& f, const TestFunction& phi, std::size_t k, std::size_t panels) {
    NodeTerms t;
    const double a = f.sigma.slope;
    double u_left = 0.0;
    for (std::size_t i = 0; i < f.n_boxes(); ++i) {
        const double w = f.initial.width(i);
        const double v = f.initial.values[i];
        const double du = w * f.u_frak[i][k];
        double e = 0.0;
        if (f.singular[i][k])
            e = w * v * v * f.expf.z[k];
        else if (v != 0.0)
            e = f.q_lag[i][k] * du;
        const PieceMeans m = piece_means(phi, f.sigma, f.X[i][k], f.image_width(i, k), u_left, du, panels);
        t.mass += du * m.phi;
        t.drift += du * m.d1u + 0.5 * e * m.phi;
        t.noise += du * m.d1sig;
        t.ito += du * m.ito;
        t.energy += e * m.phi;
        t.e_drift += e * (m.d1u_e + 0.5 * m.d2sig2 + 0.5 * a * a * m.phi);
        t.e_noise += e * (m.d1sig - a * m.phi);
        u_left += du;
    }
    return t;
}

void require_same_grid(const CharacteristicField& f, const BrownianPath& p) {
    if (f.grid.n_steps != p.grid.n_steps || f.grid.t_end != p.grid.t_end)
        throw std::invalid_argument("field and path grids differ");
}

std::vector<double> log_vec(const std::vector<double>& xs) {
    std::vector<double> out;
    for (double x : xs) out.push_back(std::log(x));
    return out;
}

std::size_t node_of(const TimeGrid& g, double t) {
    const double kd = t / g.dt();
    const auto k = static_cast<std::size_t>(std::llround(kd));
    if (k > g.n_steps || std::abs(kd - static_cast<double>(k)) > 1e-7) {
        std::ostringstream msg;
        msg << "time " << t << " is not a node of the grid";
        throw std::invalid_argument(msg.str());
    }
    return k;
}

std::vector<BrownianPath> refinement_chain(const TimeGrid& grid, std::uint64_t seed, int levels) {
    std::vector<BrownianPath> chain{sample_brownian(grid, seed)};
    for (int l = 1; l < levels; ++l) chain.push_back(refine_bridge(chain.back()));
    return chain;
}

}  // namespace

double TestFunction::operator()(double x) const { return bump(*this, x).v; }
double TestFunction::d1(double x) const { return bump(*this, x).d1; }
double TestFunction::d2(double x) const { return bump(*this, x).d2; }

WeakFormResidual weak_form_residual(const CharacteristicField& field, const BrownianPath& path,
                                    const TestFunction& phi, std::size_t k_end, Window window, std::size_t panels) {
    require_same_grid(field, path);
    if (!(phi.halfwidth > 0.0) || !std::isfinite(phi.center))
        throw std::invalid_argument("test function needs a finite centre and positive halfwidth");
    if (phi.lo() < window.lo || phi.hi() > window.hi) {
        std::ostringstream msg;
        msg << "test function support [" << phi.lo() << ", " << phi.hi() << "] leaves the window [" << window.lo
            << ", " << window.hi << "]";
        throw std::invalid_argument(msg.str());
    }
    if (k_end >= field.grid.n_nodes()) throw std::out_of_range("weak_form_residual: k_end beyond the grid");
    const double dt = field.grid.dt();
    NodeTerms prev = node_terms(field, phi, 0, panels);
    const double mass0 = prev.mass;
    double drift = 0.0, strat = 0.0, ito = 0.0, corr = 0.0;
    for (std::size_t k = 0; k < k_end; ++k) {
        const NodeTerms next = node_terms(field, phi, k + 1, panels);
        const double dw = path.w[k + 1] - path.w[k];
        drift += 0.5 * (prev.drift + next.drift) * dt;
        strat += 0.5 * (prev.noise + next.noise) * dw;
        ito += prev.noise * dw;
        corr += 0.25 * (prev.ito + next.ito) * dt;
        prev = next;
    }
    const double base = prev.mass - mass0 - drift;
    return {base - strat, base - ito - corr};
}

double energy_form_residual(const CharacteristicField& field, const BrownianPath& path, const TestFunction& phi,
                            std::size_t k_end, std::size_t panels) {
    require_same_grid(field, path);
    if (k_end >= field.grid.n_nodes()) throw std::out_of_range("energy_form_residual: k_end beyond the grid");
    const double dt = field.grid.dt();
    NodeTerms prev = node_terms(field, phi, 0, panels);
    const double e0 = prev.energy;
    double drift = 0.0, noise = 0.0;
    for (std::size_t k = 0; k < k_end; ++k) {
        const NodeTerms next = node_terms(field, phi, k + 1, panels);
        drift += 0.5 * (prev.e_drift + next.e_drift) * dt;
        noise += prev.e_noise * (path.w[k + 1] - path.w[k]);
        prev = next;
    }
    return prev.energy - e0 - drift - noise;
}

WeakFormConvergence weak_form_convergence(const Experiment& exp, const TestFunction& phi, int levels) {
    const auto L = static_cast<std::size_t>(levels);
    std::vector<std::vector<double>> res(L, std::vector<double>(exp.n_paths));
    std::vector<std::vector<double>> gap(L, std::vector<double>(exp.n_paths));
    parallel_for(exp.n_paths, exp.threads, [&](std::size_t p) {
        const auto chain = refinement_chain(exp.grid, path_seed(exp.seed, p), levels);
        for (std::size_t l = 0; l < L; ++l) {
            const CharacteristicField f = build_field(chain[l], exp.sigma, exp.initial, exp.mode);
            const WeakFormResidual r = weak_form_residual(f, chain[l], phi, chain[l].grid.n_steps);
            res[l][p] = r.stratonovich;
            gap[l][p] = r.ito - r.stratonovich;
        }
    });
    WeakFormConvergence out;
    out.gap_ok = true;
    std::vector<double> dts, med, medgap;
    for (std::size_t l = 0; l < L; ++l) {
        WeakFormLevel lv;
        lv.dt = exp.grid.dt() / std::pow(2.0, static_cast<double>(l));
        std::vector<double> absr, absg;
        for (double r : res[l]) absr.push_back(std::abs(r));
        for (double g : gap[l]) absg.push_back(std::abs(g));
        lv.median_abs_residual = median(absr);
        lv.median_abs_gap = median(absg);
        const MeanStderr ms = mean_stderr(gap[l]);
        lv.mean_gap = ms.mean;
        lv.gap_stderr = ms.stderr_;
        if (std::abs(ms.mean) > 3.0 * ms.stderr_ + lv.dt) out.gap_ok = false;
        dts.push_back(lv.dt);
        med.push_back(lv.median_abs_residual);
        medgap.push_back(lv.median_abs_gap);
        out.levels.push_back(lv);
    }
    auto rate = [&](const std::vector<double>& ys) {
        for (double y : ys)
            if (!(y > 0.0)) return kInfinity;
        return fit_slope(log_vec(dts), log_vec(ys));
    };
    out.rate = rate(med);
    out.gap_rate = rate(medgap);
    return out;
}

double energy_law(EnergyGrowthLaw law, double l2_sq, double sigma_prime, double t) {
    const double c = law == EnergyGrowthLaw::QuarterExponent ? 0.25 : 0.5;
    return l2_sq * std::exp(c * sigma_prime * sigma_prime * t);
}

EnergyLawReport expected_energy_check(const Experiment& exp, const std::vector<double>& t_list, EnergyGrowthLaw law) {
    if (exp.mode != ContinuationMode::Conservative)
        throw std::invalid_argument("expected_energy_check: conservative mode required");
    if (t_list.empty()) throw std::invalid_argument("expected_energy_check: empty time list");
    std::vector<std::size_t> nodes;
    for (double t : t_list) nodes.push_back(node_of(exp.grid, t));
    const double l2 = exp.initial.l2_norm_sq();
    std::vector<std::vector<double>> e(nodes.size(), std::vector<double>(exp.n_paths));
    parallel_for(exp.n_paths, exp.threads, [&](std::size_t p) {
        const BrownianPath path = sample_brownian(exp.grid, path_seed(exp.seed, p));
        const CharacteristicField f = build_field(path, exp.sigma, exp.initial, exp.mode);
        for (std::size_t j = 0; j < nodes.size(); ++j) e[j][p] = energy(f, nodes[j]);
    });
    EnergyLawReport r;
    r.law_pass = true;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        EnergyPoint pt;
        pt.t = exp.grid.time(nodes[j]);
        pt.estimate = mean_stderr(e[j]);
        pt.target = energy_law(law, l2, exp.sigma.slope, pt.t);
        const double diff = pt.estimate.mean - pt.target;
        pt.z = pt.estimate.stderr_ > 0.0 ? diff / pt.estimate.stderr_
                                         : (std::abs(diff) <= 1e-12 * std::max(1.0, pt.target) ? 0.0 : kInfinity);
        if (!(std::abs(pt.z) <= 3.0)) r.law_pass = false;
        r.points.push_back(pt);
    }
    const double t_last = r.points.back().t;
    std::vector<double> logs;
    for (double v : e.back()) logs.push_back(std::log(v / l2));
    r.log_moments = sample_moments(logs);
    const double n = static_cast<double>(logs.size());
    const double var = exp.sigma.slope * exp.sigma.slope * t_last;
    if (var == 0.0) {
        r.lognormal_pass = r.log_moments.mean == 0.0 && r.log_moments.variance == 0.0;
        return r;
    }
    r.log_mean_z = r.log_moments.mean / std::sqrt(var / n);
    r.log_var_z = (r.log_moments.variance - var) / (var * std::sqrt(2.0 / (n - 1.0)));
    r.skew_z = r.log_moments.skewness / std::sqrt(6.0 / n);
    r.kurt_z = r.log_moments.excess_kurtosis / std::sqrt(24.0 / n);
    r.lognormal_pass = std::abs(r.log_mean_z) <= 3.0 && std::abs(r.log_var_z) <= 3.0 && std::abs(r.skew_z) <= 3.0 &&
                       std::abs(r.kurt_z) <= 3.0;
    return r;
}

EnergyIdentityReport energy_identity_check(const Experiment& exp) {
    const double l2 = exp.initial.l2_norm_sq();
    std::vector<double> worst(exp.n_paths, 0.0);
    std::vector<std::size_t> skipped(exp.n_paths, 0);
    parallel_for(exp.n_paths, exp.threads, [&](std::size_t p) {
        const BrownianPath path = sample_brownian(exp.grid, path_seed(exp.seed, p));
        const CharacteristicField f = build_field(path, exp.sigma, exp.initial, ContinuationMode::Conservative);
        for (std::size_t k = 0; k < f.grid.n_nodes(); ++k) {
            if (f.any_singular(k)) {
                ++skipped[p];
                continue;
            }
            const double target = l2 * f.expf.z[k];
            worst[p] = std::max(worst[p], std::abs(eulerian_energy(f, k) - target) / l2);
        }
    });
    EnergyIdentityReport r;
    r.worst = *std::max_element(worst.begin(), worst.end());
    r.nodes = exp.n_paths * exp.grid.n_nodes();
    for (std::size_t s : skipped) r.singular_skipped += s;
    return r;
}

double space_time_lp_norm(const CharacteristicField& field, double alpha) {
    const std::size_t nodes = field.grid.n_nodes();
    std::vector<double> g(nodes, 0.0);
    for (std::size_t k = 0; k < nodes; ++k) {
        if (field.any_singular(k)) continue;
        for (std::size_t i = 0; i < field.n_boxes(); ++i) {
            const double q = std::abs(field.q_lag[i][k]);
            if (q == 0.0) continue;
            g[k] += field.initial.width(i) * std::pow(q, 1.0 + alpha) * std::abs(field.u_frak[i][k]);
        }
    }
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < nodes; ++k) s += 0.5 * (g[k] + g[k + 1]);
    return s * field.grid.dt();
}

AprioriReport apriori_bounds_check(const Experiment& exp, double alpha, int levels) {
    if (!(alpha >= 0.0 && alpha < 1.0 + 1e-12)) throw std::invalid_argument("apriori_bounds_check: alpha in [0, 1]");
    const auto L = static_cast<std::size_t>(levels);
    const std::size_t nodes = exp.grid.n_nodes();
    std::vector<std::vector<double>> norm(L, std::vector<double>(exp.n_paths));
    std::vector<std::vector<double>> l2(nodes, std::vector<double>(exp.n_paths));
    parallel_for(exp.n_paths, exp.threads, [&](std::size_t p) {
        const auto chain = refinement_chain(exp.grid, path_seed(exp.seed, p), levels);
        for (std::size_t l = 0; l < L; ++l) {
            const CharacteristicField f = build_field(chain[l], exp.sigma, exp.initial, exp.mode);
            norm[l][p] = space_time_lp_norm(f, alpha);
            if (l == 0)
                for (std::size_t k = 0; k < nodes; ++k) l2[k][p] = energy(f, k);
        }
    });
    AprioriReport r;
    r.alpha = alpha;
    for (std::size_t l = 0; l < L; ++l)
        r.levels.push_back({exp.grid.dt() / std::pow(2.0, static_cast<double>(l)), mean_stderr(norm[l])});
    const double q0sq = exp.initial.l2_norm_sq();
    for (std::size_t k = 0; k < nodes; ++k) {
        const MeanStderr ms = mean_stderr(l2[k]);
        r.sup_mean_l2 = std::max(r.sup_mean_l2, ms.mean);
        if (exp.mode == ContinuationMode::Conservative && k % std::max<std::size_t>(1, nodes / 10) == 0) {
            const double target = energy_law(EnergyGrowthLaw::GaussianMoment, q0sq, exp.sigma.slope, exp.grid.time(k));
            const double diff = ms.mean - target;
            const double z = ms.stderr_ > 0.0 ? std::abs(diff) / ms.stderr_ : (std::abs(diff) < 1e-12 ? 0.0 : kInfinity);
            r.l2_curve_max_z = std::max(r.l2_curve_max_z, z);
        }
    }
    if (L >= 2) {
        const double a = r.levels[L - 2].lp_norm.mean, b = r.levels[L - 1].lp_norm.mean;
        r.last_relative_change = std::abs(b / a - 1.0);
    }
    return r;
}

double meeting_time(const CharacteristicField& field, double width_tol_rel) {
    if (field.n_boxes() != 1) throw std::invalid_argument("meeting_time: single-box data required");
    const double tol = width_tol_rel * field.initial.width(0);
    const std::size_t nodes = field.grid.n_nodes();
    std::size_t k = 0;
    while (k < nodes && field.X[1][k] - field.X[0][k] > tol) ++k;
    if (k == nodes) return kInfinity;
    std::size_t best = k;
    for (; k < nodes && field.X[1][k] - field.X[0][k] <= tol; ++k)
        if (field.X[1][k] - field.X[0][k] < field.X[1][best] - field.X[0][best]) best = k;
    // A minimum on the last node has not been seen to reopen.
    if (best + 1 == nodes && !field.t_star[0].finite()) return kInfinity;
    return field.grid.time(best);
}

MeetingReport meeting_time_check(const Experiment& exp, double width_tol_rel) {
    if (exp.initial.n_boxes() != 1) throw std::invalid_argument("meeting_time_check: single-box data required");
    std::vector<double> dev(exp.n_paths, 0.0);
    std::vector<std::uint8_t> broken(exp.n_paths, 0), fail(exp.n_paths, 0);
    const double dt = exp.grid.dt();
    parallel_for(exp.n_paths, exp.threads, [&](std::size_t p) {
        const BrownianPath path = sample_brownian(exp.grid, path_seed(exp.seed, p));
        const CharacteristicField f = build_field(path, exp.sigma, exp.initial, exp.mode);
        const double tm = meeting_time(f, width_tol_rel);
        const BreakingTime ts = f.t_star[0];
        broken[p] = ts.finite();
        if (ts.finite() != (tm < kInfinity)) {
            fail[p] = 1;
            dev[p] = kInfinity;
        } else if (ts.finite()) {
            dev[p] = std::abs(tm - ts.value);
            fail[p] = dev[p] > dt * (1.0 + 1e-9);
        }
    });
    MeetingReport r;
    r.n_paths = exp.n_paths;
    r.dt = dt;
    for (std::size_t p = 0; p < exp.n_paths; ++p) {
        r.n_broken += broken[p];
        r.n_fail += fail[p];
        r.max_deviation = std::max(r.max_deviation, dev[p]);
    }
    return r;
}

double bessel_dimension(double sigma_prime, double c) {
    if (sigma_prime == 0.0) throw std::invalid_argument("bessel_dimension: sigma_prime must be nonzero");
    return 2.0 + 4.0 * c / (sigma_prime * sigma_prime);
}

BesselPathReport bessel_timechange_check(const BrownianPath& path, double sigma_prime) {
    const ExpFunctionals ef = exp_functionals(path, sigma_prime);
    const double lambda = 2.0 / (sigma_prime * sigma_prime);
    const double delta = bessel_dimension(sigma_prime);
    BesselPathReport r;
    double sq = 0.0, stoch = 0.0;
    const std::size_t n = path.grid.n_steps;
    for (std::size_t k = 0; k < n; ++k) {
        const double dw = path.w[k + 1] - path.w[k];
        const double dm = -std::sqrt(0.5 * ef.z[k]) * dw;
        const double y0 = lambda * ef.z[k], y1 = lambda * ef.z[k + 1];
        const double da = ef.a[k + 1] - ef.a[k];
        const double drive = 2.0 * std::sqrt(y0) * dm;
        const double res = y1 - y0 - drive - delta * da;
        r.qv += dm * dm;
        stoch += drive;
        sq += res * res;
        r.cumulative_residual += res;
    }
    r.clock = ef.a.back();
    r.qv_rel_mismatch = std::abs(r.qv - r.clock) / r.clock;
    r.step_residual_rms = std::sqrt(sq / static_cast<double>(n));
    r.cumulative_residual_delta_one = r.cumulative_residual + (delta - 1.0) * r.clock;
    r.delta_estimate = (lambda * ef.z.back() - lambda - stoch) / r.clock;
    return r;
}

BesselEnsembleReport bessel_ensemble(const TimeGrid& coarse, double sigma_prime, std::size_t n_paths,
                                     std::uint64_t seed, int levels, unsigned threads) {
    const auto L = static_cast<std::size_t>(levels);
    std::vector<std::vector<double>> rms(L, std::vector<double>(n_paths));
    std::vector<double> qv(n_paths), delta(n_paths), cum(n_paths), cum1(n_paths);
    parallel_for(n_paths, threads, [&](std::size_t p) {
        const auto chain = refinement_chain(coarse, path_seed(seed, p), levels);
        for (std::size_t l = 0; l < L; ++l) {
            const BesselPathReport b = bessel_timechange_check(chain[l], sigma_prime);
            rms[l][p] = b.step_residual_rms;
            if (l + 1 == L) {
                qv[p] = b.qv_rel_mismatch;
                delta[p] = b.delta_estimate;
                cum[p] = std::abs(b.cumulative_residual);
                cum1[p] = std::abs(b.cumulative_residual_delta_one);
            }
        }
    });
    BesselEnsembleReport r;
    for (std::size_t l = 0; l < L; ++l) {
        r.dt.push_back(coarse.dt() / std::pow(2.0, static_cast<double>(l)));
        r.median_step_rms.push_back(median(rms[l]));
    }
    r.rate = L >= 2 ? fit_slope(log_vec(r.dt), log_vec(r.median_step_rms)) : 0.0;
    r.median_qv_mismatch = median(qv);
    r.median_delta = median(delta);
    r.median_cum_residual = median(cum);
    r.median_cum_residual_delta_one = median(cum1);
    return r;
}

KsReport breaking_law_ks(double sigma_prime, const std::vector<double>& q0, const TimeGrid& grid, std::size_t n_paths,
                         std::uint64_t seed, unsigned threads, double alpha, const YorQuadratureParams& params,
                         std::size_t table_nodes) {
    if (sigma_prime == 0.0) throw std::invalid_argument("breaking_law_ks: sigma_prime must be nonzero");
    KsReport r;
    r.sigma_prime = sigma_prime;
    r.n_paths = n_paths;
    r.lo = 4.0 * params.min_t / (sigma_prime * sigma_prime);
    r.hi = grid.t_end;
    if (!(r.lo < r.hi)) throw SmallTimeRefusal("breaking_law_ks: horizon ends below the quadrature floor");
    table_nodes = std::max<std::size_t>(table_nodes, 4);

    std::vector<double> neg, thresholds;
    for (double q : q0)
        if (q < 0.0) {
            neg.push_back(q);
            thresholds.push_back(-1.0 / q);
        }
    std::vector<double> ts(table_nodes);
    for (std::size_t j = 0; j < table_nodes; ++j)
        ts[j] = r.lo * std::pow(r.hi / r.lo, static_cast<double>(j) / static_cast<double>(table_nodes - 1));
    std::vector<std::vector<double>> table(neg.size(), std::vector<double>(table_nodes));
    if (!neg.empty()) {
        for (std::size_t j = 0; j < table_nodes; ++j) {
            const std::vector<double> s = breaking_cdf(ts[j], neg, sigma_prime, params);
            for (std::size_t m = 0; m < neg.size(); ++m) table[m][j] = 1.0 - s[m];
        }
    }
    using Pchip = boost::math::interpolators::pchip<std::vector<double>>;
    std::vector<Pchip> cdfs;
    for (std::size_t m = 0; m < neg.size(); ++m) cdfs.emplace_back(std::vector<double>(ts), std::vector<double>(table[m]));
    if (!neg.empty()) {
        for (std::size_t j = 2; j + 1 < table_nodes; j += 5) {
            const double tm = std::sqrt(ts[j] * ts[j + 1]);
            const std::vector<double> s = breaking_cdf(tm, neg, sigma_prime, params);
            for (std::size_t m = 0; m < neg.size(); ++m)
                r.table_error = std::max(r.table_error, std::abs(cdfs[m](tm) - (1.0 - s[m])));
        }
    }

    std::vector<std::vector<double>> times(thresholds.size(), std::vector<double>(n_paths));
    if (!thresholds.empty()) {
        parallel_for(n_paths, threads, [&](std::size_t p) {
            const std::vector<double> c = crossing_times(grid, path_seed(seed, p), sigma_prime, thresholds);
            for (std::size_t m = 0; m < c.size(); ++m) times[m][p] = c[m];
        });
    }
    const double crit = ks_coefficient(alpha) / std::sqrt(static_cast<double>(n_paths));
    std::size_t m = 0;
    for (double q : q0) {
        KsEntry e;
        e.q0 = q;
        e.critical = crit;
        if (q < 0.0) {
            for (double t : times[m])
                if (t <= r.hi) ++e.n_broken;
            const Pchip& f = cdfs[m];
            e.distance = ks_one_sample(times[m], [&](double t) { return std::clamp(f(t), 0.0, 1.0); }, r.lo, r.hi);
            ++m;
        }
        r.entries.push_back(e);
    }
    return r;
}

OleinikReport oleinik_check(const Experiment& exp, std::size_t stride) {
    stride = std::max<std::size_t>(stride, 1);
    std::vector<OleinikMargins> worst(exp.n_paths, OleinikMargins{-kInfinity, -kInfinity, -kInfinity});
    std::vector<std::size_t> count(exp.n_paths, 0);
    parallel_for(exp.n_paths, exp.threads, [&](std::size_t p) {
        const BrownianPath path = sample_brownian(exp.grid, path_seed(exp.seed, p));
        const CharacteristicField f = build_field(path, exp.sigma, exp.initial, ContinuationMode::Dissipative);
        for (std::size_t k = 0; k < f.grid.n_nodes(); k += stride) {
            const OleinikMargins m = oleinik_margins(f, k);
            worst[p].pointwise = std::max(worst[p].pointwise, m.pointwise);
            worst[p].weak = std::max(worst[p].weak, m.weak);
            worst[p].global = std::max(worst[p].global, m.global);
            ++count[p];
        }
    });
    OleinikReport r;
    for (std::size_t p = 0; p < exp.n_paths; ++p) {
        r.worst.pointwise = std::max(r.worst.pointwise, worst[p].pointwise);
        r.worst.weak = std::max(r.worst.weak, worst[p].weak);
        r.worst.global = std::max(r.worst.global, worst[p].global);
        r.slices += count[p];
    }
    return r;
}

SdeOrderReport sde_order_check(const Experiment& exp, int levels, bool pre_breaking) {
    const auto L = static_cast<std::size_t>(levels);
    std::vector<std::vector<double>> dev(L, std::vector<double>(exp.n_paths));
    parallel_for(exp.n_paths, exp.threads, [&](std::size_t p) {
        const auto chain = refinement_chain(exp.grid, path_seed(exp.seed, p), levels);
        double window = exp.grid.t_end;
        if (pre_breaking) {
            const ExpFunctionals ef = exp_functionals(chain[0], exp.sigma.slope);
            for (double v : exp.initial.values) window = std::min(window, 0.7 * breaking_time(ef, v).value);
        }
        for (std::size_t l = 0; l < L; ++l) dev[l][p] = sde_cross_check(exp.initial, chain[l], exp.sigma, exp.mode, window);
    });
    SdeOrderReport r;
    for (std::size_t l = 0; l < L; ++l) {
        r.dt.push_back(exp.grid.dt() / std::pow(2.0, static_cast<double>(l)));
        r.mean_deviation.push_back(mean_stderr(dev[l]).mean);
    }
    r.order = L >= 2 ? fit_slope(log_vec(r.dt), log_vec(r.mean_deviation)) : 0.0;
    return r;
}

HolderReport holder_fit(const Experiment& exp, Window b, int n_lags) {
    const auto J = static_cast<std::size_t>(n_lags);
    std::vector<std::vector<std::vector<double>>> incs(J, std::vector<std::vector<double>>(exp.n_paths));
    parallel_for(exp.n_paths, exp.threads, [&](std::size_t p) {
        const BrownianPath path = sample_brownian(exp.grid, path_seed(exp.seed, p));
        const CharacteristicField f = build_field(path, exp.sigma, exp.initial, exp.mode);
        std::vector<double> g(f.grid.n_nodes());
        for (std::size_t k = 0; k < g.size(); ++k) g[k] = u_l2_sq(f, k, b);
        for (std::size_t j = 0; j < J; ++j) {
            const std::size_t h = std::size_t{1} << j;
            for (std::size_t k = 0; k + h < g.size(); k += h) incs[j][p].push_back(std::abs(g[k + h] - g[k]));
        }
    });
    HolderReport r;
    for (std::size_t j = 0; j < J; ++j) {
        std::vector<double> all;
        for (const auto& v : incs[j]) all.insert(all.end(), v.begin(), v.end());
        r.lags.push_back(exp.grid.dt() * static_cast<double>(std::size_t{1} << j));
        r.median_increment.push_back(median(all));
    }
    r.exponent = fit_slope(log_vec(r.lags), log_vec(r.median_increment));
    return r;
}

}  // namespace shs
