#include "shs/path_engine.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace shs {

void TimeGrid::validate() const {
    if (n_steps == 0) throw std::invalid_argument("TimeGrid: n_steps must be >= 1");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("TimeGrid: t_end must be positive and finite");
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t path_seed(std::uint64_t master, std::uint64_t index) {
    return mix64(master ^ mix64(index * 0xD1B54A32D192ED03ULL + 1));
}

BrownianPath sample_brownian(const TimeGrid& grid, std::uint64_t seed) {
    grid.validate();
    BrownianPath p{grid, std::vector<double>(grid.n_nodes(), 0.0), seed};
    NormalStream normals(seed);
    const double sd = std::sqrt(grid.dt());
    for (std::size_t k = 1; k < p.w.size(); ++k) p.w[k] = p.w[k - 1] + sd * normals.next();
    return p;
}

BrownianPath zero_path(const TimeGrid& grid) {
    grid.validate();
    return BrownianPath{grid, std::vector<double>(grid.n_nodes(), 0.0), 0};
}

BrownianPath refine_bridge(const BrownianPath& coarse, std::uint64_t seed) {
    TimeGrid fine{coarse.grid.t_end, coarse.grid.n_steps * 2};
    BrownianPath p{fine, std::vector<double>(fine.n_nodes(), 0.0), seed};
    NormalStream normals(seed);
    // Midpoint of a bridge over dt has variance dt/4.
    const double sd = 0.5 * std::sqrt(coarse.grid.dt());
    for (std::size_t k = 0; k < coarse.grid.n_steps; ++k) {
        p.w[2 * k] = coarse.w[k];
        p.w[2 * k + 1] = 0.5 * (coarse.w[k] + coarse.w[k + 1]) + sd * normals.next();
    }
    p.w.back() = coarse.w.back();
    return p;
}

BrownianPath refine_bridge(const BrownianPath& coarse) {
    return refine_bridge(coarse, mix64(coarse.seed ^ 0xA0761D6478BD642FULL));
}

ExpFunctionals exp_functionals(const BrownianPath& path, double sigma_prime) {
    const std::size_t n = path.w.size();
    ExpFunctionals f{path.grid, std::vector<double>(n), std::vector<double>(n, 0.0), sigma_prime};
    const double max_exponent = std::log(std::numeric_limits<double>::max()) - 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double e = -sigma_prime * path.w[k];
        if (std::abs(e) > max_exponent) {
            std::ostringstream msg;
            msg << "exp_functionals: |sigma' * W| = " << std::abs(e) << " at node " << k
                << " exceeds the exponent range " << max_exponent;
            throw std::overflow_error(msg.str());
        }
        f.z[k] = std::exp(e);
    }
    const double half_dt = 0.5 * path.grid.dt();
    for (std::size_t k = 1; k < n; ++k) f.a[k] = f.a[k - 1] + 0.5 * half_dt * (f.z[k - 1] + f.z[k]);
    return f;
}

double a_mu_functional(const BrownianPath& path, double mu, double t) {
    const TimeGrid& g = path.grid;
    if (t < 0.0 || t > g.t_end * (1.0 + 1e-14)) throw std::out_of_range("a_mu_functional: t outside the path grid");
    const double dt = g.dt();
    auto integrand = [&](double s, double w) { return std::exp(2.0 * mu * s + 2.0 * w); };
    double sum = 0.0;
    std::size_t k = 0;
    for (; k < g.n_steps && g.time(k + 1) <= t; ++k)
        sum += 0.5 * dt * (integrand(g.time(k), path.w[k]) + integrand(g.time(k + 1), path.w[k + 1]));
    if (k < g.n_steps && t > g.time(k)) {
        const double h = t - g.time(k);
        const double w_t = path.w[k] + (path.w[k + 1] - path.w[k]) * h / dt;
        sum += 0.5 * h * (integrand(g.time(k), path.w[k]) + integrand(t, w_t));
    }
    return sum;
}

}  // namespace shs
