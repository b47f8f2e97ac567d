#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "shs/path_engine.hpp"

namespace shs {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct BreakingTime {
    double value = kInfinity;
    /// Index k of the grid step (t_k, t_{k+1}] containing the crossing; meaningful only when finite.
    std::size_t bracket = 0;

    bool finite() const { return value < kInfinity; }
};

/// First t with A(t) = -1/q0x, linearly interpolated inside the bracketing step.
BreakingTime breaking_time(const ExpFunctionals& expf, double q0x);

/// Crossing times of A through each threshold for the path `sample_brownian(grid, seed)`,
/// streamed without storing the path. Thresholds must be positive; result is +inf when not reached.
std::vector<double> crossing_times(const TimeGrid& grid, std::uint64_t seed, double sigma_prime,
                                   const std::vector<double>& a_thresholds);

struct YorQuadratureParams {
    double r_halfwidth = 30.0;
    /// Cutoff of the inner line integral; 0 selects it from the decay of the integrand.
    double xi_max = 0.0;
    std::size_t panels_r = 8;
    std::size_t panels_xi = 4;
    double min_t = 0.05;
    double rel_tol = 1e-6;
    double abs_tol = 1e-10;
    int max_level = 4;
};

class SmallTimeRefusal : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double residual) : std::runtime_error(what), residual(residual) {}
    double residual;
};

/// theta(y, t) of the Hartman–Watson kernel, evaluated on the shifted contour xi = s + i*phi.
double hartman_watson_theta(double y, double t, const YorQuadratureParams& params = {});

/// Same kernel on the real xi axis. Loses accuracy like exp(pi^2/(2t)); use only for moderate t.
double hartman_watson_theta_real_axis(double y, double t, const YorQuadratureParams& params = {});

/// Density of A^(0)(t) = int_0^t exp(2 W(s)) ds at chi.
double yor_density(double chi, double t, const YorQuadratureParams& params = {});

/// P(A^(0)(t) <= c_j) for every c_j, by quadrature of yor_density in chi.
std::vector<double> yor_cdf(const std::vector<double>& c, double t, const YorQuadratureParams& params = {});
double yor_cdf(double c, double t, const YorQuadratureParams& params = {});

/// P(A^(0)(t) <= c) with the chi integral carried out in closed form (independent route).
double yor_cdf_reduced(double c, double t, const YorQuadratureParams& params = {});

/// P(t* >= t) = P(A^(0)(sigma'^2 t / 4) <= -sigma'^2 / (2 q0x)).
double breaking_cdf(double t, double q0x, double sigma_prime, const YorQuadratureParams& params = {});

/// breaking_cdf for several q0 values at one t, sharing the density evaluations.
std::vector<double> breaking_cdf(double t, const std::vector<double>& q0x, double sigma_prime,
                                 const YorQuadratureParams& params = {});

double breaking_cdf_reduced(double t, double q0x, double sigma_prime, const YorQuadratureParams& params = {});

struct McEstimate {
    double p = 0.0;
    double stderr_ = 0.0;
    std::size_t n = 0;
};

struct McOptions {
    double dt = 1e-3;
    unsigned threads = 1;
};

/// Fraction of paths with breaking_time >= t, paths seeded by path_seed(master_seed, i).
McEstimate mc_breaking_cdf(double t, double q0x, double sigma_prime, std::size_t n_paths, std::uint64_t master_seed,
                           const McOptions& options = {});

}  // namespace shs
