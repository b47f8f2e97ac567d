#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "shs/breaking_law.hpp"
#include "shs/characteristics.hpp"
#include "shs/eulerian.hpp"
#include "shs/stats.hpp"

namespace shs {

/// exp(-1 / (1 - r^2)) with r = (x - center) / halfwidth, zero for |r| >= 1.
struct TestFunction {
    double center = 0.5;
    double halfwidth = 1.0;

    double operator()(double x) const;
    double d1(double x) const;
    double d2(double x) const;
    double lo() const { return center - halfwidth; }
    double hi() const { return center + halfwidth; }
};

/// Everything an ensemble check needs.
struct Experiment {
    SigmaSpec sigma;
    StepInitialData initial;
    TimeGrid grid;
    ContinuationMode mode = ContinuationMode::Conservative;
    std::size_t n_paths = 100;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

/// Outcome of one named check, as written to reports.
struct CheckResult {
    std::string name;
    double statistic = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;
};

struct WeakFormResidual {
    double stratonovich = 0.0;
    /// Left-point Ito sum plus the quadratic-covariation correction.
    double ito = 0.0;
};

/// Residual of the weak form at node k_end. Throws std::invalid_argument if the support of phi
/// is not inside `window` or the field and path grids differ.
WeakFormResidual weak_form_residual(const CharacteristicField& field, const BrownianPath& path,
                                    const TestFunction& phi, std::size_t k_end,
                                    Window window = {-kInfinity, kInfinity}, std::size_t panels = 4);

/// Residual of the Ito energy balance d int phi q^2 at node k_end. Zero up to discretisation for
/// conservative fields, nonpositive for dissipative fields and phi >= 0.
double energy_form_residual(const CharacteristicField& field, const BrownianPath& path, const TestFunction& phi,
                            std::size_t k_end, std::size_t panels = 4);

struct WeakFormLevel {
    double dt = 0.0;
    double median_abs_residual = 0.0;
    double mean_gap = 0.0;
    double gap_stderr = 0.0;
    double median_abs_gap = 0.0;
};

struct WeakFormConvergence {
    std::vector<WeakFormLevel> levels;
    double rate = 0.0;
    double gap_rate = 0.0;
    bool gap_ok = false;
    bool pass(double min_rate = 0.5) const { return rate >= min_rate && gap_ok; }
};

/// Residual at t_end on exp.n_paths paths, each refined levels-1 times by Brownian bridge.
WeakFormConvergence weak_form_convergence(const Experiment& exp, const TestFunction& phi, int levels = 3);

enum class EnergyGrowthLaw {
    /// ||q0||^2 exp(sigma'^2 t / 4)
    QuarterExponent,
    /// ||q0||^2 E exp(-sigma' W(t)) = ||q0||^2 exp(sigma'^2 t / 2)
    GaussianMoment,
};

double energy_law(EnergyGrowthLaw law, double l2_sq, double sigma_prime, double t);

struct EnergyPoint {
    double t = 0.0;
    MeanStderr estimate;
    double target = 0.0;
    double z = 0.0;
};

struct EnergyLawReport {
    std::vector<EnergyPoint> points;
    /// Moments of log(energy / ||q0||^2) at the last time against Normal(0, sigma'^2 t).
    Moments log_moments{};
    double log_mean_z = 0.0, log_var_z = 0.0, skew_z = 0.0, kurt_z = 0.0;
    bool law_pass = false;
    bool lognormal_pass = false;
};

/// Requires conservative mode; every t must be a grid node.
EnergyLawReport expected_energy_check(const Experiment& exp, const std::vector<double>& t_list, EnergyGrowthLaw law);

/// Worst |int Q^2 dx - int q0^2 Z dx| / ||q0||^2 over every node of every path, conservative.
struct EnergyIdentityReport {
    double worst = 0.0;
    std::size_t nodes = 0;
    std::size_t singular_skipped = 0;
};
EnergyIdentityReport energy_identity_check(const Experiment& exp);

/// int_0^T sum_i width_i |Q_i|^{1+alpha} |u_i| dt by trapezoid, flagged singular nodes skipped.
double space_time_lp_norm(const CharacteristicField& field, double alpha);

struct AprioriLevel {
    double dt = 0.0;
    MeanStderr lp_norm;
};

struct AprioriReport {
    double alpha = 0.0;
    std::vector<AprioriLevel> levels;
    /// sup_t of the ensemble mean of ||q(t)||^2 on the coarsest level.
    double sup_mean_l2 = 0.0;
    /// Conservative only: max |z| of the mean L^2 curve against the Gaussian-moment law.
    double l2_curve_max_z = 0.0;
    /// |norm(dt/2) / norm(dt) - 1| between the two finest levels.
    double last_relative_change = 0.0;
};

AprioriReport apriori_bounds_check(const Experiment& exp, double alpha, int levels = 2);

struct MeetingReport {
    std::size_t n_paths = 0;
    std::size_t n_broken = 0;
    std::size_t n_fail = 0;
    double max_deviation = 0.0;
    double dt = 0.0;
    bool pass() const { return n_fail == 0; }
};

/// First meeting of the two edge characteristics of a single box against t*.
double meeting_time(const CharacteristicField& field, double width_tol_rel = 1e-5);
MeetingReport meeting_time_check(const Experiment& exp, double width_tol_rel = 1e-5);

struct BesselPathReport {
    double qv = 0.0;
    double clock = 0.0;
    double qv_rel_mismatch = 0.0;
    /// RMS over steps of the discrete squared-Bessel relation with delta = 2.
    double step_residual_rms = 0.0;
    /// Cumulative residual at t_end for delta = 2 and for delta = 1.
    double cumulative_residual = 0.0;
    double cumulative_residual_delta_one = 0.0;
    double delta_estimate = 0.0;
};

/// Dimension of the squared Bessel process behind exp(-sigma' W + c t): 2 + 4c / sigma'^2.
double bessel_dimension(double sigma_prime, double c = 0.0);

BesselPathReport bessel_timechange_check(const BrownianPath& path, double sigma_prime);

struct BesselEnsembleReport {
    std::vector<double> dt;
    std::vector<double> median_step_rms;
    double median_qv_mismatch = 0.0;
    double rate = 0.0;
    double median_delta = 0.0;
    double median_cum_residual = 0.0;
    double median_cum_residual_delta_one = 0.0;
};

/// QV mismatch on the finest level; the residual rate fitted across levels of bridge refinement.
BesselEnsembleReport bessel_ensemble(const TimeGrid& coarse, double sigma_prime, std::size_t n_paths,
                                     std::uint64_t seed, int levels = 3, unsigned threads = 1);

struct KsEntry {
    double q0 = 0.0;
    double distance = 0.0;
    double critical = 0.0;
    std::size_t n_broken = 0;
    bool pass() const { return distance < critical; }
};

struct KsReport {
    double sigma_prime = 0.0;
    double lo = 0.0, hi = 0.0;
    std::size_t n_paths = 0;
    std::vector<KsEntry> entries;
    /// Largest gap between the interpolated CDF table and direct evaluation at the table midpoints.
    double table_error = 0.0;
};

/// KS distance of Monte Carlo breaking times against the quadrature law on [4 min_t / sigma'^2, t_end].
/// All q0 values share the paths.
KsReport breaking_law_ks(double sigma_prime, const std::vector<double>& q0, const TimeGrid& grid, std::size_t n_paths,
                         std::uint64_t seed, unsigned threads = 1, double alpha = 0.01,
                         const YorQuadratureParams& params = {}, std::size_t table_nodes = 40);

struct OleinikReport {
    OleinikMargins worst{-kInfinity, -kInfinity, -kInfinity};
    std::size_t slices = 0;
    bool pass(double tol = 1e-12) const { return worst.pointwise <= tol && worst.weak <= tol && worst.global <= tol; }
};

/// Dissipative slices every `stride` nodes of every path.
OleinikReport oleinik_check(const Experiment& exp, std::size_t stride = 1);

struct SdeOrderReport {
    std::vector<double> dt;
    std::vector<double> mean_deviation;
    double order = 0.0;
};

/// Heun against closed-form characteristics under bridge refinement; window = t_end, or the pre-breaking
/// 0.7 t*_min of the coarse path when `pre_breaking`.
SdeOrderReport sde_order_check(const Experiment& exp, int levels = 4, bool pre_breaking = true);

struct HolderReport {
    std::vector<double> lags;
    std::vector<double> median_increment;
    double exponent = 0.0;
};

/// Exponent of t -> int_B u(t, x)^2 dx from dyadic increments, ensemble medians.
HolderReport holder_fit(const Experiment& exp, Window b, int n_lags = 7);

}  // namespace shs
