#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "shs/breaking_law.hpp"
#include "shs/path_engine.hpp"

namespace shs {

/// Linear noise sigma(x) = slope * x + intercept.
struct SigmaSpec {
    double slope = 0.0;
    double intercept = 0.0;

    double operator()(double x) const { return slope * x + intercept; }
};

/// Piecewise-constant q0: values[i] on (breakpoints[i], breakpoints[i+1]), zero outside.
struct StepInitialData {
    std::vector<double> breakpoints;
    std::vector<double> values;

    static StepInitialData box(double v0, double a, double b);
    std::size_t n_boxes() const { return values.size(); }
    double width(std::size_t i) const { return breakpoints[i + 1] - breakpoints[i]; }
    /// q0 at x; right-continuous at interior breakpoints.
    double operator()(double x) const;
    double l2_norm_sq() const;
    /// Throws std::invalid_argument when breakpoints are not strictly increasing or values not finite.
    void validate() const;
};

enum class ContinuationMode { Conservative, Dissipative };

std::string to_string(ContinuationMode mode);
ContinuationMode parse_mode(const std::string& s);

/// Cell averages of q0 over the partition, 16 midpoint sub-samples per cell.
StepInitialData project_initial(const std::function<double(double)>& q0, const std::vector<double>& partition);

inline constexpr double kDefaultSingularTol = 1e-10;

/// Closed-form Lagrangian state of one characteristic at node k.
struct LagrangianState {
    double q = 0.0;
    double u = 0.0;
    double dxdx = 1.0;
    /// Conservative node sitting numerically on t*; q is NaN there.
    bool singular = false;
};

LagrangianState lagrangian_state(const ExpFunctionals& expf, double q0x, std::size_t k, ContinuationMode mode,
                                 double singular_tol = kDefaultSingularTol);
/// Same with the breaking time of q0x precomputed.
LagrangianState lagrangian_state(const ExpFunctionals& expf, double q0x, std::size_t k, ContinuationMode mode,
                                 const BreakingTime& t_star, double singular_tol);

/// NaN at a flagged singular node.
double q_lagrangian(const ExpFunctionals& expf, double q0x, std::size_t k, ContinuationMode mode,
                    double singular_tol = kDefaultSingularTol);
double u_frak(const ExpFunctionals& expf, double q0x, std::size_t k, ContinuationMode mode);
double dxdx(const ExpFunctionals& expf, double q0x, std::size_t k, ContinuationMode mode);

/// Exact solution of dX = sigma(X) o dW started at x_base.
std::vector<double> base_characteristic(const BrownianPath& path, const SigmaSpec& sigma, double x_base);

/// Stratonovich–Heun solution of dX = sigma(X) o dW started at x_base.
std::vector<double> heun_base_characteristic(const BrownianPath& path, const SigmaSpec& sigma, double x_base);

struct CharacteristicField {
    TimeGrid grid;
    ContinuationMode mode = ContinuationMode::Conservative;
    SigmaSpec sigma;
    StepInitialData initial;
    ExpFunctionals expf;
    std::vector<BreakingTime> t_star;                 // [box]
    std::vector<std::vector<double>> q_lag;           // [box][node]
    std::vector<std::vector<double>> u_frak;          // [box][node]
    std::vector<std::vector<double>> dxdx;            // [box][node]
    std::vector<std::vector<std::uint8_t>> singular;  // [box][node]
    std::vector<std::vector<double>> X;               // [breakpoint][node]

    std::size_t n_boxes() const { return initial.n_boxes(); }
    /// e^{sigma' W(t_k)}
    double stretch(std::size_t k) const { return 1.0 / expf.z[k]; }
    /// X(t_k, y) for any label y.
    double X_at(std::size_t k, double y) const;
    /// Psi(t_k, x_i) = sum_{j < i} width_j * u_j: the value of u to the right of box i-1.
    std::vector<double> cumulative_u(std::size_t k) const;
    /// X(t_k, x_i) - X(t_k, x_{i-1}) computed from the Lagrangian width, free of cancellation.
    double image_width(std::size_t i, std::size_t k) const { return initial.width(i) * dxdx[i][k]; }
    bool any_singular(std::size_t k) const;
};

CharacteristicField build_field(const BrownianPath& path, const SigmaSpec& sigma, const StepInitialData& initial,
                                ContinuationMode mode, double singular_tol = kDefaultSingularTol);

/// Fills field.X from the base characteristic and the per-box dxdx.
void build_X(CharacteristicField& field, const BrownianPath& path);

/// u(t_k, x) for the piecewise-linear velocity built from the field at node k.
double eulerian_u(const CharacteristicField& field, std::size_t k, double x);

/// Max |X_heun - X_closed| over breakpoints and nodes with t_k <= t_window, where X_heun solves
/// dX = U(t, X) dt + sigma(X) o dW by Stratonovich–Heun with the constructed U.
double sde_cross_check(const StepInitialData& initial, const BrownianPath& path, const SigmaSpec& sigma,
                       ContinuationMode mode, double t_window = kInfinity);

}  // namespace shs
