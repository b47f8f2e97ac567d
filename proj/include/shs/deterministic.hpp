#pragma once

#include <cstddef>
#include <vector>

#include "shs/characteristics.hpp"
#include "shs/eulerian.hpp"

namespace shs {

/// Breaking time -2/V of a box, +inf when V >= 0.
double det_breaking_time(double v);

/// 2V / (2 + V t); zero after breaking in dissipative mode, NaN exactly at breaking in conservative mode.
double det_q(double v, double t, ContinuationMode mode);

/// X_i(t) = x_0 + sum_{j < i} width_j (2 + V_j t)^2 / 4, the dissipative sum dropping broken boxes.
std::vector<double> det_characteristics(const StepInitialData& initial, double t,
                                        ContinuationMode mode = ContinuationMode::Dissipative);

/// Eulerian slice of the sigma = 0 solution; q on the characteristic points themselves is not sampled.
EulerianSlice det_solution(const StepInitialData& initial, double t,
                           ContinuationMode mode = ContinuationMode::Dissipative, std::size_t refine = 4,
                           double margin = 0.5);

double det_energy(const StepInitialData& initial, double t, ContinuationMode mode);

struct DefectAtom {
    std::size_t box = 0;
    double t_break = 0.0;
    double mass = 0.0;
    double position = 0.0;
};

struct DefectLedger {
    double t = 0.0;
    std::vector<DefectAtom> atoms;
    double total = 0.0;
};

/// Atoms of every box broken by time t.
DefectLedger defect_ledger(const StepInitialData& initial, double t);

struct SigmaZeroReport {
    /// sigma' = 0 on the zero path against the deterministic solution.
    double zero_path = 0.0;
    /// sigma' = 1e-8 on a sampled path.
    double tiny_slope = 0.0;
    /// slope 0, intercept 1: q(t, x) against q_det(t, x - W(t)).
    double shifted = 0.0;
    double tol = 0.0;
    bool pass() const { return zero_path <= tol && tiny_slope <= 1e-6 && shifted <= tol; }
};

/// Compares the stochastic modules with the sigma = 0 machinery at the nodes of `grid`.
SigmaZeroReport sigma_zero_consistency(const StepInitialData& initial, const TimeGrid& grid, double tol,
                                       std::uint64_t seed = 1);

}  // namespace shs
