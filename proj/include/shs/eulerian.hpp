#pragma once

#include <cstddef>
#include <vector>

#include "shs/characteristics.hpp"

namespace shs {

/// Label y with X(t, y) = x. box is -1 left of the support, n_boxes to the right of it.
struct Preimage {
    double y = 0.0;
    bool ambiguous = false;
    long box = -1;
};

/// Leftmost preimage of x at node k. Outside the support X is affine with slope e^{sigma' W}.
Preimage invert_X(const CharacteristicField& field, std::size_t k, double x);

/// Eulerian snapshot. Knots are the images of the breakpoints; piece i lies between knot i and i+1.
struct EulerianSlice {
    double t = 0.0;
    std::vector<double> x, q, u;
    std::vector<long> box;
    std::vector<double> knot_x, knot_u;
    /// Q on each piece, NaN on a flagged singular piece.
    std::vector<double> piece_q;
    /// int q^2 over each piece, from the Lagrangian side.
    std::vector<double> piece_energy;
};

/// Samples every piece at refine+1 points (endpoints duplicated between pieces) plus one margin point per side.
EulerianSlice eulerian_slice(const CharacteristicField& field, std::size_t k, std::size_t refine = 4,
                             double margin = 0.5);

/// sum_i width_i V_i^2 Z(t_k), with the indicator t_k <= t*_i in dissipative mode.
double energy(const CharacteristicField& field, std::size_t k);

/// sum_i Q_i^2 * (X_{i+1} - X_i) with image widths from the Lagrangian stretch; singular pieces skipped.
double eulerian_energy(const CharacteristicField& field, std::size_t k);

/// int q^2 dx by an m-point midpoint rule on each image interval, q looked up through invert_X.
double midpoint_energy(const CharacteristicField& field, std::size_t k, std::size_t m = 8);

/// Closed interval of labels or positions.
struct Window {
    double lo = 0.0;
    double hi = 1.0;
};

/// ||U(t_kt) - U(t_ks)||_{L^2(B)} in Lagrangian labels, U(t, y) = int_{-inf}^y u_frak(t, .) from the field.
double u_l2_increment(const CharacteristicField& field, std::size_t ks, std::size_t kt, Window b);

/// The factorised form (int_B |int_{-inf}^y q0^2/2|^2 dy)^{1/2} * int_s^t Z.
double u_l2_increment_closed(const StepInitialData& initial, const ExpFunctionals& expf, std::size_t ks,
                             std::size_t kt, Window b);

/// Eulerian int_B u(t_k, x)^2 dx, exact for the piecewise-linear u.
double u_l2_sq(const CharacteristicField& field, std::size_t k, Window b);

/// Largest q - bound over the samples of a slice, for three readings of the one-sided estimate.
struct OleinikMargins {
    /// Z / (1/max(q0(y), 0+) + A): zero for labels with q0 <= 0.
    double pointwise = 0.0;
    /// As pointwise but Z / A for labels with q0 <= 0.
    double weak = 0.0;
    /// Z / (1/max(sup q0, 0+) + A) applied to every sample.
    double global = 0.0;
};

double oleinik_bound(double z, double a, double q0x);
OleinikMargins oleinik_margins(const CharacteristicField& field, std::size_t k, std::size_t refine = 4);

}  // namespace shs
