#pragma once

#include <array>
#include <cstddef>

namespace shs {

/// 16-point Gauss–Legendre rule on [-1, 1].
struct GaussRule16 {
    std::array<double, 16> x;
    std::array<double, 16> w;
};

const GaussRule16& gauss16();

/// Composite 16-point Gauss–Legendre over `panels` equal panels of [a, b].
template <class F>
double integrate_panels(F&& f, double a, double b, std::size_t panels) {
    const GaussRule16& g = gauss16();
    const double h = (b - a) / static_cast<double>(panels);
    double total = 0.0;
    for (std::size_t p = 0; p < panels; ++p) {
        const double mid = a + (static_cast<double>(p) + 0.5) * h;
        double s = 0.0;
        for (std::size_t i = 0; i < 16; ++i) s += g.w[i] * f(mid + 0.5 * h * g.x[i]);
        total += 0.5 * h * s;
    }
    return total;
}

}  // namespace shs
