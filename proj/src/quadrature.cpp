#include "shs/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>

namespace shs {

const GaussRule16& gauss16() {
    static const GaussRule16 rule = [] {
        using G = boost::math::quadrature::gauss<double, 16>;
        const auto& xs = G::abscissa();
        const auto& ws = G::weights();
        GaussRule16 r{};
        // Boost stores the nonnegative half; 16 is even so there is no zero node.
        for (std::size_t i = 0; i < 8; ++i) {
            r.x[7 - i] = -xs[i];
            r.w[7 - i] = ws[i];
            r.x[8 + i] = xs[i];
            r.w[8 + i] = ws[i];
        }
        return r;
    }();
    return rule;
}

}  // namespace shs
