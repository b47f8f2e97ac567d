#include "shs/stats.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace shs {

double compensated_sum(std::span<const double> xs) {
    double sum = 0.0, c = 0.0;
    for (double x : xs) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            c += (sum - t) + x;
        else
            c += (x - t) + sum;
        sum = t;
    }
    return sum + c;
}

MeanStderr mean_stderr(std::span<const double> xs) {
    MeanStderr r;
    r.n = xs.size();
    if (r.n == 0) return r;
    r.mean = compensated_sum(xs) / static_cast<double>(r.n);
    if (r.n < 2) return r;
    std::vector<double> sq(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - r.mean) * (xs[i] - r.mean);
    r.sd = std::sqrt(compensated_sum(sq) / static_cast<double>(r.n - 1));
    r.stderr_ = r.sd / std::sqrt(static_cast<double>(r.n));
    return r;
}

double quantile(std::vector<double> xs, double p) {
    if (xs.empty()) throw std::invalid_argument("quantile of empty sample");
    std::sort(xs.begin(), xs.end());
    const double pos = p * static_cast<double>(xs.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, xs.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return xs[lo] + frac * (xs[hi] - xs[lo]);
}

double median(std::vector<double> xs) { return quantile(std::move(xs), 0.5); }

Moments sample_moments(std::span<const double> xs) {
    const double n = static_cast<double>(xs.size());
    const double mean = compensated_sum(xs) / n;
    std::vector<double> d2(xs.size()), d3(xs.size()), d4(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double d = xs[i] - mean;
        d2[i] = d * d;
        d3[i] = d2[i] * d;
        d4[i] = d2[i] * d2[i];
    }
    const double m2 = compensated_sum(d2) / n, m3 = compensated_sum(d3) / n, m4 = compensated_sum(d4) / n;
    return {mean, m2 * n / (n - 1.0), m3 / std::pow(m2, 1.5), m4 / (m2 * m2) - 3.0};
}

EnsembleStats summarize(const std::vector<double>& t, const std::vector<std::string>& names,
                        const std::vector<std::vector<std::vector<double>>>& values) {
    EnsembleStats s;
    s.t = t;
    s.names = names;
    s.n_paths = values.empty() || values[0].empty() ? 0 : values[0][0].size();
    for (const auto& obs : values) {
        std::vector<double> m, e;
        for (const auto& node : obs) {
            const MeanStderr ms = mean_stderr(node);
            m.push_back(ms.mean);
            e.push_back(ms.stderr_);
        }
        s.mean.push_back(std::move(m));
        s.stderr_.push_back(std::move(e));
    }
    return s;
}

double fit_slope(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

double ks_coefficient(double alpha) { return std::sqrt(-0.5 * std::log(alpha / 2.0)); }

double ks_one_sample(std::vector<double> samples, const std::function<double(double)>& cdf, double lo, double hi) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    auto count_le = [&](double t) {
        return static_cast<double>(std::upper_bound(samples.begin(), samples.end(), t) - samples.begin());
    };
    double d = std::max(std::abs(count_le(lo) / n - cdf(lo)), std::abs(count_le(hi) / n - cdf(hi)));
    auto first = std::upper_bound(samples.begin(), samples.end(), lo);
    for (auto it = first; it != samples.end() && *it <= hi; ++it) {
        const double f = cdf(*it);
        const double below = static_cast<double>(it - samples.begin()) / n;
        const double at = count_le(*it) / n;
        d = std::max({d, std::abs(at - f), std::abs(below - f)});
    }
    return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

}  // namespace shs
