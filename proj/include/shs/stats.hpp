#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace shs {

/// Runs f(i) for i in [0, n) on `threads` workers in contiguous chunks.
/// Callers write results by index so reductions stay independent of the worker count.
template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& f) {
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = n * w / workers, hi = n * (w + 1) / workers;
        pool.emplace_back([lo, hi, &f] {
            for (std::size_t i = lo; i < hi; ++i) f(i);
        });
    }
    for (auto& t : pool) t.join();
}

/// Neumaier-compensated sum in index order.
double compensated_sum(std::span<const double> xs);

struct MeanStderr {
    std::size_t n = 0;
    double mean = 0.0;
    double stderr_ = 0.0;
    double sd = 0.0;
};

MeanStderr mean_stderr(std::span<const double> xs);

double median(std::vector<double> xs);
double quantile(std::vector<double> xs, double p);

/// Sample skewness and excess kurtosis.
struct Moments {
    double mean, variance, skewness, excess_kurtosis;
};
Moments sample_moments(std::span<const double> xs);

/// Per-node ensemble summary of named observables.
struct EnsembleStats {
    std::size_t n_paths = 0;
    std::vector<double> t;
    std::vector<std::string> names;
    std::vector<std::vector<double>> mean;     // [observable][node]
    std::vector<std::vector<double>> stderr_;  // [observable][node]
};

/// values[observable][node][path] -> EnsembleStats
EnsembleStats summarize(const std::vector<double>& t, const std::vector<std::string>& names,
                        const std::vector<std::vector<std::vector<double>>>& values);

/// Least-squares slope of y against x.
double fit_slope(std::span<const double> x, std::span<const double> y);

/// Asymptotic Kolmogorov–Smirnov critical coefficient c(alpha), e.g. 1.628 at alpha = 0.01.
double ks_coefficient(double alpha);

/// One-sample KS distance sup_{t in [lo, hi]} |F_N(t) - F(t)| where F_N(t) = #{x_i <= t}/N.
/// Samples may be +inf (censored beyond hi). `cdf` must be nondecreasing on [lo, hi].
double ks_one_sample(std::vector<double> samples, const std::function<double(double)>& cdf, double lo, double hi);

/// Two-sample KS distance over the whole line.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

}  // namespace shs
