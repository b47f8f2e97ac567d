#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace shs {

/// Uniform grid t_k = k * t_end / n_steps on [0, t_end].
struct TimeGrid {
    double t_end = 1.0;
    std::size_t n_steps = 1;

    double dt() const { return t_end / static_cast<double>(n_steps); }
    double time(std::size_t k) const { return t_end * static_cast<double>(k) / static_cast<double>(n_steps); }
    std::size_t n_nodes() const { return n_steps + 1; }
    /// Throws std::invalid_argument on n_steps == 0 or t_end <= 0.
    void validate() const;
};

struct BrownianPath {
    TimeGrid grid;
    std::vector<double> w;
    std::uint64_t seed = 0;
};

struct ExpFunctionals {
    TimeGrid grid;
    std::vector<double> z;
    std::vector<double> a;
    double sigma_prime = 0.0;
};

/// splitmix64 finaliser applied to x.
std::uint64_t mix64(std::uint64_t x);

/// Seed of path `index` in the ensemble rooted at `master`.
std::uint64_t path_seed(std::uint64_t master, std::uint64_t index);

/// Standard normal stream owned by one path. Sequential draws are reproducible for a given seed.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : engine_(mix64(seed)) {}
    double next() { return dist_(engine_); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> dist_{0.0, 1.0};
};

BrownianPath sample_brownian(const TimeGrid& grid, std::uint64_t seed);

/// The path W == 0 on `grid`.
BrownianPath zero_path(const TimeGrid& grid);

/// Halves the step by Brownian-bridge midpoint insertion. Coarse nodes are kept verbatim.
BrownianPath refine_bridge(const BrownianPath& coarse, std::uint64_t seed);
BrownianPath refine_bridge(const BrownianPath& coarse);

/// Throws std::overflow_error if exp(-sigma_prime * w) leaves the double range.
ExpFunctionals exp_functionals(const BrownianPath& path, double sigma_prime);

/// Trapezoid approximation of int_0^t exp(2 mu s + 2 W(s)) ds. Off-grid t uses linear interpolation of W.
double a_mu_functional(const BrownianPath& path, double mu, double t);

}  // namespace shs
