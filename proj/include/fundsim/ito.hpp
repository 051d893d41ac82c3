#pragma once

#include <cstddef>
#include <span>

namespace fundsim {

// Discretized pathwise stochastic calculus on grid-sampled series. Endpoints
// are node indices; time-to-index mapping lives in TimeGrid. Integrands are
// always evaluated at the left endpoint (Ito convention).

// sum_{k in [s,t)} phi(t_k) * (X(t_{k+1}) - X(t_k))
double ito_integral(std::span<const double> integrand,
                    std::span<const double> integrator, std::size_t s,
                    std::size_t t);

// sum_{k in [s,t)} (X(t_{k+1}) - X(t_k))^2
double quadratic_variation(std::span<const double> x, std::size_t s, std::size_t t);

// log(X(t)/X(s)), the exact pathwise value of the integral of d log X.
double log_increment(std::span<const double> x, std::size_t s, std::size_t t);

// sum_{k in [s,t)} phi(t_k) * log(X(t_{k+1})/X(t_k)); the d log X integral
// against a non-constant integrand.
double ito_log_integral(std::span<const double> integrand,
                        std::span<const double> x, std::size_t s, std::size_t t);

}  // namespace fundsim
