#include "fundsim/ito.hpp"

#include <cmath>
#include <string>

#include "fundsim/errors.hpp"
#include "fundsim/stats.hpp"

namespace fundsim {

namespace {

void check_range(std::size_t values, std::size_t s, std::size_t t,
                 const char* what) {
  if (s > t || t >= values) {
    throw ValidationError(std::string(what) + ": endpoints must be grid nodes with s <= t");
  }
}

}  // namespace

double ito_integral(std::span<const double> integrand,
                    std::span<const double> integrator, std::size_t s,
                    std::size_t t) {
  if (integrand.size() != integrator.size()) {
    throw ValidationError("ito_integral: integrand and integrator differ in length");
  }
  check_range(integrator.size(), s, t, "ito_integral");
  NeumaierSum sum;
  for (std::size_t k = s; k < t; ++k) {
    sum.add(integrand[k] * (integrator[k + 1] - integrator[k]));
  }
  return sum.value();
}

double quadratic_variation(std::span<const double> x, std::size_t s, std::size_t t) {
  check_range(x.size(), s, t, "quadratic_variation");
  NeumaierSum sum;
  for (std::size_t k = s; k < t; ++k) {
    const double dx = x[k + 1] - x[k];
    sum.add(dx * dx);
  }
  return sum.value();
}

double log_increment(std::span<const double> x, std::size_t s, std::size_t t) {
  check_range(x.size(), s, t, "log_increment");
  for (std::size_t k = s; k <= t; ++k) {
    if (!(x[k] > 0.0)) {
      throw ValidationError("log_increment: non-positive value at node " +
                            std::to_string(k));
    }
  }
  return std::log(x[t] / x[s]);
}

double ito_log_integral(std::span<const double> integrand,
                        std::span<const double> x, std::size_t s, std::size_t t) {
  if (integrand.size() != x.size()) {
    throw ValidationError("ito_log_integral: integrand and path differ in length");
  }
  check_range(x.size(), s, t, "ito_log_integral");
  NeumaierSum sum;
  for (std::size_t k = s; k < t; ++k) {
    if (!(x[k] > 0.0) || !(x[k + 1] > 0.0)) {
      throw ValidationError("ito_log_integral: non-positive value at node " +
                            std::to_string(x[k] > 0.0 ? k + 1 : k));
    }
    sum.add(integrand[k] * std::log(x[k + 1] / x[k]));
  }
  return sum.value();
}

}  // namespace fundsim
