#include "fundsim/market.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <string>

#include "fundsim/errors.hpp"
#include "fundsim/rng.hpp"

namespace fundsim {

namespace {

void check_piecewise_shape(const PiecewiseValues& p, std::size_t expected,
                           const std::string& field) {
  if (p.empty()) throw ValidationError("missing field: " + field);
  if (p.times.size() != p.values.size()) {
    throw ValidationError(field + ": times and values must have equal length");
  }
  if (p.times.front() != 0.0) {
    throw ValidationError(field + ": first breakpoint must be 0");
  }
  for (std::size_t j = 1; j < p.times.size(); ++j) {
    if (!(p.times[j] > p.times[j - 1])) {
      throw ValidationError(field + ": breakpoints must be strictly increasing");
    }
  }
  for (std::size_t j = 0; j < p.values.size(); ++j) {
    if (p.values[j].size() != expected) {
      throw ValidationError(field + ": segment " + std::to_string(j) + " has " +
                            std::to_string(p.values[j].size()) +
                            " entries, expected " + std::to_string(expected));
    }
    for (double v : p.values[j]) {
      if (!std::isfinite(v)) {
        throw ValidationError(field + ": segment " + std::to_string(j) +
                              " contains a non-finite entry");
      }
    }
  }
}

}  // namespace

void MarketParams::validate() const {
  if (n_assets < 1) throw ValidationError("market.c0: need at least one asset");
  if (c0.size() != n_assets) {
    throw ValidationError("market.c0: expected " + std::to_string(n_assets) +
                          " entries");
  }
  for (std::size_t i = 0; i < n_assets; ++i) {
    if (!(c0[i] > 0.0) || !std::isfinite(c0[i])) {
      throw ValidationError("market.c0[" + std::to_string(i) +
                            "] must be > 0 and finite");
    }
  }
  check_piecewise_shape(mu, n_assets, "market.mu");
  check_piecewise_shape(sigma, n_assets * n_assets, "market.sigma");
  for (std::size_t seg = 0; seg < sigma.segments(); ++seg) {
    Eigen::MatrixXd m(n_assets, n_assets);
    for (std::size_t i = 0; i < n_assets; ++i) {
      for (std::size_t j = 0; j < n_assets; ++j) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            sigma.values[seg][i * n_assets + j];
      }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    const double largest = sv(0);
    const double smallest = sv(sv.size() - 1);
    // the exactly-zero matrix is allowed: deterministic prices
    if (largest == 0.0) continue;
    if (smallest < 1e-12 * largest) {
      throw ValidationError("market.sigma: segment " + std::to_string(seg) +
                            " is singular (smallest/largest singular value " +
                            "below 1e-12)");
    }
  }
}

BrownianDriver sample_driver(const TimeGrid& grid, std::size_t dim,
                             std::uint64_t seed, std::uint64_t stream) {
  if (dim < 1) throw ValidationError("driver dimension must be >= 1");
  BrownianDriver d;
  d.steps = grid.steps;
  d.dim = dim;
  d.seed = seed;
  d.stream = stream;
  d.increments.resize(d.steps * d.dim);
  const double root_dt = std::sqrt(grid.dt());
  for (std::size_t row = 0; row < d.steps; ++row) {
    for (std::size_t col = 0; col < d.dim; ++col) {
      d.at(row, col) = root_dt * rng::standard_normal_at(
                                     seed, stream, static_cast<std::uint32_t>(col),
                                     static_cast<std::uint32_t>(row));
    }
  }
  return d;
}

BrownianDriver coarsen_driver(const BrownianDriver& fine, std::size_t factor) {
  if (factor < 1 || fine.steps % factor != 0) {
    throw ValidationError("coarsen_driver: factor must divide the step count");
  }
  BrownianDriver coarse;
  coarse.steps = fine.steps / factor;
  coarse.dim = fine.dim;
  coarse.seed = fine.seed;
  coarse.stream = fine.stream;
  coarse.increments.assign(coarse.steps * coarse.dim, 0.0);
  for (std::size_t row = 0; row < coarse.steps; ++row) {
    for (std::size_t sub = 0; sub < factor; ++sub) {
      const std::size_t fine_row = row * factor + sub;
      for (std::size_t col = 0; col < coarse.dim; ++col) {
        coarse.at(row, col) += fine.at(fine_row, col);
      }
    }
  }
  return coarse;
}

AssetPaths simulate_assets(const MarketParams& params, const BrownianDriver& driver,
                           const TimeGrid& grid) {
  params.validate();
  if (driver.dim < params.n_assets) {
    throw ValidationError("driver has fewer columns than assets");
  }
  if (driver.steps != grid.steps) {
    throw ValidationError("driver and grid disagree on step count");
  }
  const std::size_t N = params.n_assets;
  const std::size_t S = grid.steps;
  const double dt = grid.dt();

  AssetPaths paths;
  paths.n_assets = N;
  paths.steps = S;
  paths.prices.assign(N * (S + 1), 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    paths.prices[i * (S + 1)] = params.c0[i];
  }

  for (std::size_t k = 0; k < S; ++k) {
    const double tk = grid.nodes[k];
    const auto& mu_k = params.mu.at(tk);
    const auto& sig_k = params.sigma.at(tk);
    for (std::size_t i = 0; i < N; ++i) {
      double var = 0.0;
      double shock = 0.0;
      for (std::size_t l = 0; l < N; ++l) {
        const double s_il = sig_k[i * N + l];
        var += s_il * s_il;
        shock += s_il * driver.at(k, l);
      }
      const double next = paths.prices[i * (S + 1) + k] *
                          std::exp((mu_k[i] - 0.5 * var) * dt + shock);
      if (!std::isfinite(next) || next <= 0.0) {
        paths.valid = false;
        paths.first_bad_node = k + 1;
        return paths;
      }
      paths.prices[i * (S + 1) + k + 1] = next;
    }
  }
  return paths;
}

}  // namespace fundsim
