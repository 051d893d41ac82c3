#pragma once

#include <cstdint>

namespace fundsim::rng {

// Philox4x32-10 counter-based generator (Salmon et al., SC 2011). Every
// Gaussian increment is addressed by (seed, stream, column, row), so paths
// are reproducible under any execution order and adding paths never perturbs
// existing ones.
struct Philox4x32 {
  std::uint32_t counter[4];
  std::uint32_t key[2];

  void round_once();
  void generate();  // applies 10 rounds in place on counter[]
};

// One uniform draw in (0, 1), identified by its 192-bit address.
double uniform_at(std::uint64_t seed, std::uint64_t stream, std::uint32_t column,
                  std::uint32_t row);

// Standard normal via the inverse CDF (Wichura's AS 241, double precision).
double inverse_normal_cdf(double p);

double standard_normal_at(std::uint64_t seed, std::uint64_t stream,
                          std::uint32_t column, std::uint32_t row);

}  // namespace fundsim::rng
