#include "fundsim/rng.hpp"

#include <cmath>

namespace fundsim::rng {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

void Philox4x32::round_once() {
  std::uint32_t hi0, lo0, hi1, lo1;
  mulhilo(kPhiloxM0, counter[0], hi0, lo0);
  mulhilo(kPhiloxM1, counter[2], hi1, lo1);
  const std::uint32_t c0 = hi1 ^ counter[1] ^ key[0];
  const std::uint32_t c1 = lo1;
  const std::uint32_t c2 = hi0 ^ counter[3] ^ key[1];
  const std::uint32_t c3 = lo0;
  counter[0] = c0;
  counter[1] = c1;
  counter[2] = c2;
  counter[3] = c3;
  key[0] += kPhiloxW0;
  key[1] += kPhiloxW1;
}

void Philox4x32::generate() {
  for (int r = 0; r < 10; ++r) round_once();
}

double uniform_at(std::uint64_t seed, std::uint64_t stream, std::uint32_t column,
                  std::uint32_t row) {
  Philox4x32 g;
  g.counter[0] = row;
  g.counter[1] = column;
  g.counter[2] = static_cast<std::uint32_t>(stream);
  g.counter[3] = static_cast<std::uint32_t>(stream >> 32);
  g.key[0] = static_cast<std::uint32_t>(seed);
  g.key[1] = static_cast<std::uint32_t>(seed >> 32);
  g.generate();
  const std::uint64_t bits =
      (static_cast<std::uint64_t>(g.counter[0]) << 32) | g.counter[1];
  // (bits >> 11) has 53 random bits; the half-offset keeps u strictly inside
  // (0, 1) so the inverse CDF never sees an endpoint.
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1p-53;
}

// AS 241 algorithm PPND16 (Wichura 1988), |error| ~ 1e-15 over (0,1).
double inverse_normal_cdf(double p) {
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        q *
        (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
              6.7265770927008700853e+4) *
                 r +
             4.5921953931549871457e+4) *
                r +
            1.3731693765509461125e+4) *
               r +
           1.9715909503065514427e+3) *
              r +
          1.3314166789178437745e+2) *
             r +
         3.3871328727963666080e+0);
    const double den =
        (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
              3.9307895800092710610e+4) *
                 r +
             2.1213794301586595867e+4) *
                r +
            5.3941960214247511077e+3) *
               r +
           6.8718700749205790830e+2) *
              r +
          4.2313330701600911252e+1) *
             r +
         1.0);
    return num / den;
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) *
                 r +
             1.27045825245236838258e+0) *
                r +
            3.64784832476320460504e+0) *
               r +
           5.76949722146069140550e+0) *
              r +
          4.63033784615654529590e+0) *
             r +
         1.42343711074968357734e+0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) *
                 r +
             1.48103976427480074590e-1) *
                r +
            6.89767334985100004550e-1) *
               r +
           1.67638483018380384940e+0) *
              r +
          2.05319162663775882187e+0) *
             r +
         1.0);
    value = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) *
                 r +
             2.65321895265761230930e-2) *
                r +
            2.96560571828504891230e-1) *
               r +
           1.78482653991729133580e+0) *
              r +
          5.46378491116411436990e+0) *
             r +
         6.65790464350110377720e+0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) *
                 r +
             7.86869131145613259100e-4) *
                r +
            1.48753612908506148525e-2) *
               r +
           1.36929880922735805310e-1) *
              r +
          5.99832206555887937690e-1) *
             r +
         1.0);
    value = num / den;
  }
  return (q < 0.0) ? -value : value;
}

double standard_normal_at(std::uint64_t seed, std::uint64_t stream,
                          std::uint32_t column, std::uint32_t row) {
  return inverse_normal_cdf(uniform_at(seed, stream, column, row));
}

}  // namespace fundsim::rng
