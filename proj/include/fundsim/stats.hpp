#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace fundsim {

// Neumaier-compensated accumulator. Long Ito sums and Monte Carlo
// aggregation both need the extra digits, and compensation keeps results
// independent of how paths were distributed over workers.
class NeumaierSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  NeumaierSum& operator+=(double x) {
    add(x);
    return *this;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) {
  NeumaierSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

struct SampleStats {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double std_error = 0.0;
};

// Two-pass compensated mean/variance; order-independent for a fixed input
// ordering, so reports do not depend on the worker count.
inline SampleStats sample_stats(std::span<const double> xs) {
  SampleStats st;
  st.count = xs.size();
  if (xs.empty()) return st;
  st.mean = compensated_sum(xs) / static_cast<double>(xs.size());
  if (xs.size() < 2) return st;
  NeumaierSum ss;
  for (double x : xs) {
    const double d = x - st.mean;
    ss.add(d * d);
  }
  st.variance = ss.value() / static_cast<double>(xs.size() - 1);
  st.std_error = std::sqrt(st.variance / static_cast<double>(xs.size()));
  return st;
}

}  // namespace fundsim
