#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace d2d {

using Index = Eigen::Index;

// Dense column array of per-file quantities (pmf, cache probabilities, ...).
template <class Scalar>
using Vec = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

using VecD = Vec<double>;

// Thrown when an internal invariant is violated (solver post-condition,
// accounting identity, ...). The CLI maps it to exit code 2, as opposed to
// std::invalid_argument (user/config error, exit code 1).
struct internal_error : std::logic_error {
  using std::logic_error::logic_error;
};

// Compensated (Kahan) accumulation; used where many same-sign terms of
// decaying magnitude are summed exactly (harmonic sums, pmf normalizers).
template <class Scalar>
class KahanSum {
 public:
  void add(Scalar x) {
    const Scalar y = x - comp_;
    const Scalar t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
  }
  Scalar value() const { return sum_; }

 private:
  Scalar sum_ = Scalar(0);
  Scalar comp_ = Scalar(0);
};

// Pairwise reduction: associative up to rounding and independent of chunking
// decisions made by callers, so aggregate statistics are reproducible.
inline double pairwise_sum(const double* data, std::size_t n) {
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += data[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& v) {
  return pairwise_sum(v.data(), v.size());
}

// FNV-1a 64-bit over a byte string; stable across runs/platforms. Used for
// config fingerprints in output sidecars.
inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace d2d
