#ifndef SQB_RNG_HPP
#define SQB_RNG_HPP

#include <cmath>
#include <cstdint>

namespace sqb {

// SplitMix64. Output sequence depends only on the 64-bit state it was seeded
// with, so estimates are reproducible across standard-library implementations
// (std::normal_distribution makes no such promise).
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform on (0, 1]; never returns 0 so log() below is safe
  double next_uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_uniform01();
  }

  // Box-Muller; one cached value
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_uniform01();
    const double u2 = next_uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Derives independent substream seeds from (master, stream index). Estimators
// that fan work out over streams combine per-stream sums in index order, so
// the result is independent of how many workers execute the streams.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t stream) {
  RngStream mix(master ^ (0x5851f42d4c957f2dULL + stream * 0x14057b7ef767814fULL));
  mix.next_u64();
  return mix.next_u64();
}

}  // namespace sqb

#endif  // SQB_RNG_HPP
