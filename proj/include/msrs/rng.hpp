#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace msrs {

// Named sub-streams derived from one master seed, so that consumers cannot
// perturb each other's draw sequences (adding an archive insertion must not
// shift the particle dynamics).
enum class Stream : std::uint64_t {
  init = 0x11,
  dynamics = 0x22,
  leader = 0x33,
  rcs = 0x44,
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace detail

inline std::uint64_t derive_seed(std::uint64_t master, Stream stream) {
  std::uint64_t state =
      master ^ (static_cast<std::uint64_t>(stream) * 0x9e3779b97f4a7c15ull);
  const std::uint64_t a = detail::splitmix64(state);
  return detail::splitmix64(state) ^ a;
}

// mt19937_64 with a fixed 53-bit uniform mapping and an explicit Box-Muller
// transform. Draw sequences are identical across platforms for a given seed;
// no std::distribution is used because those are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // [0, 1)
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard exponential, mean 1
  double exponential() { return -std::log1p(-uniform()); }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    const double theta = 2.0 * kPi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  static constexpr double kPi = 3.141592653589793238462643383279502884;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace msrs
