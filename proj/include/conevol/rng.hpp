#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace conevol {

/// Philox4x32-10 block function (Salmon et al., SC'11).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u;
  constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

/// Counter-based stream for one sample: every draw is a pure function of
/// (seed, stream, chunk, index, draw number).
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t chunk, std::uint32_t index, std::uint16_t stream = 0)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        chunk_lo_(static_cast<std::uint32_t>(chunk)),
        chunk_hi_(static_cast<std::uint32_t>((chunk >> 32) & 0xFFFFu) | (static_cast<std::uint32_t>(stream) << 16)),
        index_(index) {}

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() {
    if (slot_ == 2) refill();
    const std::uint64_t bits = (static_cast<std::uint64_t>(block_[2 * slot_]) << 32) | block_[2 * slot_ + 1];
    ++slot_;
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal by the polar Box-Muller method.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    for (;;) {
      const double u = 2.0 * uniform() - 1.0;
      const double v = 2.0 * uniform() - 1.0;
      const double s = u * u + v * v;
      if (s >= 1.0 || s == 0.0) continue;
      const double f = std::sqrt(-2.0 * std::log(s) / s);
      spare_ = v * f;
      has_spare_ = true;
      return u * f;
    }
  }

  /// Gamma(shape, 1) variate (Marsaglia-Tsang squeeze; boosted for shape < 1).
  double gamma(double shape) {
    if (shape < 1.0) {
      const double g = gamma(shape + 1.0);
      return g * std::pow(uniform(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = 0.0;
      double v = 0.0;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  /// Chi-square variate with `dof` degrees of freedom (dof = 0 gives 0).
  double chi_square(int dof) { return dof == 0 ? 0.0 : 2.0 * gamma(0.5 * dof); }

 private:
  void refill() {
    block_ = philox4x32({draw_++, index_, chunk_lo_, chunk_hi_}, key_);
    slot_ = 0;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint32_t chunk_lo_;
  std::uint32_t chunk_hi_;
  std::uint32_t index_;
  std::uint32_t draw_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int slot_ = 2;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Stream tags that keep independent consumers of one seed apart.
enum StreamTag : std::uint16_t {
  kGaussianStream = 0,
  kChiBarStream = 1,
  kMomentStream = 2,
};

}  // namespace conevol
