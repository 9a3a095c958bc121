#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace gsq::rng {

using Block = std::array<std::uint64_t, 4>;
using Key = std::array<std::uint64_t, 2>;

/// Philox4x64-10 block function (Salmon et al. 2011).
inline Block philox4x64_10(Block ctr, Key key) {
  constexpr std::uint64_t M0 = 0xD2E7470EE14C6C93ULL;
  constexpr std::uint64_t M1 = 0xCA5A826395121157ULL;
  constexpr std::uint64_t W0 = 0x9E3779B97F4A7C15ULL;
  constexpr std::uint64_t W1 = 0xBB67AE8584CAA73BULL;
  std::uint64_t c0 = ctr[0], c1 = ctr[1], c2 = ctr[2], c3 = ctr[3], k0 = key[0], k1 = key[1];
  for (int round = 0; round < 10; ++round) {
    const unsigned __int128 p0 = static_cast<unsigned __int128>(M0) * c0;
    const unsigned __int128 p1 = static_cast<unsigned __int128>(M1) * c2;
    const auto n0 = static_cast<std::uint64_t>(p1 >> 64) ^ c1 ^ k0;
    const auto n2 = static_cast<std::uint64_t>(p0 >> 64) ^ c3 ^ k1;
    c1 = static_cast<std::uint64_t>(p1);
    c3 = static_cast<std::uint64_t>(p0);
    c0 = n0;
    c2 = n2;
    k0 += W0;
    k1 += W1;
  }
  return {c0, c1, c2, c3};
}

/// Independent stream addressed by (seed, stream index, domain tag). The
/// output depends only on these three values and the draw position, never
/// on which thread consumes it.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t domain = 0)
      : key_{seed, domain}, stream_(stream) {}

  std::uint64_t next_u64() {
    if (pos_ == 4) {
      buf_ = philox4x64_10({block_++, stream_, 0, 0}, key_);
      pos_ = 0;
    }
    return buf_[pos_++];
  }

  /// Uniform on (0, 1].
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  /// Standard normal by Box-Muller.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform(), u2 = uniform();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::numbers::pi * u2;
    spare_ = rad * std::sin(ang);
    has_spare_ = true;
    return rad * std::cos(ang);
  }

 private:
  Key key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Block buf_{};
  int pos_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Domain tags keep the different consumers of one seed independent.
enum Domain : std::uint64_t {
  kBrownian = 1,
  kSmooth = 2,
  kOrbitCoefficients = 3,
  kTestData = 4,
  kRoughPath = 5,
  kExperimentData = 6,
};

}  // namespace gsq::rng
