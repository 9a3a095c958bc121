#include <catch_amalgamated.hpp>

#include <cmath>

#include "gsq/rng.hpp"

using namespace gsq;

TEST_CASE("Philox4x64-10 known-answer vectors", "[rng]") {
  using rng::Block;
  CHECK(rng::philox4x64_10({0, 0, 0, 0}, {0, 0}) ==
        Block{0x16554d9eca36314cULL, 0xdb20fe9d672d0fdcULL, 0xd7e772cee186176bULL, 0x7e68b68aec7ba23bULL});
  const std::uint64_t f = ~0ULL;
  CHECK(rng::philox4x64_10({f, f, f, f}, {f, f}) ==
        Block{0x87b092c3013fe90bULL, 0x438c3c67be8d0224ULL, 0x9cc7d7c69cd777b6ULL, 0xa09caebf594f0ba0ULL});
  CHECK(rng::philox4x64_10({0x243f6a8885a308d3ULL, 0x13198a2e03707344ULL, 0xa4093822299f31d0ULL, 0x082efa98ec4e6c89ULL},
                           {0x452821e638d01377ULL, 0xbe5466cf34e90c6cULL}) ==
        Block{0xa528f45403e61d95ULL, 0x38c72dbd566e9788ULL, 0xa5a1610e72fd18b5ULL, 0x57bd43b5e52b7fe6ULL});
}

TEST_CASE("streams are addressed by seed, index and domain", "[rng]") {
  rng::Stream a(7, 3, rng::kBrownian), b(7, 3, rng::kBrownian);
  for (int k = 0; k < 100; ++k) REQUIRE(a.next_u64() == b.next_u64());
  rng::Stream c(7, 4, rng::kBrownian), d(7, 3, rng::kSmooth), e(8, 3, rng::kBrownian);
  rng::Stream ref(7, 3, rng::kBrownian);
  const auto x = ref.next_u64();
  CHECK(c.next_u64() != x);
  CHECK(d.next_u64() != x);
  CHECK(e.next_u64() != x);
}

TEST_CASE("uniform and normal draws", "[rng]") {
  rng::Stream s(11, 0, rng::kTestData);
  const int n = 200000;
  double mu = 0.0, m2 = 0.0, umin = 1.0, umax = 0.0;
  for (int k = 0; k < n; ++k) {
    const double u = s.uniform();
    umin = std::min(umin, u);
    umax = std::max(umax, u);
  }
  CHECK(umin > 0.0);
  CHECK(umax <= 1.0);
  for (int k = 0; k < n; ++k) {
    const double z = s.normal();
    mu += z;
    m2 += z * z;
  }
  mu /= n;
  m2 /= n;
  // 5 sigma bands: sd(mean) = 1/sqrt(n), sd(second moment) = sqrt(2/n)
  CHECK(std::abs(mu) < 5.0 / std::sqrt(n));
  CHECK(std::abs(m2 - 1.0) < 5.0 * std::sqrt(2.0 / n));
}
