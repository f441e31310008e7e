#include <cmath>
#include <set>

#include "doctest.h"
#include "plg/rng.hpp"

using plg::RngStream;

TEST_CASE("philox4x32-10 known-answer vectors") {
  using A4 = std::array<std::uint32_t, 4>;
  using A2 = std::array<std::uint32_t, 2>;
  CHECK(RngStream::philox(A4{0, 0, 0, 0}, A2{0, 0}) ==
        A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(RngStream::philox(A4{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                          A2{0xffffffffu, 0xffffffffu}) ==
        A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(RngStream::philox(A4{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                          A2{0xa4093822u, 0x299f31d0u}) ==
        A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("equal seed and stream give identical sequences") {
  RngStream a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) {
    REQUIRE(a() == b());
    REQUIRE(a.normal() == b.normal());
  }
}

TEST_CASE("distinct streams and seeds differ") {
  RngStream a(42, 0), b(42, 1), c(43, 0);
  int same_ab = 0, same_ac = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a(), y = b(), z = c();
    same_ab += x == y;
    same_ac += x == z;
  }
  CHECK(same_ab == 0);
  CHECK(same_ac == 0);
}

TEST_CASE("streams are uncorrelated") {
  RngStream a(5, 0), b(5, 1);
  const int n = 200000;
  double sxy = 0.0;
  for (int i = 0; i < n; ++i) sxy += a.normal() * b.normal();
  CHECK(std::abs(sxy / n) < 4.0 / std::sqrt(double(n)));
}

TEST_CASE("derive is deterministic and distinct per index") {
  RngStream root(9, 3);
  RngStream d1 = root.derive(0), d2 = root.derive(0), d3 = root.derive(1);
  std::set<std::uint64_t> firsts;
  CHECK(d1() == d2());
  RngStream e1 = root.derive(0);
  CHECK(e1() != d3());
  for (std::uint64_t i = 0; i < 100; ++i) firsts.insert(root.derive(i)());
  CHECK(firsts.size() == 100);
}

TEST_CASE("uniform lies in the open unit interval with the right mean") {
  RngStream r(1, 0);
  const int n = 1000000;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    s += u;
  }
  const double se = std::sqrt(1.0 / 12.0 / n);
  CHECK(std::abs(s / n - 0.5) < 4.0 * se);
}

TEST_CASE("normal draws have unit variance") {
  RngStream r(2, 0);
  const int n = 1000000;
  double s = 0.0, ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    ss += z * z;
  }
  CHECK(std::abs(s / n) < 4.0 / std::sqrt(double(n)));
  CHECK(std::abs(ss / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
}
