// Copyright 2026 The cwlm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "cwlm/random.hpp"

using namespace cwlm;

// Known-answer vectors published with the Random123 reference implementation.
TEST_CASE("philox block function known answers") {
  static_assert(Philox4x32::generate({0, 0, 0, 0}, {0, 0}) ==
                Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(Philox4x32::generate({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                             {0xffffffffu, 0xffffffffu}) ==
        Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(Philox4x32::generate({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                             {0xa4093822u, 0x299f31d0u}) ==
        Philox4x32::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and distinct") {
  RandomStream a(42, 7), b(42, 7), c(42, 8), d(43, 7), e(42, 7, StreamDomain::output_noise);
  std::set<std::uint64_t> firsts;
  for (int i = 0; i < 1000; ++i) {
    const auto va = a();
    REQUIRE(va == b());
    if (i == 0) {
      firsts = {va, c(), d(), e()};
    }
  }
  CHECK(firsts.size() == 4);
  CHECK(a.blocks_consumed() == 500);
}

TEST_CASE("uniform draws fill [0, 1) evenly") {
  RandomStream rng(1, 0);
  constexpr int kBins = 20;
  constexpr int kDraws = 200000;
  std::vector<int> counts(kBins, 0);
  double sum = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    ++counts[static_cast<int>(u * kBins)];
  }
  CHECK(std::abs(sum / kDraws - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / kDraws));
  double chi2 = 0.0;
  const double expected = static_cast<double>(kDraws) / kBins;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 19 degrees of freedom; 43.8 is the 0.999 quantile.
  CHECK(chi2 < 43.8);
}
