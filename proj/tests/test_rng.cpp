#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "nlb/rng.hpp"

using namespace nlb;

// Frozen outputs of the block cipher. If any of these move, every seeded
// experiment in the project changes, so they are pinned here verbatim.
TEST_CASE("philox block known answers") {
  CHECK(Philox4x32::block({0, 0, 0, 0}, {0, 0}) ==
        std::array<uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu,
                                0x9b00dbd8u});
  CHECK(Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                          {0xffffffffu, 0xffffffffu}) ==
        std::array<uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u,
                                0x6d5451fdu});
  CHECK(Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                          {0xa4093822u, 0x299f31d0u}) ==
        std::array<uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u,
                                0x24126ea1u});
  CHECK(Philox4x32::block({7, 0, 0x10000002u, 5}, {0x9e3779b9u, 0x12345678u}) ==
        std::array<uint32_t, 4>{0xd94e4838u, 0x8a4476b3u, 0x69187fdcu,
                                0x8c9d586fu});
}

TEST_CASE("word derivation packs the counter from trial and site") {
  const uint64_t seed = 0x0123456789abcdefull;
  const uint64_t trial = 0x00000002deadbeefull;
  const DrawSite site = shared_site(3, 17);

  const std::array<uint32_t, 4> ctr = {
      static_cast<uint32_t>(trial), static_cast<uint32_t>(trial >> 32),
      (DrawSite::kShared << 28) | 17u, 3u};
  const auto out = Philox4x32::block(
      ctr, {static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)});
  const uint64_t expected =
      static_cast<uint64_t>(out[0]) | (static_cast<uint64_t>(out[1]) << 32);

  CHECK(philox_word(seed, trial, site) == expected);
}

TEST_CASE("unit mapping lands in [0,1)") {
  CHECK(to_unit_double(0) == 0.0);
  CHECK(to_unit_double(~uint64_t{0}) < 1.0);
  CHECK(to_unit_double(~uint64_t{0}) > 0.9999999999999998);
}

TEST_CASE("uniform respects its bound") {
  CounterSource src(42, 0);
  CHECK(src.uniform(1, coin_site(0, 0)) == 0);
  for (const uint64_t bound : {2ull, 3ull, 8ull, 1000ull, 1ull << 20}) {
    for (uint32_t i = 0; i < 200; ++i) {
      CHECK(src.uniform(bound, shared_site(9, i)) < bound);
    }
  }
}

TEST_CASE("uniform bits are roughly balanced") {
  CounterSource src(7, 0);
  int ones = 0;
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) {
    ones += static_cast<int>(src.uniform(2, coin_site(0, i)));
  }
  // 5 sigma around draws/2 for a fair coin.
  const double sigma = std::sqrt(draws * 0.25);
  CHECK(std::abs(ones - draws / 2) < 5 * sigma);
}

// The defining property of the source: a draw's value depends only on
// (seed, trial, site), never on which draws happened before it. The block
// memoization must be invisible.
TEST_CASE("draws are pure functions of seed, trial and site") {
  std::vector<DrawSite> sites;
  for (uint32_t b = 0; b < 6; ++b) {
    sites.push_back(box_site(b, 0));
    sites.push_back(box_site(b, 1));
  }
  for (uint32_t i = 0; i < 130; ++i) sites.push_back(coin_site(0, i));
  for (uint32_t i = 0; i < 40; ++i) sites.push_back(shared_site(1, i));

  auto bound_of = [](const DrawSite& s) {
    return s.kind == DrawSite::kShared ? uint64_t{16} : uint64_t{2};
  };

  // Reference pass: sites in creation order, fresh source.
  std::vector<uint64_t> reference;
  {
    CounterSource src(99, 5);
    for (const DrawSite& s : sites) reference.push_back(src.uniform(bound_of(s), s));
  }

  // Shuffled passes through a single reused source must reproduce it.
  std::mt19937 order(1234);
  std::vector<size_t> perm(sites.size());
  for (size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  CounterSource src(99, 5);
  for (int pass = 0; pass < 3; ++pass) {
    std::shuffle(perm.begin(), perm.end(), order);
    for (const size_t i : perm) {
      CAPTURE(sites[i].kind);
      CAPTURE(sites[i].index);
      CAPTURE(sites[i].seq);
      CHECK(src.uniform(bound_of(sites[i]), sites[i]) == reference[i]);
    }
  }

  // Retargeting the trial must change the stream and be fully reversible.
  src.set_trial(6);
  bool any_differs = false;
  for (size_t i = 0; i < sites.size(); ++i) {
    if (src.uniform(bound_of(sites[i]), sites[i]) != reference[i]) {
      any_differs = true;
    }
  }
  CHECK(any_differs);
  src.set_trial(5);
  for (size_t i = 0; i < sites.size(); ++i) {
    CHECK(src.uniform(bound_of(sites[i]), sites[i]) == reference[i]);
  }
}

TEST_CASE("weighted draw honors degenerate weights without entropy") {
  CounterSource a(11, 0);
  CounterSource b(12, 1);  // different seed and trial: same forced results
  const std::array<double, 2> only_first = {0.3, 0.0};
  const std::array<double, 2> only_second = {0.0, 0.7};
  const std::array<double, 4> one_alive = {0.0, 0.0, 2.5, 0.0};
  for (uint32_t i = 0; i < 10; ++i) {
    CHECK(a.weighted(only_first, box_site(0, i)) == 0);
    CHECK(b.weighted(only_first, box_site(0, i)) == 0);
    CHECK(a.weighted(only_second, box_site(1, i)) == 1);
    CHECK(a.weighted(one_alive, coin_site(0, i)) == 2);
  }
}

TEST_CASE("weighted draw tracks the weight ratio") {
  CounterSource src(5, 0);
  const std::array<double, 2> weights = {1.0, 3.0};
  const int draws = 40000;
  int second = 0;
  for (int i = 0; i < draws; ++i) {
    src.set_trial(static_cast<uint64_t>(i));
    second += static_cast<int>(src.weighted(weights, box_site(0, 0)));
  }
  const double freq = static_cast<double>(second) / draws;
  const double sigma = std::sqrt(0.75 * 0.25 / draws);
  CHECK(std::abs(freq - 0.75) < 5 * sigma);

  // Unnormalized weights describe the same distribution.
  CounterSource scaled(5, 0);
  const std::array<double, 2> times_ten = {10.0, 30.0};
  for (int i = 0; i < 100; ++i) {
    scaled.set_trial(static_cast<uint64_t>(i));
    src.set_trial(static_cast<uint64_t>(i));
    CHECK(scaled.weighted(times_ten, box_site(0, 0)) ==
          src.weighted(weights, box_site(0, 0)));
  }
}

TEST_CASE("multi-way weighted draw covers every live index") {
  CounterSource src(21, 0);
  const std::array<double, 4> weights = {0.25, 0.0, 0.5, 0.25};
  std::array<int, 4> counts = {0, 0, 0, 0};
  for (int i = 0; i < 8000; ++i) {
    src.set_trial(static_cast<uint64_t>(i));
    counts[src.weighted(weights, coin_site(3, 0))]++;
  }
  CHECK(counts[0] > 0);
  CHECK(counts[1] == 0);  // zero weight must never be drawn
  CHECK(counts[2] > counts[0]);
  CHECK(counts[3] > 0);
}
