#include <gtest/gtest.h>

#include <set>

#include "modcomp/rng.hpp"

namespace {

using modcomp::derive_seed;
using modcomp::make_stream;

TEST(Rng, DeriveSeedIsAPureFunction) {
  EXPECT_EQ(derive_seed(7, "init:joint"), derive_seed(7, "init:joint"));
  EXPECT_NE(derive_seed(7, "init:joint"), derive_seed(7, "init:uni_1"));
  EXPECT_NE(derive_seed(7, "init:joint"), derive_seed(8, "init:joint"));
}

TEST(Rng, StreamsAreReproducible) {
  auto a = make_stream(3, "train-data");
  auto b = make_stream(3, "train-data");
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(Rng, DistinctLabelsGiveDistinctStreams) {
  std::set<std::uint64_t> firsts;
  for (const char* label : {"dictionaries", "train-data", "test-data", "init:uni_1", "init:uni_2",
                            "init:joint"}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) firsts.insert(make_stream(seed, label)());
  }
  EXPECT_EQ(firsts.size(), 120u);
}

}  // namespace
