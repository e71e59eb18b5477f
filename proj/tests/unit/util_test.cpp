#include <gtest/gtest.h>

#include <atomic>
#include <numeric>

#include "fixtures.hpp"
#include "route/util.hpp"

using namespace route;

TEST(Sha256, KnownVectors) {
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Files, AtomicWriteCreatesParents) {
    auto dir = route::testing::scratch_dir("files");
    auto path = dir / "a" / "b" / "c.txt";
    write_file_atomic(path, "one");
    write_file_atomic(path, "two\n");
    EXPECT_EQ(read_file(path), "two\n");
    EXPECT_THROW(read_file(dir / "missing"), std::runtime_error);
}

TEST(Rng, UniformBelowStaysInRangeAndIsFrozen) {
    std::mt19937_64 rng(1);
    std::vector<int> hist(7, 0);
    for (int i = 0; i < 7000; ++i) {
        auto x = uniform_below(rng, 7);
        ASSERT_LT(x, 7u);
        ++hist[x];
    }
    for (int h : hist) EXPECT_GT(h, 800);
    // first draws for seed 0 depend only on mt19937_64, which the standard pins down
    std::mt19937_64 a(0), b(0);
    EXPECT_EQ(uniform_below(a, 1000), uniform_below(b, 1000));
    EXPECT_EQ(uniform_below(a, 1), 0u);
}

TEST(Rng, MixSeedSeparatesStreams) {
    EXPECT_NE(mix_seed(1, 0), mix_seed(1, 1));
    EXPECT_NE(mix_seed(0, 1), mix_seed(1, 0));
    EXPECT_EQ(mix_seed(5, 9), mix_seed(5, 9));
}

TEST(Rng, ShuffleIsPermutationAndSeeded) {
    std::vector<int> v(50);
    std::iota(v.begin(), v.end(), 0);
    auto a = v, b = v;
    std::mt19937_64 r1(3), r2(3);
    seeded_shuffle(a, r1);
    seeded_shuffle(b, r2);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, v);
    std::sort(a.begin(), a.end());
    EXPECT_EQ(a, v);
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
    std::vector<std::atomic<int>> hits(500);
    parallel_for(hits.size(), 8, [&](std::size_t i) { ++hits[i]; });
    for (auto& h : hits) EXPECT_EQ(h.load(), 1);
    parallel_for(0, 4, [&](std::size_t) { FAIL(); });
}

TEST(ParallelFor, RethrowsFirstException) {
    EXPECT_THROW(parallel_for(100, 4,
                              [](std::size_t i) {
                                  if (i == 37) throw std::logic_error("boom");
                              }),
                 std::logic_error);
}

TEST(ParallelFor, StopFlagPreventsNewWork) {
    std::atomic<bool> stop{true};
    std::atomic<int> n{0};
    parallel_for(100, 4, [&](std::size_t) { ++n; }, &stop);
    EXPECT_EQ(n.load(), 0);
}
