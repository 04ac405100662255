#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "whosai/random.hpp"

using namespace whosai;

TEST(Rng, SameSeedSameStream)
{
	Rng a(7), b(7);
	for (int i = 0; i < 100; ++i)
		EXPECT_EQ(a(), b());
}

TEST(Rng, UniformInUnitInterval)
{
	Rng rng(1);
	for (int i = 0; i < 10000; ++i)
	{
		const double u = rng.uniform();
		ASSERT_GE(u, 0.0);
		ASSERT_LT(u, 1.0);
	}
}

TEST(Rng, BelowCoversRangeUniformly)
{
	Rng rng(3);
	std::vector<int> counts(7, 0);
	const int n = 70000;
	for (int i = 0; i < n; ++i)
	{
		const auto k = rng.below(7);
		ASSERT_LT(k, 7u);
		++counts[k];
	}
	for (const int c : counts)
		EXPECT_NEAR(c, n / 7.0, 5 * std::sqrt(n / 7.0));
}

TEST(Rng, NormalMoments)
{
	Rng rng(5);
	const int n = 200000;
	double sum = 0, sq = 0;
	for (int i = 0; i < n; ++i)
	{
		const double x = rng.normal();
		sum += x;
		sq += x * x;
	}
	EXPECT_NEAR(sum / n, 0.0, 0.01);
	EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(Rng, ShuffleIsPermutation)
{
	Rng rng(11);
	std::vector<int> v(50);
	std::iota(v.begin(), v.end(), 0);
	auto w = v;
	rng.shuffle(w);
	EXPECT_NE(v, w);
	std::sort(w.begin(), w.end());
	EXPECT_EQ(v, w);
}

TEST(MixSeed, StreamsDiffer)
{
	std::set<std::uint64_t> seen;
	for (std::uint64_t s = 0; s < 100; ++s)
		seen.insert(mix_seed(42, s));
	EXPECT_EQ(seen.size(), 100u);
	EXPECT_EQ(mix_seed(42, 3), mix_seed(42, 3));
}
