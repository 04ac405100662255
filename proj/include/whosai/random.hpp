#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace whosai
{

/// splitmix64 finalizer; used to derive independent sub-seeds from one seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream)
{
	std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
	z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
	z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
	return z ^ (z >> 31);
}

// Seeded generator. std::mt19937_64 output is fully specified by the
// standard; the std:: distributions are not, so the few we need are
// written out here to keep runs bit-identical across toolchains.
class Rng
{
public:
	using result_type = std::uint64_t;

	explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

	static constexpr result_type min() { return std::mt19937_64::min(); }
	static constexpr result_type max() { return std::mt19937_64::max(); }
	result_type operator()() { return engine_(); }

	/// Uniform on [0, 1) with 53 random bits.
	double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

	double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

	/// Uniform integer on [0, n). n must be positive.
	std::size_t below(std::size_t n)
	{
		const std::uint64_t bound = static_cast<std::uint64_t>(n);
		const std::uint64_t limit = max() - max() % bound;
		std::uint64_t x;
		do
			x = engine_();
		while (x >= limit);
		return static_cast<std::size_t>(x % bound);
	}

	bool bernoulli(double p) { return uniform() < p; }

	/// Standard normal via Box-Muller (one value per call).
	double normal()
	{
		double u1 = uniform();
		while (u1 <= 0.0)
			u1 = uniform();
		const double u2 = uniform();
		return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
	}

	template <typename T>
	void shuffle(std::vector<T> &items)
	{
		for (std::size_t i = items.size(); i > 1; --i)
			std::swap(items[i - 1], items[below(i)]);
	}

private:
	std::mt19937_64 engine_;
};

} // namespace whosai
