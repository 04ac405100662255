#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "whosai/random.hpp"
#include "whosai/types.hpp"

namespace whosai
{

/// Ordered, non-empty sequence of whitespace-free tokens.
using TokenSequence = std::vector<std::string>;

/// Placeholder emitted when a text has no token left after stripping.
inline constexpr std::string_view kEmptyToken = "\xE2\x88\x85"; // U+2205

/// Lowercase, split on Unicode whitespace, strip leading/trailing
/// punctuation from each token and drop empties.
TokenSequence tokenize(std::string_view text);

struct CorruptionConfig
{
	double p = 0.05;      ///< per-token deletion probability
	double p_s = 0.05;    ///< span-start probability
	double p_span = 0.05; ///< max span size relative to the sequence length

	void validate() const;
	bool operator==(const CorruptionConfig &) const = default;
};

enum class CorruptionMode
{
	off,
	token_deletion,
	span_cropping
};

CorruptionMode parse_corruption_mode(const std::string &name);
std::string to_string(CorruptionMode mode);

// The corruption operations are generic over the element type so the
// trainer can apply them to pre-featurized tokens with the same random
// stream as on raw strings.

/// Remove each element independently with probability p. Keeps the first
/// element if every element would be removed.
template <typename T>
std::vector<T> token_delete(std::span<const T> tokens, double p, Rng &rng)
{
	if (!(p >= 0.0 && p <= 1.0))
		throw Error("token_delete: p must be in [0, 1]");
	std::vector<T> out;
	out.reserve(tokens.size());
	for (const auto &tok : tokens)
		if (!rng.bernoulli(p))
			out.push_back(tok);
	if (out.empty() && !tokens.empty())
		out.push_back(tokens.front());
	return out;
}

template <typename T>
std::vector<T> token_delete(const std::vector<T> &tokens, double p, Rng &rng)
{
	return token_delete(std::span<const T>(tokens), p, rng);
}

/// Largest span size for a sequence of length n: floor(n * p_span).
inline std::size_t max_span_size(std::size_t n, double p_span)
{
	return static_cast<std::size_t>(std::floor(static_cast<double>(n) * p_span + 1e-9));
}

/// Each index starts a span with probability p_s; a started span has an
/// integer size drawn uniformly from {0, ..., floor(n * p_span)} and covers
/// [j, j + size). The union of spans is removed. Keeps the first element if
/// everything would be removed.
template <typename T>
std::vector<T> span_crop(std::span<const T> tokens, double p_s, double p_span, Rng &rng)
{
	if (!(p_s >= 0.0 && p_s <= 1.0 && p_span >= 0.0 && p_span <= 1.0))
		throw Error("span_crop: p_s and p_span must be in [0, 1]");
	const std::size_t n = tokens.size();
	const std::size_t max_size = max_span_size(n, p_span);
	std::vector<char> removed(n, 0);
	std::size_t covered_until = 0;
	for (std::size_t j = 0; j < n; ++j)
	{
		if (!rng.bernoulli(p_s))
			continue;
		const std::size_t size = rng.below(max_size + 1);
		const std::size_t end = std::min(n, j + size);
		for (std::size_t k = std::max(j, covered_until); k < end; ++k)
			removed[k] = 1;
		covered_until = std::max(covered_until, end);
	}
	std::vector<T> out;
	out.reserve(n);
	for (std::size_t j = 0; j < n; ++j)
		if (!removed[j])
			out.push_back(tokens[j]);
	if (out.empty() && n > 0)
		out.push_back(tokens.front());
	return out;
}

template <typename T>
std::vector<T> span_crop(const std::vector<T> &tokens, double p_s, double p_span, Rng &rng)
{
	return span_crop(std::span<const T>(tokens), p_s, p_span, rng);
}

template <typename T>
std::vector<T> corrupt(const std::vector<T> &tokens, CorruptionMode mode, const CorruptionConfig &config, Rng &rng)
{
	switch (mode)
	{
	case CorruptionMode::token_deletion:
		return token_delete(tokens, config.p, rng);
	case CorruptionMode::span_cropping:
		return span_crop(tokens, config.p_s, config.p_span, rng);
	case CorruptionMode::off:
		break;
	}
	return tokens;
}

} // namespace whosai
