#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "whosai/corpus.hpp"
#include "whosai/io.hpp"
#include "whosai/random.hpp"
#include "whosai/utf8.hpp"

namespace whosai
{

namespace
{

// Order/temperature cycle for the built-in generators. Low orders produce
// visibly malformed words; the temperatures push the higher-order chains
// away from the human n-gram profile in both directions.
constexpr int kDefaultOrders[] = {1, 2, 3, 4, 2};
constexpr double kDefaultTemperatures[] = {1.0, 1.0, 0.6, 1.5, 0.4};

std::u32string normalize_whitespace(const std::u32string &text)
{
	std::u32string out;
	out.reserve(text.size());
	bool pending_space = false;
	for (const char32_t cp : text)
	{
		if (utf8::is_whitespace(cp))
		{
			pending_space = !out.empty();
			continue;
		}
		if (pending_space)
			out.push_back(U' ');
		pending_space = false;
		out.push_back(cp);
	}
	return out;
}

std::vector<std::u32string> split_words(const std::u32string &text)
{
	std::vector<std::u32string> words;
	std::u32string cur;
	for (const char32_t cp : text)
	{
		if (cp == U' ')
		{
			if (!cur.empty())
				words.push_back(std::move(cur));
			cur.clear();
		}
		else
			cur.push_back(cp);
	}
	if (!cur.empty())
		words.push_back(std::move(cur));
	return words;
}

// Character-level Markov chain over a cyclic source text.
class MarkovChain
{
public:
	MarkovChain(const std::u32string &source, int order)
	    : source_(source), order_(order)
	{
		const std::size_t n = source.size();
		std::unordered_map<std::u32string, std::map<char32_t, std::uint32_t>> counts;
		for (std::size_t i = 0; i < n; ++i)
		{
			counts[context_at(i)][source[(i + order) % n]] += 1;
		}
		for (auto &[ctx, succ] : counts)
		{
			auto &entry = table_[ctx];
			for (const auto &[cp, c] : succ)
				entry.emplace_back(cp, c);
		}
	}

	std::u32string context_at(std::size_t pos) const
	{
		std::u32string ctx;
		ctx.reserve(order_);
		for (int k = 0; k < order_; ++k)
			ctx.push_back(source_[(pos + k) % source_.size()]);
		return ctx;
	}

	char32_t sample(const std::u32string &ctx, double temperature, Rng &rng) const
	{
		const auto &succ = table_.at(ctx);
		std::uint32_t max_count = 0;
		for (const auto &s : succ)
			max_count = std::max(max_count, s.second);
		thread_local std::vector<double> weights;
		weights.resize(succ.size());
		double total = 0.0;
		for (std::size_t i = 0; i < succ.size(); ++i)
		{
			weights[i] = std::exp((std::log(double(succ[i].second)) - std::log(double(max_count))) / temperature);
			total += weights[i];
		}
		double u = rng.uniform() * total;
		for (std::size_t i = 0; i < succ.size(); ++i)
		{
			u -= weights[i];
			if (u < 0.0)
				return succ[i].first;
		}
		return succ.back().first;
	}

private:
	const std::u32string &source_;
	int order_;
	std::unordered_map<std::u32string, std::vector<std::pair<char32_t, std::uint32_t>>> table_;
};

std::string generate_doc(const MarkovChain &chain, const std::vector<std::size_t> &word_starts,
                         double temperature, std::size_t doc_length, Rng &rng)
{
	const std::size_t start = word_starts[rng.below(word_starts.size())];
	std::u32string out = chain.context_at(start);
	std::u32string ctx = out;
	std::size_t spaces = static_cast<std::size_t>(std::count(out.begin(), out.end(), U' '));
	const std::size_t max_chars = doc_length * 64 + 64;
	while (out.size() < max_chars)
	{
		const char32_t next = chain.sample(ctx, temperature, rng);
		if (next == U' ')
		{
			if (!out.empty() && out.back() != U' ' && ++spaces >= doc_length)
				break;
		}
		out.push_back(next);
		ctx.erase(0, 1);
		ctx.push_back(next);
	}
	auto words = split_words(out);
	if (words.size() > doc_length)
		words.resize(doc_length);
	std::u32string joined;
	for (std::size_t i = 0; i < words.size(); ++i)
	{
		if (i)
			joined.push_back(U' ');
		joined += words[i];
	}
	return utf8::encode(joined);
}

std::string pad_index(std::size_t i)
{
	std::string s = std::to_string(i);
	return std::string(s.size() < 4 ? 4 - s.size() : 0, '0') + s;
}

} // namespace

SynthSpec with_default_generators(SynthSpec spec)
{
	const std::size_t n = spec.n_generators;
	if (spec.generator_orders.empty())
		for (std::size_t i = 0; i < n; ++i)
			spec.generator_orders.push_back(kDefaultOrders[i % 5]);
	if (spec.generator_temperatures.empty())
		for (std::size_t i = 0; i < n; ++i)
			spec.generator_temperatures.push_back(kDefaultTemperatures[i % 5]);
	return spec;
}

Corpus synth_corpus(const SynthSpec &spec, std::uint64_t seed)
{
	const std::string text = spec.human_source.empty() ? builtin_human_text() : read_file(spec.human_source);
	return synth_corpus_from_text(spec, text, seed);
}

Corpus synth_corpus_from_text(const SynthSpec &raw_spec, const std::string &human_text, std::uint64_t seed)
{
	const SynthSpec spec = with_default_generators(raw_spec);
	if (spec.n_generators < 1)
		throw Error("synth: need at least one generator");
	if (spec.docs_per_class < 2)
		throw Error("synth: docs_per_class must be at least 2");
	if (spec.doc_length < 1)
		throw Error("synth: doc_length must be positive");
	if (spec.generator_orders.size() != spec.n_generators || spec.generator_temperatures.size() != spec.n_generators)
		throw Error("synth: need one order and one temperature per generator");
	int max_order = 0;
	for (std::size_t g = 0; g < spec.n_generators; ++g)
	{
		if (spec.generator_orders[g] < 1)
			throw Error("synth: generator order must be >= 1");
		if (!(spec.generator_temperatures[g] > 0.0))
			throw Error("synth: generator temperature must be > 0");
		max_order = std::max(max_order, spec.generator_orders[g]);
	}

	const std::u32string source = normalize_whitespace(utf8::decode(human_text));
	const auto words = split_words(source);
	if (words.size() < spec.doc_length + static_cast<std::size_t>(max_order))
		throw Error("synth: human source has " + std::to_string(words.size()) +
		            " words, need at least order + doc_length = " +
		            std::to_string(spec.doc_length + max_order));

	std::vector<std::size_t> word_starts;
	for (std::size_t i = 0; i < source.size(); ++i)
		if (i == 0 || source[i - 1] == U' ')
			word_starts.push_back(i);

	std::vector<Document> docs;
	docs.reserve(spec.docs_per_class * (spec.n_generators + 1));

	{
		Rng rng(mix_seed(seed, 0));
		const std::size_t last_start = words.size() - spec.doc_length;
		for (std::size_t d = 0; d < spec.docs_per_class; ++d)
		{
			const std::size_t w0 = rng.below(last_start + 1);
			std::u32string excerpt;
			for (std::size_t w = w0; w < w0 + spec.doc_length; ++w)
			{
				if (w > w0)
					excerpt.push_back(U' ');
				excerpt += words[w];
			}
			docs.push_back({"human-" + pad_index(d), utf8::encode(excerpt), "human"});
		}
	}

	for (std::size_t g = 0; g < spec.n_generators; ++g)
	{
		const double temperature = spec.generator_temperatures[g];
		const MarkovChain chain(source, spec.generator_orders[g]);
		Rng rng(mix_seed(seed, g + 1));
		const std::string label = "gen-" + std::to_string(g);
		for (std::size_t d = 0; d < spec.docs_per_class; ++d)
		{
			auto text = generate_doc(chain, word_starts, temperature, spec.doc_length, rng);
			if (text.empty())
				text = "∅";
			docs.push_back({label + "-" + pad_index(d), std::move(text), label});
		}
	}
	return Corpus(std::move(docs));
}

} // namespace whosai
