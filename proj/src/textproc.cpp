#include "whosai/textproc.hpp"

#include "whosai/utf8.hpp"

namespace whosai
{

TokenSequence tokenize(std::string_view text)
{
	const std::u32string cps = utf8::decode(text);
	TokenSequence tokens;
	std::size_t i = 0;
	const std::size_t n = cps.size();
	while (i < n)
	{
		while (i < n && utf8::is_whitespace(cps[i]))
			++i;
		std::size_t begin = i;
		while (i < n && !utf8::is_whitespace(cps[i]))
			++i;
		std::size_t end = i;
		while (begin < end && utf8::is_punctuation(cps[begin]))
			++begin;
		while (end > begin && utf8::is_punctuation(cps[end - 1]))
			--end;
		if (begin == end)
			continue;
		std::string tok;
		for (std::size_t k = begin; k < end; ++k)
			utf8::append(tok, utf8::to_lower(cps[k]));
		tokens.push_back(std::move(tok));
	}
	if (tokens.empty())
		tokens.emplace_back(kEmptyToken);
	return tokens;
}

void CorruptionConfig::validate() const
{
	for (const double v : {p, p_s, p_span})
		if (!(v >= 0.0 && v <= 1.0))
			throw Error("corruption probabilities must lie in [0, 1]");
}

CorruptionMode parse_corruption_mode(const std::string &name)
{
	if (name == "off")
		return CorruptionMode::off;
	if (name == "td")
		return CorruptionMode::token_deletion;
	if (name == "sc")
		return CorruptionMode::span_cropping;
	throw Error("unknown corruption mode '" + name + "' (expected off, td or sc)");
}

std::string to_string(CorruptionMode mode)
{
	switch (mode)
	{
	case CorruptionMode::token_deletion:
		return "td";
	case CorruptionMode::span_cropping:
		return "sc";
	case CorruptionMode::off:
		break;
	}
	return "off";
}

} // namespace whosai
