#include "whosai/utf8.hpp"

namespace whosai::utf8
{

std::u32string decode(std::string_view bytes)
{
	std::u32string out;
	out.reserve(bytes.size());
	std::size_t i = 0;
	const std::size_t n = bytes.size();
	while (i < n)
	{
		const auto b0 = static_cast<unsigned char>(bytes[i]);
		char32_t cp;
		std::size_t len;
		if (b0 < 0x80)
		{
			cp = b0;
			len = 1;
		}
		else if ((b0 & 0xE0) == 0xC0)
		{
			cp = b0 & 0x1F;
			len = 2;
		}
		else if ((b0 & 0xF0) == 0xE0)
		{
			cp = b0 & 0x0F;
			len = 3;
		}
		else if ((b0 & 0xF8) == 0xF0)
		{
			cp = b0 & 0x07;
			len = 4;
		}
		else
		{
			out.push_back(0xFFFD);
			++i;
			continue;
		}
		if (i + len > n)
		{
			out.push_back(0xFFFD);
			++i;
			continue;
		}
		bool ok = true;
		for (std::size_t k = 1; k < len; ++k)
		{
			const auto b = static_cast<unsigned char>(bytes[i + k]);
			if ((b & 0xC0) != 0x80)
			{
				ok = false;
				break;
			}
			cp = (cp << 6) | (b & 0x3F);
		}
		static constexpr char32_t min_for_len[] = {0, 0, 0x80, 0x800, 0x10000};
		if (!ok || cp < min_for_len[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
		{
			out.push_back(0xFFFD);
			++i;
			continue;
		}
		out.push_back(cp);
		i += len;
	}
	return out;
}

void append(std::string &out, char32_t cp)
{
	if (cp < 0x80)
		out.push_back(static_cast<char>(cp));
	else if (cp < 0x800)
	{
		out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
		out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
	}
	else if (cp < 0x10000)
	{
		out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
		out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
		out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
	}
	else
	{
		out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
		out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
		out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
		out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
	}
}

std::string encode(std::u32string_view text)
{
	std::string out;
	out.reserve(text.size());
	for (const char32_t cp : text)
		append(out, cp);
	return out;
}

// Unicode White_Space property.
bool is_whitespace(char32_t cp)
{
	switch (cp)
	{
	case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
	case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
	case 0x202F: case 0x205F: case 0x3000:
		return true;
	default:
		return cp >= 0x2000 && cp <= 0x200A;
	}
}

// ASCII punctuation, Latin-1 punctuation, General Punctuation and CJK
// Symbols and Punctuation.
bool is_punctuation(char32_t cp)
{
	if (cp < 0x80)
		return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) || (cp >= 0x5B && cp <= 0x60) ||
		       (cp >= 0x7B && cp <= 0x7E);
	switch (cp)
	{
	case 0xA1: case 0xA7: case 0xAB: case 0xB6: case 0xB7: case 0xBB: case 0xBF:
		return true;
	default:
		break;
	}
	return (cp >= 0x2010 && cp <= 0x2027) || (cp >= 0x2030 && cp <= 0x205E) || (cp >= 0x3001 && cp <= 0x3003) ||
	       (cp >= 0x3008 && cp <= 0x3011) || (cp >= 0xFF01 && cp <= 0xFF0F);
}

char32_t to_lower(char32_t cp)
{
	if (cp >= 'A' && cp <= 'Z')
		return cp + 32;
	if (cp < 0xC0)
		return cp;
	// Latin-1 Supplement
	if ((cp >= 0xC0 && cp <= 0xDE) && cp != 0xD7)
		return cp + 32;
	// Latin Extended-A: even/odd pairs
	if (cp >= 0x100 && cp <= 0x17F)
	{
		if ((cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E))
			return (cp % 2 == 1) ? cp + 1 : cp;
		if (cp == 0x130 || cp == 0x131 || cp == 0x138 || cp == 0x149 || cp == 0x17F)
			return cp;
		if (cp == 0x178)
			return 0xFF;
		return (cp % 2 == 0) ? cp + 1 : cp;
	}
	// Greek
	if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2)
		return cp + 32;
	// Cyrillic
	if (cp >= 0x410 && cp <= 0x42F)
		return cp + 32;
	if (cp >= 0x400 && cp <= 0x40F)
		return cp + 80;
	return cp;
}

} // namespace whosai::utf8
