#pragma once

#include <string>
#include <string_view>

namespace whosai::utf8
{

/// Decode UTF-8; malformed sequences become U+FFFD.
std::u32string decode(std::string_view bytes);

std::string encode(std::u32string_view text);

void append(std::string &out, char32_t cp);

bool is_whitespace(char32_t cp);
bool is_punctuation(char32_t cp);

/// Simple one-to-one lowercase mapping for Latin, Greek and Cyrillic.
char32_t to_lower(char32_t cp);

} // namespace whosai::utf8
