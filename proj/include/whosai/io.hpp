#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace whosai
{

std::string read_file(const std::filesystem::path &path);

/// Write via a temporary sibling file and rename, so readers never observe
/// a partially written file.
void write_file_atomic(const std::filesystem::path &path, std::string_view contents);

/// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a64(std::string_view bytes)
{
	std::uint64_t h = 0xcbf29ce484222325ULL;
	for (const char c : bytes)
	{
		h ^= static_cast<unsigned char>(c);
		h *= 0x100000001b3ULL;
	}
	return h;
}

/// Lower-case 16-digit hex rendering of a 64-bit value.
std::string hex64(std::uint64_t value);

} // namespace whosai
