#include "whosai/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "whosai/types.hpp"

namespace whosai
{

std::string read_file(const std::filesystem::path &path)
{
	std::ifstream in(path, std::ios::binary);
	if (!in)
		throw Error("cannot open " + path.string());
	std::ostringstream ss;
	ss << in.rdbuf();
	return ss.str();
}

void write_file_atomic(const std::filesystem::path &path, std::string_view contents)
{
	auto tmp = path;
	tmp += ".tmp";
	{
		std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
		if (!out)
			throw Error("cannot write " + path.string());
		out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
		out.flush();
		if (!out)
			throw Error("write failed for " + path.string());
	}
	std::error_code ec;
	std::filesystem::rename(tmp, path, ec);
	if (ec)
	{
		std::filesystem::remove(tmp, ec);
		throw Error("cannot write " + path.string());
	}
}

std::string hex64(std::uint64_t value)
{
	char buf[17];
	std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
	return buf;
}

} // namespace whosai
