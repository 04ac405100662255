#include "whosai/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <type_traits>

#include "whosai/io.hpp"

namespace whosai
{

namespace
{

constexpr char kMagic[4] = {'W', 'A', 'I', '1'};

void put_u32(std::string &out, std::uint32_t v)
{
	for (int i = 0; i < 4; ++i)
		out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const std::string &in, std::size_t pos)
{
	std::uint32_t v = 0;
	for (int i = 0; i < 4; ++i)
		v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
	return v;
}

void put_floats(std::string &out, const float *data, std::size_t n)
{
	const auto start = out.size();
	out.resize(start + 4 * n);
	if constexpr (std::endian::native == std::endian::little)
		std::memcpy(out.data() + start, data, 4 * n);
	else
		for (std::size_t i = 0; i < n; ++i)
		{
			std::uint32_t bits;
			std::memcpy(&bits, data + i, 4);
			for (int b = 0; b < 4; ++b)
				out[start + 4 * i + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
		}
}

void get_floats(const std::string &in, std::size_t pos, float *data, std::size_t n)
{
	if constexpr (std::endian::native == std::endian::little)
		std::memcpy(data, in.data() + pos, 4 * n);
	else
		for (std::size_t i = 0; i < n; ++i)
		{
			const auto bits = get_u32(in, pos + 4 * i);
			std::memcpy(data + i, &bits, 4);
		}
}

} // namespace

std::string serialize_checkpoint(const Checkpoint &checkpoint)
{
	const auto &params = checkpoint.params;
	nlohmann::ordered_json header;
	header["encoder_config"] = to_json(params.config);
	header["train_config"] = to_json(checkpoint.train_config);
	header["step"] = checkpoint.step;
	auto manifest = nlohmann::ordered_json::array();
	for_each_tensor(params, [&](const char *name, const auto &t) {
		nlohmann::ordered_json entry;
		entry["name"] = name;
		if constexpr (std::decay_t<decltype(t)>::ColsAtCompileTime == 1)
			entry["shape"] = {t.rows()};
		else
			entry["shape"] = {t.rows(), t.cols()};
		manifest.push_back(std::move(entry));
	});
	header["arrays"] = std::move(manifest);
	header["run"] = checkpoint.run;
	const std::string text = header.dump();

	std::string out(kMagic, 4);
	put_u32(out, kCheckpointVersion);
	put_u32(out, static_cast<std::uint32_t>(text.size()));
	out += text;
	for_each_tensor(params, [&](const char *, const auto &t) {
		put_floats(out, t.data(), static_cast<std::size_t>(t.size()));
	});
	return out;
}

Checkpoint deserialize_checkpoint(const std::string &bytes)
{
	if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
		throw Error("not a checkpoint");
	if (bytes.size() < 12)
		throw Error("truncated checkpoint");
	const auto version = get_u32(bytes, 4);
	if (version != kCheckpointVersion)
		throw Error("unsupported version " + std::to_string(version));
	const auto header_len = get_u32(bytes, 8);
	if (bytes.size() < 12 + static_cast<std::size_t>(header_len))
		throw Error("truncated checkpoint");

	nlohmann::json header;
	try
	{
		header = nlohmann::json::parse(bytes.substr(12, header_len));
	}
	catch (const nlohmann::json::parse_error &e)
	{
		throw Error(std::string("checkpoint header is not valid JSON: ") + e.what());
	}

	Checkpoint ckpt;
	try
	{
		const auto config = encoder_config_from_json(header.at("encoder_config"));
		ckpt.params = EncoderParams::zeros(config);
		ckpt.train_config = train_config_from_json(header.at("train_config"));
		ckpt.step = header.at("step").get<std::int64_t>();
		if (header.contains("run"))
			ckpt.run = header["run"];

		const auto &manifest = header.at("arrays");
		std::size_t k = 0;
		std::size_t pos = 12 + header_len;
		for_each_tensor(ckpt.params, [&](const char *name, auto &t) {
			if (k >= manifest.size())
				throw Error("checkpoint manifest is missing array '" + std::string(name) + "'");
			const auto &entry = manifest[k++];
			if (entry.at("name").get<std::string>() != name)
				throw Error("checkpoint manifest order mismatch at '" + std::string(name) + "'");
			std::size_t count = 1;
			for (const auto &dim : entry.at("shape"))
				count *= dim.get<std::size_t>();
			if (count != static_cast<std::size_t>(t.size()))
				throw Error("checkpoint array '" + std::string(name) + "' has the wrong shape");
			if (bytes.size() < pos + 4 * count)
				throw Error("truncated checkpoint");
			get_floats(bytes, pos, t.data(), count);
			pos += 4 * count;
		});
		if (pos != bytes.size())
			throw Error("checkpoint has trailing bytes");
	}
	catch (const nlohmann::json::exception &e)
	{
		throw Error(std::string("checkpoint header is incomplete: ") + e.what());
	}
	return ckpt;
}

void save_checkpoint(const Checkpoint &checkpoint, const std::filesystem::path &path)
{
	write_file_atomic(path, serialize_checkpoint(checkpoint));
}

void save_checkpoint(const EncoderParams &params, const TrainConfig &train_config, std::int64_t step,
                     const std::filesystem::path &path, const nlohmann::json &run)
{
	save_checkpoint(Checkpoint{params, train_config, step, run}, path);
}

Checkpoint load_checkpoint(const std::filesystem::path &path)
{
	return deserialize_checkpoint(read_file(path));
}

std::string checkpoint_hash(const std::string &bytes)
{
	return hex64(fnv1a64(bytes));
}

} // namespace whosai
