#include <gtest/gtest.h>

#include "test_util.hpp"
#include "whosai/checkpoint.hpp"
#include "whosai/io.hpp"

using namespace whosai;
using whosai::testing::TempDir;

namespace
{

Checkpoint sample()
{
	EncoderConfig e;
	e.vocab_size = 101;
	e.embed_dim = 7;
	e.hidden_dim = 9;
	e.out_dim = 3;
	Checkpoint c;
	c.params = init_params(e, 5);
	c.params.b1.setConstant(-0.125f);
	c.params.b2[1] = 3.5e-20f;
	c.train_config = TrainConfig::paper();
	c.step = 1234;
	c.run = {{"task", "tt"}, {"split_seed", 9}};
	return c;
}

std::string expect_error(const std::string &bytes)
{
	try
	{
		deserialize_checkpoint(bytes);
	}
	catch (const Error &e)
	{
		return e.what();
	}
	ADD_FAILURE() << "no error";
	return {};
}

} // namespace

TEST(Checkpoint, RoundTripBitExact)
{
	TempDir dir("ckpt");
	const auto c = sample();
	save_checkpoint(c, dir / "m.wai1");
	const auto back = load_checkpoint(dir / "m.wai1");
	EXPECT_TRUE(bitwise_equal(back.params, c.params));
	EXPECT_EQ(back.params.config, c.params.config);
	EXPECT_EQ(back.train_config, c.train_config);
	EXPECT_EQ(back.step, 1234);
	EXPECT_EQ(back.run, c.run);
	EXPECT_EQ(serialize_checkpoint(back), read_file(dir / "m.wai1"));
}

TEST(Checkpoint, Layout)
{
	const auto bytes = serialize_checkpoint(sample());
	EXPECT_EQ(bytes.substr(0, 4), "WAI1");
	EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 1u);
	EXPECT_EQ(bytes[5] | bytes[6] | bytes[7], 0);
	const std::uint32_t header_len = static_cast<unsigned char>(bytes[8]) |
	                                 static_cast<unsigned char>(bytes[9]) << 8 |
	                                 static_cast<unsigned char>(bytes[10]) << 16 |
	                                 static_cast<unsigned char>(bytes[11]) << 24;
	const auto header = nlohmann::json::parse(bytes.substr(12, header_len));
	EXPECT_EQ(header.at("step"), 1234);
	const auto c = sample();
	const std::size_t floats = c.params.num_parameters();
	EXPECT_EQ(bytes.size(), 12 + header_len + 4 * floats);
	// First feature-table entry, little endian.
	float first;
	std::memcpy(&first, bytes.data() + 12 + header_len, 4);
	EXPECT_EQ(first, c.params.feature_table(0, 0));
}

TEST(Checkpoint, WrongMagic)
{
	auto bytes = serialize_checkpoint(sample());
	bytes[0] = 'X';
	EXPECT_EQ(expect_error(bytes), "not a checkpoint");
	EXPECT_EQ(expect_error("WA"), "not a checkpoint");
}

TEST(Checkpoint, UnsupportedVersion)
{
	auto bytes = serialize_checkpoint(sample());
	bytes[4] = static_cast<char>(999 & 0xFF);
	bytes[5] = static_cast<char>(999 >> 8);
	EXPECT_NE(expect_error(bytes).find("unsupported version 999"), std::string::npos);
}

TEST(Checkpoint, TruncatedAndTrailing)
{
	const auto bytes = serialize_checkpoint(sample());
	EXPECT_NE(expect_error(bytes.substr(0, bytes.size() - 3)).find("truncated"), std::string::npos);
	EXPECT_NE(expect_error(bytes + "x").find("trailing"), std::string::npos);
}

TEST(Checkpoint, HashIsStable)
{
	const auto bytes = serialize_checkpoint(sample());
	EXPECT_EQ(checkpoint_hash(bytes), checkpoint_hash(serialize_checkpoint(sample())));
	EXPECT_EQ(checkpoint_hash(bytes).size(), 16u);
	auto other = sample();
	other.params.w1(0, 0) += 1.0f;
	EXPECT_NE(checkpoint_hash(bytes), checkpoint_hash(serialize_checkpoint(other)));
}
