#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "whosai/encoder.hpp"
#include "whosai/trainer.hpp"

namespace whosai
{

// Binary layout:
//   "WAI1" | u32 LE version (1) | u32 LE header length | UTF-8 JSON header |
//   arrays from the header manifest, float32 LE, row-major, in order.
struct Checkpoint
{
	EncoderParams params;
	TrainConfig train_config;
	std::int64_t step = 0;
	/// Free-form run metadata (task, split, corpus), stored in the header.
	nlohmann::json run = nlohmann::json::object();
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize_checkpoint(const Checkpoint &checkpoint);
Checkpoint deserialize_checkpoint(const std::string &bytes);

void save_checkpoint(const EncoderParams &params, const TrainConfig &train_config, std::int64_t step,
                     const std::filesystem::path &path, const nlohmann::json &run = nlohmann::json::object());
void save_checkpoint(const Checkpoint &checkpoint, const std::filesystem::path &path);
Checkpoint load_checkpoint(const std::filesystem::path &path);

/// Hex FNV-1a 64 of the serialized checkpoint bytes.
std::string checkpoint_hash(const std::string &bytes);

} // namespace whosai
