#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "whosai/encoder.hpp"
#include "whosai/trainer.hpp"

namespace whosai
{

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Thrown for bad flags, config keys or values; maps to exit code 2.
class UsageError : public Error
{
public:
	using Error::Error;
};

/// Flat key = value settings. Later layers override earlier ones:
/// preset, then config file, then command-line flags.
struct CliConfig
{
	std::string preset = "desk";
	EncoderConfig encoder;
	TrainConfig train = TrainConfig::desk();
	std::string task = "aa";
	std::string human_label = "human";
	std::string generator_subset = "all";
	double train_frac = 0.8;
	double val_frac = 0.1;
};

/// Every key accepted in a config file (and, with `_` spelled `-`, as a
/// train flag).
const std::vector<std::string> &config_keys();

/// Parse `key = value` lines; `#` starts a comment. Unknown keys and
/// repeated keys are usage errors naming the line.
std::map<std::string, std::string> parse_config_text(const std::string &text);

/// Build a config from a preset plus overrides. A `preset` entry in the
/// overrides selects the base before the other keys apply.
CliConfig make_cli_config(const std::map<std::string, std::string> &overrides);

/// Apply one key; throws UsageError on unknown keys or malformed values.
void apply_setting(CliConfig &config, const std::string &key, const std::string &value);

/// Run one command line (without the program name). Output goes to `out`,
/// diagnostics to `err`, and `in` is read by `classify` without --input.
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err, std::istream &in);

} // namespace whosai
