#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "whosai/contrastive.hpp"
#include "whosai/corpus.hpp"
#include "whosai/encoder.hpp"
#include "whosai/optim.hpp"
#include "whosai/textproc.hpp"

namespace whosai
{

struct TrainConfig
{
	std::int64_t steps = 3000;
	int batch_size = 32;
	double lr = 1e-3;
	AdamWConfig adamw;
	std::int64_t warmup_steps = 300;
	MarginSchedule margin;
	bool miner_enabled = true;
	MinerConfig miner;
	TripletMode triplet_mode = TripletMode::online;
	CorruptionMode corruption = CorruptionMode::off;
	CorruptionConfig corruption_config;
	DistanceKind distance = DistanceKind::cosine;
	/// Global gradient-norm clip; 0 disables clipping.
	double max_grad_norm = 0.0;
	/// Classes drawn per batch; the batch is split evenly among them.
	int max_classes_per_batch = 8;
	/// Validation snapshot cadence in steps; 0 disables snapshots.
	std::int64_t eval_every = 100;
	std::uint64_t seed = 42;

	void validate() const;
	bool operator==(const TrainConfig &) const = default;

	/// Desk-scale defaults for the surrogate encoder.
	static TrainConfig desk();
	/// Published BERT-scale settings.
	static TrainConfig paper();
};

/// Linear warmup to config.lr over warmup_steps, linear decay to 0 at steps.
double lr_at(const TrainConfig &config, std::int64_t t);

nlohmann::ordered_json to_json(const TrainConfig &config);
TrainConfig train_config_from_json(const nlohmann::json &doc);
nlohmann::ordered_json to_json(const EncoderConfig &config);
EncoderConfig encoder_config_from_json(const nlohmann::json &doc);

struct StepRecord
{
	std::int64_t step = 0;
	double margin = 0;
	double lr = 0;
	double loss = 0;
	std::size_t mined_pairs = 0;
	std::size_t triplets = 0;
	std::size_t active_triplets = 0;
	bool skipped = false;
};

/// Validation metrics after `step` completed updates (0 = initial params).
struct Snapshot
{
	std::int64_t step = 0;
	double intra = 0;
	double inter = 0;
	double val_f1 = 0;
};

struct TrainLog
{
	std::vector<StepRecord> steps;
	std::vector<Snapshot> snapshots;

	std::string to_jsonl() const;
};

/// Labeled encoder inputs, label ids in [0, num_classes).
struct TrainData
{
	std::vector<EncoderInput> inputs;
	std::vector<int> labels;
	std::size_t num_classes = 0;
};

/// Tokenize and featurize a corpus; labels index corpus.categories().
TrainData prepare_data(const Corpus &corpus, const EncoderConfig &config);

/// Same, but with externally computed pooled vectors looked up by id.
TrainData prepare_data(const Corpus &corpus, const EmbeddingStore &store);

struct TrainResult
{
	EncoderParams params;
	OptimizerState optimizer;
	TrainLog log;
};

/// Sample `batch_size` indices: up to max_classes distinct classes chosen
/// at random, the batch split as evenly as possible among them, members
/// drawn without replacement while the class has unused documents.
std::vector<std::size_t> sample_balanced_batch(const std::vector<std::vector<std::size_t>> &members,
                                               int batch_size, int max_classes, Rng &rng);

/// Embed inputs with the given parameters; float embeddings widened to double.
std::vector<VecD> embed_all(const EncoderParams &params, const std::vector<EncoderInput> &inputs);

/// Run config.steps iterations of: balanced batch, optional corruption,
/// encode, mine (or sample offline), triplet loss with the scheduled
/// margin, backprop, AdamW. Steps with no triplet are logged and leave
/// parameters and optimizer state untouched.
TrainResult train(const TrainData &train_data, const EncoderConfig &encoder_config, const TrainConfig &config,
                  const TrainData *validation = nullptr);

/// Convenience overload over raw corpora.
TrainResult train(const Corpus &corpus, const EncoderConfig &encoder_config, const TrainConfig &config,
                  const Corpus *validation = nullptr);

/// Same loop, starting from given parameters (used by tests and resumes).
TrainResult train_from(EncoderParams params, const TrainData &train_data, const TrainConfig &config,
                       const TrainData *validation = nullptr);

} // namespace whosai
