#include "whosai/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "whosai/classify.hpp"
#include "whosai/eval.hpp"

namespace whosai
{

void TrainConfig::validate() const
{
	if (steps < 1)
		throw Error("train: steps must be >= 1");
	if (batch_size < 4)
		throw Error("train: batch_size must be >= 4");
	if (!(lr > 0.0))
		throw Error("train: lr must be > 0");
	if (!(adamw.beta1 >= 0.0 && adamw.beta1 < 1.0 && adamw.beta2 >= 0.0 && adamw.beta2 < 1.0))
		throw Error("train: betas must lie in [0, 1)");
	if (adamw.weight_decay < 0.0)
		throw Error("train: weight_decay must be >= 0");
	if (warmup_steps < 0)
		throw Error("train: warmup_steps must be >= 0");
	if (miner.epsilon < 0.0)
		throw Error("train: miner epsilon must be >= 0");
	if (max_classes_per_batch < 2)
		throw Error("train: max_classes_per_batch must be >= 2");
	if (max_grad_norm < 0.0)
		throw Error("train: max_grad_norm must be >= 0");
	margin.validate();
	corruption_config.validate();
}

TrainConfig TrainConfig::desk()
{
	TrainConfig c;
	c.steps = 3000;
	c.lr = 1e-3;
	c.warmup_steps = 300;
	c.margin.step_size = 75;
	return c;
}

TrainConfig TrainConfig::paper()
{
	TrainConfig c;
	c.steps = 30000;
	c.batch_size = 32;
	c.lr = 1e-5;
	c.adamw = {0.9, 0.99, 0.01, 1e-8};
	c.warmup_steps = 3000;
	c.margin.lambda_min = 0.1;
	c.margin.step_size = 750;
	c.margin.lambda_delta = 750.0 / 30000.0;
	c.corruption_config = {0.05, 0.05, 0.05};
	return c;
}

double lr_at(const TrainConfig &config, std::int64_t t)
{
	return linear_warmup_decay(config.lr, config.warmup_steps, config.steps, t);
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::ordered_json to_json(const EncoderConfig &config)
{
	nlohmann::ordered_json j;
	j["ngram_n"] = config.ngram_n;
	j["vocab_size"] = config.vocab_size;
	j["embed_dim"] = config.embed_dim;
	j["hidden_dim"] = config.hidden_dim;
	j["out_dim"] = config.out_dim;
	return j;
}

EncoderConfig encoder_config_from_json(const nlohmann::json &doc)
{
	EncoderConfig c;
	c.ngram_n = doc.at("ngram_n").get<int>();
	c.vocab_size = doc.at("vocab_size").get<int>();
	c.embed_dim = doc.at("embed_dim").get<int>();
	c.hidden_dim = doc.at("hidden_dim").get<int>();
	c.out_dim = doc.at("out_dim").get<int>();
	c.validate();
	return c;
}

nlohmann::ordered_json to_json(const TrainConfig &config)
{
	nlohmann::ordered_json j;
	j["steps"] = config.steps;
	j["batch_size"] = config.batch_size;
	j["lr"] = config.lr;
	j["beta1"] = config.adamw.beta1;
	j["beta2"] = config.adamw.beta2;
	j["weight_decay"] = config.adamw.weight_decay;
	j["adam_eps"] = config.adamw.eps;
	j["warmup_steps"] = config.warmup_steps;
	j["lambda_min"] = config.margin.lambda_min;
	j["lambda_delta"] = config.margin.lambda_delta;
	j["margin_step"] = config.margin.step_size;
	j["margin_mode"] = to_string(config.margin.mode);
	j["miner"] = config.miner_enabled;
	j["miner_epsilon"] = config.miner.epsilon;
	j["triplet_mode"] = config.triplet_mode == TripletMode::online ? "online" : "offline";
	j["corruption"] = to_string(config.corruption);
	j["p"] = config.corruption_config.p;
	j["p_s"] = config.corruption_config.p_s;
	j["p_span"] = config.corruption_config.p_span;
	j["distance"] = to_string(config.distance);
	j["max_grad_norm"] = config.max_grad_norm;
	j["max_classes_per_batch"] = config.max_classes_per_batch;
	j["eval_every"] = config.eval_every;
	j["seed"] = config.seed;
	return j;
}

TrainConfig train_config_from_json(const nlohmann::json &doc)
{
	TrainConfig c;
	c.steps = doc.at("steps").get<std::int64_t>();
	c.batch_size = doc.at("batch_size").get<int>();
	c.lr = doc.at("lr").get<double>();
	c.adamw.beta1 = doc.at("beta1").get<double>();
	c.adamw.beta2 = doc.at("beta2").get<double>();
	c.adamw.weight_decay = doc.at("weight_decay").get<double>();
	c.adamw.eps = doc.at("adam_eps").get<double>();
	c.warmup_steps = doc.at("warmup_steps").get<std::int64_t>();
	c.margin.lambda_min = doc.at("lambda_min").get<double>();
	c.margin.lambda_delta = doc.at("lambda_delta").get<double>();
	c.margin.step_size = doc.at("margin_step").get<std::int64_t>();
	c.margin.mode = parse_margin_mode(doc.at("margin_mode").get<std::string>());
	c.miner_enabled = doc.at("miner").get<bool>();
	c.miner.epsilon = doc.at("miner_epsilon").get<double>();
	c.triplet_mode = doc.at("triplet_mode").get<std::string>() == "offline" ? TripletMode::offline : TripletMode::online;
	c.corruption = parse_corruption_mode(doc.at("corruption").get<std::string>());
	c.corruption_config.p = doc.at("p").get<double>();
	c.corruption_config.p_s = doc.at("p_s").get<double>();
	c.corruption_config.p_span = doc.at("p_span").get<double>();
	c.distance = parse_distance_kind(doc.at("distance").get<std::string>());
	c.max_grad_norm = doc.at("max_grad_norm").get<double>();
	c.max_classes_per_batch = doc.at("max_classes_per_batch").get<int>();
	c.eval_every = doc.at("eval_every").get<std::int64_t>();
	c.seed = doc.at("seed").get<std::uint64_t>();
	return c;
}

std::string TrainLog::to_jsonl() const
{
	std::string out;
	std::size_t next_snapshot = 0;
	// A snapshot taken after `done` updates follows the record of step done - 1.
	const auto flush_snapshots = [&](std::int64_t done) {
		while (next_snapshot < snapshots.size() && snapshots[next_snapshot].step <= done)
		{
			const auto &s = snapshots[next_snapshot++];
			nlohmann::ordered_json k;
			k["snapshot"] = s.step;
			k["intra"] = s.intra;
			k["inter"] = s.inter;
			k["val_f1"] = s.val_f1;
			out += k.dump() + "\n";
		}
	};
	flush_snapshots(0);
	for (const auto &r : steps)
	{
		nlohmann::ordered_json j;
		j["step"] = r.step;
		j["margin"] = r.margin;
		j["lr"] = r.lr;
		j["loss"] = r.loss;
		j["mined_pairs"] = r.mined_pairs;
		j["triplets"] = r.triplets;
		j["active_triplets"] = r.active_triplets;
		j["skipped"] = r.skipped;
		out += j.dump() + "\n";
		flush_snapshots(r.step + 1);
	}
	flush_snapshots(std::numeric_limits<std::int64_t>::max());
	return out;
}

// ---------------------------------------------------------------------------
// Data

TrainData prepare_data(const Corpus &corpus, const EncoderConfig &config)
{
	TrainData data;
	data.num_classes = corpus.num_categories();
	data.labels = corpus.label_ids();
	data.inputs.reserve(corpus.size());
	for (const auto &doc : corpus.docs())
		data.inputs.emplace_back(featurize(tokenize(doc.text), config));
	return data;
}

TrainData prepare_data(const Corpus &corpus, const EmbeddingStore &store)
{
	TrainData data;
	data.num_classes = corpus.num_categories();
	data.labels = corpus.label_ids();
	data.inputs.reserve(corpus.size());
	for (const auto &doc : corpus.docs())
		data.inputs.emplace_back(store.at(doc.id));
	return data;
}

std::vector<VecD> embed_all(const EncoderParams &params, const std::vector<EncoderInput> &inputs)
{
	std::vector<VecD> out;
	out.reserve(inputs.size());
	for (const auto &h : encode_batch(params, inputs))
		out.push_back(h.cast<double>());
	return out;
}

std::vector<std::size_t> sample_balanced_batch(const std::vector<std::vector<std::size_t>> &members, int batch_size,
                                               int max_classes, Rng &rng)
{
	std::vector<std::size_t> classes;
	for (std::size_t c = 0; c < members.size(); ++c)
		if (!members[c].empty())
			classes.push_back(c);
	const std::size_t k = std::min<std::size_t>(classes.size(), static_cast<std::size_t>(max_classes));
	// Partial Fisher-Yates: the first k entries are the drawn classes.
	for (std::size_t i = 0; i < k; ++i)
		std::swap(classes[i], classes[i + rng.below(classes.size() - i)]);
	classes.resize(k);
	std::sort(classes.begin(), classes.end());

	std::vector<std::size_t> batch;
	batch.reserve(static_cast<std::size_t>(batch_size));
	const std::size_t base = static_cast<std::size_t>(batch_size) / k;
	const std::size_t extra = static_cast<std::size_t>(batch_size) % k;
	for (std::size_t i = 0; i < k; ++i)
	{
		const auto &pool = members[classes[i]];
		const std::size_t want = base + (i < extra ? 1 : 0);
		std::vector<std::size_t> order(pool.size());
		for (std::size_t j = 0; j < order.size(); ++j)
			order[j] = j;
		std::size_t used = order.size();
		for (std::size_t n = 0; n < want; ++n)
		{
			if (used == order.size())
				used = 0;
			std::swap(order[used], order[used + rng.below(order.size() - used)]);
			batch.push_back(pool[order[used++]]);
		}
	}
	return batch;
}

// ---------------------------------------------------------------------------
// Training loop

namespace
{

Snapshot take_snapshot(const EncoderParams &params, const TrainData &train_data, const TrainData &validation,
                       std::int64_t step)
{
	Snapshot s;
	s.step = step;
	const auto train_emb = embed_all(params, train_data.inputs);
	const auto val_emb = embed_all(params, validation.inputs);
	std::vector<std::string> train_labels, val_labels, preds;
	for (const int l : train_data.labels)
		train_labels.push_back(std::to_string(l));
	for (const int l : validation.labels)
		val_labels.push_back(std::to_string(l));
	try
	{
		const auto index = compute_centroids(train_emb, train_labels);
		for (const auto &h : val_emb)
			preds.push_back(predict(index, h).label);
		s.val_f1 = weighted_prf(confusion(val_labels, preds, index.labels())).f1;
		s.intra = intra_similarity(val_emb, validation.labels);
		s.inter = inter_similarity(val_emb, validation.labels);
	}
	catch (const Error &)
	{
		s.val_f1 = s.intra = s.inter = std::numeric_limits<double>::quiet_NaN();
	}
	return s;
}

} // namespace

TrainResult train_from(EncoderParams params, const TrainData &data, const TrainConfig &config,
                       const TrainData *validation)
{
	config.validate();
	if (data.inputs.size() != data.labels.size())
		throw Error("train: input and label counts differ");
	std::vector<std::vector<std::size_t>> members(data.num_classes);
	for (std::size_t i = 0; i < data.labels.size(); ++i)
	{
		const int l = data.labels[i];
		if (l < 0 || static_cast<std::size_t>(l) >= data.num_classes)
			throw Error("train: label id out of range");
		members[static_cast<std::size_t>(l)].push_back(i);
	}
	std::size_t populated = 0;
	for (std::size_t c = 0; c < members.size(); ++c)
	{
		if (members[c].empty())
			continue;
		if (members[c].size() < 2)
			throw Error("train: class " + std::to_string(c) + " has fewer than 2 training documents");
		++populated;
	}
	if (populated < 2)
		throw Error("train: need at least 2 categories");

	TrainResult result;
	result.params = std::move(params);
	result.optimizer = OptimizerState::zeros(result.params.config);
	auto &p = result.params;
	auto grads = ParamGrads::zeros(p.config);

	Rng batch_rng(mix_seed(config.seed, 2));
	Rng corrupt_rng(mix_seed(config.seed, 3));
	Rng triplet_rng(mix_seed(config.seed, 4));

	std::vector<EncoderInput> batch_inputs;
	std::vector<int> batch_labels;
	std::vector<ForwardCache<float>> caches;
	std::vector<float> dist_ap, dist_an;

	const bool snapshots = validation && config.eval_every > 0;
	if (snapshots)
		result.log.snapshots.push_back(take_snapshot(p, data, *validation, 0));

	result.log.steps.reserve(static_cast<std::size_t>(config.steps));
	for (std::int64_t t = 0; t < config.steps; ++t)
	{
		StepRecord rec;
		rec.step = t;
		rec.margin = margin_at(config.margin, t);
		rec.lr = lr_at(config, t);
		const auto margin = static_cast<float>(rec.margin);

		const auto batch = sample_balanced_batch(members, config.batch_size, config.max_classes_per_batch, batch_rng);
		batch_inputs.clear();
		batch_labels.clear();
		for (const auto i : batch)
		{
			const auto &input = data.inputs[i];
			const auto *text = std::get_if<FeaturizedText>(&input);
			if (text && config.corruption != CorruptionMode::off)
				batch_inputs.emplace_back(corrupt(*text, config.corruption, config.corruption_config, corrupt_rng));
			else
				batch_inputs.push_back(input);
			batch_labels.push_back(data.labels[i]);
		}

		const auto embeddings = encode_batch(p, batch_inputs, &caches);
		const auto dist = distance_matrix(config.distance, embeddings);
		MinedPairs mined;
		if (config.triplet_mode == TripletMode::online)
		{
			const double eps = config.miner_enabled ? config.miner.epsilon : std::numeric_limits<double>::infinity();
			mined = mine_pairs_from_distances(dist, std::span<const int>(batch_labels), eps);
		}
		const auto triplets = build_triplets(mined, config.triplet_mode, batch_labels, triplet_rng);
		rec.mined_pairs = mined.size();
		rec.triplets = triplets.size();
		if (triplets.empty())
			rec.skipped = true;
		else
		{
			dist_ap.clear();
			dist_an.clear();
			for (const auto &tr : triplets)
			{
				dist_ap.push_back(dist(tr.anchor, tr.positive));
				dist_an.push_back(dist(tr.anchor, tr.negative));
			}
			const auto loss = triplet_loss<float>(dist_ap, dist_an, margin);
			rec.loss = loss.loss;
			rec.active_triplets = static_cast<std::size_t>(std::count(loss.active.begin(), loss.active.end(), 1));

			const auto upstream = loss_gradient(embeddings, triplets, margin, config.distance);
			grads.set_zero();
			backward(p, batch_inputs, upstream, grads, &caches);
			if (config.max_grad_norm > 0.0)
				clip_grad_norm(grads, config.max_grad_norm);
			adamw_step(p, grads, result.optimizer, rec.lr, config.adamw);
		}
		result.log.steps.push_back(rec);

		const std::int64_t done = t + 1;
		if (snapshots && (done % config.eval_every == 0 || done == config.steps))
			result.log.snapshots.push_back(take_snapshot(p, data, *validation, done));
	}
	return result;
}

TrainResult train(const TrainData &train_data, const EncoderConfig &encoder_config, const TrainConfig &config,
                  const TrainData *validation)
{
	config.validate();
	encoder_config.validate();
	return train_from(init_params(encoder_config, mix_seed(config.seed, 1)), train_data, config, validation);
}

TrainResult train(const Corpus &corpus, const EncoderConfig &encoder_config, const TrainConfig &config,
                  const Corpus *validation)
{
	const auto data = prepare_data(corpus, encoder_config);
	if (validation)
	{
		const auto val = prepare_data(*validation, encoder_config);
		return train(data, encoder_config, config, &val);
	}
	return train(data, encoder_config, config, nullptr);
}

} // namespace whosai
