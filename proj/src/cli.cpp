#include "whosai/cli.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "whosai/checkpoint.hpp"
#include "whosai/classify.hpp"
#include "whosai/corpus.hpp"
#include "whosai/eval.hpp"
#include "whosai/gradcheck.hpp"
#include "whosai/io.hpp"

namespace whosai
{

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace
{

struct KeyInfo
{
	const char *key;
	const char *help;
};

const std::vector<KeyInfo> &key_table()
{
	static const std::vector<KeyInfo> table = {
	    {"preset", "base settings: desk or paper"},
	    {"task", "aa (one class per label) or tt (human vs AI)"},
	    {"human_label", "label kept as-is when --task tt"},
	    {"generator_subset", "all, largest or smallest size variant per generator family"},
	    {"train_frac", "stratified training fraction"},
	    {"val_frac", "stratified validation fraction"},
	    {"seed", "seed for the split, initialization and training"},
	    {"ngram_n", "character n-gram length"},
	    {"vocab_size", "hashed feature-table rows"},
	    {"embed_dim", "feature-table width"},
	    {"hidden_dim", "hidden layer width"},
	    {"out_dim", "embedding dimension"},
	    {"steps", "training steps"},
	    {"batch_size", "documents per batch"},
	    {"lr", "peak learning rate"},
	    {"beta1", "AdamW first-moment decay"},
	    {"beta2", "AdamW second-moment decay"},
	    {"weight_decay", "AdamW decoupled weight decay"},
	    {"adam_eps", "AdamW epsilon"},
	    {"warmup_steps", "linear warmup length"},
	    {"lambda_min", "initial triplet margin"},
	    {"lambda_delta", "margin increment"},
	    {"margin_step", "steps between margin increments"},
	    {"margin_mode", "step (floor schedule) or mod (literal modulo schedule)"},
	    {"dynamic_margin", "on/off; off keeps the margin at lambda_min"},
	    {"miner", "on/off; off samples one random triplet per document"},
	    {"miner_epsilon", "multi-similarity mining slack"},
	    {"corruption", "off, td (token deletion) or sc (span cropping)"},
	    {"p", "token deletion probability"},
	    {"p_s", "span start probability"},
	    {"p_span", "maximum span length as a fraction of the document"},
	    {"distance", "cosine or sqeuclidean"},
	    {"max_grad_norm", "global gradient clip, 0 disables"},
	    {"max_classes_per_batch", "classes drawn per batch"},
	    {"eval_every", "validation snapshot cadence, 0 disables"},
	};
	return table;
}

std::string dashed(std::string key)
{
	for (auto &c : key)
		if (c == '_')
			c = '-';
	return key;
}

std::string trim(const std::string &s)
{
	const auto b = s.find_first_not_of(" \t\r\n");
	if (b == std::string::npos)
		return {};
	const auto e = s.find_last_not_of(" \t\r\n");
	return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string &key, const std::string &value)
{
	std::istringstream in(value);
	T out{};
	in >> out;
	if (in.fail() || !in.eof())
		throw UsageError("invalid value for " + key + ": '" + value + "'");
	if constexpr (std::is_floating_point_v<T>)
		if (!std::isfinite(out))
			throw UsageError("invalid value for " + key + ": '" + value + "'");
	return out;
}

bool parse_switch(const std::string &key, const std::string &value)
{
	if (value == "on" || value == "true" || value == "1")
		return true;
	if (value == "off" || value == "false" || value == "0")
		return false;
	throw UsageError("invalid value for " + key + ": '" + value + "' (expected on or off)");
}

std::string format_double(double v)
{
	char buf[64];
	std::snprintf(buf, sizeof buf, "%.9g", v);
	return buf;
}

std::string csv_quote(const std::string &s)
{
	if (s.find_first_of(",\"\r\n") == std::string::npos)
		return s;
	std::string out = "\"";
	for (const char c : s)
	{
		if (c == '"')
			out += '"';
		out += c;
	}
	return out + "\"";
}

// ---------------------------------------------------------------------------
// Corpus views shared by train, eval and project

ordered_json run_info(const CliConfig &config, const std::string &corpus_bytes)
{
	ordered_json run;
	run["task"] = config.task;
	run["human_label"] = config.human_label;
	run["generator_subset"] = config.generator_subset;
	run["train_frac"] = config.train_frac;
	run["val_frac"] = config.val_frac;
	run["split_seed"] = config.train.seed;
	run["corpus_hash"] = hex64(fnv1a64(corpus_bytes));
	return run;
}

Corpus task_view(const Corpus &raw, const std::string &task, const std::string &human_label,
                 const std::string &subset)
{
	Corpus c = select_generator_subset(raw, parse_generator_subset(subset));
	if (task == "tt")
		c = relabel_binary(c, human_label);
	return c;
}

Corpus run_view(const Corpus &raw, const json &run, const std::string &split_name)
{
	const auto get = [&](const char *key, const std::string &fallback) {
		return run.contains(key) ? run.at(key).get<std::string>() : fallback;
	};
	Corpus c = task_view(raw, get("task", "aa"), get("human_label", "human"), get("generator_subset", "all"));
	if (split_name == "all")
		return c;
	if (!run.contains("train_frac"))
		throw Error("checkpoint has no split information; use --split all");
	auto [tr, va, te] = split(c, run.at("train_frac").get<double>(), run.at("val_frac").get<double>(),
	                          run.at("split_seed").get<std::uint64_t>());
	if (split_name == "train")
		return tr;
	if (split_name == "val")
		return va;
	return te;
}

std::vector<VecD> embed_corpus(const EncoderParams &params, const Corpus &corpus)
{
	return embed_all(params, prepare_data(corpus, params.config).inputs);
}

Checkpoint load_checked(const fs::path &path, std::string *hash)
{
	const auto bytes = read_file(path);
	if (hash)
		*hash = checkpoint_hash(bytes);
	return deserialize_checkpoint(bytes);
}

CentroidIndex load_store_for(const fs::path &path, const Checkpoint &ckpt, const std::string &hash,
                             std::ostream &err)
{
	auto index = load_index(path);
	if (index.dim() != static_cast<std::size_t>(ckpt.params.config.out_dim))
		throw Error("centroid store dimension " + std::to_string(index.dim()) + " does not match checkpoint output " +
		            std::to_string(ckpt.params.config.out_dim));
	if (index.encoder_hash() != hash)
		err << "warning: centroid store was built with encoder " << index.encoder_hash() << ", checkpoint is "
		    << hash << "\n";
	return index;
}

// ---------------------------------------------------------------------------
// Commands

struct SynthArgs
{
	std::size_t generators = 5;
	std::size_t per_class = 400;
	std::uint64_t seed = 42;
	std::size_t doc_length = 120;
	std::string human_source;
	std::string out;
};

int cmd_synth(const SynthArgs &a, std::ostream &out)
{
	SynthSpec spec;
	spec.n_generators = a.generators;
	spec.docs_per_class = a.per_class;
	spec.doc_length = a.doc_length;
	spec.human_source = a.human_source;
	const Corpus corpus = synth_corpus(spec, a.seed);
	save_jsonl(corpus, a.out);
	std::map<std::string, std::size_t> counts;
	for (const auto &d : corpus.docs())
		++counts[d.label];
	for (const auto &[label, n] : counts)
		out << label << "\t" << n << "\n";
	return kExitOk;
}

struct TrainArgs
{
	std::string corpus;
	std::string out;
	std::string config_file;
};

int cmd_train(const TrainArgs &a, const CliConfig &config, std::ostream &out)
{
	const auto corpus_bytes = read_file(a.corpus);
	const Corpus raw = load_jsonl(a.corpus);
	const Corpus view = task_view(raw, config.task, config.human_label, config.generator_subset);
	auto [tr, va, te] = split(view, config.train_frac, config.val_frac, config.train.seed);

	const auto train_data = prepare_data(tr, config.encoder);
	const auto val_data = prepare_data(va, config.encoder);
	const auto result = train(train_data, config.encoder, config.train, &val_data);

	Checkpoint ckpt;
	ckpt.params = result.params;
	ckpt.train_config = config.train;
	ckpt.step = config.train.steps;
	ckpt.run = run_info(config, corpus_bytes);
	const auto bytes = serialize_checkpoint(ckpt);
	const auto hash = checkpoint_hash(bytes);

	const auto index = compute_centroids(embed_all(result.params, train_data.inputs), tr.labels())
	                       .with_encoder_hash(hash);

	const fs::path dir(a.out);
	fs::create_directories(dir);
	write_file_atomic(dir / "model.wai1", bytes);
	save_index(index, dir / "centroids.json");
	write_file_atomic(dir / "log.jsonl", result.log.to_jsonl());

	out << "trained " << config.train.steps << " steps on " << tr.size() << " documents, " << tr.num_categories()
	    << " categories\n";
	if (!result.log.snapshots.empty())
	{
		const auto &s = result.log.snapshots.back();
		out << "validation f1 " << format_double(s.val_f1) << " intra " << format_double(s.intra) << " inter "
		    << format_double(s.inter) << "\n";
	}
	out << "wrote " << (dir / "model.wai1").string() << " (" << hash << ")\n";
	return kExitOk;
}

struct EvalArgs
{
	std::string checkpoint;
	std::string centroids;
	std::string corpus;
	std::string split = "test";
	std::string report;
	std::string confusion_csv;
};

int cmd_eval(const EvalArgs &a, std::ostream &out, std::ostream &err)
{
	std::string hash;
	const auto ckpt = load_checked(a.checkpoint, &hash);
	const auto index = load_store_for(a.centroids, ckpt, hash, err);
	const Corpus docs = run_view(load_jsonl(a.corpus), ckpt.run, a.split);
	if (docs.size() == 0)
		throw Error("no documents to evaluate");

	const auto embeddings = embed_corpus(ckpt.params, docs);
	const auto categories = index.labels();
	std::vector<std::string> truth = docs.labels(), preds;
	for (const auto &label : truth)
		if (!index.contains(label))
			throw Error("label '" + label + "' is not in the centroid store");
	for (const auto &h : embeddings)
		preds.push_back(predict(index, h).label);

	const auto matrix = confusion(truth, preds, categories);
	EvalReport report;
	report.scores = weighted_prf(matrix);
	report.n = static_cast<std::int64_t>(docs.size());
	std::vector<int> ids;
	for (const auto &label : truth)
		ids.push_back(static_cast<int>(std::lower_bound(categories.begin(), categories.end(), label) -
		                               categories.begin()));
	try
	{
		report.intra = intra_similarity(embeddings, ids);
		report.inter = inter_similarity(embeddings, ids);
	}
	catch (const Error &e)
	{
		err << "warning: " << e.what() << "\n";
	}
	report.centroid_similarity = centroid_similarity_matrix(index);
	report.centroid_labels = categories;

	const auto text = report_to_json(report);
	if (a.report.empty())
		out << text << "\n";
	else
		write_file_atomic(a.report, text + "\n");
	if (!a.confusion_csv.empty())
		write_file_atomic(a.confusion_csv, confusion_to_csv(matrix));
	return kExitOk;
}

struct ClassifyArgs
{
	std::string checkpoint;
	std::string centroids;
	std::string input;
	std::string out;
};

int cmd_classify(const ClassifyArgs &a, std::ostream &out, std::ostream &err, std::istream &in)
{
	std::string hash;
	const auto ckpt = load_checked(a.checkpoint, &hash);
	const auto index = load_store_for(a.centroids, ckpt, hash, err);

	std::vector<std::pair<std::string, std::string>> docs;
	if (!a.input.empty())
	{
		std::istringstream lines(read_file(a.input));
		std::string line;
		for (std::size_t n = 1; std::getline(lines, line); ++n)
		{
			if (trim(line).empty())
				continue;
			try
			{
				const auto doc = json::parse(line);
				docs.emplace_back(doc.at("id").get<std::string>(), doc.at("text").get<std::string>());
			}
			catch (const json::exception &e)
			{
				throw Error(a.input + ":" + std::to_string(n) + ": " + e.what());
			}
		}
	}
	else
	{
		std::string line;
		for (std::size_t n = 1; std::getline(in, line); ++n)
			docs.emplace_back(std::to_string(n), line);
	}

	std::string result;
	for (const auto &[id, text] : docs)
	{
		ordered_json rec;
		rec["id"] = id;
		try
		{
			const auto h = encode(ckpt.params, tokenize(text));
			const auto p = predict(index, h.cast<double>());
			rec["predicted_label"] = p.label;
			ordered_json dist = ordered_json::object();
			for (std::size_t k = 0; k < index.size(); ++k)
				dist[index.centroids()[k].label] = p.distances[k];
			rec["distances"] = dist;
		}
		catch (const Error &e)
		{
			rec["error"] = e.what();
			err << "document " << id << ": " << e.what() << "\n";
		}
		result += rec.dump() + "\n";
	}
	if (a.out.empty())
		out << result;
	else
		write_file_atomic(a.out, result);
	return kExitOk;
}

struct RegisterArgs
{
	std::string checkpoint;
	std::string centroids;
	std::string corpus;
	std::string label;
	std::string out;
};

int cmd_register(const RegisterArgs &a, std::ostream &out, std::ostream &err)
{
	if (fs::weakly_canonical(a.out) == fs::weakly_canonical(a.centroids))
		throw UsageError("--out must differ from --centroids; the input store is never modified");
	std::string hash;
	const auto ckpt = load_checked(a.checkpoint, &hash);
	const auto index = load_store_for(a.centroids, ckpt, hash, err);
	const Corpus corpus = load_jsonl(a.corpus);
	std::string label = a.label;
	if (label.empty())
	{
		if (corpus.num_categories() != 1)
			throw UsageError("--label is required when the corpus has more than one label");
		label = corpus.categories().front();
	}
	if (!corpus.has_category(label))
		throw Error("corpus has no documents labeled '" + label + "'");
	const Corpus docs = corpus.filter_labels({label});
	const auto updated = register_category(index, embed_corpus(ckpt.params, docs), label);
	save_index(updated, a.out);
	out << "registered " << label << " from " << docs.size() << " documents; store has " << updated.size()
	    << " categories\n";
	return kExitOk;
}

struct ProjectArgs
{
	std::string checkpoint;
	std::string corpus;
	std::string split = "test";
	std::string out;
};

int cmd_project(const ProjectArgs &a, std::ostream &out)
{
	const auto ckpt = load_checked(a.checkpoint, nullptr);
	const Corpus docs = run_view(load_jsonl(a.corpus), ckpt.run, a.split);
	if (docs.size() < 3)
		throw Error("projection needs at least 3 documents, got " + std::to_string(docs.size()));
	const MatD xy = pca_project(embed_corpus(ckpt.params, docs), 2);
	std::string csv = "id,label,x,y\n";
	for (std::size_t i = 0; i < docs.size(); ++i)
	{
		const auto &d = docs.docs()[i];
		const auto r = static_cast<Eigen::Index>(i);
		csv += csv_quote(d.id) + "," + csv_quote(d.label) + "," + format_double(xy(r, 0)) + "," +
		       format_double(xy(r, 1)) + "\n";
	}
	if (a.out.empty())
		out << csv;
	else
		write_file_atomic(a.out, csv);
	return kExitOk;
}

struct GradCheckArgs
{
	std::uint64_t seed = 0;
	std::size_t instances = 5;
	double fd_step = 1e-4;
	std::size_t max_params = 200;
};

constexpr double kGradTolerance = 1e-4;

int cmd_grad_check(const GradCheckArgs &a, std::ostream &out)
{
	GradCheckOptions options;
	options.fd_step = a.fd_step;
	options.max_params = a.max_params;
	double worst = 0.0;
	std::string worst_name;
	for (std::size_t k = 0; k < a.instances; ++k)
	{
		const auto inst = make_grad_check_instance(mix_seed(a.seed, k));
		options.seed = mix_seed(a.seed, 1000 + k);
		const auto r = grad_check(inst.params, inst.batch, inst.labels, options);
		out << "instance " << k << ": checked " << r.checked << " max relative error "
		    << format_double(r.max_relative_error) << " at " << r.worst_parameter << "\n";
		if (r.max_relative_error >= worst)
		{
			worst = r.max_relative_error;
			worst_name = r.worst_parameter;
		}
	}
	const bool ok = worst < kGradTolerance;
	out << "worst parameter " << worst_name << " relative error " << format_double(worst) << " "
	    << (ok ? "ok" : "FAILED") << "\n";
	return ok ? kExitOk : kExitFailure;
}

} // namespace

// ---------------------------------------------------------------------------
// Config

const std::vector<std::string> &config_keys()
{
	static const std::vector<std::string> keys = [] {
		std::vector<std::string> k;
		for (const auto &info : key_table())
			k.emplace_back(info.key);
		return k;
	}();
	return keys;
}

std::map<std::string, std::string> parse_config_text(const std::string &text)
{
	std::map<std::string, std::string> out;
	std::istringstream in(text);
	std::string line;
	const auto &keys = config_keys();
	for (std::size_t n = 1; std::getline(in, line); ++n)
	{
		if (const auto hash = line.find('#'); hash != std::string::npos)
			line.erase(hash);
		if (trim(line).empty())
			continue;
		const auto eq = line.find('=');
		if (eq == std::string::npos)
			throw UsageError("config line " + std::to_string(n) + ": expected key = value");
		const auto key = trim(line.substr(0, eq));
		const auto value = trim(line.substr(eq + 1));
		if (std::find(keys.begin(), keys.end(), key) == keys.end())
			throw UsageError("config line " + std::to_string(n) + ": unknown key '" + key + "'");
		if (!out.emplace(key, value).second)
			throw UsageError("config line " + std::to_string(n) + ": duplicate key '" + key + "'");
	}
	return out;
}

void apply_setting(CliConfig &c, const std::string &key, const std::string &value)
{
	auto &t = c.train;
	auto &e = c.encoder;
	if (key == "preset")
	{
		if (value == "desk")
			t = TrainConfig::desk();
		else if (value == "paper")
			t = TrainConfig::paper();
		else
			throw UsageError("unknown preset '" + value + "' (expected desk or paper)");
		c.preset = value;
	}
	else if (key == "task")
	{
		if (value != "aa" && value != "tt")
			throw UsageError("unknown task '" + value + "' (expected aa or tt)");
		c.task = value;
	}
	else if (key == "human_label")
		c.human_label = value;
	else if (key == "generator_subset")
	{
		try
		{
			parse_generator_subset(value);
		}
		catch (const Error &err)
		{
			throw UsageError(err.what());
		}
		c.generator_subset = value;
	}
	else if (key == "train_frac")
		c.train_frac = parse_number<double>(key, value);
	else if (key == "val_frac")
		c.val_frac = parse_number<double>(key, value);
	else if (key == "seed")
		t.seed = parse_number<std::uint64_t>(key, value);
	else if (key == "ngram_n")
		e.ngram_n = parse_number<int>(key, value);
	else if (key == "vocab_size")
		e.vocab_size = parse_number<int>(key, value);
	else if (key == "embed_dim")
		e.embed_dim = parse_number<int>(key, value);
	else if (key == "hidden_dim")
		e.hidden_dim = parse_number<int>(key, value);
	else if (key == "out_dim")
		e.out_dim = parse_number<int>(key, value);
	else if (key == "steps")
		t.steps = parse_number<std::int64_t>(key, value);
	else if (key == "batch_size")
		t.batch_size = parse_number<int>(key, value);
	else if (key == "lr")
		t.lr = parse_number<double>(key, value);
	else if (key == "beta1")
		t.adamw.beta1 = parse_number<double>(key, value);
	else if (key == "beta2")
		t.adamw.beta2 = parse_number<double>(key, value);
	else if (key == "weight_decay")
		t.adamw.weight_decay = parse_number<double>(key, value);
	else if (key == "adam_eps")
		t.adamw.eps = parse_number<double>(key, value);
	else if (key == "warmup_steps")
		t.warmup_steps = parse_number<std::int64_t>(key, value);
	else if (key == "lambda_min")
		t.margin.lambda_min = parse_number<double>(key, value);
	else if (key == "lambda_delta")
		t.margin.lambda_delta = parse_number<double>(key, value);
	else if (key == "margin_step")
		t.margin.step_size = parse_number<std::int64_t>(key, value);
	else if (key == "margin_mode")
	{
		try
		{
			t.margin.mode = parse_margin_mode(value);
		}
		catch (const Error &err)
		{
			throw UsageError(err.what());
		}
	}
	else if (key == "dynamic_margin")
	{
		if (!parse_switch(key, value))
			t.margin.lambda_delta = 0.0;
	}
	else if (key == "miner")
	{
		t.miner_enabled = parse_switch(key, value);
		t.triplet_mode = t.miner_enabled ? TripletMode::online : TripletMode::offline;
	}
	else if (key == "miner_epsilon")
		t.miner.epsilon = parse_number<double>(key, value);
	else if (key == "corruption")
	{
		try
		{
			t.corruption = parse_corruption_mode(value);
		}
		catch (const Error &err)
		{
			throw UsageError(err.what());
		}
	}
	else if (key == "p")
		t.corruption_config.p = parse_number<double>(key, value);
	else if (key == "p_s")
		t.corruption_config.p_s = parse_number<double>(key, value);
	else if (key == "p_span")
		t.corruption_config.p_span = parse_number<double>(key, value);
	else if (key == "distance")
	{
		try
		{
			t.distance = parse_distance_kind(value);
		}
		catch (const Error &err)
		{
			throw UsageError(err.what());
		}
	}
	else if (key == "max_grad_norm")
		t.max_grad_norm = parse_number<double>(key, value);
	else if (key == "max_classes_per_batch")
		t.max_classes_per_batch = parse_number<int>(key, value);
	else if (key == "eval_every")
		t.eval_every = parse_number<std::int64_t>(key, value);
	else
		throw UsageError("unknown setting '" + key + "'");
}

CliConfig make_cli_config(const std::map<std::string, std::string> &overrides)
{
	CliConfig c;
	if (const auto it = overrides.find("preset"); it != overrides.end())
		apply_setting(c, "preset", it->second);
	// dynamic_margin=off must win over an explicit lambda_delta, so it goes last.
	for (const auto &[key, value] : overrides)
		if (key != "preset" && key != "dynamic_margin")
			apply_setting(c, key, value);
	if (const auto it = overrides.find("dynamic_margin"); it != overrides.end())
		apply_setting(c, "dynamic_margin", it->second);
	try
	{
		c.encoder.validate();
		c.train.validate();
		c.train.corruption_config.validate();
		if (!(c.train_frac > 0.0 && c.val_frac >= 0.0 && c.train_frac + c.val_frac < 1.0))
			throw Error("train_frac and val_frac must be positive and sum to less than 1");
	}
	catch (const UsageError &)
	{
		throw;
	}
	catch (const Error &e)
	{
		throw UsageError(e.what());
	}
	return c;
}

// ---------------------------------------------------------------------------
// Entry point

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err, std::istream &in)
{
	CLI::App app{"Contrastive authorship detection and attribution"};
	app.require_subcommand(1);

	SynthArgs synth_args;
	auto *synth = app.add_subcommand("synth", "write a synthetic multi-generator corpus");
	synth->add_option("--generators", synth_args.generators, "number of Markov generators")->capture_default_str();
	synth->add_option("--per-class", synth_args.per_class, "documents per class")->capture_default_str();
	synth->add_option("--seed", synth_args.seed, "random seed")->capture_default_str();
	synth->add_option("--doc-length", synth_args.doc_length, "tokens per document")->capture_default_str();
	synth->add_option("--human-source", synth_args.human_source, "plain-text human seed (default: built in)");
	synth->add_option("--out", synth_args.out, "output JSONL path")->required();

	TrainArgs train_args;
	std::map<std::string, std::string> train_flags;
	auto *train_cmd = app.add_subcommand("train", "train an encoder and write model, centroids and log");
	train_cmd->add_option("--corpus", train_args.corpus, "JSONL corpus")->required();
	train_cmd->add_option("--out", train_args.out, "output directory")->required();
	train_cmd->add_option("--config", train_args.config_file, "key = value settings file");
	std::vector<std::pair<std::string, CLI::Option *>> setting_opts;
	for (const auto &info : key_table())
		setting_opts.emplace_back(info.key,
		                          train_cmd->add_option("--" + dashed(info.key), train_flags[info.key], info.help));

	EvalArgs eval_args;
	auto *eval_cmd = app.add_subcommand("eval", "score a trained model on a corpus split");
	eval_cmd->add_option("--checkpoint", eval_args.checkpoint, "model.wai1 path")->required();
	eval_cmd->add_option("--centroids", eval_args.centroids, "centroid store path")->required();
	eval_cmd->add_option("--corpus", eval_args.corpus, "JSONL corpus used for training")->required();
	eval_cmd->add_option("--split", eval_args.split, "train, val, test or all")
	    ->check(CLI::IsMember({"train", "val", "test", "all"}))
	    ->capture_default_str();
	eval_cmd->add_option("--report", eval_args.report, "report JSON path (default: stdout)");
	eval_cmd->add_option("--confusion", eval_args.confusion_csv, "confusion matrix CSV path");

	ClassifyArgs classify_args;
	auto *classify_cmd = app.add_subcommand("classify", "predict labels for new texts");
	classify_cmd->add_option("--checkpoint", classify_args.checkpoint, "model.wai1 path")->required();
	classify_cmd->add_option("--centroids", classify_args.centroids, "centroid store path")->required();
	classify_cmd->add_option("--input", classify_args.input, "JSONL with id and text (default: stdin lines)");
	classify_cmd->add_option("--out", classify_args.out, "output JSONL path (default: stdout)");

	RegisterArgs register_args;
	auto *register_cmd = app.add_subcommand("register", "add a category to a centroid store without retraining");
	register_cmd->add_option("--checkpoint", register_args.checkpoint, "model.wai1 path")->required();
	register_cmd->add_option("--centroids", register_args.centroids, "input centroid store")->required();
	register_cmd->add_option("--corpus", register_args.corpus, "JSONL with the new category's documents")->required();
	register_cmd->add_option("--label", register_args.label, "label to register (default: the corpus's only label)");
	register_cmd->add_option("--out", register_args.out, "output centroid store")->required();

	ProjectArgs project_args;
	auto *project_cmd = app.add_subcommand("project", "write 2-D PCA coordinates of embeddings");
	project_cmd->add_option("--checkpoint", project_args.checkpoint, "model.wai1 path")->required();
	project_cmd->add_option("--corpus", project_args.corpus, "JSONL corpus")->required();
	project_cmd->add_option("--split", project_args.split, "train, val, test or all")
	    ->check(CLI::IsMember({"train", "val", "test", "all"}))
	    ->capture_default_str();
	project_cmd->add_option("--out", project_args.out, "output CSV path (default: stdout)");

	GradCheckArgs gc_args;
	auto *gc_cmd = app.add_subcommand("grad-check", "compare analytic and finite-difference gradients");
	gc_cmd->add_option("--seed", gc_args.seed, "instance seed")->capture_default_str();
	gc_cmd->add_option("--instances", gc_args.instances, "random instances")->capture_default_str();
	gc_cmd->add_option("--fd-step", gc_args.fd_step, "central-difference step")->capture_default_str();
	gc_cmd->add_option("--max-params", gc_args.max_params, "parameters sampled per instance")->capture_default_str();

	std::vector<std::string> argv_store;
	argv_store.reserve(args.size() + 1);
	argv_store.emplace_back("whosai");
	argv_store.insert(argv_store.end(), args.begin(), args.end());
	std::vector<const char *> argv;
	for (const auto &s : argv_store)
		argv.push_back(s.c_str());

	try
	{
		app.parse(static_cast<int>(argv.size()), argv.data());
	}
	catch (const CLI::ParseError &e)
	{
		const int code = app.exit(e, out, err);
		return code == 0 ? kExitOk : kExitUsage;
	}

	try
	{
		if (synth->parsed())
			return cmd_synth(synth_args, out);
		if (train_cmd->parsed())
		{
			std::map<std::string, std::string> settings;
			if (!train_args.config_file.empty())
				settings = parse_config_text(read_file(train_args.config_file));
			for (const auto &[key, opt] : setting_opts)
				if (opt->count() > 0)
					settings[key] = train_flags[key];
			return cmd_train(train_args, make_cli_config(settings), out);
		}
		if (eval_cmd->parsed())
			return cmd_eval(eval_args, out, err);
		if (classify_cmd->parsed())
			return cmd_classify(classify_args, out, err, in);
		if (register_cmd->parsed())
			return cmd_register(register_args, out, err);
		if (project_cmd->parsed())
			return cmd_project(project_args, out);
		if (gc_cmd->parsed())
			return cmd_grad_check(gc_args, out);
	}
	catch (const UsageError &e)
	{
		err << "usage error: " << e.what() << "\n";
		return kExitUsage;
	}
	catch (const std::exception &e)
	{
		err << "error: " << e.what() << "\n";
		return kExitFailure;
	}
	return kExitUsage;
}

} // namespace whosai
