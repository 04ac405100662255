// Acceptance checks. Prints one line per criterion; with a criterion number
// as argument runs only that one and exits nonzero on FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include <nlohmann/json.hpp>

#include "whosai/checkpoint.hpp"
#include "whosai/classify.hpp"
#include "whosai/cli.hpp"
#include "whosai/contrastive.hpp"
#include "whosai/corpus.hpp"
#include "whosai/eval.hpp"
#include "whosai/gradcheck.hpp"
#include "whosai/io.hpp"
#include "whosai/textproc.hpp"
#include "whosai/trainer.hpp"

namespace fs = std::filesystem;
using namespace whosai;

namespace
{

struct Verdict
{
	bool pass = false;
	std::string detail;
};

std::string fmt(const char *format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char *format, ...)
{
	char buf[512];
	va_list args;
	va_start(args, format);
	std::vsnprintf(buf, sizeof buf, format, args);
	va_end(args);
	return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
	return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Scratch directory shared by the end-to-end criteria of one process.
class Workspace
{
public:
	Workspace()
	    : root_(fs::temp_directory_path() / ("whosai_acceptance_" + std::to_string(::getpid())))
	{
		fs::create_directories(root_);
	}
	~Workspace()
	{
		std::error_code ec;
		fs::remove_all(root_, ec);
	}
	std::string path(const std::string &name) const { return (root_ / name).string(); }

private:
	fs::path root_;
};

Workspace &workspace()
{
	static Workspace ws;
	return ws;
}

void cli_or_throw(const std::vector<std::string> &args)
{
	std::ostringstream out, err;
	std::istringstream in;
	const int code = run_cli(args, out, err, in);
	if (code != 0)
		throw Error(args[0] + " exited with " + std::to_string(code) + ": " + err.str());
}

constexpr std::uint64_t kSeed = 42;

// 5 generators + human, 400 documents per class.
const std::string &full_corpus()
{
	static const std::string path = [] {
		const auto p = workspace().path("corpus.jsonl");
		cli_or_throw({"synth", "--generators", "5", "--per-class", "400", "--seed", std::to_string(kSeed), "--out", p});
		return p;
	}();
	return path;
}

struct RunOutcome
{
	std::string dir;
	double f1 = 0;
	double seconds = 0;
};

// Train with the desk preset at seed 42 and evaluate on the held-out split.
const RunOutcome &trained(const std::string &name, const std::string &corpus, std::vector<std::string> extra)
{
	static std::map<std::string, RunOutcome> cache;
	if (auto it = cache.find(name); it != cache.end())
		return it->second;
	RunOutcome r;
	r.dir = workspace().path(name);
	std::vector<std::string> args = {"train", "--corpus", corpus, "--out", r.dir, "--preset", "desk",
	                                 "--steps", "3000", "--seed", std::to_string(kSeed)};
	args.insert(args.end(), extra.begin(), extra.end());
	const auto t0 = std::chrono::steady_clock::now();
	cli_or_throw(args);
	r.seconds = seconds_since(t0);
	cli_or_throw({"eval", "--checkpoint", r.dir + "/model.wai1", "--centroids", r.dir + "/centroids.json", "--corpus",
	              corpus, "--split", "test", "--report", r.dir + "/report.json"});
	r.f1 = nlohmann::json::parse(read_file(r.dir + "/report.json")).at("f1").get<double>();
	return cache.emplace(name, r).first->second;
}

const RunOutcome &tt_run() { return trained("tt", full_corpus(), {"--task", "tt"}); }
const RunOutcome &aa_run() { return trained("aa", full_corpus(), {"--task", "aa"}); }

std::vector<VecD> random_points(Rng &rng, int n, int dim)
{
	std::vector<VecD> out;
	for (int i = 0; i < n; ++i)
	{
		VecD v(dim);
		for (int k = 0; k < dim; ++k)
			v[k] = rng.normal();
		out.push_back(v);
	}
	return out;
}

double naive_cos(const VecD &a, const VecD &b)
{
	double ab = 0, aa = 0, bb = 0;
	for (Eigen::Index k = 0; k < a.size(); ++k)
	{
		ab += a[k] * b[k];
		aa += a[k] * a[k];
		bb += b[k] * b[k];
	}
	return ab / std::sqrt(aa * bb);
}

// ---------------------------------------------------------------------------

Verdict gradient_correctness()
{
	const auto t0 = std::chrono::steady_clock::now();
	double worst = 0.0;
	std::string where;
	for (std::uint64_t seed = 0; seed < 5; ++seed)
	{
		const auto inst = make_grad_check_instance(seed);
		const auto r = grad_check(inst.params, inst.batch, inst.labels);
		if (r.max_relative_error >= worst)
		{
			worst = r.max_relative_error;
			where = r.worst_parameter;
		}
	}
	const double secs = seconds_since(t0);
	return {worst < 1e-4 && secs < 5.0,
	        fmt("5 instances, max relative error %.3g at %s, %.2fs", worst, where.c_str(), secs)};
}

Verdict miner_oracle()
{
	Rng rng(2);
	int mismatches = 0;
	std::size_t mined = 0;
	for (int b = 0; b < 100; ++b)
	{
		const int n = 2 + static_cast<int>(rng.below(15));
		const int classes = 2 + static_cast<int>(rng.below(4));
		std::vector<int> labels(n);
		for (auto &l : labels)
			l = static_cast<int>(rng.below(classes));
		const auto pts = random_points(rng, n, 4);
		const double eps = rng.uniform(0.0, 0.3);

		std::vector<std::vector<double>> d(n, std::vector<double>(n));
		for (int i = 0; i < n; ++i)
			for (int j = 0; j < n; ++j)
				d[i][j] = cosine_distance(pts[i], pts[j]);

		std::set<IndexPair> pos, neg;
		for (int a = 0; a < n; ++a)
			for (int j = 0; j < n; ++j)
			{
				if (j == a)
					continue;
				bool has_p = false, has_n = false;
				double max_p = -1e300, min_n = 1e300;
				for (int k = 0; k < n; ++k)
				{
					if (k == a)
						continue;
					if (labels[k] == labels[a])
						has_p = true, max_p = std::max(max_p, d[a][k]);
					else
						has_n = true, min_n = std::min(min_n, d[a][k]);
				}
				if (!has_p || !has_n)
					continue;
				if (labels[j] == labels[a] && d[a][j] > min_n - eps)
					pos.insert({a, j});
				if (labels[j] != labels[a] && d[a][j] < max_p + eps)
					neg.insert({a, j});
			}

		const auto got = mine_pairs(pts, labels, eps);
		const std::set<IndexPair> got_pos(got.positives.begin(), got.positives.end());
		const std::set<IndexPair> got_neg(got.negatives.begin(), got.negatives.end());
		mined += got.size();
		if (got_pos != pos || got_neg != neg || got_pos.size() != got.positives.size() ||
		    got_neg.size() != got.negatives.size())
			++mismatches;
	}
	return {mismatches == 0, fmt("100 batches, %zu pairs mined, %d mismatches", mined, mismatches)};
}

Verdict loss_oracle()
{
	Rng rng(3);
	double worst = 0.0;
	for (int i = 0; i < 100; ++i)
	{
		const std::size_t n = rng.below(200);
		std::vector<double> ap(n), an(n);
		for (std::size_t k = 0; k < n; ++k)
		{
			ap[k] = rng.uniform(0.0, 2.0);
			an[k] = rng.uniform(0.0, 2.0);
		}
		const double margin = rng.uniform(0.0, 1.0);
		double naive = 0.0;
		for (std::size_t k = 0; k < n; ++k)
			naive += std::max(ap[k] - an[k] + margin, 0.0);
		worst = std::max(worst, std::abs(triplet_loss(ap, an, margin).loss - naive));
	}
	return {worst <= 1e-9, fmt("100 instances, max abs difference %.3g", worst)};
}

Verdict centroid_oracle()
{
	Rng rng(4);
	int mismatches = 0, ties = 0;
	for (int t = 0; t < 10; ++t)
	{
		const int m = 2 + static_cast<int>(rng.below(7));
		const int dim = 2 + static_cast<int>(rng.below(5));
		std::vector<Centroid> cs;
		for (int k = 0; k < m; ++k)
			cs.push_back({"c" + std::to_string(rng.below(1000)) + "_" + std::to_string(k), random_points(rng, 1, dim)[0]});
		// The same vector under a second label: queries along it tie exactly.
		cs.push_back({"a_tie" + std::to_string(t), cs[0].vec});
		const CentroidIndex index(cs);

		for (int q = 0; q < 100; ++q)
		{
			VecD h = q % 10 == 0 ? VecD(cs[0].vec * rng.uniform(0.5, 2.0)) : random_points(rng, 1, dim)[0];
			std::string best;
			double best_d = 1e300;
			for (const auto &c : cs)
			{
				const double d = 1.0 - naive_cos(h, c.vec);
				if (d < best_d || (d == best_d && c.label < best))
					best_d = d, best = c.label;
			}
			if (q % 10 == 0)
				++ties;
			if (predict(index, h).label != best)
				++mismatches;
		}
	}
	return {mismatches == 0, fmt("10 indices x 100 queries, %d exact ties, %d mismatches", ties, mismatches)};
}

Verdict margin_schedule()
{
	MarginSchedule s;
	s.lambda_min = 0.1;
	s.lambda_delta = 0.025;
	s.step_size = 750;
	const std::vector<std::pair<std::int64_t, double>> expected = {
	    {0, 0.1}, {749, 0.1}, {750, 0.125}, {1500, 0.15}, {30000, 1.1}};
	double worst = 0.0;
	for (const auto &[t, v] : expected)
		worst = std::max(worst, std::abs(margin_at(s, t) - v));
	s.mode = MarginMode::paper_mod;
	for (const auto &[t, v] : expected)
	{
		(void)v;
		const double literal = 0.1 + 0.025 * static_cast<double>(t % 750);
		worst = std::max(worst, std::abs(margin_at(s, t) - literal));
	}
	return {worst <= 1e-12, fmt("10 points, max deviation %.3g", worst)};
}

Verdict corruption_statistics()
{
	const std::size_t n = 1000, trials = 10000;
	std::vector<int> tokens(n);
	for (std::size_t i = 0; i < n; ++i)
		tokens[i] = static_cast<int>(i);

	Rng rng(6);
	std::size_t deleted = 0;
	bool any_empty = false;
	for (std::size_t t = 0; t < trials; ++t)
	{
		const auto out = token_delete(tokens, 0.05, rng);
		deleted += n - out.size();
		any_empty |= out.empty();
	}
	const double rate = static_cast<double>(deleted) / static_cast<double>(n * trials);

	const double p_s = 0.05, p_span = 0.05;
	double span_deleted = 0;
	for (std::size_t t = 0; t < trials; ++t)
	{
		const auto out = span_crop(tokens, p_s, p_span, rng);
		span_deleted += static_cast<double>(n - out.size());
		any_empty |= out.empty();
	}
	const double mean = span_deleted / trials;
	const auto max_sz = static_cast<std::size_t>(std::floor(n * p_span));
	const double stated = n * p_s * (static_cast<double>(max_sz) / 2.0);

	// Probability that a token is covered by some span, with overlaps and the
	// sequence start accounted for.
	double overlap_aware = 0.0;
	for (std::size_t i = 0; i < n; ++i)
	{
		double keep = 1.0;
		for (std::size_t k = 0; k <= std::min(i, max_sz); ++k)
			keep *= 1.0 - p_s * static_cast<double>(max_sz - k) / static_cast<double>(max_sz + 1);
		overlap_aware += 1.0 - keep;
	}

	const bool delete_ok = std::abs(rate - 0.05) <= 0.005;
	const bool span_ok = std::abs(mean - stated) <= 1.5;
	return {delete_ok && span_ok && !any_empty,
	        fmt("token_delete rate %.5f; span_crop mean %.2f vs stated expectation %.1f (overlap-aware %.2f); "
	            "empty outputs: %s",
	            rate, mean, stated, overlap_aware, any_empty ? "yes" : "none")};
}

Verdict similarity_oracle()
{
	Rng rng(7);
	double worst = 0.0;
	for (int t = 0; t < 20; ++t)
	{
		const int n = 4 + static_cast<int>(rng.below(197));
		const int classes = 2 + static_cast<int>(rng.below(5));
		std::vector<int> labels(n);
		for (int i = 0; i < n; ++i)
			labels[i] = i < classes * 2 ? i % classes : static_cast<int>(rng.below(classes));
		const auto pts = random_points(rng, n, 8);

		double intra = 0.0;
		for (int c = 0; c < classes; ++c)
		{
			double acc = 0;
			int pairs = 0;
			for (int i = 0; i < n; ++i)
				for (int j = i + 1; j < n; ++j)
					if (labels[i] == c && labels[j] == c)
						acc += naive_cos(pts[i], pts[j]), ++pairs;
			intra += acc / pairs;
		}
		intra /= classes;

		double inter = 0.0;
		int class_pairs = 0;
		for (int c = 0; c < classes; ++c)
			for (int e = c + 1; e < classes; ++e)
			{
				double acc = 0;
				int pairs = 0;
				for (int i = 0; i < n; ++i)
					for (int j = 0; j < n; ++j)
						if (labels[i] == c && labels[j] == e)
							acc += naive_cos(pts[i], pts[j]), ++pairs;
				inter += acc / pairs;
				++class_pairs;
			}
		inter /= class_pairs;

		worst = std::max({worst, std::abs(intra_similarity(pts, labels) - intra),
		                  std::abs(inter_similarity(pts, labels) - inter)});
	}
	return {worst <= 1e-12, fmt("20 instances, max abs difference %.3g", worst)};
}

Verdict turing_test()
{
	const auto &r = tt_run();
	return {r.f1 >= 0.95 && r.seconds < 600.0, fmt("held-out weighted F1 %.4f, training %.1fs", r.f1, r.seconds)};
}

Verdict authorship_attribution()
{
	const auto &r = aa_run();
	return {r.f1 >= 0.85, fmt("held-out weighted F1 %.4f, training %.1fs", r.f1, r.seconds)};
}

Verdict cohesion_trend()
{
	const auto &r = tt_run();
	std::vector<nlohmann::json> snaps;
	std::istringstream lines(read_file(r.dir + "/log.jsonl"));
	std::string line;
	while (std::getline(lines, line))
	{
		auto rec = nlohmann::json::parse(line);
		if (rec.contains("snapshot"))
			snaps.push_back(std::move(rec));
	}
	if (snaps.size() < 2 || snaps.front().at("snapshot") != 0)
		return {false, "log has no initial and final snapshot"};
	const double i0 = snaps.front().at("intra"), i1 = snaps.back().at("intra");
	const double e0 = snaps.front().at("inter"), e1 = snaps.back().at("inter");
	return {i1 >= i0 + 0.05 && e1 <= e0 - 0.05,
	        fmt("intra %.4f -> %.4f, inter %.4f -> %.4f (validation split)", i0, i1, e0, e1)};
}

Verdict ablation()
{
	const auto &full = aa_run();
	const auto &plain = trained("aa_plain", full_corpus(), {"--task", "aa", "--miner", "off", "--dynamic-margin", "off"});
	const bool ok = plain.f1 <= full.f1 + 0.02 && full.f1 >= plain.f1 - 0.02;
	return {ok, fmt("full F1 %.4f, no miner + static margin F1 %.4f", full.f1, plain.f1)};
}

double accuracy(const CentroidIndex &index, const EncoderParams &params, const Corpus &docs)
{
	const auto emb = embed_all(params, prepare_data(docs, params.config).inputs);
	std::size_t hit = 0;
	for (std::size_t i = 0; i < docs.size(); ++i)
		hit += predict(index, emb[i]).label == docs.docs()[i].label;
	return static_cast<double>(hit) / static_cast<double>(docs.size());
}

Verdict registration()
{
	const Corpus all = load_jsonl(full_corpus());
	const std::string held_out = "gen-4";
	std::vector<std::string> old_labels;
	for (const auto &c : all.categories())
		if (c != held_out)
			old_labels.push_back(c);
	const auto old_path = workspace().path("old.jsonl");
	const Corpus old = all.filter_labels(old_labels);
	save_jsonl(old, old_path);

	auto [new_train, new_val, new_test] = split(all.filter_labels({held_out}), 0.8, 0.1, kSeed);
	const auto new_path = workspace().path("new.jsonl");
	save_jsonl(new_train, new_path);

	const auto &run = trained("old", old_path, {"--task", "aa"});
	const auto registered = workspace().path("registered.json");
	cli_or_throw({"register", "--checkpoint", run.dir + "/model.wai1", "--centroids", run.dir + "/centroids.json",
	              "--corpus", new_path, "--out", registered});

	const auto params = load_checkpoint(run.dir + "/model.wai1").params;
	const auto before_index = load_index(run.dir + "/centroids.json");
	const auto after_index = load_index(registered);
	auto [old_train, old_val, old_test] = split(old, 0.8, 0.1, kSeed);

	const double new_acc = accuracy(after_index, params, new_test);
	const double old_before = accuracy(before_index, params, old_test);
	const double old_after = accuracy(after_index, params, old_test);
	return {after_index.size() == old_labels.size() + 1 && new_acc >= 0.80 && old_before - old_after < 0.05,
	        fmt("new-class accuracy %.4f; old classes %.4f -> %.4f", new_acc, old_before, old_after)};
}

Verdict determinism()
{
	SynthSpec spec;
	spec.n_generators = 2;
	spec.docs_per_class = 60;
	const auto corpus = workspace().path("small.jsonl");
	save_jsonl(synth_corpus(spec, 13), corpus);

	std::vector<std::string> files;
	for (const char *name : {"det_a", "det_b"})
	{
		const auto dir = workspace().path(name);
		cli_or_throw({"train", "--corpus", corpus, "--out", dir, "--steps", "300", "--eval-every", "100", "--seed", "13"});
		cli_or_throw({"eval", "--checkpoint", dir + "/model.wai1", "--centroids", dir + "/centroids.json", "--corpus",
		              corpus, "--report", dir + "/report.json"});
		for (const char *f : {"/model.wai1", "/centroids.json", "/log.jsonl", "/report.json"})
			files.push_back(read_file(dir + f));
	}
	int differing = 0;
	for (std::size_t i = 0; i < 4; ++i)
		differing += files[i] != files[i + 4];

	const auto bytes = files[0];
	const auto ckpt = deserialize_checkpoint(bytes);
	const bool ckpt_round = serialize_checkpoint(ckpt) == bytes &&
	                        bitwise_equal(ckpt.params, load_checkpoint(workspace().path("det_a/model.wai1")).params);
	const auto index = load_index(workspace().path("det_a/centroids.json"));
	const auto again = workspace().path("det_a/centroids_again.json");
	save_index(index, again);
	bool store_round = read_file(again) == files[1] && load_index(again) == index;
	for (std::size_t k = 0; k < index.size() && store_round; ++k)
		store_round = std::memcmp(index.centroids()[k].vec.data(), load_index(again).centroids()[k].vec.data(),
		                          sizeof(double) * static_cast<std::size_t>(index.dim())) == 0;
	return {differing == 0 && ckpt_round && store_round,
	        fmt("%d of 4 artifacts differ between identical runs; checkpoint round trip %s; store round trip %s",
	            differing, ckpt_round ? "exact" : "differs", store_round ? "exact" : "differs")};
}

const std::vector<std::pair<std::string, std::function<Verdict()>>> &criteria()
{
	static const std::vector<std::pair<std::string, std::function<Verdict()>>> list = {
	    {"gradient correctness", gradient_correctness},
	    {"miner oracle", miner_oracle},
	    {"loss oracle", loss_oracle},
	    {"centroid classifier oracle", centroid_oracle},
	    {"margin schedule", margin_schedule},
	    {"corruption statistics", corruption_statistics},
	    {"intra/inter oracle", similarity_oracle},
	    {"synthetic turing test", turing_test},
	    {"synthetic authorship attribution", authorship_attribution},
	    {"cohesion/separation trend", cohesion_trend},
	    {"ablation band", ablation},
	    {"incremental registration", registration},
	    {"determinism and round trips", determinism},
	};
	return list;
}

} // namespace

int main(int argc, char **argv)
{
	std::vector<std::size_t> which;
	if (argc > 1)
		for (int i = 1; i < argc; ++i)
		{
			const long n = std::strtol(argv[i], nullptr, 10);
			if (n < 1 || n > static_cast<long>(criteria().size()))
			{
				std::cerr << "usage: whosai_acceptance [criterion 1-" << criteria().size() << "]...\n";
				return 2;
			}
			which.push_back(static_cast<std::size_t>(n));
		}
	else
		for (std::size_t n = 1; n <= criteria().size(); ++n)
			which.push_back(n);

	int failures = 0;
	for (const auto n : which)
	{
		const auto &[name, fn] = criteria()[n - 1];
		Verdict v;
		try
		{
			v = fn();
		}
		catch (const std::exception &e)
		{
			v = {false, std::string("error: ") + e.what()};
		}
		failures += !v.pass;
		std::cout << "criterion " << n << ": " << (v.pass ? "PASS" : "FAIL") << "  " << name << "  " << v.detail
		          << std::endl;
	}
	return failures == 0 ? 0 : 1;
}
