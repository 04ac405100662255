#include "whosai/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace whosai
{

namespace
{

TripletSet all_triplets(const std::vector<int> &labels)
{
	Rng unused(0);
	MinedPairs all;
	const int n = static_cast<int>(labels.size());
	for (int a = 0; a < n; ++a)
		for (int j = 0; j < n; ++j)
		{
			if (j == a)
				continue;
			if (labels[j] == labels[a])
				all.positives.emplace_back(a, j);
			else
				all.negatives.emplace_back(a, j);
		}
	return build_triplets(all, TripletMode::online, labels, unused);
}

} // namespace

double pipeline_loss(const EncoderParamsT<double> &params, const std::vector<EncoderInput> &batch,
                     const std::vector<int> &labels, double margin)
{
	const auto h = encode_batch(params, batch);
	double loss = 0.0;
	for (const auto &t : all_triplets(labels))
		loss += std::max(0.0, cosine_distance(h[t.anchor], h[t.positive]) - cosine_distance(h[t.anchor], h[t.negative]) + margin);
	return loss;
}

ParamGradsT<double> pipeline_gradient(const EncoderParamsT<double> &params, const std::vector<EncoderInput> &batch,
                                      const std::vector<int> &labels, double margin)
{
	std::vector<ForwardCache<double>> caches;
	const auto h = encode_batch(params, batch, &caches);
	const auto upstream = loss_gradient(h, all_triplets(labels), margin);
	auto grads = ParamGradsT<double>::zeros(params.config);
	backward(params, batch, upstream, grads, &caches);
	return grads;
}

GradCheckResult grad_check(const EncoderParams &params_f, const std::vector<EncoderInput> &batch,
                           const std::vector<int> &labels, const GradCheckOptions &options)
{
	if (!(options.fd_step > 0.0) || !std::isfinite(options.fd_step))
		throw Error("grad_check: fd_step must be a positive finite number");
	if (batch.size() != labels.size())
		throw Error("grad_check: batch and label counts differ");

	auto params = params_f.cast<double>();
	auto analytic = pipeline_gradient(params, batch, labels, options.margin);
	if (options.corrupt_w2_grad != 0.0)
		analytic.w2 *= 1.0 + options.corrupt_w2_grad;

	// Feature-table rows that the batch actually touches.
	std::set<std::uint32_t> touched;
	for (const auto &input : batch)
		if (const auto *text = std::get_if<FeaturizedText>(&input))
			for (const auto &tok : *text)
				touched.insert(tok.begin(), tok.end());
	const std::vector<std::uint32_t> rows(touched.begin(), touched.end());

	Rng rng(options.seed);
	const std::size_t per_tensor = std::max<std::size_t>(1, options.max_params / 5);
	GradCheckResult result;

	zip_tensors(params, analytic, [&](const char *name, auto &p, const auto &g) {
		const auto size = static_cast<std::size_t>(p.size());
		const bool is_table = std::string(name) == "feature_table";
		if (size == 0 || (is_table && rows.empty()))
			return;
		const std::size_t count = std::min(per_tensor, size);
		for (std::size_t s = 0; s < count && result.checked < options.max_params; ++s)
		{
			std::size_t flat;
			if (is_table)
			{
				const auto row = rows[rng.below(rows.size())];
				flat = static_cast<std::size_t>(row) * static_cast<std::size_t>(p.cols()) + rng.below(p.cols());
			}
			else
				flat = rng.below(size);

			double &theta = p.data()[flat];
			const double saved = theta;
			theta = saved + options.fd_step;
			const double up = pipeline_loss(params, batch, labels, options.margin);
			theta = saved - options.fd_step;
			const double down = pipeline_loss(params, batch, labels, options.margin);
			theta = saved;

			const double numeric = (up - down) / (2.0 * options.fd_step);
			const double exact = g.data()[flat];
			const double denom = std::max({std::abs(exact), std::abs(numeric), 1e-6});
			const double err = std::abs(exact - numeric) / denom;
			++result.checked;
			if (err > result.max_relative_error || result.worst_parameter.empty())
			{
				result.max_relative_error = err;
				const auto cols = static_cast<std::size_t>(p.cols());
				result.worst_parameter = std::string(name) + "[" + std::to_string(flat / cols) +
				                         (cols > 1 ? "," + std::to_string(flat % cols) : std::string()) + "]";
			}
		}
	});
	return result;
}

GradCheckInstance make_grad_check_instance(std::uint64_t seed)
{
	EncoderConfig config;
	config.ngram_n = 3;
	config.vocab_size = 61;
	config.embed_dim = 6;
	config.hidden_dim = 10;
	config.out_dim = 5;

	static const char *alphabet = "abcdefgh";
	for (std::uint64_t attempt = 0;; ++attempt)
	{
		Rng rng(mix_seed(seed, attempt));
		GradCheckInstance inst;
		inst.params = init_params(config, rng());
		for (Eigen::Index k = 0; k < inst.params.b1.size(); ++k)
			inst.params.b1[k] = static_cast<float>(rng.uniform(-0.3, 0.3));
		for (Eigen::Index k = 0; k < inst.params.b2.size(); ++k)
			inst.params.b2[k] = static_cast<float>(rng.uniform(-0.3, 0.3));

		const int n_docs = 7;
		for (int d = 0; d < n_docs; ++d)
		{
			TokenSequence tokens;
			const std::size_t n_tokens = 2 + rng.below(5);
			for (std::size_t t = 0; t < n_tokens; ++t)
			{
				std::string tok;
				const std::size_t len = 1 + rng.below(5);
				for (std::size_t c = 0; c < len; ++c)
					tok.push_back(alphabet[rng.below(8)]);
				tokens.push_back(std::move(tok));
			}
			inst.batch.emplace_back(featurize(tokens, config));
			inst.labels.push_back(d % 3);
		}

		// Reject instances with a pre-activation near the ReLU kink.
		const auto params = inst.params.cast<double>();
		double closest = std::numeric_limits<double>::infinity();
		for (const auto &input : inst.batch)
		{
			ForwardCache<double> cache;
			encode(params, input, &cache);
			closest = std::min(closest, cache.pre_activation.cwiseAbs().minCoeff());
		}
		if (closest > 0.02 || attempt > 1000)
			return inst;
	}
}

} // namespace whosai
