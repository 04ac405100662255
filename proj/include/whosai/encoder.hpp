#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "whosai/random.hpp"
#include "whosai/textproc.hpp"
#include "whosai/types.hpp"

namespace whosai
{

struct EncoderConfig
{
	int ngram_n = 3;
	int vocab_size = 32768;
	int embed_dim = 32;
	int hidden_dim = 128;
	int out_dim = 64;

	void validate() const;
	bool operator==(const EncoderConfig &) const = default;
};

/// Row-major storage, matching the checkpoint layout.
template <typename Scalar>
using MatR = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Trainable weights of the reference encoder. The same type holds
// gradients and optimizer moments.
//
//   x = mean over tokens of (mean of the token's n-gram table rows)
//   h = W2 relu(W1 x + b1) + b2
template <typename Scalar>
struct EncoderParamsT
{
	EncoderConfig config;
	MatR<Scalar> feature_table; ///< V x e
	MatR<Scalar> w1;            ///< hidden x e
	Vec<Scalar> b1;             ///< hidden
	MatR<Scalar> w2;            ///< f x hidden
	Vec<Scalar> b2;             ///< f

	static EncoderParamsT zeros(const EncoderConfig &config)
	{
		EncoderParamsT p;
		p.config = config;
		p.feature_table = MatR<Scalar>::Zero(config.vocab_size, config.embed_dim);
		p.w1 = MatR<Scalar>::Zero(config.hidden_dim, config.embed_dim);
		p.b1 = Vec<Scalar>::Zero(config.hidden_dim);
		p.w2 = MatR<Scalar>::Zero(config.out_dim, config.hidden_dim);
		p.b2 = Vec<Scalar>::Zero(config.out_dim);
		return p;
	}

	template <typename Other>
	EncoderParamsT<Other> cast() const
	{
		EncoderParamsT<Other> p;
		p.config = config;
		p.feature_table = feature_table.template cast<Other>();
		p.w1 = w1.template cast<Other>();
		p.b1 = b1.template cast<Other>();
		p.w2 = w2.template cast<Other>();
		p.b2 = b2.template cast<Other>();
		return p;
	}

	void set_zero()
	{
		feature_table.setZero();
		w1.setZero();
		b1.setZero();
		w2.setZero();
		b2.setZero();
	}

	std::size_t num_parameters() const
	{
		return static_cast<std::size_t>(feature_table.size() + w1.size() + b1.size() + w2.size() + b2.size());
	}
};

using EncoderParams = EncoderParamsT<float>;

template <typename Scalar>
using ParamGradsT = EncoderParamsT<Scalar>;
using ParamGrads = ParamGradsT<float>;

/// Visit every tensor in checkpoint order as (name, dense object).
template <typename Params, typename Fn>
void for_each_tensor(Params &params, Fn &&fn)
{
	fn("feature_table", params.feature_table);
	fn("w1", params.w1);
	fn("b1", params.b1);
	fn("w2", params.w2);
	fn("b2", params.b2);
}

/// Visit matching tensors of two same-shaped parameter sets.
template <typename A, typename B, typename Fn>
void zip_tensors(A &a, B &b, Fn &&fn)
{
	fn("feature_table", a.feature_table, b.feature_table);
	fn("w1", a.w1, b.w1);
	fn("b1", a.b1, b.b1);
	fn("w2", a.w2, b.w2);
	fn("b2", a.b2, b.b2);
}

/// True when every tensor has the same shape and identical bytes.
template <typename Scalar>
bool bitwise_equal(const EncoderParamsT<Scalar> &a, const EncoderParamsT<Scalar> &b)
{
	if (!(a.config == b.config))
		return false;
	bool equal = true;
	zip_tensors(a, b, [&](const char *, const auto &x, const auto &y) {
		equal = equal && x.rows() == y.rows() && x.cols() == y.cols() &&
		        std::equal(reinterpret_cast<const unsigned char *>(x.data()),
		                   reinterpret_cast<const unsigned char *>(x.data() + x.size()),
		                   reinterpret_cast<const unsigned char *>(y.data()));
	});
	return equal;
}

/// Entries uniform in (-1/sqrt(fan_in), 1/sqrt(fan_in)); fan_in is e for the
/// feature table and W1, hidden_dim for W2. Biases are zero.
EncoderParams init_params(const EncoderConfig &config, std::uint64_t seed);

// --------------------------------------------------------------------------
// Featurization

/// Table rows of one token's boundary-padded character n-grams.
using TokenFeatures = std::vector<std::uint32_t>;
using FeaturizedText = std::vector<TokenFeatures>;

/// FNV-1a 64 of the n-gram's UTF-8 bytes, reduced modulo vocab_size.
std::uint32_t ngram_row(std::string_view ngram, int vocab_size);

/// Character n-grams of "<token>"; a padded token shorter than n yields
/// itself as its only n-gram.
std::vector<std::string> token_ngrams(std::string_view token, int n);

TokenFeatures featurize_token(std::string_view token, const EncoderConfig &config);
FeaturizedText featurize(const TokenSequence &tokens, const EncoderConfig &config);

/// Either hashed token features or an externally pooled vector x.
using EncoderInput = std::variant<FeaturizedText, VecF>;

// --------------------------------------------------------------------------
// Forward / backward

template <typename Scalar>
struct ForwardCache
{
	Vec<Scalar> pooled;
	Vec<Scalar> pre_activation;
	Vec<Scalar> hidden;
};

template <typename Scalar>
Vec<Scalar> pool_features(const EncoderParamsT<Scalar> &params, const FeaturizedText &text)
{
	if (text.empty())
		throw Error("encode: empty token sequence");
	const Eigen::Index e = params.feature_table.cols();
	Vec<Scalar> pooled = Vec<Scalar>::Zero(e);
	Vec<Scalar> token_vec(e);
	for (const auto &token : text)
	{
		if (token.empty())
			throw Error("encode: token without n-grams");
		token_vec.setZero();
		for (const auto row : token)
			token_vec += params.feature_table.row(row).transpose();
		pooled += token_vec / static_cast<Scalar>(token.size());
	}
	return pooled / static_cast<Scalar>(text.size());
}

template <typename Scalar>
Vec<Scalar> pooled_input(const EncoderParamsT<Scalar> &params, const EncoderInput &input)
{
	if (const auto *text = std::get_if<FeaturizedText>(&input))
		return pool_features(params, *text);
	const auto &vec = std::get<VecF>(input);
	if (vec.size() != params.w1.cols())
		throw Error("encode: external vector has dim " + std::to_string(vec.size()) + ", encoder expects " +
		            std::to_string(params.w1.cols()));
	return vec.template cast<Scalar>();
}

/// Projection head applied to a pooled vector.
template <typename Scalar>
Vec<Scalar> project(const EncoderParamsT<Scalar> &params, const Vec<Scalar> &pooled,
                    ForwardCache<Scalar> *cache = nullptr)
{
	Vec<Scalar> pre = params.w1 * pooled + params.b1;
	Vec<Scalar> hidden = pre.cwiseMax(Scalar(0));
	Vec<Scalar> out = params.w2 * hidden + params.b2;
	if (cache)
	{
		cache->pooled = pooled;
		cache->pre_activation = std::move(pre);
		cache->hidden = std::move(hidden);
	}
	return out;
}

template <typename Scalar>
EmbeddingT<Scalar> encode(const EncoderParamsT<Scalar> &params, const EncoderInput &input,
                          ForwardCache<Scalar> *cache = nullptr)
{
	return project(params, pooled_input(params, input), cache);
}

template <typename Scalar>
EmbeddingT<Scalar> encode(const EncoderParamsT<Scalar> &params, const TokenSequence &tokens)
{
	if (tokens.empty())
		throw Error("encode: empty token sequence");
	return encode(params, EncoderInput(featurize(tokens, params.config)));
}

/// Encode every item; errors carry the failing item's index.
template <typename Scalar>
std::vector<EmbeddingT<Scalar>> encode_batch(const EncoderParamsT<Scalar> &params,
                                             const std::vector<EncoderInput> &batch,
                                             std::vector<ForwardCache<Scalar>> *caches = nullptr)
{
	std::vector<EmbeddingT<Scalar>> out;
	out.reserve(batch.size());
	if (caches)
		caches->assign(batch.size(), {});
	for (std::size_t i = 0; i < batch.size(); ++i)
	{
		try
		{
			out.push_back(encode(params, batch[i], caches ? &(*caches)[i] : nullptr));
		}
		catch (const Error &e)
		{
			throw Error("batch item " + std::to_string(i) + ": " + e.what());
		}
	}
	return out;
}

template <typename Scalar>
std::vector<EmbeddingT<Scalar>> encode_batch(const EncoderParamsT<Scalar> &params,
                                             const std::vector<TokenSequence> &batch)
{
	std::vector<EncoderInput> inputs;
	inputs.reserve(batch.size());
	for (std::size_t i = 0; i < batch.size(); ++i)
	{
		if (batch[i].empty())
			throw Error("batch item " + std::to_string(i) + ": encode: empty token sequence");
		inputs.emplace_back(featurize(batch[i], params.config));
	}
	return encode_batch(params, inputs);
}

/// Accumulate into `grads` the exact gradient of sum_i <upstream_i, h_i>
/// over the batch. relu'(0) is taken as 0. External (pooled) inputs
/// contribute nothing to the feature table.
template <typename Scalar>
void backward(const EncoderParamsT<Scalar> &params, const std::vector<EncoderInput> &batch,
              const std::vector<Vec<Scalar>> &upstream, ParamGradsT<Scalar> &grads,
              const std::vector<ForwardCache<Scalar>> *caches = nullptr)
{
	if (upstream.size() != batch.size())
		throw Error("backward: " + std::to_string(upstream.size()) + " upstream gradients for a batch of " +
		            std::to_string(batch.size()));
	if (caches && caches->size() != batch.size())
		throw Error("backward: cache count does not match batch size");
	const Eigen::Index f = params.w2.rows();
	for (std::size_t i = 0; i < batch.size(); ++i)
	{
		const auto &g_out = upstream[i];
		if (g_out.size() != f)
			throw Error("backward: upstream gradient " + std::to_string(i) + " has dim " +
			            std::to_string(g_out.size()) + ", expected " + std::to_string(f));
		if (g_out.isZero(0))
			continue;

		ForwardCache<Scalar> local;
		const ForwardCache<Scalar> *cache;
		if (caches)
			cache = &(*caches)[i];
		else
		{
			encode(params, batch[i], &local);
			cache = &local;
		}

		grads.w2.noalias() += g_out * cache->hidden.transpose();
		grads.b2 += g_out;
		Vec<Scalar> g_pre = params.w2.transpose() * g_out;
		for (Eigen::Index k = 0; k < g_pre.size(); ++k)
			if (!(cache->pre_activation[k] > Scalar(0)))
				g_pre[k] = Scalar(0);
		grads.w1.noalias() += g_pre * cache->pooled.transpose();
		grads.b1 += g_pre;

		const auto *text = std::get_if<FeaturizedText>(&batch[i]);
		if (!text)
			continue;
		const Vec<Scalar> g_pooled = params.w1.transpose() * g_pre;
		const Scalar inv_tokens = Scalar(1) / static_cast<Scalar>(text->size());
		for (const auto &token : *text)
		{
			const Vec<Scalar> g_row = g_pooled * (inv_tokens / static_cast<Scalar>(token.size()));
			for (const auto row : token)
				grads.feature_table.row(row) += g_row.transpose();
		}
	}
}

template <typename Scalar>
ParamGradsT<Scalar> backward(const EncoderParamsT<Scalar> &params, const std::vector<EncoderInput> &batch,
                             const std::vector<Vec<Scalar>> &upstream)
{
	auto grads = ParamGradsT<Scalar>::zeros(params.config);
	backward(params, batch, upstream, grads);
	return grads;
}

// --------------------------------------------------------------------------
// External embeddings

/// Vectors produced by some other encoder, keyed by document id.
class EmbeddingStore
{
public:
	std::size_t dim() const { return dim_; }
	std::size_t size() const { return vectors_.size(); }
	bool contains(const std::string &id) const { return vectors_.count(id) > 0; }
	const VecF &at(const std::string &id) const;
	void insert(const std::string &id, VecF vec);

private:
	std::size_t dim_ = 0;
	std::map<std::string, VecF> vectors_;
};

/// JSONL, one {"id": string, "vec": [numbers]} per line.
EmbeddingStore load_external_embeddings(const std::filesystem::path &path);

} // namespace whosai
