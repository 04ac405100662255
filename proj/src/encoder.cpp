#include "whosai/encoder.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "whosai/io.hpp"
#include "whosai/utf8.hpp"

namespace whosai
{

void EncoderConfig::validate() const
{
	if (ngram_n < 1 || vocab_size < 1 || embed_dim < 1 || hidden_dim < 1)
		throw Error("encoder dimensions must all be >= 1");
	if (out_dim < 2)
		throw Error("encoder out_dim must be >= 2");
}

EncoderParams init_params(const EncoderConfig &config, std::uint64_t seed)
{
	config.validate();
	auto params = EncoderParams::zeros(config);
	Rng rng(seed);
	auto fill = [&](MatR<float> &m, int fan_in) {
		const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
		float *data = m.data();
		for (Eigen::Index i = 0; i < m.size(); ++i)
			data[i] = static_cast<float>(rng.uniform(-bound, bound));
	};
	fill(params.feature_table, config.embed_dim);
	fill(params.w1, config.embed_dim);
	fill(params.w2, config.hidden_dim);
	return params;
}

std::uint32_t ngram_row(std::string_view ngram, int vocab_size)
{
	return static_cast<std::uint32_t>(fnv1a64(ngram) % static_cast<std::uint64_t>(vocab_size));
}

std::vector<std::string> token_ngrams(std::string_view token, int n)
{
	std::u32string padded = U"<";
	padded += utf8::decode(token);
	padded += U'>';
	std::vector<std::string> grams;
	const auto len = static_cast<std::size_t>(n);
	if (padded.size() <= len)
	{
		grams.push_back(utf8::encode(padded));
		return grams;
	}
	grams.reserve(padded.size() - len + 1);
	for (std::size_t i = 0; i + len <= padded.size(); ++i)
		grams.push_back(utf8::encode(std::u32string_view(padded).substr(i, len)));
	return grams;
}

TokenFeatures featurize_token(std::string_view token, const EncoderConfig &config)
{
	TokenFeatures rows;
	for (const auto &gram : token_ngrams(token, config.ngram_n))
		rows.push_back(ngram_row(gram, config.vocab_size));
	return rows;
}

FeaturizedText featurize(const TokenSequence &tokens, const EncoderConfig &config)
{
	FeaturizedText out;
	out.reserve(tokens.size());
	for (const auto &tok : tokens)
		out.push_back(featurize_token(tok, config));
	return out;
}

const VecF &EmbeddingStore::at(const std::string &id) const
{
	const auto it = vectors_.find(id);
	if (it == vectors_.end())
		throw Error("no external embedding for id '" + id + "'");
	return it->second;
}

void EmbeddingStore::insert(const std::string &id, VecF vec)
{
	if (vec.size() == 0)
		throw Error("external embedding '" + id + "' is empty");
	if (vectors_.empty())
		dim_ = static_cast<std::size_t>(vec.size());
	else if (static_cast<std::size_t>(vec.size()) != dim_)
		throw Error("external embedding '" + id + "' has dim " + std::to_string(vec.size()) + ", expected " +
		            std::to_string(dim_));
	if (!vectors_.emplace(id, std::move(vec)).second)
		throw Error("duplicate external embedding id '" + id + "'");
}

EmbeddingStore load_external_embeddings(const std::filesystem::path &path)
{
	std::ifstream in(path, std::ios::binary);
	if (!in)
		throw Error("cannot open embeddings file " + path.string());
	EmbeddingStore store;
	std::string line;
	std::size_t line_no = 0;
	while (std::getline(in, line))
	{
		++line_no;
		if (line.find_first_not_of(" \t\r") == std::string::npos)
			continue;
		const auto where = path.string() + ":" + std::to_string(line_no) + ": ";
		nlohmann::json obj;
		try
		{
			obj = nlohmann::json::parse(line);
		}
		catch (const nlohmann::json::parse_error &e)
		{
			throw Error(where + "malformed JSON: " + e.what());
		}
		if (!obj.is_object() || !obj.contains("id") || !obj["id"].is_string() || !obj.contains("vec") ||
		    !obj["vec"].is_array())
			throw Error(where + "expected {\"id\": string, \"vec\": [numbers]}");
		const auto &arr = obj["vec"];
		VecF vec(static_cast<Eigen::Index>(arr.size()));
		for (std::size_t k = 0; k < arr.size(); ++k)
		{
			if (!arr[k].is_number())
				throw Error(where + "non-numeric vector entry");
			const double v = arr[k].get<double>();
			if (!std::isfinite(v))
				throw Error(where + "non-finite vector entry");
			vec[static_cast<Eigen::Index>(k)] = static_cast<float>(v);
		}
		store.insert(obj["id"].get<std::string>(), std::move(vec));
	}
	if (store.size() == 0)
		throw Error("no embeddings in " + path.string());
	return store;
}

} // namespace whosai
