#include "whosai/classify.hpp"

#include <algorithm>
#include <map>

#include <json.hpp>

#include "whosai/contrastive.hpp"
#include "whosai/io.hpp"

namespace whosai
{

CentroidIndex::CentroidIndex(std::vector<Centroid> centroids, std::string encoder_hash)
    : centroids_(std::move(centroids)), encoder_hash_(std::move(encoder_hash))
{
	std::sort(centroids_.begin(), centroids_.end(),
	          [](const Centroid &a, const Centroid &b) { return a.label < b.label; });
	for (std::size_t k = 0; k < centroids_.size(); ++k)
	{
		const auto &c = centroids_[k];
		if (c.label.empty())
			throw Error("centroid with empty label");
		if (k > 0 && centroids_[k - 1].label == c.label)
			throw Error("duplicate centroid label '" + c.label + "'");
		if (k == 0)
			dim_ = static_cast<std::size_t>(c.vec.size());
		else if (static_cast<std::size_t>(c.vec.size()) != dim_)
			throw Error("centroid '" + c.label + "' has dim " + std::to_string(c.vec.size()) + ", expected " +
			            std::to_string(dim_));
		if (c.vec.size() == 0)
			throw Error("centroid '" + c.label + "' is empty");
		if (!c.vec.allFinite())
			throw Error("centroid '" + c.label + "' has non-finite entries");
	}
}

std::vector<std::string> CentroidIndex::labels() const
{
	std::vector<std::string> out;
	for (const auto &c : centroids_)
		out.push_back(c.label);
	return out;
}

bool CentroidIndex::contains(const std::string &label) const
{
	return std::any_of(centroids_.begin(), centroids_.end(), [&](const Centroid &c) { return c.label == label; });
}

CentroidIndex CentroidIndex::with_encoder_hash(std::string hash) const
{
	return CentroidIndex(centroids_, std::move(hash));
}

CentroidIndex CentroidIndex::without(const std::string &label) const
{
	std::vector<Centroid> kept;
	for (const auto &c : centroids_)
		if (c.label != label)
			kept.push_back(c);
	return CentroidIndex(std::move(kept), encoder_hash_);
}

bool CentroidIndex::operator==(const CentroidIndex &other) const
{
	if (encoder_hash_ != other.encoder_hash_ || centroids_.size() != other.centroids_.size())
		return false;
	for (std::size_t k = 0; k < centroids_.size(); ++k)
	{
		const auto &a = centroids_[k];
		const auto &b = other.centroids_[k];
		if (a.label != b.label || a.vec.size() != b.vec.size() || a.vec != b.vec)
			return false;
	}
	return true;
}

CentroidIndex compute_centroids(const std::vector<VecD> &embeddings, const std::vector<std::string> &labels)
{
	if (embeddings.empty())
		throw Error("compute_centroids: no embeddings");
	if (embeddings.size() != labels.size())
		throw Error("compute_centroids: embedding and label counts differ");
	const auto dim = embeddings.front().size();
	std::map<std::string, std::pair<VecD, std::size_t>> sums;
	for (std::size_t i = 0; i < embeddings.size(); ++i)
	{
		if (embeddings[i].size() != dim)
			throw Error("compute_centroids: mixed embedding dims");
		auto [it, inserted] = sums.try_emplace(labels[i], VecD::Zero(dim), 0);
		it->second.first += embeddings[i];
		it->second.second += 1;
	}
	std::vector<Centroid> out;
	for (auto &[label, acc] : sums)
		out.push_back({label, acc.first / static_cast<double>(acc.second)});
	return CentroidIndex(std::move(out));
}

Prediction predict(const CentroidIndex &index, const VecD &h)
{
	if (index.size() == 0)
		throw Error("predict: empty centroid index");
	if (static_cast<std::size_t>(h.size()) != index.dim())
		throw Error("predict: query has dim " + std::to_string(h.size()) + ", index has dim " +
		            std::to_string(index.dim()));
	Prediction out;
	out.distances.reserve(index.size());
	for (std::size_t k = 0; k < index.size(); ++k)
	{
		const double d = cosine_distance(h, index.centroids()[k].vec);
		out.distances.push_back(d);
		if (k == 0 || d < out.distances[out.index])
			out.index = k;
	}
	out.label = index.centroids()[out.index].label;
	return out;
}

CentroidIndex register_category(const CentroidIndex &index, const std::vector<VecD> &embeddings,
                                const std::string &label)
{
	if (index.contains(label))
		throw Error("register_category: label '" + label + "' already present");
	if (embeddings.empty())
		throw Error("register_category: no embeddings for '" + label + "'");
	VecD sum = VecD::Zero(embeddings.front().size());
	for (const auto &h : embeddings)
	{
		if (h.size() != sum.size())
			throw Error("register_category: mixed embedding dims");
		sum += h;
	}
	if (index.size() > 0 && static_cast<std::size_t>(sum.size()) != index.dim())
		throw Error("register_category: embeddings have dim " + std::to_string(sum.size()) + ", index has dim " +
		            std::to_string(index.dim()));
	auto centroids = index.centroids();
	centroids.push_back({label, sum / static_cast<double>(embeddings.size())});
	return CentroidIndex(std::move(centroids), index.encoder_hash());
}

std::string index_to_json(const CentroidIndex &index)
{
	nlohmann::ordered_json doc;
	doc["dim"] = index.dim();
	doc["encoder"] = index.encoder_hash();
	auto arr = nlohmann::ordered_json::array();
	for (const auto &c : index.centroids())
	{
		nlohmann::ordered_json entry;
		entry["label"] = c.label;
		entry["vec"] = std::vector<double>(c.vec.data(), c.vec.data() + c.vec.size());
		arr.push_back(std::move(entry));
	}
	doc["centroids"] = std::move(arr);
	return doc.dump(1) + "\n";
}

CentroidIndex index_from_json(const std::string &text)
{
	nlohmann::json doc;
	try
	{
		doc = nlohmann::json::parse(text);
	}
	catch (const nlohmann::json::parse_error &e)
	{
		throw Error(std::string("centroid store: malformed JSON: ") + e.what());
	}
	if (!doc.is_object() || !doc.contains("centroids") || !doc["centroids"].is_array())
		throw Error("centroid store: missing 'centroids' array");
	std::vector<Centroid> centroids;
	for (const auto &entry : doc["centroids"])
	{
		if (!entry.is_object() || !entry.contains("label") || !entry["label"].is_string() ||
		    !entry.contains("vec") || !entry["vec"].is_array())
			throw Error("centroid store: each centroid needs 'label' and 'vec'");
		const auto values = entry["vec"].get<std::vector<double>>();
		centroids.push_back({entry["label"].get<std::string>(), Eigen::Map<const VecD>(values.data(),
		                                                                                 static_cast<Eigen::Index>(values.size()))});
	}
	const std::string hash = doc.contains("encoder") && doc["encoder"].is_string() ? doc["encoder"].get<std::string>() : "";
	CentroidIndex index(std::move(centroids), hash);
	if (doc.contains("dim"))
	{
		if (!doc["dim"].is_number_unsigned() || doc["dim"].get<std::size_t>() != index.dim())
			throw Error("centroid store: declared dim does not match centroid vectors");
	}
	return index;
}

void save_index(const CentroidIndex &index, const std::filesystem::path &path)
{
	write_file_atomic(path, index_to_json(index));
}

CentroidIndex load_index(const std::filesystem::path &path)
{
	return index_from_json(read_file(path));
}

} // namespace whosai
