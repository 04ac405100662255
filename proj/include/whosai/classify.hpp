#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "whosai/types.hpp"

namespace whosai
{

struct Centroid
{
	std::string label;
	VecD vec;
};

// Per-category mean embeddings, kept sorted by label. Immutable: every
// modifying operation returns a new index.
class CentroidIndex
{
public:
	CentroidIndex() = default;
	/// Sorts by label; rejects duplicate labels, mixed dims and non-finite
	/// entries.
	explicit CentroidIndex(std::vector<Centroid> centroids, std::string encoder_hash = {});

	const std::vector<Centroid> &centroids() const { return centroids_; }
	std::size_t size() const { return centroids_.size(); }
	std::size_t dim() const { return dim_; }
	const std::string &encoder_hash() const { return encoder_hash_; }
	std::vector<std::string> labels() const;
	bool contains(const std::string &label) const;

	CentroidIndex with_encoder_hash(std::string hash) const;
	/// Index without the given label.
	CentroidIndex without(const std::string &label) const;

	bool operator==(const CentroidIndex &other) const;

private:
	std::vector<Centroid> centroids_;
	std::size_t dim_ = 0;
	std::string encoder_hash_;
};

/// c_k = mean of the embeddings labeled k.
CentroidIndex compute_centroids(const std::vector<VecD> &embeddings, const std::vector<std::string> &labels);

struct Prediction
{
	std::string label;
	std::size_t index = 0;
	/// Cosine distance to every centroid, in index order.
	std::vector<double> distances;
};

/// Least-distant centroid under cosine distance; ties go to the
/// lexicographically smallest label.
Prediction predict(const CentroidIndex &index, const VecD &h);

/// New index with `label` added as the mean of `embeddings`.
CentroidIndex register_category(const CentroidIndex &index, const std::vector<VecD> &embeddings,
                                const std::string &label);

std::string index_to_json(const CentroidIndex &index);
CentroidIndex index_from_json(const std::string &text);
void save_index(const CentroidIndex &index, const std::filesystem::path &path);
CentroidIndex load_index(const std::filesystem::path &path);

} // namespace whosai
