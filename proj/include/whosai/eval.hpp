#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "whosai/classify.hpp"
#include "whosai/types.hpp"

namespace whosai
{

/// Counts over the canonical category order; rows are truth, columns are
/// predictions.
struct ConfusionMatrix
{
	std::vector<std::string> categories;
	Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;

	std::int64_t total() const { return counts.sum(); }
};

ConfusionMatrix confusion(const std::vector<std::string> &truth, const std::vector<std::string> &preds,
                          const std::vector<std::string> &categories);

struct ClassScores
{
	std::string label;
	double precision = 0;
	double recall = 0;
	double f1 = 0;
	std::int64_t support = 0;
};

struct PrfScores
{
	double precision = 0;
	double recall = 0;
	double f1 = 0;
	std::vector<ClassScores> per_class;
};

/// Per-class P/R/F1 (0 where a denominator vanishes) and their
/// support-weighted averages.
PrfScores weighted_prf(const ConfusionMatrix &matrix);

struct SimilarityOptions
{
	/// Categories above this size are subsampled (seeded) before pairing.
	std::size_t max_per_category = 500;
	std::uint64_t seed = 0;
};

/// Macro-average over categories of the mean cosine similarity of distinct
/// within-category pairs. Categories with a single member are skipped and
/// reported through `skipped`.
double intra_similarity(const std::vector<VecD> &embeddings, const std::vector<int> &labels,
                        const SimilarityOptions &options = {}, std::vector<int> *skipped = nullptr);

/// Macro-average over unordered category pairs of the mean cross-pair
/// cosine similarity.
double inter_similarity(const std::vector<VecD> &embeddings, const std::vector<int> &labels,
                        const SimilarityOptions &options = {});

/// Pairwise cosine similarity of the index's centroids.
MatD centroid_similarity_matrix(const CentroidIndex &index);

struct PcaResult
{
	VecD mean;
	MatD components;          ///< dims x k, unit columns
	VecD explained_variance;  ///< k eigenvalues of the covariance
	double total_variance = 0;
};

/// Top-k principal directions by power iteration with deflation. Each
/// component is signed so its largest-magnitude entry is positive.
PcaResult pca_fit(const std::vector<VecD> &points, int out_dims, double tolerance = 1e-9,
                  int max_iterations = 1000);

/// Mean-centered coordinates (N x out_dims). Rejects inputs whose rank is
/// below out_dims.
MatD pca_project(const std::vector<VecD> &points, int out_dims = 2);

struct EvalReport
{
	PrfScores scores;
	std::optional<double> intra;
	std::optional<double> inter;
	std::optional<MatD> centroid_similarity;
	std::vector<std::string> centroid_labels;
	std::int64_t n = 0;
};

std::string report_to_json(const EvalReport &report);
std::string confusion_to_csv(const ConfusionMatrix &matrix);

} // namespace whosai
