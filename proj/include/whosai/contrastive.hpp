#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "whosai/random.hpp"
#include "whosai/types.hpp"

namespace whosai
{

enum class DistanceKind
{
	cosine,
	squared_euclidean
};

DistanceKind parse_distance_kind(const std::string &name);
std::string to_string(DistanceKind kind);

/// 1 - cos(a, b), in [0, 2]. Zero vectors are rejected.
template <typename Scalar>
Scalar cosine_distance(const Vec<Scalar> &a, const Vec<Scalar> &b)
{
	if (a.size() != b.size())
		throw Error("cosine_distance: dimension mismatch");
	const Scalar na = a.norm();
	const Scalar nb = b.norm();
	if (!(na > Scalar(0)) || !(nb > Scalar(0)))
		throw Error("cosine_distance: zero vector");
	const Scalar cos = a.dot(b) / (na * nb);
	return Scalar(1) - std::clamp(cos, Scalar(-1), Scalar(1));
}

template <typename Scalar>
Scalar distance(DistanceKind kind, const Vec<Scalar> &a, const Vec<Scalar> &b)
{
	if (kind == DistanceKind::cosine)
		return cosine_distance(a, b);
	if (a.size() != b.size())
		throw Error("distance: dimension mismatch");
	return (a - b).squaredNorm();
}

/// Adds scale * dd/da to grad_a and scale * dd/db to grad_b.
///
/// For cosine: dd/da = (1 - d) a / |a|^2 - b / (|a| |b|), symmetric in b.
template <typename Scalar>
void accumulate_distance_grad(DistanceKind kind, const Vec<Scalar> &a, const Vec<Scalar> &b, Scalar scale,
                              Vec<Scalar> &grad_a, Vec<Scalar> &grad_b)
{
	if (kind == DistanceKind::squared_euclidean)
	{
		const Vec<Scalar> diff = Scalar(2) * scale * (a - b);
		grad_a += diff;
		grad_b -= diff;
		return;
	}
	const Scalar na = a.norm();
	const Scalar nb = b.norm();
	if (!(na > Scalar(0)) || !(nb > Scalar(0)))
		throw Error("loss_gradient: zero-norm embedding");
	const Scalar cos = a.dot(b) / (na * nb);
	const Scalar inv_ab = Scalar(1) / (na * nb);
	grad_a += scale * (cos / (na * na) * a - inv_ab * b);
	grad_b += scale * (cos / (nb * nb) * b - inv_ab * a);
}

template <typename Scalar>
Mat<Scalar> distance_matrix(DistanceKind kind, const std::vector<Vec<Scalar>> &embeddings)
{
	const auto n = static_cast<Eigen::Index>(embeddings.size());
	Mat<Scalar> d = Mat<Scalar>::Zero(n, n);
	for (Eigen::Index i = 0; i < n; ++i)
		for (Eigen::Index j = i + 1; j < n; ++j)
			d(i, j) = d(j, i) = distance(kind, embeddings[i], embeddings[j]);
	if (kind == DistanceKind::cosine)
		for (Eigen::Index i = 0; i < n; ++i)
			d(i, i) = cosine_distance(embeddings[i], embeddings[i]);
	return d;
}

// --------------------------------------------------------------------------
// Margin schedule

enum class MarginMode
{
	step_increase, ///< lambda_min + delta * floor(t / step)
	paper_mod      ///< lambda_min + delta * (t mod step)
};

MarginMode parse_margin_mode(const std::string &name);
std::string to_string(MarginMode mode);

struct MarginSchedule
{
	double lambda_min = 0.1;
	double lambda_delta = 0.025;
	std::int64_t step_size = 750;
	MarginMode mode = MarginMode::step_increase;

	void validate() const;
	bool operator==(const MarginSchedule &) const = default;
};

double margin_at(const MarginSchedule &schedule, std::int64_t t);

// --------------------------------------------------------------------------
// Loss

template <typename Scalar>
struct TripletLoss
{
	Scalar loss = 0;
	std::vector<char> active;
};

/// sum_i max(ap_i - an_i + margin, 0) and the per-triplet hinge activity.
template <typename Scalar>
TripletLoss<Scalar> triplet_loss(std::span<const Scalar> dist_ap, std::span<const Scalar> dist_an, Scalar margin)
{
	if (dist_ap.size() != dist_an.size())
		throw Error("triplet_loss: " + std::to_string(dist_ap.size()) + " positive distances vs " +
		            std::to_string(dist_an.size()) + " negative distances");
	if (!(margin >= Scalar(0)))
		throw Error("triplet_loss: margin must be >= 0");
	using ArrayS = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
	const auto n = static_cast<Eigen::Index>(dist_ap.size());
	const Eigen::Map<const ArrayS> ap(dist_ap.data(), n);
	const Eigen::Map<const ArrayS> an(dist_an.data(), n);
	const ArrayS hinge = (ap - an + margin).max(Scalar(0));

	TripletLoss<Scalar> out;
	out.loss = hinge.sum();
	out.active.resize(dist_ap.size());
	for (Eigen::Index i = 0; i < n; ++i)
		out.active[i] = hinge[i] > Scalar(0);
	return out;
}

template <typename Scalar>
TripletLoss<Scalar> triplet_loss(const std::vector<Scalar> &dist_ap, const std::vector<Scalar> &dist_an,
                                 Scalar margin)
{
	return triplet_loss(std::span<const Scalar>(dist_ap), std::span<const Scalar>(dist_an), margin);
}

// --------------------------------------------------------------------------
// Mining

struct MinerConfig
{
	double epsilon = 0.1;
	bool operator==(const MinerConfig &) const = default;
};

using IndexPair = std::pair<int, int>;

/// (anchor, other) pairs, sorted lexicographically.
struct MinedPairs
{
	std::vector<IndexPair> positives;
	std::vector<IndexPair> negatives;

	bool operator==(const MinedPairs &) const = default;
	std::size_t size() const { return positives.size() + negatives.size(); }
};

/// Multi-similarity pair selection on a precomputed distance matrix. For
/// each anchor with at least one positive and one negative:
///   negative n kept if d(a, n) < max_p d(a, p) + epsilon
///   positive p kept if d(a, p) > min_n d(a, n) - epsilon
template <typename Scalar>
MinedPairs mine_pairs_from_distances(const Mat<Scalar> &dist, std::span<const int> labels, double epsilon)
{
	if (epsilon < 0.0)
		throw Error("mine_pairs: epsilon must be >= 0");
	const auto n = static_cast<int>(labels.size());
	if (dist.rows() != n || dist.cols() != n)
		throw Error("mine_pairs: distance matrix does not match label count");
	MinedPairs out;
	const Scalar eps = static_cast<Scalar>(epsilon);
	for (int a = 0; a < n; ++a)
	{
		Scalar hardest_pos = -std::numeric_limits<Scalar>::infinity();
		Scalar hardest_neg = std::numeric_limits<Scalar>::infinity();
		bool any_pos = false;
		bool any_neg = false;
		for (int j = 0; j < n; ++j)
		{
			if (j == a)
				continue;
			if (labels[j] == labels[a])
			{
				hardest_pos = std::max(hardest_pos, dist(a, j));
				any_pos = true;
			}
			else
			{
				hardest_neg = std::min(hardest_neg, dist(a, j));
				any_neg = true;
			}
		}
		if (!any_pos || !any_neg)
			continue;
		for (int j = 0; j < n; ++j)
		{
			if (j == a)
				continue;
			if (labels[j] == labels[a])
			{
				if (dist(a, j) > hardest_neg - eps)
					out.positives.emplace_back(a, j);
			}
			else if (dist(a, j) < hardest_pos + eps)
				out.negatives.emplace_back(a, j);
		}
	}
	return out;
}

template <typename Scalar>
MinedPairs mine_pairs(const std::vector<Vec<Scalar>> &embeddings, std::span<const int> labels, double epsilon,
                      DistanceKind kind = DistanceKind::cosine)
{
	if (embeddings.size() != labels.size())
		throw Error("mine_pairs: embedding and label counts differ");
	return mine_pairs_from_distances(distance_matrix(kind, embeddings), labels, epsilon);
}

// --------------------------------------------------------------------------
// Triplets

struct Triplet
{
	int anchor;
	int positive;
	int negative;
	bool operator==(const Triplet &) const = default;
};

using TripletSet = std::vector<Triplet>;

enum class TripletMode
{
	online, ///< cross product of mined positives and negatives per anchor
	offline ///< one random positive and negative per batch item
};

/// Online: for each anchor, every mined positive paired with every mined
/// negative of that anchor. Offline: `mined` is ignored; each item with a
/// same-label partner and a different-label item gets one uniformly drawn
/// positive and negative.
TripletSet build_triplets(const MinedPairs &mined, TripletMode mode, std::span<const int> labels, Rng &rng);

/// Gradient of sum over active triplets of d(a, p) - d(a, n) + margin with
/// respect to every embedding. Inactive triplets contribute nothing.
template <typename Scalar>
std::vector<Vec<Scalar>> loss_gradient(const std::vector<Vec<Scalar>> &embeddings, const TripletSet &triplets,
                                       Scalar margin, DistanceKind kind = DistanceKind::cosine)
{
	std::vector<Vec<Scalar>> grads;
	grads.reserve(embeddings.size());
	for (const auto &h : embeddings)
	{
		if (kind == DistanceKind::cosine && !(h.norm() > Scalar(0)))
			throw Error("loss_gradient: zero-norm embedding");
		grads.push_back(Vec<Scalar>::Zero(h.size()));
	}
	for (const auto &t : triplets)
	{
		const auto &a = embeddings.at(t.anchor);
		const auto &p = embeddings.at(t.positive);
		const auto &n = embeddings.at(t.negative);
		const Scalar hinge = distance(kind, a, p) - distance(kind, a, n) + margin;
		if (!(hinge > Scalar(0)))
			continue;
		accumulate_distance_grad(kind, a, p, Scalar(1), grads[t.anchor], grads[t.positive]);
		accumulate_distance_grad(kind, a, n, Scalar(-1), grads[t.anchor], grads[t.negative]);
	}
	return grads;
}

} // namespace whosai
