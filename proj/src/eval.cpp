#include "whosai/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

#include "whosai/contrastive.hpp"
#include "whosai/random.hpp"

namespace whosai
{

ConfusionMatrix confusion(const std::vector<std::string> &truth, const std::vector<std::string> &preds,
                          const std::vector<std::string> &categories)
{
	if (truth.empty())
		throw Error("confusion: no predictions");
	if (truth.size() != preds.size())
		throw Error("confusion: truth and prediction counts differ");
	std::map<std::string, Eigen::Index> index;
	for (std::size_t k = 0; k < categories.size(); ++k)
		index[categories[k]] = static_cast<Eigen::Index>(k);
	auto lookup = [&](const std::string &label) {
		const auto it = index.find(label);
		if (it == index.end())
			throw Error("confusion: unknown label '" + label + "'");
		return it->second;
	};
	ConfusionMatrix m;
	m.categories = categories;
	const auto k = static_cast<Eigen::Index>(categories.size());
	m.counts.setZero(k, k);
	for (std::size_t i = 0; i < truth.size(); ++i)
		m.counts(lookup(truth[i]), lookup(preds[i])) += 1;
	return m;
}

PrfScores weighted_prf(const ConfusionMatrix &matrix)
{
	const auto total = matrix.total();
	if (total == 0)
		throw Error("weighted_prf: empty confusion matrix");
	PrfScores out;
	const auto k = matrix.counts.rows();
	for (Eigen::Index c = 0; c < k; ++c)
	{
		const auto tp = static_cast<double>(matrix.counts(c, c));
		const auto predicted = static_cast<double>(matrix.counts.col(c).sum());
		const auto actual = static_cast<double>(matrix.counts.row(c).sum());
		ClassScores s;
		s.label = matrix.categories[c];
		s.support = matrix.counts.row(c).sum();
		s.precision = predicted > 0 ? tp / predicted : 0.0;
		s.recall = actual > 0 ? tp / actual : 0.0;
		s.f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
		const double w = static_cast<double>(s.support) / static_cast<double>(total);
		out.precision += w * s.precision;
		out.recall += w * s.recall;
		out.f1 += w * s.f1;
		out.per_class.push_back(std::move(s));
	}
	return out;
}

namespace
{

double cosine_similarity(const VecD &a, const VecD &b)
{
	return 1.0 - cosine_distance(a, b);
}

// Member indices per category, each capped at max_per_category by a seeded
// draw without replacement (kept in original order).
std::map<int, std::vector<std::size_t>> group_members(const std::vector<VecD> &embeddings,
                                                      const std::vector<int> &labels,
                                                      const SimilarityOptions &options)
{
	if (embeddings.size() != labels.size())
		throw Error("similarity: embedding and label counts differ");
	std::map<int, std::vector<std::size_t>> groups;
	for (std::size_t i = 0; i < labels.size(); ++i)
		groups[labels[i]].push_back(i);
	for (auto &[label, members] : groups)
	{
		if (members.size() <= options.max_per_category)
			continue;
		Rng rng(mix_seed(options.seed, static_cast<std::uint64_t>(label)));
		rng.shuffle(members);
		members.resize(options.max_per_category);
		std::sort(members.begin(), members.end());
	}
	return groups;
}

} // namespace

double intra_similarity(const std::vector<VecD> &embeddings, const std::vector<int> &labels,
                        const SimilarityOptions &options, std::vector<int> *skipped)
{
	const auto groups = group_members(embeddings, labels, options);
	double sum = 0.0;
	std::size_t used = 0;
	for (const auto &[label, members] : groups)
	{
		if (members.size() < 2)
		{
			if (skipped)
				skipped->push_back(label);
			continue;
		}
		double acc = 0.0;
		std::size_t pairs = 0;
		for (std::size_t i = 0; i < members.size(); ++i)
			for (std::size_t j = i + 1; j < members.size(); ++j)
			{
				acc += cosine_similarity(embeddings[members[i]], embeddings[members[j]]);
				++pairs;
			}
		sum += acc / static_cast<double>(pairs);
		++used;
	}
	if (used == 0)
		throw Error("intra_similarity: no category has two or more members");
	return sum / static_cast<double>(used);
}

double inter_similarity(const std::vector<VecD> &embeddings, const std::vector<int> &labels,
                        const SimilarityOptions &options)
{
	const auto groups = group_members(embeddings, labels, options);
	if (groups.size() < 2)
		throw Error("inter_similarity: need at least two categories");
	double sum = 0.0;
	std::size_t used = 0;
	for (auto h = groups.begin(); h != groups.end(); ++h)
		for (auto k = std::next(h); k != groups.end(); ++k)
		{
			double acc = 0.0;
			for (const auto i : h->second)
				for (const auto j : k->second)
					acc += cosine_similarity(embeddings[i], embeddings[j]);
			sum += acc / static_cast<double>(h->second.size() * k->second.size());
			++used;
		}
	return sum / static_cast<double>(used);
}

MatD centroid_similarity_matrix(const CentroidIndex &index)
{
	const auto m = static_cast<Eigen::Index>(index.size());
	MatD sim = MatD::Identity(m, m);
	for (Eigen::Index i = 0; i < m; ++i)
		for (Eigen::Index j = i + 1; j < m; ++j)
			sim(i, j) = sim(j, i) = cosine_similarity(index.centroids()[i].vec, index.centroids()[j].vec);
	return sim;
}

// --------------------------------------------------------------------------
// PCA

namespace
{

MatD centered(const std::vector<VecD> &points, VecD &mean)
{
	const auto n = static_cast<Eigen::Index>(points.size());
	const auto d = points.front().size();
	MatD x(n, d);
	for (Eigen::Index i = 0; i < n; ++i)
	{
		if (points[i].size() != d)
			throw Error("pca: mixed point dims");
		x.row(i) = points[i].transpose();
	}
	mean = x.colwise().mean().transpose();
	x.rowwise() -= mean.transpose();
	return x;
}

} // namespace

PcaResult pca_fit(const std::vector<VecD> &points, int out_dims, double tolerance, int max_iterations)
{
	if (out_dims < 1)
		throw Error("pca: out_dims must be >= 1");
	if (points.size() < static_cast<std::size_t>(out_dims) + 1)
		throw Error("pca: need at least out_dims + 1 points");
	PcaResult out;
	const MatD x = centered(points, out.mean);
	const auto d = x.cols();
	if (out_dims > d)
		throw Error("pca: out_dims exceeds the point dimension");
	MatD cov = (x.transpose() * x) / static_cast<double>(x.rows() - 1);
	out.total_variance = cov.trace();
	out.components.setZero(d, out_dims);
	out.explained_variance.setZero(out_dims);

	for (int k = 0; k < out_dims; ++k)
	{
		// Deterministic start that is not orthogonal to any axis.
		VecD v(d);
		for (Eigen::Index i = 0; i < d; ++i)
			v[i] = 1.0 + 0.1 * static_cast<double>(i + 1) / static_cast<double>(d);
		const auto previous = out.components.leftCols(k);
		v -= previous * (previous.transpose() * v);
		v.normalize();
		for (int iter = 0; iter < max_iterations; ++iter)
		{
			VecD w = cov * v;
			w -= previous * (previous.transpose() * w);
			const double norm = w.norm();
			if (!(norm > 0.0))
				break;
			w /= norm;
			const double change = std::min((w - v).norm(), (w + v).norm());
			v = w;
			if (change < tolerance)
				break;
		}
		Eigen::Index argmax;
		v.cwiseAbs().maxCoeff(&argmax);
		if (v[argmax] < 0)
			v = -v;
		const double lambda = std::max(0.0, v.dot(cov * v));
		out.components.col(k) = v;
		out.explained_variance[k] = lambda;
		cov -= lambda * v * v.transpose();
	}
	return out;
}

MatD pca_project(const std::vector<VecD> &points, int out_dims)
{
	const auto fit = pca_fit(points, out_dims);
	const double floor = 1e-12 * std::max(fit.total_variance, 1e-300);
	for (int k = 0; k < out_dims; ++k)
		if (!(fit.explained_variance[k] > floor))
			throw Error("pca: data rank is below " + std::to_string(out_dims));
	VecD mean;
	const MatD x = centered(points, mean);
	return x * fit.components;
}

// --------------------------------------------------------------------------
// Serialization

std::string report_to_json(const EvalReport &report)
{
	nlohmann::ordered_json doc;
	doc["n"] = report.n;
	doc["precision"] = report.scores.precision;
	doc["recall"] = report.scores.recall;
	doc["f1"] = report.scores.f1;
	auto per_class = nlohmann::ordered_json::array();
	for (const auto &s : report.scores.per_class)
	{
		nlohmann::ordered_json c;
		c["label"] = s.label;
		c["precision"] = s.precision;
		c["recall"] = s.recall;
		c["f1"] = s.f1;
		c["support"] = s.support;
		per_class.push_back(std::move(c));
	}
	doc["per_class"] = std::move(per_class);
	doc["intra"] = report.intra ? nlohmann::ordered_json(*report.intra) : nlohmann::ordered_json(nullptr);
	doc["inter"] = report.inter ? nlohmann::ordered_json(*report.inter) : nlohmann::ordered_json(nullptr);
	if (report.centroid_similarity)
	{
		const auto &m = *report.centroid_similarity;
		nlohmann::ordered_json sim;
		sim["labels"] = report.centroid_labels;
		auto rows = nlohmann::ordered_json::array();
		for (Eigen::Index i = 0; i < m.rows(); ++i)
		{
			std::vector<double> row(static_cast<std::size_t>(m.cols()));
			for (Eigen::Index j = 0; j < m.cols(); ++j)
				row[static_cast<std::size_t>(j)] = m(i, j);
			rows.push_back(row);
		}
		sim["matrix"] = std::move(rows);
		doc["centroid_similarity"] = std::move(sim);
	}
	return doc.dump(2) + "\n";
}

namespace
{

std::string csv_field(const std::string &s)
{
	if (s.find_first_of(",\"\n\r") == std::string::npos)
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

} // namespace

std::string confusion_to_csv(const ConfusionMatrix &matrix)
{
	std::string out = "truth\\pred";
	for (const auto &c : matrix.categories)
		out += "," + csv_field(c);
	out += "\n";
	for (Eigen::Index i = 0; i < matrix.counts.rows(); ++i)
	{
		out += csv_field(matrix.categories[i]);
		for (Eigen::Index j = 0; j < matrix.counts.cols(); ++j)
			out += "," + std::to_string(matrix.counts(i, j));
		out += "\n";
	}
	return out;
}

} // namespace whosai
