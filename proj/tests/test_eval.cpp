#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "test_util.hpp"
#include "whosai/eval.hpp"

using namespace whosai;
using whosai::testing::random_vec;
using whosai::testing::random_vecs;

namespace
{

double cos_sim(const VecD &a, const VecD &b)
{
	return a.dot(b) / (a.norm() * b.norm());
}

double naive_intra(const std::vector<VecD> &h, const std::vector<int> &labels, int classes)
{
	double total = 0;
	int used = 0;
	for (int c = 0; c < classes; ++c)
	{
		double s = 0;
		int pairs = 0;
		for (std::size_t i = 0; i < h.size(); ++i)
			for (std::size_t j = 0; j < h.size(); ++j)
				if (i != j && labels[i] == c && labels[j] == c)
				{
					s += cos_sim(h[i], h[j]);
					++pairs;
				}
		if (pairs > 0)
		{
			total += s / pairs;
			++used;
		}
	}
	return total / used;
}

double naive_inter(const std::vector<VecD> &h, const std::vector<int> &labels, int classes)
{
	double total = 0;
	int used = 0;
	for (int a = 0; a < classes; ++a)
		for (int b = a + 1; b < classes; ++b)
		{
			double s = 0;
			int pairs = 0;
			for (std::size_t i = 0; i < h.size(); ++i)
				for (std::size_t j = 0; j < h.size(); ++j)
					if (labels[i] == a && labels[j] == b)
					{
						s += cos_sim(h[i], h[j]);
						++pairs;
					}
			if (pairs > 0)
			{
				total += s / pairs;
				++used;
			}
		}
	return total / used;
}

double reconstruction_error(const MatD &x, const MatD &basis)
{
	return (x - x * basis * basis.transpose()).squaredNorm();
}

} // namespace

TEST(Confusion, Shapes)
{
	const std::vector<std::string> cats = {"a", "b", "c"};
	const auto perfect = confusion({"a", "b", "c", "a"}, {"a", "b", "c", "a"}, cats);
	EXPECT_EQ(perfect.counts(0, 0), 2);
	EXPECT_EQ(perfect.counts.sum(), perfect.counts.diagonal().sum());
	const auto col = confusion({"a", "b", "c"}, {"a", "a", "a"}, cats);
	EXPECT_EQ(col.counts.col(0).sum(), 3);
	EXPECT_EQ(col.counts.rightCols(2).sum(), 0);
	EXPECT_THROW(confusion({}, {}, cats), Error);
	EXPECT_THROW(confusion({"a"}, {"z"}, cats), Error);
}

TEST(WeightedPrf, Diagonal)
{
	const auto s = weighted_prf(confusion({"a", "b", "b"}, {"a", "b", "b"}, {"a", "b"}));
	EXPECT_EQ(s.precision, 1.0);
	EXPECT_EQ(s.recall, 1.0);
	EXPECT_EQ(s.f1, 1.0);
}

TEST(WeightedPrf, AllPredictedFirstClass)
{
	ConfusionMatrix m;
	m.categories = {"a", "b"};
	m.counts.resize(2, 2);
	m.counts << 50, 0, 50, 0;
	const auto s = weighted_prf(m);
	// Class a: P = 0.5, R = 1, F1 = 2/3. Class b: all zero. Weights 1/2 each.
	EXPECT_NEAR(s.precision, 0.25, 1e-15);
	EXPECT_NEAR(s.recall, 0.5, 1e-15);
	EXPECT_NEAR(s.f1, 1.0 / 3.0, 1e-15);
	EXPECT_EQ(s.per_class[1].precision, 0.0);
	EXPECT_EQ(s.per_class[1].support, 50);
}

TEST(WeightedPrf, NinetyNinePercentAggregate)
{
	// Ten balanced classes, one error per hundred spread cyclically: every
	// per-class P, R and F1 equals 0.99.
	ConfusionMatrix m;
	for (int k = 0; k < 10; ++k)
		m.categories.push_back("c" + std::to_string(k));
	m.counts = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(10, 10);
	for (int k = 0; k < 10; ++k)
	{
		m.counts(k, k) = 99;
		m.counts(k, (k + 1) % 10) = 1;
	}
	const auto s = weighted_prf(m);
	EXPECT_NEAR(s.precision, 0.99, 1e-12);
	EXPECT_NEAR(s.recall, 0.99, 1e-12);
	EXPECT_NEAR(s.f1, 0.99, 1e-12);
}

TEST(Intra, Examples)
{
	const VecD v = (VecD(3) << 1, 2, 3).finished();
	EXPECT_NEAR(intra_similarity({v, v, v}, {0, 0, 0}), 1.0, 1e-15);
	EXPECT_NEAR(intra_similarity({v, -v}, {0, 0}), -1.0, 1e-15);
	std::vector<int> skipped;
	EXPECT_NEAR(intra_similarity({v, v, -v}, {0, 0, 1}, {}, &skipped), 1.0, 1e-15);
	EXPECT_EQ(skipped, (std::vector<int>{1}));
	EXPECT_THROW(intra_similarity({v, v}, {0, 1}), Error);
}

TEST(Inter, Examples)
{
	const VecD x = (VecD(2) << 1, 0).finished();
	const VecD y = (VecD(2) << 0, 2).finished();
	EXPECT_NEAR(inter_similarity({x, 2 * x, y}, {0, 0, 1}), 0.0, 1e-15);
	EXPECT_NEAR(inter_similarity({x, -x}, {0, 1}), -1.0, 1e-15);
	EXPECT_THROW(inter_similarity({x, y}, {0, 0}), Error);
}

TEST(IntraInter, MatchNaiveOracle)
{
	Rng rng(3);
	for (int trial = 0; trial < 20; ++trial)
	{
		const std::size_t n = 4 + rng.below(197);
		const int classes = 2 + static_cast<int>(rng.below(5));
		std::vector<int> labels;
		for (std::size_t i = 0; i < n; ++i)
			labels.push_back(static_cast<int>(i % static_cast<std::size_t>(classes)));
		const auto h = random_vecs(rng, n, 6);
		EXPECT_NEAR(intra_similarity(h, labels), naive_intra(h, labels, classes), 1e-12);
		EXPECT_NEAR(inter_similarity(h, labels), naive_inter(h, labels, classes), 1e-12);
	}
}

TEST(IntraInter, SubsampleIsSeeded)
{
	Rng rng(4);
	std::vector<int> labels;
	for (int i = 0; i < 60; ++i)
		labels.push_back(i % 2);
	const auto h = random_vecs(rng, 60, 4);
	SimilarityOptions small{10, 7};
	EXPECT_EQ(intra_similarity(h, labels, small), intra_similarity(h, labels, small));
	EXPECT_NE(intra_similarity(h, labels, small), intra_similarity(h, labels));
}

TEST(CentroidSimilarity, Examples)
{
	const VecD a = (VecD(2) << 1, 0).finished();
	const VecD b = (VecD(2) << 0, 1).finished();
	EXPECT_TRUE(centroid_similarity_matrix(CentroidIndex({{"a", a}, {"b", b}})).isIdentity(1e-15));
	EXPECT_NEAR(centroid_similarity_matrix(CentroidIndex({{"a", a}, {"b", 3 * a}}))(0, 1), 1.0, 1e-15);
	const auto one = centroid_similarity_matrix(CentroidIndex({{"a", a}}));
	EXPECT_EQ(one.rows(), 1);
	EXPECT_EQ(one(0, 0), 1.0);
}

TEST(Pca, LineHasOneComponent)
{
	Rng rng(5);
	const VecD dir = (VecD(3) << 1, -2, 0.5).finished();
	std::vector<VecD> pts;
	for (int i = 0; i < 20; ++i)
		pts.push_back(rng.normal() * dir + (VecD(3) << 3, 1, -1).finished());
	const auto fit = pca_fit(pts, 2);
	EXPECT_LT(fit.explained_variance[1], 1e-9 * fit.total_variance);
	EXPECT_NEAR(std::abs(fit.components.col(0).dot(dir.normalized())), 1.0, 1e-9);
	EXPECT_THROW(pca_project(pts, 2), Error);
}

TEST(Pca, PlanarDataIsIsometric)
{
	Rng rng(6);
	std::vector<VecD> pts;
	for (int i = 0; i < 15; ++i)
		pts.push_back(random_vec(rng, 2));
	const MatD xy = pca_project(pts, 2);
	for (int i = 0; i < 15; ++i)
		for (int j = 0; j < 15; ++j)
			EXPECT_NEAR((xy.row(i) - xy.row(j)).norm(), (pts[i] - pts[j]).norm(), 1e-9);
}

TEST(Pca, MatchesDenseEigensolver)
{
	Rng rng(7);
	for (int trial = 0; trial < 5; ++trial)
	{
		std::vector<VecD> pts;
		VecD scale(8);
		scale << 3.0, 2.2, 1.6, 1.1, 0.8, 0.5, 0.3, 0.1;
		for (int i = 0; i < 50; ++i)
			pts.push_back(random_vec(rng, 8).cwiseProduct(scale) + random_vec(rng, 8) * 0.2);
		MatD x(50, 8);
		for (int i = 0; i < 50; ++i)
			x.row(i) = pts[i].transpose();
		x.rowwise() -= x.colwise().mean();
		const MatD cov = x.transpose() * x / 49.0;
		Eigen::SelfAdjointEigenSolver<MatD> solver(cov);
		const MatD top = solver.eigenvectors().rightCols(2).rowwise().reverse();

		const auto fit = pca_fit(pts, 2);
		EXPECT_NEAR(fit.explained_variance[0], solver.eigenvalues()[7], 1e-6);
		EXPECT_NEAR(fit.explained_variance[1], solver.eigenvalues()[6], 1e-6);
		EXPECT_NEAR(reconstruction_error(x, fit.components), reconstruction_error(x, top), 1e-6);
		const MatD proj = pca_project(pts, 2);
		EXPECT_LT((proj - x * fit.components).cwiseAbs().maxCoeff(), 1e-12);
	}
}

TEST(Pca, SignConvention)
{
	Rng rng(8);
	const auto fit = pca_fit(random_vecs(rng, 30, 5), 3);
	for (int k = 0; k < 3; ++k)
	{
		Eigen::Index i;
		fit.components.col(k).cwiseAbs().maxCoeff(&i);
		EXPECT_GT(fit.components(i, k), 0.0);
		EXPECT_NEAR(fit.components.col(k).norm(), 1.0, 1e-12);
	}
}

TEST(Report, JsonAndCsv)
{
	const auto m = confusion({"a", "b,c"}, {"a", "a"}, {"a", "b,c"});
	EvalReport r;
	r.scores = weighted_prf(m);
	r.n = 2;
	const auto doc = nlohmann::json::parse(report_to_json(r));
	EXPECT_EQ(doc.at("n"), 2);
	EXPECT_EQ(doc.at("per_class").size(), 2u);
	EXPECT_EQ(confusion_to_csv(m), "truth\\pred,a,\"b,c\"\na,1,0\n\"b,c\",1,0\n");
}
