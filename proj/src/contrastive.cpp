#include "whosai/contrastive.hpp"

#include <algorithm>

namespace whosai
{

DistanceKind parse_distance_kind(const std::string &name)
{
	if (name == "cosine")
		return DistanceKind::cosine;
	if (name == "sqeuclidean")
		return DistanceKind::squared_euclidean;
	throw Error("unknown distance '" + name + "' (expected cosine or sqeuclidean)");
}

std::string to_string(DistanceKind kind)
{
	return kind == DistanceKind::cosine ? "cosine" : "sqeuclidean";
}

MarginMode parse_margin_mode(const std::string &name)
{
	if (name == "step")
		return MarginMode::step_increase;
	if (name == "mod")
		return MarginMode::paper_mod;
	throw Error("unknown margin mode '" + name + "' (expected step or mod)");
}

std::string to_string(MarginMode mode)
{
	return mode == MarginMode::step_increase ? "step" : "mod";
}

void MarginSchedule::validate() const
{
	if (!(lambda_min > 0.0))
		throw Error("margin: lambda_min must be > 0");
	if (!(lambda_delta >= 0.0))
		throw Error("margin: lambda_delta must be >= 0");
	if (step_size < 1)
		throw Error("margin: step size must be >= 1");
}

double margin_at(const MarginSchedule &schedule, std::int64_t t)
{
	if (t < 0)
		throw Error("margin_at: negative step");
	const std::int64_t k = schedule.mode == MarginMode::step_increase ? t / schedule.step_size : t % schedule.step_size;
	return schedule.lambda_min + schedule.lambda_delta * static_cast<double>(k);
}

TripletSet build_triplets(const MinedPairs &mined, TripletMode mode, std::span<const int> labels, Rng &rng)
{
	TripletSet out;
	const int n = static_cast<int>(labels.size());
	if (mode == TripletMode::offline)
	{
		std::vector<int> pos, neg;
		for (int a = 0; a < n; ++a)
		{
			pos.clear();
			neg.clear();
			for (int j = 0; j < n; ++j)
			{
				if (j == a)
					continue;
				(labels[j] == labels[a] ? pos : neg).push_back(j);
			}
			if (pos.empty() || neg.empty())
				continue;
			const int p = pos[rng.below(pos.size())];
			const int q = neg[rng.below(neg.size())];
			out.push_back({a, p, q});
		}
		return out;
	}

	// Pairs are sorted by anchor; walk both lists in step.
	std::size_t ip = 0, in = 0;
	const auto &P = mined.positives;
	const auto &N = mined.negatives;
	while (ip < P.size() && in < N.size())
	{
		const int a = std::min(P[ip].first, N[in].first);
		std::size_t ep = ip, en = in;
		while (ep < P.size() && P[ep].first == a)
			++ep;
		while (en < N.size() && N[en].first == a)
			++en;
		for (std::size_t i = ip; i < ep; ++i)
			for (std::size_t j = in; j < en; ++j)
				out.push_back({a, P[i].second, N[j].second});
		ip = ep;
		in = en;
	}
	return out;
}

} // namespace whosai
