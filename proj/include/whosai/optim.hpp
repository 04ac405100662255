#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "whosai/encoder.hpp"

namespace whosai
{

struct AdamWConfig
{
	double beta1 = 0.9;
	double beta2 = 0.99;
	double weight_decay = 0.01;
	double eps = 1e-8;

	bool operator==(const AdamWConfig &) const = default;
};

template <typename Scalar>
struct OptimizerStateT
{
	EncoderParamsT<Scalar> m; ///< first moment
	EncoderParamsT<Scalar> v; ///< second moment
	std::int64_t step = 0;

	static OptimizerStateT zeros(const EncoderConfig &config)
	{
		return {EncoderParamsT<Scalar>::zeros(config), EncoderParamsT<Scalar>::zeros(config), 0};
	}
};

using OptimizerState = OptimizerStateT<float>;

/// Linear ramp 0 -> peak over `warmup` steps, then linear decay to 0 at
/// `total`.
inline double linear_warmup_decay(double peak, std::int64_t warmup, std::int64_t total, std::int64_t t)
{
	if (t < warmup)
		return peak * static_cast<double>(t) / static_cast<double>(warmup);
	if (t >= total)
		return 0.0;
	return peak * static_cast<double>(total - t) / static_cast<double>(total - warmup);
}

/// Global L2 norm of all gradient tensors.
template <typename Scalar>
double grad_norm(const ParamGradsT<Scalar> &grads)
{
	double sq = 0.0;
	for_each_tensor(grads, [&](const char *, const auto &t) { sq += static_cast<double>(t.squaredNorm()); });
	return std::sqrt(sq);
}

/// Rescale gradients so their global norm is at most max_norm.
template <typename Scalar>
void clip_grad_norm(ParamGradsT<Scalar> &grads, double max_norm)
{
	const double norm = grad_norm(grads);
	if (norm > max_norm && norm > 0.0)
	{
		const auto scale = static_cast<Scalar>(max_norm / norm);
		for_each_tensor(grads, [&](const char *, auto &t) { t *= scale; });
	}
}

/// One AdamW update: decoupled decay theta -= lr * wd * theta, then the
/// bias-corrected Adam step. Throws before touching any state when a
/// gradient entry is not finite.
template <typename Scalar>
void adamw_step(EncoderParamsT<Scalar> &params, const ParamGradsT<Scalar> &grads, OptimizerStateT<Scalar> &state,
                double lr, const AdamWConfig &config)
{
	zip_tensors(params, grads, [](const char *name, const auto &p, const auto &g) {
		if (p.rows() != g.rows() || p.cols() != g.cols())
			throw Error(std::string("adamw_step: shape mismatch in ") + name);
		if (!g.allFinite())
			throw Error(std::string("adamw_step: non-finite gradient in ") + name);
	});

	state.step += 1;
	const Scalar b1 = static_cast<Scalar>(config.beta1);
	const Scalar b2 = static_cast<Scalar>(config.beta2);
	const Scalar bc1 = static_cast<Scalar>(1.0 - std::pow(config.beta1, static_cast<double>(state.step)));
	const Scalar bc2 = static_cast<Scalar>(1.0 - std::pow(config.beta2, static_cast<double>(state.step)));
	const Scalar step_lr = static_cast<Scalar>(lr);
	const Scalar decay = static_cast<Scalar>(1.0 - lr * config.weight_decay);
	const Scalar eps = static_cast<Scalar>(config.eps);

	auto update = [&](auto &p, const auto &g, auto &m, auto &v) {
		auto pa = p.array();
		const auto ga = g.array();
		auto ma = m.array();
		auto va = v.array();
		pa *= decay;
		ma = b1 * ma + (Scalar(1) - b1) * ga;
		va = b2 * va + (Scalar(1) - b2) * ga.square();
		pa -= step_lr * (ma / bc1) / ((va / bc2).sqrt() + eps);
	};
	update(params.feature_table, grads.feature_table, state.m.feature_table, state.v.feature_table);
	update(params.w1, grads.w1, state.m.w1, state.v.w1);
	update(params.b1, grads.b1, state.m.b1, state.v.b1);
	update(params.w2, grads.w2, state.m.w2, state.v.w2);
	update(params.b2, grads.b2, state.m.b2, state.v.b2);
}

} // namespace whosai
