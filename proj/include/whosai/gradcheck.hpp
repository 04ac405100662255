#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "whosai/contrastive.hpp"
#include "whosai/encoder.hpp"

namespace whosai
{

struct GradCheckOptions
{
	double fd_step = 1e-4;
	/// Margin large enough that every triplet's hinge is active.
	double margin = 3.0;
	std::size_t max_params = 200;
	std::uint64_t seed = 0;
	/// Test hook: multiplies the analytic W2 gradient by (1 + this).
	double corrupt_w2_grad = 0.0;
};

struct GradCheckResult
{
	double max_relative_error = 0.0;
	std::string worst_parameter;
	std::size_t checked = 0;
};

/// Loss of the whole pipeline (encode, cosine distance, triplet hinge) over
/// every valid triplet of the batch.
double pipeline_loss(const EncoderParamsT<double> &params, const std::vector<EncoderInput> &batch,
                     const std::vector<int> &labels, double margin);

/// Analytic gradient of pipeline_loss.
ParamGradsT<double> pipeline_gradient(const EncoderParamsT<double> &params, const std::vector<EncoderInput> &batch,
                                      const std::vector<int> &labels, double margin);

/// Compare pipeline_gradient against central differences on a random
/// subsample of at most max_params parameters. The relative error of one
/// entry is |a - n| / max(|a|, |n|, 1e-6).
GradCheckResult grad_check(const EncoderParams &params, const std::vector<EncoderInput> &batch,
                           const std::vector<int> &labels, const GradCheckOptions &options = {});

struct GradCheckInstance
{
	EncoderParams params;
	std::vector<EncoderInput> batch;
	std::vector<int> labels;
};

/// Small seeded instance whose ReLU pre-activations all sit well away from
/// zero, so finite differences never straddle a kink.
GradCheckInstance make_grad_check_instance(std::uint64_t seed);

} // namespace whosai
