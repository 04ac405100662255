#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace whosai
{

// Dense types are templated on the scalar. Trained models hold float32
// parameters (the checkpoint format); oracles and gradient checks run in
// double.
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using VecF = Vec<float>;
using VecD = Vec<double>;
using MatF = Mat<float>;
using MatD = Mat<double>;

/// A sentence embedding h in R^f.
template <typename Scalar>
using EmbeddingT = Vec<Scalar>;
using Embedding = EmbeddingT<float>;

/// Error raised by every library operation on a contract violation.
class Error : public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

} // namespace whosai
