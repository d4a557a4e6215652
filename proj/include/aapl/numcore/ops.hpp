#pragma once

#include <span>
#include <vector>

#include "aapl/numcore/tensor.hpp"

// Differentiable ops. No broadcasting: every op states the exact shapes it
// accepts and throws ShapeError otherwise. Any op producing NaN/Inf throws
// NumericError. Scalars have shape {} (rank 0).
namespace aapl::numcore::ops {

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise
Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double offset);

// [m,k]x[k,n] -> [m,n] and [m,k]x[k] -> [m]
Tensor matmul(const Tensor& a, const Tensor& b);

Tensor relu(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor log(const Tensor& a);

Tensor sum(const Tensor& a);   // -> scalar
Tensor mean(const Tensor& a);  // -> scalar
Tensor mean_rows(const Tensor& a);  // [n,d] -> [d]

// Vector ops, operands of shape [d].
Tensor dot(const Tensor& a, const Tensor& b);
Tensor l2_norm(const Tensor& a);
Tensor euclidean_distance(const Tensor& a, const Tensor& b);
Tensor cosine_similarity(const Tensor& a, const Tensor& b);
Tensor softmax(const Tensor& a);
Tensor log_softmax(const Tensor& a);

// Concatenate along axis 0; trailing extents must match.
Tensor concat(std::span<const Tensor> parts);
// Stack equal-shaped tensors along a new leading axis.
Tensor stack(std::span<const Tensor> parts);
// Rows [begin, end) along axis 0.
Tensor slice(const Tensor& a, std::size_t begin, std::size_t end);
// Element i of a rank-1 tensor as a scalar.
Tensor pick(const Tensor& a, std::size_t i);
Tensor reshape(const Tensor& a, Shape shape);

Tensor max0(const Tensor& a);  // hinge max(0, x) on a scalar

}  // namespace aapl::numcore::ops
