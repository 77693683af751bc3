#pragma once

#include <span>

#include "lcr/numerics/graph.hpp"

namespace lcr::numerics {

// out[b,o] = sum_i x[b,i] * weights[i,o] + bias[o]
Var dense(Var x, Var weights, Var bias);

// Valid, stride-1 cross-correlation. x: [B,C,H,W], kernel: [F,C,k,k], bias: [F].
Var conv2d(Var x, Var kernel, Var bias);

// 2x2 window, stride 2; a trailing odd row/column is dropped. Ties resolve to the
// first maximum in row-major window order.
Var maxpool2d(Var x);

Var relu(Var x);

// [B, ...] -> [B, prod(...)]
Var flatten(Var x);

Var reshape(Var x, Shape shape);

// a: [M,K], b: [K,N] -> [M,N]
Var matmul(Var a, Var b);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var x, double factor);
Var square(Var x);

// Reductions to a single-element tensor of shape [1].
Var sum(Var x);
Var mean(Var x);

// q: [B,A] -> [B], picking q[b, columns[b]].
Var select_columns(Var q, std::span<const int> columns);

namespace kernels {

// Raw forward kernels shared by the recorded ops and by inference-only callers.
void dense_forward(const Tensor& x, const Tensor& weights, const Tensor& bias, Tensor& out);
void conv2d_forward(const Tensor& x, const Tensor& kernel, const Tensor& bias, Tensor& out);
void maxpool2d_forward(const Tensor& x, Tensor& out, std::vector<std::size_t>* argmax);

Shape conv2d_output_shape(const Shape& x, const Shape& kernel);
Shape maxpool2d_output_shape(const Shape& x);

}  // namespace kernels

}  // namespace lcr::numerics
