#pragma once

#include "mxm/tensor.hpp"

#include <cstddef>
#include <span>
#include <vector>

// Recorded primitives. Every function appends one operation to the tape and
// returns its output; shapes are checked eagerly and mismatches throw
// std::invalid_argument naming both shapes.
namespace mxm::ad {

using Index = std::vector<std::size_t>;

/// [m x k] * [k x n] -> [m x n]
Tensor matmul(Tape &tape, const Tensor &a, const Tensor &b);

Tensor add(Tape &tape, const Tensor &a, const Tensor &b);
Tensor sub(Tape &tape, const Tensor &a, const Tensor &b);
/// Elementwise (Hadamard) product.
Tensor mul(Tape &tape, const Tensor &a, const Tensor &b);
Tensor scale(Tape &tape, const Tensor &a, double factor);

/// Adds a length-n bias vector to every row of an [m x n] matrix.
Tensor add_bias(Tape &tape, const Tensor &a, const Tensor &bias);

/// x * sigmoid(x), elementwise.
Tensor swish(Tape &tape, const Tensor &x);
Tensor abs(Tape &tape, const Tensor &x);

/// Concatenates 2-D tensors with equal row counts along the column axis.
Tensor concat_cols(Tape &tape, const std::vector<Tensor> &parts);

/// out[r] = a[index[r]]
Tensor gather_rows(Tape &tape, const Tensor &a, std::span<const std::size_t> index);

/// out[s] = sum of a[r] over rows r with segment[r] == s. Segments that
/// receive no rows are zero.
Tensor segment_sum(Tape &tape, const Tensor &a,
                   std::span<const std::size_t> segment,
                   std::size_t n_segments);

/// Reductions to a shape-[1] tensor.
Tensor sum(Tape &tape, const Tensor &x);
Tensor mean(Tape &tape, const Tensor &x);

/// Sigmoid and swish as plain scalar functions, shared with tests.
double sigmoid(double x);
double swish(double x);

} // namespace mxm::ad
