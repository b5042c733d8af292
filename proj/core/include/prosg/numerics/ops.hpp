// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "prosg/numerics/tape.hpp"

#include <cstdint>
#include <vector>

namespace prosg::num {

// Differentiable operations. Binary elementwise ops broadcast a dimension of
// size one against the other operand (row vectors over rows, column vectors
// over columns, one-element tensors over everything).

template <typename T> Var<T> matmul(Var<T> a, Var<T> b);
template <typename T> Var<T> add(Var<T> a, Var<T> b);
template <typename T> Var<T> sub(Var<T> a, Var<T> b);
template <typename T> Var<T> mul(Var<T> a, Var<T> b);

template <typename T> Var<T> scale(Var<T> a, T factor);
template <typename T> Var<T> add_scalar(Var<T> a, T value);
template <typename T> Var<T> neg(Var<T> a);

template <typename T> Var<T> relu(Var<T> a);
template <typename T> Var<T> softplus(Var<T> a);
template <typename T> Var<T> sigmoid(Var<T> a);
template <typename T> Var<T> sin(Var<T> a);
template <typename T> Var<T> cos(Var<T> a);
template <typename T> Var<T> exp(Var<T> a);
template <typename T> Var<T> log(Var<T> a);
template <typename T> Var<T> square(Var<T> a);

/// Concatenation along the last dimension (all inputs share a row count).
template <typename T> Var<T> concat_cols(const std::vector<Var<T>>& parts);
/// Concatenation along rows (all inputs share a column count).
template <typename T> Var<T> concat_rows(const std::vector<Var<T>>& parts);
/// Columns [begin, end).
template <typename T> Var<T> slice_cols(Var<T> a, std::size_t begin, std::size_t end);
template <typename T> Var<T> reshape(Var<T> a, Shape shape);

template <typename T> Var<T> sum(Var<T> a);
template <typename T> Var<T> mean(Var<T> a);
/// Sum across columns: (R, C) -> (R, 1).
template <typename T> Var<T> sum_cols(Var<T> a);
/// Sum across rows: (R, C) -> (1, C).
template <typename T> Var<T> sum_rows(Var<T> a);

/// Row gather. Output row r concatenates input rows idx[r*group + g] for
/// g in [0, group); index -1 yields a zero row. Backward scatter-adds.
template <typename T> Var<T> gather_rows(Var<T> a, std::vector<std::int64_t> idx, std::size_t group = 1);

template <typename T> Var<T> operator+(Var<T> a, Var<T> b) { return add(a, b); }
template <typename T> Var<T> operator-(Var<T> a, Var<T> b) { return sub(a, b); }
template <typename T> Var<T> operator*(Var<T> a, Var<T> b) { return mul(a, b); }
template <typename T> Var<T> operator-(Var<T> a) { return neg(a); }

}  // namespace prosg::num
