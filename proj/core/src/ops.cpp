// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#include "prosg/numerics/ops.hpp"

#include "prosg/error.hpp"

#include <cmath>

namespace prosg::num {
namespace {

template <typename T>
void same_tape(const Var<T>& a, const Var<T>& b) {
  if (a.tape == nullptr || a.tape != b.tape) throw ContractError("operands live on different tapes");
}

// Broadcast geometry of a binary elementwise op.
struct Broadcast {
  std::size_t rows, cols;
  std::size_t a_rs, a_cs, b_rs, b_cs;  // strides; zero along broadcast dims
  Shape out_shape;
};

template <typename T>
Broadcast broadcast_of(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  auto dims = [](const Tensor<T>& t) {
    if (t.size() == 1) return std::pair<std::size_t, std::size_t>{1, 1};
    return std::pair<std::size_t, std::size_t>{t.rows(), t.cols()};
  };
  auto [ra, ca] = dims(a);
  auto [rb, cb] = dims(b);
  const std::size_t r = std::max(ra, rb), c = std::max(ca, cb);
  if ((ra != r && ra != 1) || (rb != r && rb != 1) || (ca != c && ca != 1) || (cb != c && cb != 1)) {
    throw ShapeError(std::string(op) + ": cannot broadcast " + to_string(a.shape()) + " with " + to_string(b.shape()));
  }
  Broadcast bc{r, c, ra == 1 ? 0 : ca, ca == 1 ? 0u : 1u, rb == 1 ? 0 : cb, cb == 1 ? 0u : 1u, {}};
  if (ra == r && ca == c && a.size() == r * c) {
    bc.out_shape = a.shape();
  } else if (rb == r && cb == c && b.size() == r * c) {
    bc.out_shape = b.shape();
  } else {
    bc.out_shape = Shape{r, c};
  }
  return bc;
}

template <typename T, typename Fwd, typename DA, typename DB>
Var<T> binary(Var<T> a, Var<T> b, const char* name, Fwd fwd, DA da, DB db) {
  same_tape(a, b);
  Tape<T>& tape = *a.tape;
  const Tensor<T>& av = a.value();
  const Tensor<T>& bv = b.value();
  const Broadcast bc = broadcast_of(av, bv, name);
  Tensor<T> out(bc.out_shape);
  for (std::size_t r = 0; r < bc.rows; ++r) {
    const T* pa = av.data().data() + r * bc.a_rs;
    const T* pb = bv.data().data() + r * bc.b_rs;
    T* po = out.data().data() + r * bc.cols;
    for (std::size_t c = 0; c < bc.cols; ++c) po[c] = fwd(pa[c * bc.a_cs], pb[c * bc.b_cs]);
  }
  const std::size_t ia = a.id, ib = b.id;
  return tape.record(std::move(out), {a, b}, [bc, ia, ib, da, db](Tape<T>& t, std::size_t self) {
    auto g = t.grad(self);
    const Tensor<T>& av = t.value(ia);
    const Tensor<T>& bv = t.value(ib);
    if (t.requires_grad(ia)) {
      auto ga = t.accumulator(ia);
      for (std::size_t r = 0; r < bc.rows; ++r)
        for (std::size_t c = 0; c < bc.cols; ++c) {
          const std::size_t ka = r * bc.a_rs + c * bc.a_cs, kb = r * bc.b_rs + c * bc.b_cs;
          ga[ka] += da(g[r * bc.cols + c], av[ka], bv[kb]);
        }
    }
    if (t.requires_grad(ib)) {
      auto gb = t.accumulator(ib);
      for (std::size_t r = 0; r < bc.rows; ++r)
        for (std::size_t c = 0; c < bc.cols; ++c) {
          const std::size_t ka = r * bc.a_rs + c * bc.a_cs, kb = r * bc.b_rs + c * bc.b_cs;
          gb[kb] += db(g[r * bc.cols + c], av[ka], bv[kb]);
        }
    }
  });
}

// Unary elementwise op; `dfn(grad, x, y)` is the local derivative times grad.
template <typename T, typename Fwd, typename D>
Var<T> unary_op(Var<T> a, Fwd fwd, D dfn) {
  Tape<T>& tape = *a.tape;
  const Tensor<T>& av = a.value();
  Tensor<T> out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = fwd(av[i]);
  const std::size_t ia = a.id;
  return tape.record(std::move(out), {a}, [ia, dfn](Tape<T>& t, std::size_t self) {
    auto g = t.grad(self);
    const Tensor<T>& x = t.value(ia);
    const Tensor<T>& y = t.value(self);
    auto ga = t.accumulator(ia);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += dfn(g[i], x[i], y[i]);
  });
}

}  // namespace

template <typename T>
Var<T> matmul(Var<T> a, Var<T> b) {
  same_tape(a, b);
  const Tensor<T>& av = a.value();
  const Tensor<T>& bv = b.value();
  if (av.cols() != bv.rows() || bv.shape().size() > 2) {
    throw ShapeError("matmul: inner dimensions differ, " + to_string(av.shape()) + " x " + to_string(bv.shape()));
  }
  Shape out_shape = av.shape();
  if (out_shape.empty()) out_shape = {1};
  out_shape.back() = bv.cols();
  Tensor<T> out(out_shape);
  out.mat().noalias() = av.mat() * bv.mat();
  const std::size_t ia = a.id, ib = b.id;
  return a.tape->record(std::move(out), {a, b}, [ia, ib](Tape<T>& t, std::size_t self) {
    const Tensor<T>& av = t.value(ia);
    const Tensor<T>& bv = t.value(ib);
    auto g = t.grad(self);
    typename Tensor<T>::ConstMatrixMap gm(g.data(), av.rows(), bv.cols());
    if (t.requires_grad(ia)) {
      auto ga = t.accumulator(ia);
      typename Tensor<T>::MatrixMap gam(ga.data(), av.rows(), av.cols());
      gam.noalias() += gm * bv.mat().transpose();
    }
    if (t.requires_grad(ib)) {
      auto gb = t.accumulator(ib);
      typename Tensor<T>::MatrixMap gbm(gb.data(), bv.rows(), bv.cols());
      gbm.noalias() += av.mat().transpose() * gm;
    }
  });
}

template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
  return binary<T>(
      a, b, "add", [](T x, T y) { return x + y; }, [](T g, T, T) { return g; }, [](T g, T, T) { return g; });
}

template <typename T>
Var<T> sub(Var<T> a, Var<T> b) {
  return binary<T>(
      a, b, "sub", [](T x, T y) { return x - y; }, [](T g, T, T) { return g; }, [](T g, T, T) { return -g; });
}

template <typename T>
Var<T> mul(Var<T> a, Var<T> b) {
  return binary<T>(
      a, b, "mul", [](T x, T y) { return x * y; }, [](T g, T, T y) { return g * y; },
      [](T g, T x, T) { return g * x; });
}

template <typename T>
Var<T> scale(Var<T> a, T factor) {
  return unary_op<T>(a, [factor](T x) { return x * factor; }, [factor](T g, T, T) { return g * factor; });
}

template <typename T>
Var<T> add_scalar(Var<T> a, T value) {
  return unary_op<T>(a, [value](T x) { return x + value; }, [](T g, T, T) { return g; });
}

template <typename T>
Var<T> neg(Var<T> a) {
  return scale(a, T(-1));
}

template <typename T>
Var<T> relu(Var<T> a) {
  return unary_op<T>(
      a, [](T x) { return x > T(0) ? x : T(0); }, [](T g, T x, T) { return x > T(0) ? g : T(0); });
}

template <typename T>
Var<T> softplus(Var<T> a) {
  return unary_op<T>(
      a, [](T x) { return std::log1p(std::exp(-std::abs(x))) + std::max(x, T(0)); },
      [](T g, T x, T) { return g / (T(1) + std::exp(-x)); });
}

template <typename T>
Var<T> sigmoid(Var<T> a) {
  return unary_op<T>(
      a,
      [](T x) {
        if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
        const T e = std::exp(x);
        return e / (T(1) + e);
      },
      [](T g, T, T y) { return g * y * (T(1) - y); });
}

template <typename T>
Var<T> sin(Var<T> a) {
  return unary_op<T>(a, [](T x) { return std::sin(x); }, [](T g, T x, T) { return g * std::cos(x); });
}

template <typename T>
Var<T> cos(Var<T> a) {
  return unary_op<T>(a, [](T x) { return std::cos(x); }, [](T g, T x, T) { return -g * std::sin(x); });
}

template <typename T>
Var<T> exp(Var<T> a) {
  return unary_op<T>(a, [](T x) { return std::exp(x); }, [](T g, T, T y) { return g * y; });
}

template <typename T>
Var<T> log(Var<T> a) {
  return unary_op<T>(a, [](T x) { return std::log(x); }, [](T g, T x, T) { return g / x; });
}

template <typename T>
Var<T> square(Var<T> a) {
  return unary_op<T>(a, [](T x) { return x * x; }, [](T g, T x, T) { return T(2) * x * g; });
}

template <typename T>
Var<T> concat_cols(const std::vector<Var<T>>& parts) {
  if (parts.empty()) throw ContractError("concat_cols of nothing");
  const std::size_t rows = parts.front().rows();
  std::size_t cols = 0;
  std::vector<std::size_t> ids, widths;
  for (const auto& p : parts) {
    same_tape(parts.front(), p);
    if (p.rows() != rows) {
      throw ShapeError("concat_cols: row mismatch " + to_string(parts.front().shape()) + " vs " +
                       to_string(p.shape()));
    }
    ids.push_back(p.id);
    widths.push_back(p.cols());
    cols += p.cols();
  }
  Tensor<T> out(Shape{rows, cols});
  std::size_t offset = 0;
  for (const auto& p : parts) {
    out.mat().middleCols(offset, p.cols()) = p.value().mat();
    offset += p.cols();
  }
  return parts.front().tape->record(std::move(out), parts, [ids, widths, rows, cols](Tape<T>& t, std::size_t self) {
    typename Tensor<T>::ConstMatrixMap g(t.grad(self).data(), rows, cols);
    std::size_t offset = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (t.requires_grad(ids[k])) {
        auto acc = t.accumulator(ids[k]);
        typename Tensor<T>::MatrixMap am(acc.data(), rows, widths[k]);
        am += g.middleCols(offset, widths[k]);
      }
      offset += widths[k];
    }
  });
}

template <typename T>
Var<T> concat_rows(const std::vector<Var<T>>& parts) {
  if (parts.empty()) throw ContractError("concat_rows of nothing");
  const std::size_t cols = parts.front().cols();
  std::size_t total = 0;
  std::vector<std::size_t> ids, sizes;
  for (const auto& p : parts) {
    same_tape(parts.front(), p);
    if (p.cols() != cols) {
      throw ShapeError("concat_rows: column mismatch " + to_string(parts.front().shape()) + " vs " +
                       to_string(p.shape()));
    }
    ids.push_back(p.id);
    sizes.push_back(p.value().size());
    total += p.value().size();
  }
  std::vector<T> data;
  data.reserve(total);
  for (const auto& p : parts) data.insert(data.end(), p.value().data().begin(), p.value().data().end());
  Tensor<T> out(Shape{total / std::max<std::size_t>(cols, 1), cols}, std::move(data));
  return parts.front().tape->record(std::move(out), parts, [ids, sizes](Tape<T>& t, std::size_t self) {
    auto g = t.grad(self);
    std::size_t offset = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (t.requires_grad(ids[k])) {
        auto acc = t.accumulator(ids[k]);
        for (std::size_t i = 0; i < sizes[k]; ++i) acc[i] += g[offset + i];
      }
      offset += sizes[k];
    }
  });
}

template <typename T>
Var<T> slice_cols(Var<T> a, std::size_t begin, std::size_t end) {
  const Tensor<T>& av = a.value();
  if (begin > end || end > av.cols()) {
    throw ShapeError("slice_cols [" + std::to_string(begin) + ", " + std::to_string(end) + ") out of " +
                     to_string(av.shape()));
  }
  const std::size_t rows = av.rows(), cols = av.cols(), w = end - begin;
  Tensor<T> out(Shape{rows, w});
  out.mat() = av.mat().middleCols(begin, w);
  const std::size_t ia = a.id;
  return a.tape->record(std::move(out), {a}, [ia, rows, cols, begin, w](Tape<T>& t, std::size_t self) {
    typename Tensor<T>::ConstMatrixMap g(t.grad(self).data(), rows, w);
    auto acc = t.accumulator(ia);
    typename Tensor<T>::MatrixMap am(acc.data(), rows, cols);
    am.middleCols(begin, w) += g;
  });
}

template <typename T>
Var<T> reshape(Var<T> a, Shape shape) {
  Tensor<T> out = a.value().reshaped(std::move(shape));
  const std::size_t ia = a.id;
  return a.tape->record(std::move(out), {a}, [ia](Tape<T>& t, std::size_t self) {
    auto g = t.grad(self);
    auto acc = t.accumulator(ia);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g[i];
  });
}

template <typename T>
Var<T> sum(Var<T> a) {
  const Tensor<T>& av = a.value();
  T s = T(0);
  for (T x : av.data()) s += x;
  const std::size_t ia = a.id;
  return a.tape->record(Tensor<T>::scalar(s), {a}, [ia](Tape<T>& t, std::size_t self) {
    const T g = t.grad(self)[0];
    auto acc = t.accumulator(ia);
    for (auto& x : acc) x += g;
  });
}

template <typename T>
Var<T> mean(Var<T> a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw ContractError("mean of an empty tensor");
  return scale(sum(a), T(1) / static_cast<T>(n));
}

template <typename T>
Var<T> sum_cols(Var<T> a) {
  const Tensor<T>& av = a.value();
  const std::size_t rows = av.rows(), cols = av.cols();
  Tensor<T> out(Shape{rows, 1});
  out.mat() = av.mat().rowwise().sum();
  const std::size_t ia = a.id;
  return a.tape->record(std::move(out), {a}, [ia, rows, cols](Tape<T>& t, std::size_t self) {
    auto g = t.grad(self);
    auto acc = t.accumulator(ia);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) acc[r * cols + c] += g[r];
  });
}

template <typename T>
Var<T> sum_rows(Var<T> a) {
  const Tensor<T>& av = a.value();
  const std::size_t rows = av.rows(), cols = av.cols();
  Tensor<T> out(Shape{1, cols});
  out.mat() = av.mat().colwise().sum();
  const std::size_t ia = a.id;
  return a.tape->record(std::move(out), {a}, [ia, rows, cols](Tape<T>& t, std::size_t self) {
    auto g = t.grad(self);
    auto acc = t.accumulator(ia);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) acc[r * cols + c] += g[c];
  });
}

template <typename T>
Var<T> gather_rows(Var<T> a, std::vector<std::int64_t> idx, std::size_t group) {
  const Tensor<T>& av = a.value();
  if (group == 0 || idx.size() % group != 0) {
    throw ShapeError("gather_rows: index count " + std::to_string(idx.size()) + " not divisible by group " +
                     std::to_string(group));
  }
  const std::size_t cols = av.cols(), in_rows = av.rows();
  const std::size_t out_rows = idx.size() / group;
  for (std::int64_t i : idx) {
    if (i < -1 || i >= static_cast<std::int64_t>(in_rows)) {
      throw ShapeError("gather_rows: index " + std::to_string(i) + " out of " + to_string(av.shape()));
    }
  }
  Tensor<T> out(Shape{out_rows, group * cols});
  T* po = out.data().data();
  const T* pa = av.data().data();
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] >= 0) std::copy_n(pa + idx[k] * cols, cols, po + k * cols);
  }
  const std::size_t ia = a.id;
  return a.tape->record(std::move(out), {a}, [ia, cols, idx = std::move(idx)](Tape<T>& t, std::size_t self) {
    auto g = t.grad(self);
    auto acc = t.accumulator(ia);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (idx[k] < 0) continue;
      T* dst = acc.data() + idx[k] * cols;
      const T* src = g.data() + k * cols;
      for (std::size_t c = 0; c < cols; ++c) dst[c] += src[c];
    }
  });
}

#define PROSG_INSTANTIATE_OPS(T)                                                        \
  template Var<T> matmul(Var<T>, Var<T>);                                               \
  template Var<T> add(Var<T>, Var<T>);                                                  \
  template Var<T> sub(Var<T>, Var<T>);                                                  \
  template Var<T> mul(Var<T>, Var<T>);                                                  \
  template Var<T> scale(Var<T>, T);                                                     \
  template Var<T> add_scalar(Var<T>, T);                                                \
  template Var<T> neg(Var<T>);                                                          \
  template Var<T> relu(Var<T>);                                                         \
  template Var<T> softplus(Var<T>);                                                     \
  template Var<T> sigmoid(Var<T>);                                                      \
  template Var<T> sin(Var<T>);                                                          \
  template Var<T> cos(Var<T>);                                                          \
  template Var<T> exp(Var<T>);                                                          \
  template Var<T> log(Var<T>);                                                          \
  template Var<T> square(Var<T>);                                                       \
  template Var<T> concat_cols(const std::vector<Var<T>>&);                              \
  template Var<T> concat_rows(const std::vector<Var<T>>&);                              \
  template Var<T> slice_cols(Var<T>, std::size_t, std::size_t);                         \
  template Var<T> reshape(Var<T>, Shape);                                               \
  template Var<T> sum(Var<T>);                                                          \
  template Var<T> mean(Var<T>);                                                         \
  template Var<T> sum_cols(Var<T>);                                                     \
  template Var<T> sum_rows(Var<T>);                                                     \
  template Var<T> gather_rows(Var<T>, std::vector<std::int64_t>, std::size_t);

PROSG_INSTANTIATE_OPS(float)
PROSG_INSTANTIATE_OPS(double)

}  // namespace prosg::num
