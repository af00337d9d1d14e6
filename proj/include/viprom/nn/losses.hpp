// losses.hpp - training objectives with analytic gradients.
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "viprom/core/kernels.hpp"
#include "viprom/core/tensor.hpp"

namespace viprom::nn {

template <class T>
struct LossOut {
  T value = T(0);
  core::Tensor<T> grad;  // w.r.t. the first argument
};

namespace detail {
template <class T>
void check_unit_rows(const core::Tensor<T>& m, const char* what) {
  int n = m.dim(0), d = m.dim(1);
  for (int i = 0; i < n; ++i) {
    T s = T(0);
    for (int j = 0; j < d; ++j) s += m.at2(i, j) * m.at2(i, j);
    T nm = std::sqrt(s);
    if (std::fabs(static_cast<double>(nm) - 1.0) > 1e-4)
      throw std::invalid_argument(std::string(what) + ": row " + std::to_string(i) +
                                  " is not L2-normalized (norm=" + std::to_string(static_cast<double>(nm)) + ")");
  }
}
}  // namespace detail

// InfoNCE over matched query/key rows:
//   loss = mean_i -log( exp(q_i.k_i / tau) / sum_j exp(q_i.k_j / tau) )
// Gradient is w.r.t. queries only; keys come from the momentum tower.
// `validate=false` is the unchecked core used by gradient checks.
template <class T>
LossOut<T> info_nce(const core::Tensor<T>& queries, const core::Tensor<T>& keys, T temperature,
                    bool validate = true) {
  if (queries.rank() != 2 || keys.rank() != 2 || !queries.same_shape(keys))
    throw std::invalid_argument("info_nce: queries/keys must be matching [B,d] matrices");
  int b = queries.dim(0), d = queries.dim(1);
  if (b < 2) throw std::invalid_argument("info_nce: batch must be >= 2");
  if (!(temperature > T(0))) throw std::invalid_argument("info_nce: temperature must be > 0");
  if (validate) {
    detail::check_unit_rows(queries, "info_nce queries");
    detail::check_unit_rows(keys, "info_nce keys");
  }

  core::Tensor<T> logits({b, b});
  core::matmul_nt(queries.data(), b, d, keys.data(), b, logits.data());
  T inv_tau = T(1) / temperature;
  for (std::int64_t i = 0; i < logits.size(); ++i) logits.at(i) *= inv_tau;

  // Row-wise softmax cross-entropy against the diagonal.
  core::Tensor<T> probs({b, b});
  T loss = T(0);
  for (int i = 0; i < b; ++i) {
    T mx = logits.at2(i, 0);
    for (int j = 1; j < b; ++j) mx = std::max(mx, logits.at2(i, j));
    T sum = T(0);
    for (int j = 0; j < b; ++j) {
      T e = std::exp(logits.at2(i, j) - mx);
      probs.at2(i, j) = e;
      sum += e;
    }
    for (int j = 0; j < b; ++j) probs.at2(i, j) /= sum;
    loss += -(logits.at2(i, i) - mx - std::log(sum));
  }
  loss /= static_cast<T>(b);

  // dL/dlogits = (P - I)/B ; dL/dq = dL/dlogits . K / tau
  core::Tensor<T> dlogits({b, b});
  for (int i = 0; i < b; ++i)
    for (int j = 0; j < b; ++j)
      dlogits.at2(i, j) = (probs.at2(i, j) - (i == j ? T(1) : T(0))) / static_cast<T>(b);
  LossOut<T> out;
  out.value = loss;
  out.grad = core::Tensor<T>({b, d});
  core::matmul_nn(dlogits.data(), b, b, keys.data(), d, out.grad.data());
  for (std::int64_t i = 0; i < out.grad.size(); ++i) out.grad.at(i) *= inv_tau;
  return out;
}

// Mean softmax cross-entropy of [B,C] logits against integer labels.
template <class T>
LossOut<T> cross_entropy(const core::Tensor<T>& logits, const std::vector<int>& labels) {
  if (logits.rank() != 2) throw std::invalid_argument("cross_entropy: logits must be [B,C]");
  int b = logits.dim(0), c = logits.dim(1);
  if (c < 2) throw std::invalid_argument("cross_entropy: need at least 2 classes");
  if (static_cast<int>(labels.size()) != b)
    throw std::invalid_argument("cross_entropy: labels/batch size mismatch");
  for (int l : labels)
    if (l < 0 || l >= c)
      throw std::invalid_argument("cross_entropy: label " + std::to_string(l) +
                                  " out of range for " + std::to_string(c) + " classes");

  LossOut<T> out;
  out.grad = core::Tensor<T>({b, c});
  T loss = T(0);
  for (int i = 0; i < b; ++i) {
    T mx = logits.at2(i, 0);
    for (int j = 1; j < c; ++j) mx = std::max(mx, logits.at2(i, j));
    T sum = T(0);
    for (int j = 0; j < c; ++j) sum += std::exp(logits.at2(i, j) - mx);
    int y = labels[static_cast<std::size_t>(i)];
    loss += -(logits.at2(i, y) - mx - std::log(sum));
    for (int j = 0; j < c; ++j) {
      T p = std::exp(logits.at2(i, j) - mx) / sum;
      out.grad.at2(i, j) = (p - (j == y ? T(1) : T(0))) / static_cast<T>(b);
    }
  }
  out.value = loss / static_cast<T>(b);
  return out;
}

// Visual-semantics loss: plain batch cross-entropy.
template <class T>
LossOut<T> loss_vs(const core::Tensor<T>& student_logits, const std::vector<int>& labels) {
  return cross_entropy(student_logits, labels);
}

// Temporal-dynamics loss: NxN logits (one row per presented frame), labels
// must be a permutation of 0..N-1 (each frame's original position).
template <class T>
LossOut<T> loss_td(const core::Tensor<T>& order_logits, const std::vector<int>& labels) {
  if (order_logits.rank() != 2 || order_logits.dim(0) != order_logits.dim(1))
    throw std::invalid_argument("loss_td: logits must be square [N,N]");
  int n = order_logits.dim(0);
  if (static_cast<int>(labels.size()) != n)
    throw std::invalid_argument("loss_td: labels size mismatch");
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (int l : labels) {
    if (l < 0 || l >= n || seen[static_cast<std::size_t>(l)])
      throw std::invalid_argument("loss_td: labels are not a permutation of 0..N-1");
    seen[static_cast<std::size_t>(l)] = true;
  }
  return cross_entropy(order_logits, labels);
}

template <class T>
T joint_loss(T l_vs, T l_td, T lambda) {
  if (!(std::isfinite(static_cast<double>(l_vs)) && std::isfinite(static_cast<double>(l_td))))
    throw std::invalid_argument("joint_loss: non-finite input");
  if (lambda < T(0)) throw std::invalid_argument("joint_loss: lambda must be >= 0");
  return l_vs + lambda * l_td;
}

// Mean squared error over all elements; grad w.r.t. predictions.
template <class T>
LossOut<T> mse_loss(const core::Tensor<T>& pred, const core::Tensor<T>& target) {
  if (!pred.same_shape(target)) throw std::invalid_argument("mse: shape mismatch");
  LossOut<T> out;
  out.grad = core::Tensor<T>(pred.shape);
  T loss = T(0);
  T inv = T(1) / static_cast<T>(pred.size());
  for (std::int64_t i = 0; i < pred.size(); ++i) {
    T d = pred.at(i) - target.at(i);
    loss += d * d;
    out.grad.at(i) = T(2) * d * inv;
  }
  out.value = loss * inv;
  return out;
}

}  // namespace viprom::nn
