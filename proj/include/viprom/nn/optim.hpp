// optim.hpp - Adam optimizer, warmup+cosine schedule, momentum (EMA) update
// for the key tower.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "viprom/core/kernels.hpp"
#include "viprom/nn/layers.hpp"

namespace viprom::nn {

template <class T>
struct Adam {
  T b1 = T(0.9), b2 = T(0.999), eps = T(1e-8);
  std::int64_t t = 0;
  std::vector<std::vector<T>> m, v;

  explicit Adam(const std::vector<ParamRef<T>>& ps) {
    m.reserve(ps.size());
    v.reserve(ps.size());
    for (const auto& p : ps) {
      m.emplace_back(p.w->size(), T(0));
      v.emplace_back(p.w->size(), T(0));
    }
  }

  void step(std::vector<ParamRef<T>>& ps, T lr) {
    if (ps.size() != m.size()) throw std::invalid_argument("adam: param set changed");
    ++t;
    T bc1 = T(1) - static_cast<T>(std::pow(static_cast<double>(b1), static_cast<double>(t)));
    T bc2 = T(1) - static_cast<T>(std::pow(static_cast<double>(b2), static_cast<double>(t)));
    for (std::size_t i = 0; i < ps.size(); ++i) {
      core::adam_step(ps[i].w->data(), ps[i].g->data(), m[i].data(), v[i].data(),
                      static_cast<std::int64_t>(ps[i].w->size()), lr, b1, b2, eps, bc1, bc2);
    }
  }
};

// Linear warmup to peak, then cosine anneal to 0 at total_steps.
template <class T>
T warmup_cosine_lr(std::int64_t step, std::int64_t total_steps, std::int64_t warmup_steps,
                   T peak) {
  if (total_steps <= 0) return peak;
  if (warmup_steps > 0 && step < warmup_steps)
    return peak * static_cast<T>(step + 1) / static_cast<T>(warmup_steps);
  std::int64_t s = step - warmup_steps;
  std::int64_t span = total_steps - warmup_steps;
  if (span <= 0) return peak;
  double frac = static_cast<double>(s) / static_cast<double>(span);
  if (frac > 1.0) frac = 1.0;
  return peak * static_cast<T>(0.5 * (1.0 + std::cos(frac * 3.14159265358979323846)));
}

// theta_k <- m*theta_k + (1-m)*theta_q for structurally aligned sets.
template <class T>
void momentum_update(std::vector<ParamRef<T>>& key_params,
                     const std::vector<ParamRef<T>>& query_params, T m) {
  if (key_params.size() != query_params.size())
    throw std::invalid_argument("momentum_update: structural mismatch (param count " +
                                std::to_string(key_params.size()) + " vs " +
                                std::to_string(query_params.size()) + ")");
  for (std::size_t i = 0; i < key_params.size(); ++i) {
    if (key_params[i].name != query_params[i].name ||
        key_params[i].w->size() != query_params[i].w->size())
      throw std::invalid_argument("momentum_update: structural mismatch at '" +
                                  key_params[i].name + "' vs '" + query_params[i].name + "'");
    core::ema_update(key_params[i].w->data(), query_params[i].w->data(),
                     static_cast<std::int64_t>(key_params[i].w->size()), m);
  }
}

template <class T>
void copy_params(std::vector<ParamRef<T>>& dst, const std::vector<ParamRef<T>>& src) {
  if (dst.size() != src.size()) throw std::invalid_argument("copy_params: size mismatch");
  for (std::size_t i = 0; i < dst.size(); ++i) *dst[i].w = *src[i].w;
}

}  // namespace viprom::nn
