// Shared test helpers: finite-difference gradient checking and small
// generators.
#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "viprom/core/rng.hpp"
#include "viprom/core/tensor.hpp"

namespace testutil {

// Relative error between analytic and numeric derivatives:
// |a-n| / max(1, |a|, |n|).
inline double rel_err(double analytic, double numeric) {
  double denom = std::max({1.0, std::fabs(analytic), std::fabs(numeric)});
  return std::fabs(analytic - numeric) / denom;
}

// Central finite differences on f at x, step h (double precision).
inline double central_diff(const std::function<double(double)>& f, double x, double h = 1e-4) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Checks d(scalar_fn)/d(values[i]) against grads[i] for each index in `idx`;
// returns the max relative error.
inline double max_grad_rel_err(std::vector<double>& values, const std::vector<double>& grads,
                               const std::vector<std::size_t>& idx,
                               const std::function<double()>& scalar_fn, double h = 1e-4) {
  double worst = 0.0;
  for (std::size_t i : idx) {
    double saved = values[i];
    values[i] = saved + h;
    double fp = scalar_fn();
    values[i] = saved - h;
    double fm = scalar_fn();
    values[i] = saved;
    double numeric = (fp - fm) / (2.0 * h);
    worst = std::max(worst, rel_err(grads[i], numeric));
  }
  return worst;
}

inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t count,
                                               std::uint64_t seed) {
  viprom::core::Rng rng(seed);
  std::vector<std::size_t> out;
  if (n == 0) return out;
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(static_cast<std::size_t>(rng.uniform_int(static_cast<int>(n))));
  return out;
}

template <class T>
viprom::core::Tensor<T> random_tensor(std::vector<int> shape, std::uint64_t seed,
                                      double scale = 1.0) {
  viprom::core::Tensor<T> t(std::move(shape));
  viprom::core::Rng rng(seed);
  for (std::int64_t i = 0; i < t.size(); ++i) t.at(i) = static_cast<T>(rng.normal() * scale);
  return t;
}

template <class T>
viprom::core::Tensor<T> random_unit_rows(int n, int d, std::uint64_t seed) {
  auto t = random_tensor<T>({n, d}, seed);
  for (int i = 0; i < n; ++i) {
    double s = 0;
    for (int j = 0; j < d; ++j) s += static_cast<double>(t.at2(i, j)) * t.at2(i, j);
    double nm = std::sqrt(s);
    for (int j = 0; j < d; ++j) t.at2(i, j) = static_cast<T>(t.at2(i, j) / nm);
  }
  return t;
}

inline std::string temp_dir(const std::string& tag) {
  std::string base = "viprom_test_" + tag;
  return base;
}

}  // namespace testutil
