#include "viprom/train/probe.hpp"

#include <cmath>
#include <stdexcept>

namespace viprom::train {

using core::TensorD;
using core::TensorF;

void spd_solve(TensorD& a, TensorD& b) {
  int n = a.dim(0);
  if (a.dim(1) != n || b.dim(0) != n) throw std::invalid_argument("spd_solve: shape mismatch");
  int k = b.dim(1);
  // Cholesky a = L L^T (lower stored in place).
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a.at2(i, j);
      for (int t = 0; t < j; ++t) s -= a.at2(i, t) * a.at2(j, t);
      if (i == j) {
        if (s <= 0.0) throw std::runtime_error("spd_solve: matrix not positive definite");
        a.at2(i, i) = std::sqrt(s);
      } else {
        a.at2(i, j) = s / a.at2(j, j);
      }
    }
  }
  // Forward then backward substitution per column.
  for (int c = 0; c < k; ++c) {
    for (int i = 0; i < n; ++i) {
      double s = b.at2(i, c);
      for (int t = 0; t < i; ++t) s -= a.at2(i, t) * b.at2(t, c);
      b.at2(i, c) = s / a.at2(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
      double s = b.at2(i, c);
      for (int t = i + 1; t < n; ++t) s -= a.at2(t, i) * b.at2(t, c);
      b.at2(i, c) = s / a.at2(i, i);
    }
  }
}

double linear_probe_accuracy(const TensorF& train_feats, const std::vector<int>& train_labels,
                             const TensorF& test_feats, const std::vector<int>& test_labels,
                             int n_classes, double lambda) {
  int n = train_feats.dim(0), d = train_feats.dim(1);
  if (static_cast<int>(train_labels.size()) != n)
    throw std::invalid_argument("probe: train labels size mismatch");
  int db = d + 1;  // bias column

  TensorD gram({db, db});
  TensorD rhs({db, n_classes});
  auto x_at = [&](const TensorF& m, int i, int j) {
    return j < d ? static_cast<double>(m.at2(i, j)) : 1.0;
  };
  for (int i = 0; i < n; ++i) {
    int y = train_labels[static_cast<std::size_t>(i)];
    for (int a = 0; a < db; ++a) {
      double xa = x_at(train_feats, i, a);
      for (int b = 0; b <= a; ++b) gram.at2(a, b) += xa * x_at(train_feats, i, b);
      rhs.at2(a, y) += xa;
    }
  }
  for (int a = 0; a < db; ++a) {
    for (int b = a + 1; b < db; ++b) gram.at2(a, b) = gram.at2(b, a);
    gram.at2(a, a) += lambda;
  }
  spd_solve(gram, rhs);  // rhs now holds W [db, C]

  int correct = 0, total = test_feats.dim(0);
  for (int i = 0; i < total; ++i) {
    int best = 0;
    double bv = -1e300;
    for (int c = 0; c < n_classes; ++c) {
      double s = 0.0;
      for (int a = 0; a < db; ++a) s += x_at(test_feats, i, a) * rhs.at2(a, c);
      if (s > bv) {
        bv = s;
        best = c;
      }
    }
    if (best == test_labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return total > 0 ? static_cast<double>(correct) / total : 0.0;
}

void DualRidge::fit(const TensorD& x, const TensorD& y, double lambda) {
  int n = x.dim(0);
  x_train = x;
  TensorD k({n, n});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      double s = 0.0;
      for (int t = 0; t < x.dim(1); ++t) s += x.at2(i, t) * x.at2(j, t);
      k.at2(i, j) = s;
      k.at2(j, i) = s;
    }
  for (int i = 0; i < n; ++i) k.at2(i, i) += lambda;
  alpha = y;
  spd_solve(k, alpha);
}

TensorD DualRidge::predict(const TensorD& x) const {
  int m = x.dim(0), n = x_train.dim(0), d = x_train.dim(1), k = alpha.dim(1);
  TensorD out({m, k});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int t = 0; t < d; ++t) s += x.at2(i, t) * x_train.at2(j, t);
      for (int c = 0; c < k; ++c) out.at2(i, c) += s * alpha.at2(j, c);
    }
  return out;
}

}  // namespace viprom::train
