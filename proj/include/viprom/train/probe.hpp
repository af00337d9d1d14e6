// probe.hpp - closed-form ridge probes used to audit representations:
// a least-squares linear classifier over frozen features and a dual-form
// ridge regressor from pixels to positions.
#pragma once

#include <vector>

#include "viprom/core/tensor.hpp"

namespace viprom::train {

// Solves (X^T X + lambda I) W = X^T Y with a bias column appended to X.
// Returns held-out top-1 accuracy of argmax X W against labels.
double linear_probe_accuracy(const core::TensorF& train_feats, const std::vector<int>& train_labels,
                             const core::TensorF& test_feats, const std::vector<int>& test_labels,
                             int n_classes, double lambda = 1e-2);

// Dual-form ridge regression: fit alpha = (K + lambda I)^-1 Y with K = X X^T.
struct DualRidge {
  core::TensorD x_train;  // [n,d]
  core::TensorD alpha;    // [n,k]
  void fit(const core::TensorD& x, const core::TensorD& y, double lambda);
  core::TensorD predict(const core::TensorD& x) const;
};

// Dense symmetric-positive-definite solve (in-place Cholesky).
void spd_solve(core::TensorD& a, core::TensorD& b);

}  // namespace viprom::train
