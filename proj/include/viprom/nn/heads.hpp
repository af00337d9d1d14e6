// heads.hpp - attachable two-layer perceptron heads.
#pragma once

#include <stdexcept>
#include <string>

#include "viprom/nn/layers.hpp"

namespace viprom::nn {

enum class HeadKind { Projection, Prediction, ClassifierSemantics, ClassifierOrder, Policy };

inline std::string head_name(HeadKind k) {
  switch (k) {
    case HeadKind::Projection: return "projection";
    case HeadKind::Prediction: return "prediction";
    case HeadKind::ClassifierSemantics: return "classifier_semantics";
    case HeadKind::ClassifierOrder: return "classifier_order";
    case HeadKind::Policy: return "policy";
  }
  return "?";
}

// Two affine layers, one nonlinearity between. The policy head uses tanh,
// everything else relu.
template <class T>
Sequential<T> make_head(HeadKind kind, int in_dim, int hidden, int out_dim) {
  if (in_dim <= 0 || hidden <= 0 || out_dim <= 0)
    throw std::invalid_argument("make_head: dims must be positive");
  Sequential<T> net;
  net.template add<Linear<T>>("fc1", in_dim, hidden);
  if (kind == HeadKind::Policy)
    net.template add<Tanh<T>>("act");
  else
    net.template add<ReLU<T>>("act");
  net.template add<Linear<T>>("fc2", hidden, out_dim);
  return net;
}

}  // namespace viprom::nn
