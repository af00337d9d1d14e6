// layers.hpp - layer graph with hand-written backprop. Layers cache what they
// need during a training-mode forward; backward must follow the matching
// forward. Parameters are exposed as named refs for the optimizer, momentum
// updates and checkpointing.
#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "viprom/core/kernels.hpp"
#include "viprom/core/rng.hpp"
#include "viprom/core/tensor.hpp"

namespace viprom::nn {

using core::Tensor;

template <class T>
struct ParamRef {
  std::string name;
  std::vector<T>* w = nullptr;
  std::vector<T>* g = nullptr;
};

template <class T>
struct Layer {
  std::string name;
  explicit Layer(std::string n) : name(std::move(n)) {}
  virtual ~Layer() = default;
  virtual void forward(const Tensor<T>& x, Tensor<T>& y, bool train) = 0;
  virtual void backward(const Tensor<T>& dy, Tensor<T>& dx) = 0;
  virtual void collect(const std::string& prefix, std::vector<ParamRef<T>>& out) { (void)prefix; (void)out; }
  virtual void init(core::Rng& rng) { (void)rng; }
  virtual void zero_grad() {}
};

namespace detail {
template <class T>
void fanin_init(std::vector<T>& w, int fan_in, core::Rng& rng) {
  double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (auto& v : w) v = static_cast<T>(rng.range(-bound, bound));
}
}  // namespace detail

template <class T>
struct Conv2d final : Layer<T> {
  int ci, co, k, stride, pad;
  std::vector<T> w, b, gw, gb;
  Tensor<T> xc;  // cached input

  Conv2d(std::string n, int ci_, int co_, int k_, int stride_ = 1, int pad_ = 1)
      : Layer<T>(std::move(n)), ci(ci_), co(co_), k(k_), stride(stride_), pad(pad_),
        w(static_cast<std::size_t>(co_) * ci_ * k_ * k_), b(static_cast<std::size_t>(co_)),
        gw(w.size(), T(0)), gb(b.size(), T(0)) {}

  static int out_hw(int in, int k, int stride, int pad) { return (in + 2 * pad - k) / stride + 1; }

  void forward(const Tensor<T>& x, Tensor<T>& y, bool train) override {
    if (x.rank() != 4 || x.dim(1) != ci)
      throw std::invalid_argument("conv " + this->name + ": bad input " + x.shape_str());
    int n = x.dim(0), h = x.dim(2), ww = x.dim(3);
    int ho = out_hw(h, k, stride, pad), wo = out_hw(ww, k, stride, pad);
    y = Tensor<T>({n, co, ho, wo});
    core::conv2d_fwd(x.data(), n, ci, h, ww, w.data(), b.data(), co, k, stride, pad, y.data(), ho,
                     wo);
    if (train) xc = x;
  }

  void backward(const Tensor<T>& dy, Tensor<T>& dx) override {
    int n = xc.dim(0), h = xc.dim(2), ww = xc.dim(3);
    int ho = dy.dim(2), wo = dy.dim(3);
    core::conv2d_bwd_params(xc.data(), n, ci, h, ww, dy.data(), co, ho, wo, k, stride, pad,
                            gw.data(), gb.data());
    dx = Tensor<T>({n, ci, h, ww});
    core::conv2d_bwd_input(dy.data(), n, co, ho, wo, w.data(), ci, k, stride, pad, dx.data(), h,
                           ww);
  }

  void collect(const std::string& prefix, std::vector<ParamRef<T>>& out) override {
    out.push_back({prefix + this->name + ".w", &w, &gw});
    out.push_back({prefix + this->name + ".b", &b, &gb});
  }

  void init(core::Rng& rng) override {
    detail::fanin_init(w, ci * k * k, rng);
    std::fill(b.begin(), b.end(), T(0));
  }

  void zero_grad() override {
    std::fill(gw.begin(), gw.end(), T(0));
    std::fill(gb.begin(), gb.end(), T(0));
  }
};

template <class T>
struct Linear final : Layer<T> {
  int in_dim, out_dim;
  std::vector<T> w, b, gw, gb;
  Tensor<T> xc;

  Linear(std::string n, int in_dim_, int out_dim_)
      : Layer<T>(std::move(n)), in_dim(in_dim_), out_dim(out_dim_),
        w(static_cast<std::size_t>(out_dim_) * in_dim_), b(static_cast<std::size_t>(out_dim_)),
        gw(w.size(), T(0)), gb(b.size(), T(0)) {}

  void forward(const Tensor<T>& x, Tensor<T>& y, bool train) override {
    if (x.rank() != 2 || x.dim(1) != in_dim)
      throw std::invalid_argument("linear " + this->name + ": bad input " + x.shape_str() +
                                  ", expected [*," + std::to_string(in_dim) + "]");
    int n = x.dim(0);
    y = Tensor<T>({n, out_dim});
    core::linear_fwd(x.data(), n, in_dim, w.data(), b.data(), out_dim, y.data());
    if (train) xc = x;
  }

  void backward(const Tensor<T>& dy, Tensor<T>& dx) override {
    int n = xc.dim(0);
    core::linear_bwd_params(xc.data(), dy.data(), n, in_dim, out_dim, gw.data(), gb.data());
    dx = Tensor<T>({n, in_dim});
    core::linear_bwd_input(dy.data(), n, out_dim, w.data(), in_dim, dx.data());
  }

  void collect(const std::string& prefix, std::vector<ParamRef<T>>& out) override {
    out.push_back({prefix + this->name + ".w", &w, &gw});
    out.push_back({prefix + this->name + ".b", &b, &gb});
  }

  void init(core::Rng& rng) override {
    detail::fanin_init(w, in_dim, rng);
    std::fill(b.begin(), b.end(), T(0));
  }

  void zero_grad() override {
    std::fill(gw.begin(), gw.end(), T(0));
    std::fill(gb.begin(), gb.end(), T(0));
  }
};

template <class T>
struct ReLU final : Layer<T> {
  Tensor<T> xc;
  explicit ReLU(std::string n) : Layer<T>(std::move(n)) {}

  void forward(const Tensor<T>& x, Tensor<T>& y, bool train) override {
    y = Tensor<T>(x.shape);
    core::relu_fwd(x.data(), x.size(), y.data());
    if (train) xc = x;
  }

  void backward(const Tensor<T>& dy, Tensor<T>& dx) override {
    dx = Tensor<T>(xc.shape);
    core::relu_bwd(xc.data(), dy.data(), xc.size(), dx.data());
  }
};

template <class T>
struct Tanh final : Layer<T> {
  Tensor<T> yc;
  explicit Tanh(std::string n) : Layer<T>(std::move(n)) {}

  void forward(const Tensor<T>& x, Tensor<T>& y, bool train) override {
    y = Tensor<T>(x.shape);
    core::serial::tanh_fwd(x.data(), x.size(), y.data());
    if (train) yc = y;
  }

  void backward(const Tensor<T>& dy, Tensor<T>& dx) override {
    dx = Tensor<T>(yc.shape);
    core::serial::tanh_bwd(yc.data(), dy.data(), yc.size(), dx.data());
  }
};

template <class T>
struct MaxPool2 final : Layer<T> {
  std::vector<std::int32_t> arg;
  std::vector<int> in_shape;
  explicit MaxPool2(std::string n) : Layer<T>(std::move(n)) {}

  void forward(const Tensor<T>& x, Tensor<T>& y, bool train) override {
    int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    if (h % 2 || w % 2)
      throw std::invalid_argument("maxpool " + this->name + ": odd spatial dims " + x.shape_str());
    y = Tensor<T>({n, c, h / 2, w / 2});
    arg.resize(static_cast<std::size_t>(y.size()));
    core::maxpool2_fwd(x.data(), n, c, h, w, y.data(), arg.data());
    if (train) in_shape = x.shape;
  }

  void backward(const Tensor<T>& dy, Tensor<T>& dx) override {
    dx = Tensor<T>(in_shape);
    core::maxpool2_bwd(dy.data(), dy.dim(0), dy.dim(1), dy.dim(2), dy.dim(3), arg.data(),
                       dx.data(), in_shape[2], in_shape[3]);
  }
};

template <class T>
struct Flatten final : Layer<T> {
  std::vector<int> in_shape;
  explicit Flatten(std::string n) : Layer<T>(std::move(n)) {}

  void forward(const Tensor<T>& x, Tensor<T>& y, bool train) override {
    int n = x.dim(0);
    y = x;
    y.shape = {n, static_cast<int>(x.size() / n)};
    if (train) in_shape = x.shape;
  }

  void backward(const Tensor<T>& dy, Tensor<T>& dx) override {
    dx = dy;
    dx.shape = in_shape;
  }
};

template <class T>
struct L2NormRows final : Layer<T> {
  Tensor<T> yc;
  std::vector<T> norms;
  explicit L2NormRows(std::string n) : Layer<T>(std::move(n)) {}

  void forward(const Tensor<T>& x, Tensor<T>& y, bool train) override {
    int n = x.dim(0), d = x.dim(1);
    y = Tensor<T>({n, d});
    norms.resize(static_cast<std::size_t>(n));
    core::l2norm_rows_fwd(x.data(), n, d, y.data(), norms.data());
    if (train) yc = y;
  }

  void backward(const Tensor<T>& dy, Tensor<T>& dx) override {
    int n = yc.dim(0), d = yc.dim(1);
    dx = Tensor<T>({n, d});
    core::l2norm_rows_bwd(yc.data(), norms.data(), dy.data(), n, d, dx.data());
  }
};

// Residual block with two 3x3 convs; 1x1 projection on the skip path when the
// shape changes.
template <class T>
struct BasicBlock final : Layer<T> {
  Conv2d<T> c1, c2;
  std::unique_ptr<Conv2d<T>> proj;
  Tensor<T> x_in, h_pre, h_post, f_out, s_out, sum_pre;

  BasicBlock(std::string n, int ci, int co, int stride)
      : Layer<T>(std::move(n)), c1("c1", ci, co, 3, stride, 1), c2("c2", co, co, 3, 1, 1) {
    if (stride != 1 || ci != co) proj = std::make_unique<Conv2d<T>>("proj", ci, co, 1, stride, 0);
  }

  void forward(const Tensor<T>& x, Tensor<T>& y, bool train) override {
    c1.forward(x, h_pre, train);
    h_post = Tensor<T>(h_pre.shape);
    core::relu_fwd(h_pre.data(), h_pre.size(), h_post.data());
    c2.forward(h_post, f_out, train);
    if (proj)
      proj->forward(x, s_out, train);
    else
      s_out = x;
    sum_pre = Tensor<T>(f_out.shape);
    for (std::int64_t i = 0; i < f_out.size(); ++i) sum_pre.at(i) = f_out.at(i) + s_out.at(i);
    y = Tensor<T>(sum_pre.shape);
    core::relu_fwd(sum_pre.data(), sum_pre.size(), y.data());
    if (train) x_in = x;
  }

  void backward(const Tensor<T>& dy, Tensor<T>& dx) override {
    Tensor<T> dsum(sum_pre.shape);
    core::relu_bwd(sum_pre.data(), dy.data(), sum_pre.size(), dsum.data());
    Tensor<T> dh_post;
    c2.backward(dsum, dh_post);
    Tensor<T> dh_pre(h_pre.shape);
    core::relu_bwd(h_pre.data(), dh_post.data(), h_pre.size(), dh_pre.data());
    Tensor<T> dx_main;
    c1.backward(dh_pre, dx_main);
    if (proj) {
      Tensor<T> dx_skip;
      proj->backward(dsum, dx_skip);
      dx = Tensor<T>(dx_main.shape);
      for (std::int64_t i = 0; i < dx.size(); ++i) dx.at(i) = dx_main.at(i) + dx_skip.at(i);
    } else {
      dx = Tensor<T>(dx_main.shape);
      for (std::int64_t i = 0; i < dx.size(); ++i) dx.at(i) = dx_main.at(i) + dsum.at(i);
    }
  }

  void collect(const std::string& prefix, std::vector<ParamRef<T>>& out) override {
    std::string p = prefix + this->name + ".";
    c1.collect(p, out);
    c2.collect(p, out);
    if (proj) proj->collect(p, out);
  }

  void init(core::Rng& rng) override {
    c1.init(rng);
    c2.init(rng);
    if (proj) proj->init(rng);
  }

  void zero_grad() override {
    c1.zero_grad();
    c2.zero_grad();
    if (proj) proj->zero_grad();
  }
};

// Bottleneck: 1x1 reduce, 3x3, 1x1 expand (desk-scale expansion factor is set
// by the encoder builder).
template <class T>
struct BottleneckBlock final : Layer<T> {
  Conv2d<T> c1, c2, c3;
  std::unique_ptr<Conv2d<T>> proj;
  Tensor<T> x_in, a_pre, a_post, b_pre, b_post, f_out, s_out, sum_pre;

  BottleneckBlock(std::string n, int ci, int mid, int co, int stride)
      : Layer<T>(std::move(n)), c1("c1", ci, mid, 1, 1, 0), c2("c2", mid, mid, 3, stride, 1),
        c3("c3", mid, co, 1, 1, 0) {
    if (stride != 1 || ci != co) proj = std::make_unique<Conv2d<T>>("proj", ci, co, 1, stride, 0);
  }

  void forward(const Tensor<T>& x, Tensor<T>& y, bool train) override {
    c1.forward(x, a_pre, train);
    a_post = Tensor<T>(a_pre.shape);
    core::relu_fwd(a_pre.data(), a_pre.size(), a_post.data());
    c2.forward(a_post, b_pre, train);
    b_post = Tensor<T>(b_pre.shape);
    core::relu_fwd(b_pre.data(), b_pre.size(), b_post.data());
    c3.forward(b_post, f_out, train);
    if (proj)
      proj->forward(x, s_out, train);
    else
      s_out = x;
    sum_pre = Tensor<T>(f_out.shape);
    for (std::int64_t i = 0; i < f_out.size(); ++i) sum_pre.at(i) = f_out.at(i) + s_out.at(i);
    y = Tensor<T>(sum_pre.shape);
    core::relu_fwd(sum_pre.data(), sum_pre.size(), y.data());
    if (train) x_in = x;
  }

  void backward(const Tensor<T>& dy, Tensor<T>& dx) override {
    Tensor<T> dsum(sum_pre.shape);
    core::relu_bwd(sum_pre.data(), dy.data(), sum_pre.size(), dsum.data());
    Tensor<T> db_post;
    c3.backward(dsum, db_post);
    Tensor<T> db_pre(b_pre.shape);
    core::relu_bwd(b_pre.data(), db_post.data(), b_pre.size(), db_pre.data());
    Tensor<T> da_post;
    c2.backward(db_pre, da_post);
    Tensor<T> da_pre(a_pre.shape);
    core::relu_bwd(a_pre.data(), da_post.data(), a_pre.size(), da_pre.data());
    Tensor<T> dx_main;
    c1.backward(da_pre, dx_main);
    if (proj) {
      Tensor<T> dx_skip;
      proj->backward(dsum, dx_skip);
      dx = Tensor<T>(dx_main.shape);
      for (std::int64_t i = 0; i < dx.size(); ++i) dx.at(i) = dx_main.at(i) + dx_skip.at(i);
    } else {
      dx = Tensor<T>(dx_main.shape);
      for (std::int64_t i = 0; i < dx.size(); ++i) dx.at(i) = dx_main.at(i) + dsum.at(i);
    }
  }

  void collect(const std::string& prefix, std::vector<ParamRef<T>>& out) override {
    std::string p = prefix + this->name + ".";
    c1.collect(p, out);
    c2.collect(p, out);
    c3.collect(p, out);
    if (proj) proj->collect(p, out);
  }

  void init(core::Rng& rng) override {
    c1.init(rng);
    c2.init(rng);
    c3.init(rng);
    if (proj) proj->init(rng);
  }

  void zero_grad() override {
    c1.zero_grad();
    c2.zero_grad();
    c3.zero_grad();
    if (proj) proj->zero_grad();
  }
};

template <class T>
struct Sequential {
  std::vector<std::unique_ptr<Layer<T>>> layers;

  Sequential() = default;
  Sequential(Sequential&&) noexcept = default;
  Sequential& operator=(Sequential&&) noexcept = default;

  template <class L, class... Args>
  L* add(Args&&... args) {
    auto p = std::make_unique<L>(std::forward<Args>(args)...);
    L* raw = p.get();
    layers.push_back(std::move(p));
    return raw;
  }

  Tensor<T> forward(const Tensor<T>& x, bool train) {
    Tensor<T> cur = x;
    Tensor<T> next;
    for (auto& l : layers) {
      l->forward(cur, next, train);
      cur = std::move(next);
    }
    return cur;
  }

  // Returns gradient w.r.t. the input of the chain.
  Tensor<T> backward(const Tensor<T>& dy) {
    Tensor<T> cur = dy;
    Tensor<T> prev;
    for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
      (*it)->backward(cur, prev);
      cur = std::move(prev);
    }
    return cur;
  }

  void collect(const std::string& prefix, std::vector<ParamRef<T>>& out) {
    for (auto& l : layers) l->collect(prefix, out);
  }

  std::vector<ParamRef<T>> params(const std::string& prefix) {
    std::vector<ParamRef<T>> out;
    collect(prefix, out);
    return out;
  }

  void init(core::Rng& rng) {
    for (auto& l : layers) l->init(rng);
  }

  void zero_grad() {
    for (auto& l : layers) l->zero_grad();
  }
};

template <class T>
std::int64_t param_count(std::vector<ParamRef<T>>& ps) {
  std::int64_t n = 0;
  for (auto& p : ps) n += static_cast<std::int64_t>(p.w->size());
  return n;
}

}  // namespace viprom::nn
