// kernels.hpp - numeric kernels behind the nn layers. Each kernel has a
// serial reference implementation and an OpenMP one. The parallel loops are
// over independent output elements with the same inner reduction order, so
// both produce bitwise-identical results for any thread count; parity is
// asserted in tests and timed by the bench-kernels tool.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace viprom::core {

bool parallel_kernels();
void set_parallel_kernels(bool on);

namespace serial {

template <class T>
void conv2d_fwd(const T* x, int n, int ci, int h, int w, const T* wt, const T* bias, int co,
                int k, int stride, int pad, T* y, int ho, int wo) {
  for (int in = 0; in < n; ++in)
    for (int oc = 0; oc < co; ++oc)
      for (int oh = 0; oh < ho; ++oh)
        for (int ow = 0; ow < wo; ++ow) {
          T acc = bias ? bias[oc] : T(0);
          for (int ic = 0; ic < ci; ++ic)
            for (int kh = 0; kh < k; ++kh) {
              int ih = oh * stride - pad + kh;
              if (ih < 0 || ih >= h) continue;
              const T* xr = x + ((static_cast<std::int64_t>(in) * ci + ic) * h + ih) * w;
              const T* wr = wt + ((static_cast<std::int64_t>(oc) * ci + ic) * k + kh) * k;
              for (int kw = 0; kw < k; ++kw) {
                int iw = ow * stride - pad + kw;
                if (iw < 0 || iw >= w) continue;
                acc += xr[iw] * wr[kw];
              }
            }
          y[((static_cast<std::int64_t>(in) * co + oc) * ho + oh) * wo + ow] = acc;
        }
}

template <class T>
void conv2d_bwd_input(const T* dy, int n, int co, int ho, int wo, const T* wt, int ci, int k,
                      int stride, int pad, T* dx, int h, int w) {
  for (int in = 0; in < n; ++in)
    for (int ic = 0; ic < ci; ++ic)
      for (int ih = 0; ih < h; ++ih)
        for (int iw = 0; iw < w; ++iw) {
          T acc = T(0);
          for (int oc = 0; oc < co; ++oc)
            for (int kh = 0; kh < k; ++kh) {
              int t = ih + pad - kh;
              if (t < 0 || t % stride != 0) continue;
              int oh = t / stride;
              if (oh >= ho) continue;
              for (int kw = 0; kw < k; ++kw) {
                int u = iw + pad - kw;
                if (u < 0 || u % stride != 0) continue;
                int ow = u / stride;
                if (ow >= wo) continue;
                acc += dy[((static_cast<std::int64_t>(in) * co + oc) * ho + oh) * wo + ow] *
                       wt[((static_cast<std::int64_t>(oc) * ci + ic) * k + kh) * k + kw];
              }
            }
          dx[((static_cast<std::int64_t>(in) * ci + ic) * h + ih) * w + iw] = acc;
        }
}

// Accumulates into gw/gb (callers zero grads once per optimizer step).
template <class T>
void conv2d_bwd_params(const T* x, int n, int ci, int h, int w, const T* dy, int co, int ho,
                       int wo, int k, int stride, int pad, T* gw, T* gb) {
  for (int oc = 0; oc < co; ++oc) {
    T acc = T(0);
    for (int in = 0; in < n; ++in)
      for (int oh = 0; oh < ho; ++oh)
        for (int ow = 0; ow < wo; ++ow)
          acc += dy[((static_cast<std::int64_t>(in) * co + oc) * ho + oh) * wo + ow];
    gb[oc] += acc;
  }
  for (int oc = 0; oc < co; ++oc)
    for (int ic = 0; ic < ci; ++ic)
      for (int kh = 0; kh < k; ++kh)
        for (int kw = 0; kw < k; ++kw) {
          T acc = T(0);
          for (int in = 0; in < n; ++in)
            for (int oh = 0; oh < ho; ++oh) {
              int ih = oh * stride - pad + kh;
              if (ih < 0 || ih >= h) continue;
              for (int ow = 0; ow < wo; ++ow) {
                int iw = ow * stride - pad + kw;
                if (iw < 0 || iw >= w) continue;
                acc += x[((static_cast<std::int64_t>(in) * ci + ic) * h + ih) * w + iw] *
                       dy[((static_cast<std::int64_t>(in) * co + oc) * ho + oh) * wo + ow];
              }
            }
          gw[((static_cast<std::int64_t>(oc) * ci + ic) * k + kh) * k + kw] += acc;
        }
}

template <class T>
void linear_fwd(const T* x, int n, int in_dim, const T* wt, const T* bias, int out_dim, T* y) {
  for (int i = 0; i < n; ++i)
    for (int o = 0; o < out_dim; ++o) {
      T acc = bias ? bias[o] : T(0);
      const T* xr = x + static_cast<std::int64_t>(i) * in_dim;
      const T* wr = wt + static_cast<std::int64_t>(o) * in_dim;
      for (int d = 0; d < in_dim; ++d) acc += xr[d] * wr[d];
      y[static_cast<std::int64_t>(i) * out_dim + o] = acc;
    }
}

template <class T>
void linear_bwd_input(const T* dy, int n, int out_dim, const T* wt, int in_dim, T* dx) {
  for (int i = 0; i < n; ++i)
    for (int d = 0; d < in_dim; ++d) {
      T acc = T(0);
      const T* dyr = dy + static_cast<std::int64_t>(i) * out_dim;
      for (int o = 0; o < out_dim; ++o) acc += dyr[o] * wt[static_cast<std::int64_t>(o) * in_dim + d];
      dx[static_cast<std::int64_t>(i) * in_dim + d] = acc;
    }
}

template <class T>
void linear_bwd_params(const T* x, const T* dy, int n, int in_dim, int out_dim, T* gw, T* gb) {
  for (int o = 0; o < out_dim; ++o) {
    T acc = T(0);
    for (int i = 0; i < n; ++i) acc += dy[static_cast<std::int64_t>(i) * out_dim + o];
    gb[o] += acc;
  }
  for (int o = 0; o < out_dim; ++o)
    for (int d = 0; d < in_dim; ++d) {
      T acc = T(0);
      for (int i = 0; i < n; ++i)
        acc += dy[static_cast<std::int64_t>(i) * out_dim + o] * x[static_cast<std::int64_t>(i) * in_dim + d];
      gw[static_cast<std::int64_t>(o) * in_dim + d] += acc;
    }
}

// C[M,N] = A[M,K] * B[N,K]^T
template <class T>
void matmul_nt(const T* a, int m, int k, const T* b, int n, T* c) {
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      T acc = T(0);
      const T* ar = a + static_cast<std::int64_t>(i) * k;
      const T* br = b + static_cast<std::int64_t>(j) * k;
      for (int t = 0; t < k; ++t) acc += ar[t] * br[t];
      c[static_cast<std::int64_t>(i) * n + j] = acc;
    }
}

// C[M,N] = A[M,K] * B[K,N]
template <class T>
void matmul_nn(const T* a, int m, int k, const T* b, int n, T* c) {
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      T acc = T(0);
      for (int t = 0; t < k; ++t)
        acc += a[static_cast<std::int64_t>(i) * k + t] * b[static_cast<std::int64_t>(t) * n + j];
      c[static_cast<std::int64_t>(i) * n + j] = acc;
    }
}

template <class T>
void relu_fwd(const T* x, std::int64_t n, T* y) {
  for (std::int64_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <class T>
void relu_bwd(const T* x, const T* dy, std::int64_t n, T* dx) {
  for (std::int64_t i = 0; i < n; ++i) dx[i] = x[i] > T(0) ? dy[i] : T(0);
}

template <class T>
void tanh_fwd(const T* x, std::int64_t n, T* y) {
  for (std::int64_t i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
}

template <class T>
void tanh_bwd(const T* y, const T* dy, std::int64_t n, T* dx) {
  for (std::int64_t i = 0; i < n; ++i) dx[i] = dy[i] * (T(1) - y[i] * y[i]);
}

// 2x2 max pool, stride 2; h and w must be even. arg stores the winning
// offset within the input plane for the backward pass.
template <class T>
void maxpool2_fwd(const T* x, int n, int c, int h, int w, T* y, std::int32_t* arg) {
  int ho = h / 2, wo = w / 2;
  for (int in = 0; in < n; ++in)
    for (int ic = 0; ic < c; ++ic) {
      const T* xp = x + (static_cast<std::int64_t>(in) * c + ic) * h * w;
      T* yp = y + (static_cast<std::int64_t>(in) * c + ic) * ho * wo;
      std::int32_t* ap = arg + (static_cast<std::int64_t>(in) * c + ic) * ho * wo;
      for (int oh = 0; oh < ho; ++oh)
        for (int ow = 0; ow < wo; ++ow) {
          int base = (oh * 2) * w + ow * 2;
          int best = base;
          T bv = xp[base];
          if (xp[base + 1] > bv) { bv = xp[base + 1]; best = base + 1; }
          if (xp[base + w] > bv) { bv = xp[base + w]; best = base + w; }
          if (xp[base + w + 1] > bv) { bv = xp[base + w + 1]; best = base + w + 1; }
          yp[oh * wo + ow] = bv;
          ap[oh * wo + ow] = best;
        }
    }
}

template <class T>
void maxpool2_bwd(const T* dy, int n, int c, int ho, int wo, const std::int32_t* arg, T* dx,
                  int h, int w) {
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n) * c * h * w; ++i) dx[i] = T(0);
  for (int in = 0; in < n; ++in)
    for (int ic = 0; ic < c; ++ic) {
      const T* dyp = dy + (static_cast<std::int64_t>(in) * c + ic) * ho * wo;
      const std::int32_t* ap = arg + (static_cast<std::int64_t>(in) * c + ic) * ho * wo;
      T* dxp = dx + (static_cast<std::int64_t>(in) * c + ic) * h * w;
      for (int o = 0; o < ho * wo; ++o) dxp[ap[o]] += dyp[o];
    }
}

// Row-wise L2 normalization of [N,D]; norms output lets the backward reuse them.
template <class T>
void l2norm_rows_fwd(const T* x, int n, int d, T* y, T* norms) {
  for (int i = 0; i < n; ++i) {
    const T* xr = x + static_cast<std::int64_t>(i) * d;
    T s = T(0);
    for (int j = 0; j < d; ++j) s += xr[j] * xr[j];
    T nm = std::sqrt(s);
    if (nm < T(1e-12)) nm = T(1e-12);
    norms[i] = nm;
    T* yr = y + static_cast<std::int64_t>(i) * d;
    for (int j = 0; j < d; ++j) yr[j] = xr[j] / nm;
  }
}

template <class T>
void l2norm_rows_bwd(const T* y, const T* norms, const T* dy, int n, int d, T* dx) {
  for (int i = 0; i < n; ++i) {
    const T* yr = y + static_cast<std::int64_t>(i) * d;
    const T* dyr = dy + static_cast<std::int64_t>(i) * d;
    T dot = T(0);
    for (int j = 0; j < d; ++j) dot += yr[j] * dyr[j];
    T* dxr = dx + static_cast<std::int64_t>(i) * d;
    for (int j = 0; j < d; ++j) dxr[j] = (dyr[j] - yr[j] * dot) / norms[i];
  }
}

template <class T>
void adam_step(T* w, const T* g, T* m, T* v, std::int64_t n, T lr, T b1, T b2, T eps, T bc1,
               T bc2) {
  for (std::int64_t i = 0; i < n; ++i) {
    m[i] = b1 * m[i] + (T(1) - b1) * g[i];
    v[i] = b2 * v[i] + (T(1) - b2) * g[i] * g[i];
    T mh = m[i] / bc1;
    T vh = v[i] / bc2;
    w[i] -= lr * mh / (std::sqrt(vh) + eps);
  }
}

// theta_k <- m*theta_k + (1-m)*theta_q
template <class T>
void ema_update(T* k, const T* q, std::int64_t n, T m) {
  for (std::int64_t i = 0; i < n; ++i) k[i] = m * k[i] + (T(1) - m) * q[i];
}

}  // namespace serial

namespace par {

template <class T>
void conv2d_fwd(const T* x, int n, int ci, int h, int w, const T* wt, const T* bias, int co,
                int k, int stride, int pad, T* y, int ho, int wo) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int in = 0; in < n; ++in)
    for (int oc = 0; oc < co; ++oc)
      for (int oh = 0; oh < ho; ++oh)
        for (int ow = 0; ow < wo; ++ow) {
          T acc = bias ? bias[oc] : T(0);
          for (int ic = 0; ic < ci; ++ic)
            for (int kh = 0; kh < k; ++kh) {
              int ih = oh * stride - pad + kh;
              if (ih < 0 || ih >= h) continue;
              const T* xr = x + ((static_cast<std::int64_t>(in) * ci + ic) * h + ih) * w;
              const T* wr = wt + ((static_cast<std::int64_t>(oc) * ci + ic) * k + kh) * k;
              for (int kw = 0; kw < k; ++kw) {
                int iw = ow * stride - pad + kw;
                if (iw < 0 || iw >= w) continue;
                acc += xr[iw] * wr[kw];
              }
            }
          y[((static_cast<std::int64_t>(in) * co + oc) * ho + oh) * wo + ow] = acc;
        }
}

template <class T>
void conv2d_bwd_input(const T* dy, int n, int co, int ho, int wo, const T* wt, int ci, int k,
                      int stride, int pad, T* dx, int h, int w) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int in = 0; in < n; ++in)
    for (int ic = 0; ic < ci; ++ic)
      for (int ih = 0; ih < h; ++ih)
        for (int iw = 0; iw < w; ++iw) {
          T acc = T(0);
          for (int oc = 0; oc < co; ++oc)
            for (int kh = 0; kh < k; ++kh) {
              int t = ih + pad - kh;
              if (t < 0 || t % stride != 0) continue;
              int oh = t / stride;
              if (oh >= ho) continue;
              for (int kw = 0; kw < k; ++kw) {
                int u = iw + pad - kw;
                if (u < 0 || u % stride != 0) continue;
                int ow = u / stride;
                if (ow >= wo) continue;
                acc += dy[((static_cast<std::int64_t>(in) * co + oc) * ho + oh) * wo + ow] *
                       wt[((static_cast<std::int64_t>(oc) * ci + ic) * k + kh) * k + kw];
              }
            }
          dx[((static_cast<std::int64_t>(in) * ci + ic) * h + ih) * w + iw] = acc;
        }
}

template <class T>
void conv2d_bwd_params(const T* x, int n, int ci, int h, int w, const T* dy, int co, int ho,
                       int wo, int k, int stride, int pad, T* gw, T* gb) {
#pragma omp parallel for schedule(static)
  for (int oc = 0; oc < co; ++oc) {
    T acc = T(0);
    for (int in = 0; in < n; ++in)
      for (int oh = 0; oh < ho; ++oh)
        for (int ow = 0; ow < wo; ++ow)
          acc += dy[((static_cast<std::int64_t>(in) * co + oc) * ho + oh) * wo + ow];
    gb[oc] += acc;
  }
#pragma omp parallel for collapse(2) schedule(static)
  for (int oc = 0; oc < co; ++oc)
    for (int ic = 0; ic < ci; ++ic)
      for (int kh = 0; kh < k; ++kh)
        for (int kw = 0; kw < k; ++kw) {
          T acc = T(0);
          for (int in = 0; in < n; ++in)
            for (int oh = 0; oh < ho; ++oh) {
              int ih = oh * stride - pad + kh;
              if (ih < 0 || ih >= h) continue;
              for (int ow = 0; ow < wo; ++ow) {
                int iw = ow * stride - pad + kw;
                if (iw < 0 || iw >= w) continue;
                acc += x[((static_cast<std::int64_t>(in) * ci + ic) * h + ih) * w + iw] *
                       dy[((static_cast<std::int64_t>(in) * co + oc) * ho + oh) * wo + ow];
              }
            }
          gw[((static_cast<std::int64_t>(oc) * ci + ic) * k + kh) * k + kw] += acc;
        }
}

template <class T>
void linear_fwd(const T* x, int n, int in_dim, const T* wt, const T* bias, int out_dim, T* y) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int i = 0; i < n; ++i)
    for (int o = 0; o < out_dim; ++o) {
      T acc = bias ? bias[o] : T(0);
      const T* xr = x + static_cast<std::int64_t>(i) * in_dim;
      const T* wr = wt + static_cast<std::int64_t>(o) * in_dim;
      for (int d = 0; d < in_dim; ++d) acc += xr[d] * wr[d];
      y[static_cast<std::int64_t>(i) * out_dim + o] = acc;
    }
}

template <class T>
void linear_bwd_input(const T* dy, int n, int out_dim, const T* wt, int in_dim, T* dx) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int i = 0; i < n; ++i)
    for (int d = 0; d < in_dim; ++d) {
      T acc = T(0);
      const T* dyr = dy + static_cast<std::int64_t>(i) * out_dim;
      for (int o = 0; o < out_dim; ++o) acc += dyr[o] * wt[static_cast<std::int64_t>(o) * in_dim + d];
      dx[static_cast<std::int64_t>(i) * in_dim + d] = acc;
    }
}

template <class T>
void linear_bwd_params(const T* x, const T* dy, int n, int in_dim, int out_dim, T* gw, T* gb) {
#pragma omp parallel for schedule(static)
  for (int o = 0; o < out_dim; ++o) {
    T acc = T(0);
    for (int i = 0; i < n; ++i) acc += dy[static_cast<std::int64_t>(i) * out_dim + o];
    gb[o] += acc;
  }
#pragma omp parallel for collapse(2) schedule(static)
  for (int o = 0; o < out_dim; ++o)
    for (int d = 0; d < in_dim; ++d) {
      T acc = T(0);
      for (int i = 0; i < n; ++i)
        acc += dy[static_cast<std::int64_t>(i) * out_dim + o] * x[static_cast<std::int64_t>(i) * in_dim + d];
      gw[static_cast<std::int64_t>(o) * in_dim + d] += acc;
    }
}

template <class T>
void matmul_nt(const T* a, int m, int k, const T* b, int n, T* c) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      T acc = T(0);
      const T* ar = a + static_cast<std::int64_t>(i) * k;
      const T* br = b + static_cast<std::int64_t>(j) * k;
      for (int t = 0; t < k; ++t) acc += ar[t] * br[t];
      c[static_cast<std::int64_t>(i) * n + j] = acc;
    }
}

template <class T>
void matmul_nn(const T* a, int m, int k, const T* b, int n, T* c) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      T acc = T(0);
      for (int t = 0; t < k; ++t)
        acc += a[static_cast<std::int64_t>(i) * k + t] * b[static_cast<std::int64_t>(t) * n + j];
      c[static_cast<std::int64_t>(i) * n + j] = acc;
    }
}

template <class T>
void relu_fwd(const T* x, std::int64_t n, T* y) {
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <class T>
void relu_bwd(const T* x, const T* dy, std::int64_t n, T* dx) {
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) dx[i] = x[i] > T(0) ? dy[i] : T(0);
}

template <class T>
void maxpool2_fwd(const T* x, int n, int c, int h, int w, T* y, std::int32_t* arg) {
  int ho = h / 2, wo = w / 2;
#pragma omp parallel for collapse(2) schedule(static)
  for (int in = 0; in < n; ++in)
    for (int ic = 0; ic < c; ++ic) {
      const T* xp = x + (static_cast<std::int64_t>(in) * c + ic) * h * w;
      T* yp = y + (static_cast<std::int64_t>(in) * c + ic) * ho * wo;
      std::int32_t* ap = arg + (static_cast<std::int64_t>(in) * c + ic) * ho * wo;
      for (int oh = 0; oh < ho; ++oh)
        for (int ow = 0; ow < wo; ++ow) {
          int base = (oh * 2) * w + ow * 2;
          int best = base;
          T bv = xp[base];
          if (xp[base + 1] > bv) { bv = xp[base + 1]; best = base + 1; }
          if (xp[base + w] > bv) { bv = xp[base + w]; best = base + w; }
          if (xp[base + w + 1] > bv) { bv = xp[base + w + 1]; best = base + w + 1; }
          yp[oh * wo + ow] = bv;
          ap[oh * wo + ow] = best;
        }
    }
}

template <class T>
void maxpool2_bwd(const T* dy, int n, int c, int ho, int wo, const std::int32_t* arg, T* dx,
                  int h, int w) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int in = 0; in < n; ++in)
    for (int ic = 0; ic < c; ++ic) {
      const T* dyp = dy + (static_cast<std::int64_t>(in) * c + ic) * ho * wo;
      const std::int32_t* ap = arg + (static_cast<std::int64_t>(in) * c + ic) * ho * wo;
      T* dxp = dx + (static_cast<std::int64_t>(in) * c + ic) * h * w;
      for (int i = 0; i < h * w; ++i) dxp[i] = T(0);
      for (int o = 0; o < ho * wo; ++o) dxp[ap[o]] += dyp[o];
    }
}

template <class T>
void l2norm_rows_fwd(const T* x, int n, int d, T* y, T* norms) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const T* xr = x + static_cast<std::int64_t>(i) * d;
    T s = T(0);
    for (int j = 0; j < d; ++j) s += xr[j] * xr[j];
    T nm = std::sqrt(s);
    if (nm < T(1e-12)) nm = T(1e-12);
    norms[i] = nm;
    T* yr = y + static_cast<std::int64_t>(i) * d;
    for (int j = 0; j < d; ++j) yr[j] = xr[j] / nm;
  }
}

template <class T>
void l2norm_rows_bwd(const T* y, const T* norms, const T* dy, int n, int d, T* dx) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const T* yr = y + static_cast<std::int64_t>(i) * d;
    const T* dyr = dy + static_cast<std::int64_t>(i) * d;
    T dot = T(0);
    for (int j = 0; j < d; ++j) dot += yr[j] * dyr[j];
    T* dxr = dx + static_cast<std::int64_t>(i) * d;
    for (int j = 0; j < d; ++j) dxr[j] = (dyr[j] - yr[j] * dot) / norms[i];
  }
}

template <class T>
void adam_step(T* w, const T* g, T* m, T* v, std::int64_t n, T lr, T b1, T b2, T eps, T bc1,
               T bc2) {
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    m[i] = b1 * m[i] + (T(1) - b1) * g[i];
    v[i] = b2 * v[i] + (T(1) - b2) * g[i] * g[i];
    T mh = m[i] / bc1;
    T vh = v[i] / bc2;
    w[i] -= lr * mh / (std::sqrt(vh) + eps);
  }
}

template <class T>
void ema_update(T* k, const T* q, std::int64_t n, T m) {
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) k[i] = m * k[i] + (T(1) - m) * q[i];
}

}  // namespace par

// Dispatchers

template <class T>
void conv2d_fwd(const T* x, int n, int ci, int h, int w, const T* wt, const T* bias, int co,
                int k, int stride, int pad, T* y, int ho, int wo) {
  if (parallel_kernels())
    par::conv2d_fwd(x, n, ci, h, w, wt, bias, co, k, stride, pad, y, ho, wo);
  else
    serial::conv2d_fwd(x, n, ci, h, w, wt, bias, co, k, stride, pad, y, ho, wo);
}

template <class T>
void conv2d_bwd_input(const T* dy, int n, int co, int ho, int wo, const T* wt, int ci, int k,
                      int stride, int pad, T* dx, int h, int w) {
  if (parallel_kernels())
    par::conv2d_bwd_input(dy, n, co, ho, wo, wt, ci, k, stride, pad, dx, h, w);
  else
    serial::conv2d_bwd_input(dy, n, co, ho, wo, wt, ci, k, stride, pad, dx, h, w);
}

template <class T>
void conv2d_bwd_params(const T* x, int n, int ci, int h, int w, const T* dy, int co, int ho,
                       int wo, int k, int stride, int pad, T* gw, T* gb) {
  if (parallel_kernels())
    par::conv2d_bwd_params(x, n, ci, h, w, dy, co, ho, wo, k, stride, pad, gw, gb);
  else
    serial::conv2d_bwd_params(x, n, ci, h, w, dy, co, ho, wo, k, stride, pad, gw, gb);
}

template <class T>
void linear_fwd(const T* x, int n, int in_dim, const T* wt, const T* bias, int out_dim, T* y) {
  if (parallel_kernels())
    par::linear_fwd(x, n, in_dim, wt, bias, out_dim, y);
  else
    serial::linear_fwd(x, n, in_dim, wt, bias, out_dim, y);
}

template <class T>
void linear_bwd_input(const T* dy, int n, int out_dim, const T* wt, int in_dim, T* dx) {
  if (parallel_kernels())
    par::linear_bwd_input(dy, n, out_dim, wt, in_dim, dx);
  else
    serial::linear_bwd_input(dy, n, out_dim, wt, in_dim, dx);
}

template <class T>
void linear_bwd_params(const T* x, const T* dy, int n, int in_dim, int out_dim, T* gw, T* gb) {
  if (parallel_kernels())
    par::linear_bwd_params(x, dy, n, in_dim, out_dim, gw, gb);
  else
    serial::linear_bwd_params(x, dy, n, in_dim, out_dim, gw, gb);
}

template <class T>
void matmul_nt(const T* a, int m, int k, const T* b, int n, T* c) {
  if (parallel_kernels())
    par::matmul_nt(a, m, k, b, n, c);
  else
    serial::matmul_nt(a, m, k, b, n, c);
}

template <class T>
void matmul_nn(const T* a, int m, int k, const T* b, int n, T* c) {
  if (parallel_kernels())
    par::matmul_nn(a, m, k, b, n, c);
  else
    serial::matmul_nn(a, m, k, b, n, c);
}

template <class T>
void relu_fwd(const T* x, std::int64_t n, T* y) {
  if (parallel_kernels())
    par::relu_fwd(x, n, y);
  else
    serial::relu_fwd(x, n, y);
}

template <class T>
void relu_bwd(const T* x, const T* dy, std::int64_t n, T* dx) {
  if (parallel_kernels())
    par::relu_bwd(x, dy, n, dx);
  else
    serial::relu_bwd(x, dy, n, dx);
}

template <class T>
void maxpool2_fwd(const T* x, int n, int c, int h, int w, T* y, std::int32_t* arg) {
  if (parallel_kernels())
    par::maxpool2_fwd(x, n, c, h, w, y, arg);
  else
    serial::maxpool2_fwd(x, n, c, h, w, y, arg);
}

template <class T>
void maxpool2_bwd(const T* dy, int n, int c, int ho, int wo, const std::int32_t* arg, T* dx,
                  int h, int w) {
  if (parallel_kernels())
    par::maxpool2_bwd(dy, n, c, ho, wo, arg, dx, h, w);
  else
    serial::maxpool2_bwd(dy, n, c, ho, wo, arg, dx, h, w);
}

template <class T>
void l2norm_rows_fwd(const T* x, int n, int d, T* y, T* norms) {
  if (parallel_kernels())
    par::l2norm_rows_fwd(x, n, d, y, norms);
  else
    serial::l2norm_rows_fwd(x, n, d, y, norms);
}

template <class T>
void l2norm_rows_bwd(const T* y, const T* norms, const T* dy, int n, int d, T* dx) {
  if (parallel_kernels())
    par::l2norm_rows_bwd(y, norms, dy, n, d, dx);
  else
    serial::l2norm_rows_bwd(y, norms, dy, n, d, dx);
}

template <class T>
void adam_step(T* w, const T* g, T* m, T* v, std::int64_t n, T lr, T b1, T b2, T eps, T bc1,
               T bc2) {
  if (parallel_kernels())
    par::adam_step(w, g, m, v, n, lr, b1, b2, eps, bc1, bc2);
  else
    serial::adam_step(w, g, m, v, n, lr, b1, b2, eps, bc1, bc2);
}

template <class T>
void ema_update(T* k, const T* q, std::int64_t n, T m) {
  if (parallel_kernels())
    par::ema_update(k, q, n, m);
  else
    serial::ema_update(k, q, n, m);
}

}  // namespace viprom::core
