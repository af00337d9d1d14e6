// bench_kernels.cpp - times the serial reference kernels against the OpenMP
// ones on training-shaped workloads and reports the speedup. Also verifies
// bitwise parity on the benchmarked buffers.
#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "viprom/core/kernels.hpp"
#include "viprom/core/rng.hpp"

using namespace viprom;

namespace {

using Clock = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn, int reps) {
  auto t0 = Clock::now();
  for (int i = 0; i < reps; ++i) fn();
  auto t1 = Clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

std::vector<float> randn(std::size_t n, core::Rng& rng) {
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(rng.normal());
  return v;
}

struct Row {
  std::string name;
  double serial_ms;
  double parallel_ms;
  bool bitwise_equal;
};

void print_rows(const std::vector<Row>& rows) {
  std::printf("%-28s %12s %12s %9s %8s\n", "kernel", "serial(ms)", "openmp(ms)", "speedup",
              "parity");
  for (const auto& r : rows)
    std::printf("%-28s %12.3f %12.3f %8.2fx %8s\n", r.name.c_str(), r.serial_ms, r.parallel_ms,
                r.serial_ms / r.parallel_ms, r.bitwise_equal ? "ok" : "FAIL");
}

}  // namespace

int main(int argc, char** argv) {
  bool quick = argc > 1 && std::string(argv[1]) == "--quick";
  int reps = quick ? 2 : 10;
  core::Rng rng(42);

  // conv2d: batch 16, 16->32 channels, 24x24
  int n = quick ? 4 : 16, ci = 16, co = 32, h = 24, w = 24, k = 3, pad = 1;
  int ho = h, wo = w;
  auto x = randn(static_cast<std::size_t>(n) * ci * h * w, rng);
  auto wt = randn(static_cast<std::size_t>(co) * ci * k * k, rng);
  auto bias = randn(static_cast<std::size_t>(co), rng);
  std::vector<float> y_s(static_cast<std::size_t>(n) * co * ho * wo);
  std::vector<float> y_p(y_s.size());

  std::vector<Row> rows;
  {
    Row r;
    r.name = "conv2d_fwd 16x16->32@24";
    r.serial_ms = time_ms(
        [&] {
          core::serial::conv2d_fwd(x.data(), n, ci, h, w, wt.data(), bias.data(), co, k, 1, pad,
                                   y_s.data(), ho, wo);
        },
        reps);
    r.parallel_ms = time_ms(
        [&] {
          core::par::conv2d_fwd(x.data(), n, ci, h, w, wt.data(), bias.data(), co, k, 1, pad,
                                y_p.data(), ho, wo);
        },
        reps);
    r.bitwise_equal = std::memcmp(y_s.data(), y_p.data(), y_s.size() * sizeof(float)) == 0;
    rows.push_back(r);
  }
  {
    auto dy = randn(y_s.size(), rng);
    std::vector<float> dx_s(x.size()), dx_p(x.size());
    Row r;
    r.name = "conv2d_bwd_input";
    r.serial_ms = time_ms(
        [&] {
          core::serial::conv2d_bwd_input(dy.data(), n, co, ho, wo, wt.data(), ci, k, 1, pad,
                                         dx_s.data(), h, w);
        },
        reps);
    r.parallel_ms = time_ms(
        [&] {
          core::par::conv2d_bwd_input(dy.data(), n, co, ho, wo, wt.data(), ci, k, 1, pad,
                                      dx_p.data(), h, w);
        },
        reps);
    r.bitwise_equal = std::memcmp(dx_s.data(), dx_p.data(), dx_s.size() * sizeof(float)) == 0;
    rows.push_back(r);

    std::vector<float> gw_s(wt.size(), 0.f), gw_p(wt.size(), 0.f), gb_s(bias.size(), 0.f),
        gb_p(bias.size(), 0.f);
    Row r2;
    r2.name = "conv2d_bwd_params";
    r2.serial_ms = time_ms(
        [&] {
          std::fill(gw_s.begin(), gw_s.end(), 0.f);
          std::fill(gb_s.begin(), gb_s.end(), 0.f);
          core::serial::conv2d_bwd_params(x.data(), n, ci, h, w, dy.data(), co, ho, wo, k, 1, pad,
                                          gw_s.data(), gb_s.data());
        },
        reps);
    r2.parallel_ms = time_ms(
        [&] {
          std::fill(gw_p.begin(), gw_p.end(), 0.f);
          std::fill(gb_p.begin(), gb_p.end(), 0.f);
          core::par::conv2d_bwd_params(x.data(), n, ci, h, w, dy.data(), co, ho, wo, k, 1, pad,
                                       gw_p.data(), gb_p.data());
        },
        reps);
    r2.bitwise_equal =
        std::memcmp(gw_s.data(), gw_p.data(), gw_s.size() * sizeof(float)) == 0 &&
        std::memcmp(gb_s.data(), gb_p.data(), gb_s.size() * sizeof(float)) == 0;
    rows.push_back(r2);
  }
  {
    int m = quick ? 64 : 256, kk = 512, nn2 = quick ? 64 : 256;
    auto a = randn(static_cast<std::size_t>(m) * kk, rng);
    auto b = randn(static_cast<std::size_t>(nn2) * kk, rng);
    std::vector<float> c_s(static_cast<std::size_t>(m) * nn2), c_p(c_s.size());
    Row r;
    r.name = "matmul_nt 256x512x256";
    r.serial_ms =
        time_ms([&] { core::serial::matmul_nt(a.data(), m, kk, b.data(), nn2, c_s.data()); }, reps);
    r.parallel_ms =
        time_ms([&] { core::par::matmul_nt(a.data(), m, kk, b.data(), nn2, c_p.data()); }, reps);
    r.bitwise_equal = std::memcmp(c_s.data(), c_p.data(), c_s.size() * sizeof(float)) == 0;
    rows.push_back(r);
  }
  {
    int nn2 = quick ? 1024 : 65536, in_dim = 288, out_dim = 64;
    auto xx = randn(static_cast<std::size_t>(64) * in_dim, rng);
    auto ww = randn(static_cast<std::size_t>(out_dim) * in_dim, rng);
    auto bb = randn(static_cast<std::size_t>(out_dim), rng);
    std::vector<float> yy_s(static_cast<std::size_t>(64) * out_dim), yy_p(yy_s.size());
    Row r;
    r.name = "linear_fwd 64x288->64";
    r.serial_ms = time_ms(
        [&] { core::serial::linear_fwd(xx.data(), 64, in_dim, ww.data(), bb.data(), out_dim, yy_s.data()); },
        reps * 4);
    r.parallel_ms = time_ms(
        [&] { core::par::linear_fwd(xx.data(), 64, in_dim, ww.data(), bb.data(), out_dim, yy_p.data()); },
        reps * 4);
    r.bitwise_equal = std::memcmp(yy_s.data(), yy_p.data(), yy_s.size() * sizeof(float)) == 0;
    rows.push_back(r);
    (void)nn2;
  }

  print_rows(rows);
  for (const auto& r : rows)
    if (!r.bitwise_equal) {
      std::printf("parity violation detected\n");
      return 1;
    }
  return 0;
}
