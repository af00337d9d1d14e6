#include <doctest.h>

#include <cmath>

#include "test_util.hpp"
#include "viprom/nn/layers.hpp"
#include "viprom/nn/losses.hpp"
#include "viprom/nn/optim.hpp"

using namespace viprom;
using core::TensorD;
using core::TensorF;

TEST_CASE("info_nce: frozen two-point example") {
  // q = [(1,0),(0,1)], k = q, tau = 1: loss = -log(e/(e+1))
  TensorD q({2, 2});
  q.at2(0, 0) = 1;
  q.at2(1, 1) = 1;
  auto out = nn::info_nce<double>(q, q, 1.0);
  CHECK(out.value == doctest::Approx(-std::log(std::exp(1.0) / (std::exp(1.0) + 1.0))).epsilon(1e-9));
  CHECK(out.value == doctest::Approx(0.3132616875).epsilon(1e-6));
}

TEST_CASE("info_nce: identical embeddings give exactly ln B") {
  for (int b : {2, 7, 32}) {
    TensorD q({b, 4});
    for (int i = 0; i < b; ++i) {
      q.at2(i, 0) = 0.6;
      q.at2(i, 1) = 0.8;
    }
    auto out = nn::info_nce<double>(q, q, 0.2);
    CHECK(std::fabs(out.value - std::log(static_cast<double>(b))) < 1e-6);
  }
}

TEST_CASE("info_nce: random unit vectors give chance-level loss near ln B") {
  int b = 256, d = 512, trials = 20;
  double mean = 0;
  for (int t = 0; t < trials; ++t) {
    auto q = testutil::random_unit_rows<double>(b, d, 1000 + static_cast<std::uint64_t>(t));
    auto k = testutil::random_unit_rows<double>(b, d, 5000 + static_cast<std::uint64_t>(t));
    mean += nn::info_nce<double>(q, k, 0.2).value;
  }
  mean /= trials;
  CHECK(std::fabs(mean - std::log(256.0)) < 0.05);
}

TEST_CASE("info_nce: validation rejects bad inputs") {
  auto q = testutil::random_unit_rows<double>(4, 8, 3);
  TensorD bad = q;
  bad.at2(0, 0) += 0.01;  // breaks normalization beyond 1e-4
  CHECK_THROWS(nn::info_nce<double>(bad, q, 0.2));
  CHECK_THROWS(nn::info_nce<double>(q, bad, 0.2));
  CHECK_THROWS(nn::info_nce<double>(q, q, 0.0));
  CHECK_THROWS(nn::info_nce<double>(q, q, -1.0));
  TensorD one({1, 8});
  one.at2(0, 0) = 1;
  CHECK_THROWS(nn::info_nce<double>(one, one, 0.2));
}

TEST_CASE("info_nce: nonnegative on random inputs") {
  for (int t = 0; t < 25; ++t) {
    auto q = testutil::random_unit_rows<double>(6, 5, 300 + static_cast<std::uint64_t>(t));
    auto k = testutil::random_unit_rows<double>(6, 5, 800 + static_cast<std::uint64_t>(t));
    CHECK(nn::info_nce<double>(q, k, 0.3).value >= 0.0);
  }
}

TEST_CASE("info_nce: analytic gradient matches central differences") {
  int b = 6, d = 8;
  auto keys = testutil::random_unit_rows<double>(b, d, 42);

  SUBCASE("unchecked core on raw rows") {
    auto q = testutil::random_tensor<double>({b, d}, 7, 0.7);
    auto out = nn::info_nce<double>(q, keys, 0.2, false);
    auto idx = testutil::sample_indices(static_cast<std::size_t>(q.size()), 24, 5);
    double worst = 0;
    for (std::size_t i : idx) {
      double saved = q.at(static_cast<std::int64_t>(i));
      double h = 1e-4;
      q.at(static_cast<std::int64_t>(i)) = saved + h;
      double fp = nn::info_nce<double>(q, keys, 0.2, false).value;
      q.at(static_cast<std::int64_t>(i)) = saved - h;
      double fm = nn::info_nce<double>(q, keys, 0.2, false).value;
      q.at(static_cast<std::int64_t>(i)) = saved;
      worst = std::max(worst,
                       testutil::rel_err(out.grad.at(static_cast<std::int64_t>(i)), (fp - fm) / (2 * h)));
    }
    CHECK(worst <= 1e-3);
  }

  SUBCASE("deployed path through row normalization") {
    auto raw = testutil::random_tensor<double>({b, d}, 9, 0.8);
    nn::L2NormRows<double> l2("l2");
    auto loss_of = [&](TensorD& x) {
      TensorD z;
      l2.forward(x, z, true);
      return nn::info_nce<double>(z, keys, 0.2).value;
    };
    TensorD z;
    l2.forward(raw, z, true);
    auto out = nn::info_nce<double>(z, keys, 0.2);
    TensorD draw;
    l2.backward(out.grad, draw);

    auto idx = testutil::sample_indices(static_cast<std::size_t>(raw.size()), 24, 6);
    double worst = 0;
    for (std::size_t i : idx) {
      double saved = raw.at(static_cast<std::int64_t>(i));
      double h = 1e-4;
      raw.at(static_cast<std::int64_t>(i)) = saved + h;
      double fp = loss_of(raw);
      raw.at(static_cast<std::int64_t>(i)) = saved - h;
      double fm = loss_of(raw);
      raw.at(static_cast<std::int64_t>(i)) = saved;
      worst = std::max(worst,
                       testutil::rel_err(draw.at(static_cast<std::int64_t>(i)), (fp - fm) / (2 * h)));
    }
    CHECK(worst <= 1e-3);
  }
}

TEST_CASE("loss_vs: frozen values and error paths") {
  // Uniform logits, C=10: ln 10.
  TensorD u({3, 10});
  auto out = nn::loss_vs<double>(u, {0, 4, 9});
  CHECK(out.value == doctest::Approx(std::log(10.0)).epsilon(1e-9));

  // logits [[2,0,0]] label 0: -log(e^2/(e^2+2))
  TensorD l({2, 3});
  l.at2(0, 0) = 2.0;
  l.at2(1, 0) = 2.0;
  auto out2 = nn::loss_vs<double>(l, {0, 0});
  CHECK(out2.value ==
        doctest::Approx(-std::log(std::exp(2.0) / (std::exp(2.0) + 2.0))).epsilon(1e-6));
  CHECK(out2.value == doctest::Approx(0.2395447).epsilon(1e-4));

  // Confident-correct limit.
  TensorD big({2, 4});
  big.at2(0, 1) = 60.0;
  big.at2(1, 2) = 60.0;
  CHECK(nn::loss_vs<double>(big, {1, 2}).value < 1e-9);

  CHECK_THROWS(nn::loss_vs<double>(u, {0, 4, 10}));
  CHECK_THROWS(nn::loss_vs<double>(u, {0, 4, -1}));
  CHECK_THROWS(nn::loss_vs<double>(u, {0, 4}));
  TensorD onecls({2, 1});
  CHECK_THROWS(nn::loss_vs<double>(onecls, {0, 0}));
}

TEST_CASE("loss_td: frozen values, permutation validation") {
  TensorD u({5, 5});
  auto out = nn::loss_td<double>(u, {3, 1, 4, 0, 2});
  CHECK(out.value == doctest::Approx(std::log(5.0)).epsilon(1e-9));

  TensorD two({2, 2});
  two.at2(0, 0) = 1.0;
  two.at2(1, 1) = 1.0;
  auto out2 = nn::loss_td<double>(two, {0, 1});
  CHECK(out2.value == doctest::Approx(0.3132616875).epsilon(1e-6));

  TensorD confident({4, 4});
  for (int i = 0; i < 4; ++i) confident.at2(i, (i + 1) % 4) = 50.0;
  CHECK(nn::loss_td<double>(confident, {1, 2, 3, 0}).value < 1e-9);

  CHECK_THROWS(nn::loss_td<double>(u, {0, 1, 2, 3, 3}));
  CHECK_THROWS(nn::loss_td<double>(u, {0, 1, 2, 3, 5}));
  TensorD rect({4, 5});
  CHECK_THROWS(nn::loss_td<double>(rect, {0, 1, 2, 3}));
}

TEST_CASE("joint_loss: linear in lambda, frozen arithmetic") {
  CHECK(nn::joint_loss<double>(1.0, 3.0, 0.33) == doctest::Approx(1.99).epsilon(1e-12));
  CHECK(nn::joint_loss<double>(0.7, 123.0, 0.0) == 0.7);
  double x = 1.37;
  CHECK(nn::joint_loss<double>(x, x, 1.0) == doctest::Approx(2 * x).epsilon(1e-12));

  core::Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    double a = rng.unit() * 3, b = rng.unit() * 3, l1 = rng.unit(), l2 = rng.unit(), w = rng.unit();
    double lhs = nn::joint_loss(a, b, w * l1 + (1 - w) * l2);
    double rhs = w * nn::joint_loss(a, b, l1) + (1 - w) * nn::joint_loss(a, b, l2);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
  CHECK_THROWS(nn::joint_loss<double>(1.0, 1.0, -0.1));
  CHECK_THROWS(nn::joint_loss<double>(std::nan(""), 1.0, 0.5));
}

TEST_CASE("losses: batch-order permutation equivariance at 1e-9") {
  auto logits = testutil::random_tensor<double>({8, 6}, 12, 2.0);
  std::vector<int> labels = {0, 5, 2, 3, 1, 4, 0, 2};
  double base = nn::loss_vs<double>(logits, labels).value;

  core::Rng rng(9);
  auto perm = rng.permutation(8);
  TensorD shuffled({8, 6});
  std::vector<int> shuffled_labels(8);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 6; ++j) shuffled.at2(i, j) = logits.at2(perm[static_cast<std::size_t>(i)], j);
    shuffled_labels[static_cast<std::size_t>(i)] = labels[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
  }
  CHECK(std::fabs(nn::loss_vs<double>(shuffled, shuffled_labels).value - base) < 1e-9);

  // loss_td: shuffling presented-frame rows together with their labels.
  auto ol = testutil::random_tensor<double>({5, 5}, 13, 2.0);
  std::vector<int> olabels = {2, 0, 4, 1, 3};
  double tdbase = nn::loss_td<double>(ol, olabels).value;
  auto p5 = rng.permutation(5);
  TensorD ol2({5, 5});
  std::vector<int> olabels2(5);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) ol2.at2(i, j) = ol.at2(p5[static_cast<std::size_t>(i)], j);
    olabels2[static_cast<std::size_t>(i)] = olabels[static_cast<std::size_t>(p5[static_cast<std::size_t>(i)])];
  }
  CHECK(std::fabs(nn::loss_td<double>(ol2, olabels2).value - tdbase) < 1e-9);
}

TEST_CASE("loss_vs / loss_td gradients match central differences") {
  auto logits = testutil::random_tensor<double>({6, 5}, 21, 1.5);
  std::vector<int> labels = {0, 3, 2, 4, 1, 1};
  auto out = nn::loss_vs<double>(logits, labels);
  auto idx = testutil::sample_indices(static_cast<std::size_t>(logits.size()), 20, 8);
  double worst = 0;
  for (std::size_t i : idx) {
    double saved = logits.at(static_cast<std::int64_t>(i)), h = 1e-4;
    logits.at(static_cast<std::int64_t>(i)) = saved + h;
    double fp = nn::loss_vs<double>(logits, labels).value;
    logits.at(static_cast<std::int64_t>(i)) = saved - h;
    double fm = nn::loss_vs<double>(logits, labels).value;
    logits.at(static_cast<std::int64_t>(i)) = saved;
    worst = std::max(worst, testutil::rel_err(out.grad.at(static_cast<std::int64_t>(i)), (fp - fm) / (2 * h)));
  }
  CHECK(worst <= 1e-3);

  auto ol = testutil::random_tensor<double>({5, 5}, 22, 1.5);
  std::vector<int> olabels = {4, 2, 0, 3, 1};
  auto oout = nn::loss_td<double>(ol, olabels);
  worst = 0;
  for (std::size_t i : testutil::sample_indices(static_cast<std::size_t>(ol.size()), 20, 9)) {
    double saved = ol.at(static_cast<std::int64_t>(i)), h = 1e-4;
    ol.at(static_cast<std::int64_t>(i)) = saved + h;
    double fp = nn::loss_td<double>(ol, olabels).value;
    ol.at(static_cast<std::int64_t>(i)) = saved - h;
    double fm = nn::loss_td<double>(ol, olabels).value;
    ol.at(static_cast<std::int64_t>(i)) = saved;
    worst = std::max(worst, testutil::rel_err(oout.grad.at(static_cast<std::int64_t>(i)), (fp - fm) / (2 * h)));
  }
  CHECK(worst <= 1e-3);
}

TEST_CASE("momentum_update: fixed point, copy, arithmetic, mismatch") {
  std::vector<float> k1 = {0.f, 0.f}, q1 = {2.f, 4.f}, gk(2, 0.f), gq(2, 0.f);
  std::vector<nn::ParamRef<float>> keys = {{"enc.w", &k1, &gk}};
  std::vector<nn::ParamRef<float>> queries = {{"enc.w", &q1, &gq}};

  nn::momentum_update(keys, queries, 1.0f);
  CHECK(k1 == std::vector<float>{0.f, 0.f});

  nn::momentum_update(keys, queries, 0.5f);
  CHECK(k1 == std::vector<float>{1.f, 2.f});

  k1 = {5.f, 5.f};
  nn::momentum_update(keys, queries, 0.0f);
  CHECK(k1 == q1);

  std::vector<float> other = {1.f};
  std::vector<nn::ParamRef<float>> bad = {{"enc.other", &other, &gk}};
  CHECK_THROWS(nn::momentum_update(bad, queries, 0.5f));
  std::vector<nn::ParamRef<float>> empty;
  CHECK_THROWS(nn::momentum_update(empty, queries, 0.5f));
}

TEST_CASE("warmup-cosine schedule: linear to peak then cosine to zero") {
  double peak = 0.01;
  CHECK(nn::warmup_cosine_lr<double>(0, 100, 10, peak) == doctest::Approx(peak / 10));
  CHECK(nn::warmup_cosine_lr<double>(9, 100, 10, peak) == doctest::Approx(peak));
  CHECK(nn::warmup_cosine_lr<double>(10, 100, 10, peak) == doctest::Approx(peak));
  CHECK(nn::warmup_cosine_lr<double>(55, 100, 10, peak) ==
        doctest::Approx(peak * 0.5 * (1 + std::cos(0.5 * 3.14159265358979))).epsilon(1e-6));
  CHECK(nn::warmup_cosine_lr<double>(100, 100, 10, peak) == doctest::Approx(0.0).epsilon(1e-12));
  // Monotone during warmup, decreasing after.
  for (int s = 1; s < 10; ++s)
    CHECK(nn::warmup_cosine_lr<double>(s, 100, 10, peak) >
          nn::warmup_cosine_lr<double>(s - 1, 100, 10, peak));
  for (int s = 11; s <= 100; ++s)
    CHECK(nn::warmup_cosine_lr<double>(s, 100, 10, peak) <=
          nn::warmup_cosine_lr<double>(s - 1, 100, 10, peak));
}
