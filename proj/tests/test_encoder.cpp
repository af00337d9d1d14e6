#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "test_util.hpp"
#include "viprom/nn/checkpoint.hpp"
#include "viprom/nn/heads.hpp"
#include "viprom/nn/losses.hpp"

using namespace viprom;
namespace fs = std::filesystem;

TEST_CASE("init_encoder: deterministic under seed, seed-sensitive") {
  nn::EncoderConfig cfg;
  cfg.embedding_dim = 16;
  cfg.in_h = cfg.in_w = 16;
  cfg.width = 4;
  auto a = nn::init_encoder(cfg, 7);
  auto b = nn::init_encoder(cfg, 7);
  CHECK(a.param_hash() == b.param_hash());
  CHECK(a.stage == nn::Stage::Scratch);

  auto c = nn::init_encoder(cfg, 8);
  CHECK(a.param_hash() != c.param_hash());

  CHECK_THROWS(nn::parse_arch("vgg-16"));
}

TEST_CASE("shape contracts hold for every architecture") {
  for (auto arch : {nn::Arch::TinyConv, nn::Arch::Res34, nn::Arch::Res50, nn::Arch::Res101}) {
    nn::EncoderConfig cfg;
    cfg.arch = arch;
    cfg.embedding_dim = 12;
    cfg.in_h = cfg.in_w = 16;
    cfg.width = 4;
    auto ck = nn::init_encoder(cfg, 3);
    auto enc = nn::Encoder::from_checkpoint(ck);
    auto x = testutil::random_tensor<float>({2, 3, 16, 16}, 5, 0.3);
    auto y = enc.encode(x, false);
    CHECK(y.shape == std::vector<int>{2, 12});
  }
}

TEST_CASE("encode: identical images give identical rows; shape mismatch rejected") {
  nn::EncoderConfig cfg;
  cfg.embedding_dim = 8;
  cfg.in_h = cfg.in_w = 16;
  cfg.width = 4;
  auto enc = nn::Encoder::fresh(cfg, 11);

  core::FrameImage f;
  f.h = f.w = 16;
  f.chw.assign(3 * 16 * 16, 0.25f);
  auto y = enc.encode(std::vector<core::FrameImage>{f, f, f}, false);
  CHECK(y.dim(0) == 3);
  for (int j = 0; j < 8; ++j) {
    CHECK(y.at2(0, j) == y.at2(1, j));
    CHECK(y.at2(1, j) == y.at2(2, j));
  }

  core::FrameImage wrong;
  wrong.h = wrong.w = 24;
  wrong.chw.assign(3 * 24 * 24, 0.f);
  bool threw = false;
  try {
    auto z = enc.encode(std::vector<core::FrameImage>{wrong}, false);
  } catch (const std::invalid_argument& e) {
    threw = true;
    std::string msg = e.what();
    CHECK(msg.find("24") != std::string::npos);
    CHECK(msg.find("16") != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("end-to-end gradcheck: tiny-conv through every head kind") {
  nn::EncoderConfig cfg;
  cfg.embedding_dim = 6;
  cfg.in_h = cfg.in_w = 8;
  cfg.width = 2;
  auto enc = nn::make_encoder<double>(cfg);
  core::Rng rng(31);
  enc.init(rng);

  auto x = testutil::random_tensor<double>({2, 3, 8, 8}, 17, 0.5);

  for (auto kind : {nn::HeadKind::Projection, nn::HeadKind::Prediction,
                    nn::HeadKind::ClassifierSemantics, nn::HeadKind::ClassifierOrder,
                    nn::HeadKind::Policy}) {
    auto head = nn::make_head<double>(kind, 6, 5, 4);
    head.init(rng);
    // Fixed random readout weights turn the head output into a scalar.
    auto readout = testutil::random_tensor<double>({2, 4}, 23, 1.0);

    auto scalar = [&]() {
      auto emb = enc.forward(x, true);
      auto out = head.forward(emb, true);
      double s = 0;
      for (std::int64_t i = 0; i < out.size(); ++i) s += out.at(i) * readout.at(i);
      return s;
    };

    double base = scalar();
    (void)base;
    // Analytic grads
    enc.zero_grad();
    head.zero_grad();
    auto emb = enc.forward(x, true);
    auto out = head.forward(emb, true);
    auto demb = head.backward(readout);
    auto dx = enc.backward(demb);

    auto params = enc.params("enc.");
    {
      auto hp = head.params("head.");
      params.insert(params.end(), hp.begin(), hp.end());
    }

    double worst = 0;
    // A sample of parameter coordinates across all tensors.
    for (auto& p : params) {
      auto idx = testutil::sample_indices(p.w->size(), 3, core::fnv1a64(p.name));
      for (std::size_t i : idx) {
        double saved = (*p.w)[i], h = 1e-4;
        (*p.w)[i] = saved + h;
        double fp = scalar();
        (*p.w)[i] = saved - h;
        double fm = scalar();
        (*p.w)[i] = saved;
        worst = std::max(worst, testutil::rel_err((*p.g)[i], (fp - fm) / (2 * h)));
      }
    }
    // And input coordinates.
    for (std::size_t i : testutil::sample_indices(static_cast<std::size_t>(x.size()), 10, 77)) {
      double saved = x.at(static_cast<std::int64_t>(i)), h = 1e-4;
      x.at(static_cast<std::int64_t>(i)) = saved + h;
      double fp = scalar();
      x.at(static_cast<std::int64_t>(i)) = saved - h;
      double fm = scalar();
      x.at(static_cast<std::int64_t>(i)) = saved;
      worst = std::max(worst, testutil::rel_err(dx.at(static_cast<std::int64_t>(i)), (fp - fm) / (2 * h)));
    }
    INFO("head kind: ", nn::head_name(kind));
    CHECK(worst <= 1e-3);
  }
}

TEST_CASE("residual blocks gradcheck (res-34 style cell)") {
  nn::EncoderConfig cfg;
  cfg.arch = nn::Arch::Res34;
  cfg.embedding_dim = 4;
  cfg.in_h = cfg.in_w = 8;
  cfg.width = 2;
  auto enc = nn::make_encoder<double>(cfg);
  core::Rng rng(41);
  enc.init(rng);
  auto x = testutil::random_tensor<double>({1, 3, 8, 8}, 19, 0.5);
  auto readout = testutil::random_tensor<double>({1, 4}, 29, 1.0);

  auto scalar = [&]() {
    auto out = enc.forward(x, true);
    double s = 0;
    for (std::int64_t i = 0; i < out.size(); ++i) s += out.at(i) * readout.at(i);
    return s;
  };
  enc.zero_grad();
  auto out = enc.forward(x, true);
  enc.backward(readout);
  auto params = enc.params("enc.");
  double worst = 0;
  int checked = 0;
  for (auto& p : params) {
    if (checked > 60) break;
    auto idx = testutil::sample_indices(p.w->size(), 2, core::fnv1a64(p.name));
    for (std::size_t i : idx) {
      double saved = (*p.w)[i], h = 1e-4;
      (*p.w)[i] = saved + h;
      double fp = scalar();
      (*p.w)[i] = saved - h;
      double fm = scalar();
      (*p.w)[i] = saved;
      worst = std::max(worst, testutil::rel_err((*p.g)[i], (fp - fm) / (2 * h)));
      ++checked;
    }
  }
  CHECK(worst <= 1e-3);
}

TEST_CASE("checkpoint: save/load round-trip is bit-exact") {
  nn::EncoderConfig cfg;
  cfg.embedding_dim = 8;
  cfg.in_h = cfg.in_w = 16;
  cfg.width = 4;
  auto ck = nn::init_encoder(cfg, 99);
  fs::path dir = fs::temp_directory_path() / "viprom_ckpt_test";
  fs::create_directories(dir);
  fs::path p = dir / "a.ckpt";
  ck.save(p.string());
  auto back = nn::Checkpoint::load(p.string());
  CHECK(back.param_hash() == ck.param_hash());
  CHECK(back.stage == ck.stage);
  CHECK(back.config_fingerprint == ck.config_fingerprint);
  CHECK(back.config.embedding_dim == 8);

  // Saving the loaded checkpoint reproduces the same bytes.
  fs::path p2 = dir / "b.ckpt";
  back.save(p2.string());
  std::ifstream f1(p, std::ios::binary), f2(p2, std::ios::binary);
  std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(s1 == s2);

  SUBCASE("truncated file is rejected with no partial state") {
    std::ofstream t(dir / "trunc.ckpt", std::ios::binary);
    t.write(s1.data(), static_cast<std::streamsize>(s1.size() / 2));
    t.close();
    CHECK_THROWS(nn::Checkpoint::load((dir / "trunc.ckpt").string()));
  }

  SUBCASE("fingerprint corruption is detected") {
    std::string corrupted = s1;
    // Flip a byte inside the stored fingerprint region (scan for the hex).
    auto at = corrupted.find(ck.config_fingerprint);
    REQUIRE(at != std::string::npos);
    corrupted[at] = corrupted[at] == 'a' ? 'b' : 'a';
    std::ofstream cf(dir / "corrupt.ckpt", std::ios::binary);
    cf.write(corrupted.data(), static_cast<std::streamsize>(corrupted.size()));
    cf.close();
    bool threw = false;
    try {
      auto bad = nn::Checkpoint::load((dir / "corrupt.ckpt").string());
    } catch (const std::runtime_error& e) {
      threw = true;
      CHECK(std::string(e.what()).find("fingerprint") != std::string::npos);
    }
    CHECK(threw);
  }
  fs::remove_all(dir);
}

TEST_CASE("checkpoint: schema fixture from a previous build loads") {
  fs::path fixture = fs::path(VIPROM_SOURCE_DIR) / "tests" / "fixtures" / "tinyconv_v1.ckpt";
  REQUIRE(fs::exists(fixture));
  auto ck = nn::Checkpoint::load(fixture.string());
  CHECK(ck.stage == nn::Stage::Scratch);
  CHECK(ck.config.arch == nn::Arch::TinyConv);
  CHECK(ck.param_hash() == "c6a2b063242f1b98");
  auto enc = nn::Encoder::from_checkpoint(ck);
  auto x = testutil::random_tensor<float>({1, 3, 16, 16}, 2, 0.3);
  CHECK(enc.encode(x, false).dim(1) == ck.config.embedding_dim);
}

TEST_CASE("stage fingerprints differ by stage and config") {
  nn::EncoderConfig cfg;
  auto fp1 = nn::config_fingerprint_of(cfg, nn::Stage::Scratch);
  auto fp2 = nn::config_fingerprint_of(cfg, nn::Stage::Contrastive);
  CHECK(fp1 != fp2);
  nn::EncoderConfig cfg2 = cfg;
  cfg2.embedding_dim = 128;
  CHECK(nn::config_fingerprint_of(cfg2, nn::Stage::Scratch) != fp1);
}
