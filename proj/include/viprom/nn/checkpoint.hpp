// checkpoint.hpp - encoder persistence. Binary container with a versioned
// header {schema_version, stage, config, fingerprint} and a named f32
// parameter table; round-trips are bit-exact.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "viprom/core/hash.hpp"
#include "viprom/nn/encoder.hpp"
#include "viprom/nn/layers.hpp"

namespace viprom::nn {

enum class Stage { Scratch, Contrastive, Supervised };

inline std::string stage_name(Stage s) {
  switch (s) {
    case Stage::Scratch: return "scratch";
    case Stage::Contrastive: return "contrastive";
    case Stage::Supervised: return "supervised";
  }
  return "?";
}

Stage parse_stage(const std::string& s);

struct Checkpoint {
  EncoderConfig config;
  Stage stage = Stage::Scratch;
  std::string config_fingerprint;  // content hash of config + stage
  std::array<std::uint64_t, 2> rng_state{0, 0};
  std::vector<std::pair<std::string, std::vector<float>>> params;  // ordered

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);

  // Hash over all parameter bytes; used by freeze contracts and bench caching.
  std::string param_hash() const;
};

std::string config_fingerprint_of(const EncoderConfig& cfg, Stage stage);

// Snapshot named params out of a live model / load them back in.
std::vector<std::pair<std::string, std::vector<float>>> snapshot_params(
    std::vector<ParamRef<float>>& refs);
void restore_params(std::vector<ParamRef<float>>& refs,
                    const std::vector<std::pair<std::string, std::vector<float>>>& stored,
                    const std::string& prefix_filter = "");

Checkpoint init_encoder(const EncoderConfig& cfg, std::uint64_t seed);

// Live encoder bound to a checkpoint's parameters.
struct Encoder {
  EncoderConfig cfg;
  Sequential<float> net;

  static Encoder from_checkpoint(const Checkpoint& ck);
  static Encoder fresh(const EncoderConfig& cfg, std::uint64_t seed);

  core::TensorF encode(const std::vector<core::FrameImage>& frames, bool train = false);
  core::TensorF encode(const core::TensorF& batch, bool train = false);
  std::vector<ParamRef<float>> params() { return net.params("enc."); }
  std::string param_hash();
};

std::string params_hash(std::vector<ParamRef<float>>& refs);

}  // namespace viprom::nn
