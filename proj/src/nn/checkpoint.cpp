#include "viprom/nn/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace viprom::nn {

namespace {

constexpr char kMagic[4] = {'V', 'P', 'C', 'K'};
constexpr std::uint32_t kSchemaVersion = 1;

void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& s, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_str(std::string& s, const std::string& v) {
  put_u32(s, static_cast<std::uint32_t>(v.size()));
  s.append(v);
}

struct Reader {
  const std::string& s;
  std::size_t pos = 0;
  explicit Reader(const std::string& s_) : s(s_) {}
  void need(std::size_t n) const {
    if (pos + n > s.size()) throw std::runtime_error("checkpoint: truncated file");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[pos + static_cast<std::size_t>(i)])) << (8 * i);
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[pos + static_cast<std::size_t>(i)])) << (8 * i);
    pos += 8;
    return v;
  }
  std::string str() {
    std::uint32_t n = u32();
    need(n);
    std::string v = s.substr(pos, n);
    pos += n;
    return v;
  }
};

}  // namespace

Stage parse_stage(const std::string& s) {
  if (s == "scratch") return Stage::Scratch;
  if (s == "contrastive") return Stage::Contrastive;
  if (s == "supervised") return Stage::Supervised;
  throw std::invalid_argument("unknown stage: " + s);
}

std::string config_fingerprint_of(const EncoderConfig& cfg, Stage stage) {
  std::string canonical = cfg.to_json().dump() + ":" + stage_name(stage);
  return core::content_fingerprint(canonical);
}

void Checkpoint::save(const std::string& path) const {
  std::string buf;
  buf.append(kMagic, 4);
  put_u32(buf, kSchemaVersion);
  put_str(buf, stage_name(stage));
  put_str(buf, config.to_json().dump());
  put_str(buf, config_fingerprint);
  put_u64(buf, rng_state[0]);
  put_u64(buf, rng_state[1]);
  put_u32(buf, static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, data] : params) {
    put_str(buf, name);
    buf.push_back(0);  // dtype tag 0 = f32
    put_u64(buf, data.size());
    std::size_t off = buf.size();
    buf.resize(off + data.size() * sizeof(float));
    std::memcpy(buf.data() + off, data.data(), data.size() * sizeof(float));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open for write: " + path);
  f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!f) throw std::runtime_error("checkpoint: write failed: " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open: " + path);
  std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  Reader r(buf);
  r.need(8);
  if (std::memcmp(buf.data(), kMagic, 4) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  r.pos = 4;
  std::uint32_t ver = r.u32();
  if (ver != kSchemaVersion)
    throw std::runtime_error("checkpoint: unsupported schema version " + std::to_string(ver));
  Checkpoint ck;
  ck.stage = parse_stage(r.str());
  ck.config = EncoderConfig::from_json(nlohmann::json::parse(r.str()));
  ck.config_fingerprint = r.str();
  ck.rng_state[0] = r.u64();
  ck.rng_state[1] = r.u64();
  std::string expect = config_fingerprint_of(ck.config, ck.stage);
  if (expect != ck.config_fingerprint)
    throw std::runtime_error("checkpoint: fingerprint mismatch in " + path + " (stored " +
                             ck.config_fingerprint + ", recomputed " + expect + ")");
  std::uint32_t np = r.u32();
  ck.params.reserve(np);
  for (std::uint32_t i = 0; i < np; ++i) {
    std::string name = r.str();
    r.need(1);
    char dtype = buf[r.pos++];
    if (dtype != 0) throw std::runtime_error("checkpoint: unsupported dtype tag");
    std::uint64_t count = r.u64();
    r.need(count * sizeof(float));
    std::vector<float> data(count);
    std::memcpy(data.data(), buf.data() + r.pos, count * sizeof(float));
    r.pos += count * sizeof(float);
    ck.params.emplace_back(std::move(name), std::move(data));
  }
  return ck;
}

std::string Checkpoint::param_hash() const {
  std::uint64_t h = core::kFnvOffset;
  for (const auto& [name, data] : params) {
    h = core::fnv1a64(name, h);
    h = core::fnv1a64_bytes(data.data(), data.size() * sizeof(float), h);
  }
  return core::hex64(h);
}

std::vector<std::pair<std::string, std::vector<float>>> snapshot_params(
    std::vector<ParamRef<float>>& refs) {
  std::vector<std::pair<std::string, std::vector<float>>> out;
  out.reserve(refs.size());
  for (auto& r : refs) out.emplace_back(r.name, *r.w);
  return out;
}

void restore_params(std::vector<ParamRef<float>>& refs,
                    const std::vector<std::pair<std::string, std::vector<float>>>& stored,
                    const std::string& prefix_filter) {
  std::size_t used = 0;
  for (auto& r : refs) {
    bool found = false;
    for (const auto& [name, data] : stored) {
      if (name != r.name) continue;
      if (data.size() != r.w->size())
        throw std::runtime_error("restore_params: size mismatch for " + name + " (expected " +
                                 std::to_string(r.w->size()) + ", got " +
                                 std::to_string(data.size()) + ")");
      *r.w = data;
      found = true;
      ++used;
      break;
    }
    if (!found) throw std::runtime_error("restore_params: missing parameter " + r.name);
  }
  if (!prefix_filter.empty()) return;  // extra stored params (e.g. teacher head) are fine
  (void)used;
}

Checkpoint init_encoder(const EncoderConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  auto net = make_encoder<float>(cfg);
  core::Rng rng(core::fanout(seed, "init:" + arch_name(cfg.arch)));
  net.init(rng);
  auto refs = net.params("enc.");
  Checkpoint ck;
  ck.config = cfg;
  ck.stage = Stage::Scratch;
  ck.config_fingerprint = config_fingerprint_of(cfg, Stage::Scratch);
  ck.rng_state = {rng.state, 0};
  ck.params = snapshot_params(refs);
  return ck;
}

Encoder Encoder::from_checkpoint(const Checkpoint& ck) {
  Encoder e;
  e.cfg = ck.config;
  e.net = make_encoder<float>(ck.config);
  auto refs = e.net.params("enc.");
  restore_params(refs, ck.params, "enc.");
  return e;
}

Encoder Encoder::fresh(const EncoderConfig& cfg, std::uint64_t seed) {
  return from_checkpoint(init_encoder(cfg, seed));
}

core::TensorF Encoder::encode(const std::vector<core::FrameImage>& frames, bool train) {
  for (const auto& f : frames)
    if (f.h != cfg.in_h || f.w != cfg.in_w)
      throw std::invalid_argument("encode: frame shape " + std::to_string(f.h) + "x" +
                                  std::to_string(f.w) + " does not match config " +
                                  std::to_string(cfg.in_h) + "x" + std::to_string(cfg.in_w));
  return net.forward(batch_from_frames<float>(frames), train);
}

core::TensorF Encoder::encode(const core::TensorF& batch, bool train) {
  if (batch.rank() != 4 || batch.dim(2) != cfg.in_h || batch.dim(3) != cfg.in_w)
    throw std::invalid_argument("encode: batch shape " + batch.shape_str() +
                                " does not match config input " + std::to_string(cfg.in_h) + "x" +
                                std::to_string(cfg.in_w));
  return net.forward(batch, train);
}

std::string Encoder::param_hash() {
  auto refs = params();
  return params_hash(refs);
}

std::string params_hash(std::vector<ParamRef<float>>& refs) {
  std::uint64_t h = core::kFnvOffset;
  for (auto& r : refs) {
    h = core::fnv1a64(r.name, h);
    h = core::fnv1a64_bytes(r.w->data(), r.w->size() * sizeof(float), h);
  }
  return core::hex64(h);
}

}  // namespace viprom::nn
