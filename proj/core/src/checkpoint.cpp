#include "necst/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace necst::io {
namespace {

constexpr char kMagic[8] = {'N', 'E', 'C', 'S', 'T', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

std::uint64_t fnv1a(const std::uint8_t* data, std::size_t size, std::uint64_t state) {
  for (std::size_t i = 0; i < size; ++i) {
    state ^= data[i];
    state *= 0x100000001b3ULL;
  }
  return state;
}
constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

class Writer {
 public:
  void u32(std::uint32_t v) { raw(&v, sizeof(v)); }
  void u64(std::uint64_t v) { raw(&v, sizeof(v)); }
  void f64(double v) { raw(&v, sizeof(v)); }
  void f32(float v) { raw(&v, sizeof(v)); }
  void raw(const void* p, std::size_t size) {
    const auto* bytes = static_cast<const std::uint8_t*>(p);
    buffer_.insert(buffer_.end(), bytes, bytes + size);
  }
  const std::vector<std::uint8_t>& bytes() const { return buffer_; }

 private:
  std::vector<std::uint8_t> buffer_;
};

class Reader {
 public:
  Reader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

  std::uint32_t u32() { return read<std::uint32_t>(); }
  std::uint64_t u64() { return read<std::uint64_t>(); }
  double f64() { return read<double>(); }
  float f32() { return read<float>(); }
  std::size_t offset() const { return offset_; }

 private:
  template <typename T>
  T read() {
    if (offset_ + sizeof(T) > size_) throw std::runtime_error("checkpoint: truncated file");
    T v;
    std::memcpy(&v, data_ + offset_, sizeof(T));
    offset_ += sizeof(T);
    return v;
  }

  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t offset_ = 0;
};

void write_mlp(Writer& w, const nn::MlpParams& params) {
  w.u32(static_cast<std::uint32_t>(params.layers.size()));
  for (const auto& layer : params.layers) {
    w.u32(static_cast<std::uint32_t>(layer.out_dim()));
    w.u32(static_cast<std::uint32_t>(layer.in_dim()));
    w.u32(static_cast<std::uint32_t>(layer.activation));
  }
  for (const auto& layer : params.layers) {
    for (double v : layer.weights.storage()) w.f32(static_cast<float>(v));
    for (double v : layer.bias) w.f32(static_cast<float>(v));
  }
}

void read_mlp_header(Reader& r, std::vector<std::pair<std::size_t, std::size_t>>& shapes,
                     std::vector<nn::Activation>& acts) {
  const std::uint32_t n_layers = r.u32();
  if (n_layers == 0 || n_layers > 64) throw std::runtime_error("checkpoint: bad layer count");
  shapes.clear();
  acts.clear();
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    const std::size_t out = r.u32();
    const std::size_t in = r.u32();
    const std::uint32_t act = r.u32();
    if (act > 2) throw std::runtime_error("checkpoint: bad activation id");
    shapes.emplace_back(out, in);
    acts.push_back(static_cast<nn::Activation>(act));
  }
}

void read_mlp_payload(Reader& r, nn::MlpParams& params,
                      const std::vector<std::pair<std::size_t, std::size_t>>& shapes,
                      const std::vector<nn::Activation>& acts) {
  params.layers.clear();
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    nn::Layer layer;
    layer.activation = acts[l];
    layer.weights = Matrix(shapes[l].first, shapes[l].second);
    layer.bias.assign(shapes[l].first, 0.0);
    for (double& v : layer.weights.storage()) v = static_cast<double>(r.f32());
    for (double& v : layer.bias) v = static_cast<double>(r.f32());
    params.layers.push_back(std::move(layer));
  }
}

}  // namespace

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path) {
  const NecstModel& model = checkpoint.model;
  validate_model(model);

  Writer body;  // everything after (magic, version); checksummed
  body.u32(static_cast<std::uint32_t>(model.input_dim));
  body.u32(static_cast<std::uint32_t>(model.code_length));
  body.u32(model.channel.kind == channel::Kind::kBsc ? 0 : 1);
  body.f64(model.channel.noise);
  body.u32(model.decoder_family == DecoderFamily::kBernoulli ? 0 : 1);
  body.f64(model.gaussian_variance);

  body.u64(checkpoint.config_echo.sample_count);
  body.u64(checkpoint.config_echo.epochs);
  body.u64(checkpoint.config_echo.batch_size);
  body.u64(checkpoint.config_echo.eval_every);
  body.f64(checkpoint.config_echo.lr);
  body.f64(checkpoint.config_echo.l2_encoder);
  body.u64(checkpoint.config_echo.seed);
  body.u64(checkpoint.seed_lineage);

  write_mlp(body, model.encoder);
  write_mlp(body, model.decoder);

  const std::uint64_t checksum = fnv1a(body.bytes().data(), body.bytes().size(), kFnvOffset);

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("save_checkpoint: cannot open " + tmp);
    out.write(kMagic, sizeof(kMagic));
    std::uint32_t version = kVersion;
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    out.write(reinterpret_cast<const char*>(body.bytes().data()),
              static_cast<std::streamsize>(body.bytes().size()));
    out.write(reinterpret_cast<const char*>(&checksum), sizeof(checksum));
    if (!out) throw std::runtime_error("save_checkpoint: write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

void save_checkpoint(const NecstModel& model, const std::string& path) {
  Checkpoint checkpoint;
  checkpoint.model = model;
  save_checkpoint(checkpoint, path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());

  if (bytes.size() < sizeof(kMagic) + sizeof(std::uint32_t) + sizeof(std::uint64_t))
    throw std::runtime_error("load_checkpoint: file too short");
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("load_checkpoint: bad magic (not a checkpoint file)");

  std::uint32_t version = 0;
  std::memcpy(&version, bytes.data() + sizeof(kMagic), sizeof(version));
  if (version != kVersion)
    throw std::runtime_error("load_checkpoint: unsupported format version " +
                             std::to_string(version) + " (this build reads version " +
                             std::to_string(kVersion) + ")");

  const std::size_t body_begin = sizeof(kMagic) + sizeof(version);
  const std::size_t body_size = bytes.size() - body_begin - sizeof(std::uint64_t);
  std::uint64_t stored_checksum = 0;
  std::memcpy(&stored_checksum, bytes.data() + body_begin + body_size, sizeof(stored_checksum));
  const std::uint64_t checksum = fnv1a(bytes.data() + body_begin, body_size, kFnvOffset);
  if (checksum != stored_checksum)
    throw std::runtime_error("load_checkpoint: checksum mismatch (corrupted file)");

  Reader r(bytes.data() + body_begin, body_size);
  Checkpoint checkpoint;
  NecstModel& model = checkpoint.model;
  model.input_dim = r.u32();
  model.code_length = r.u32();
  model.channel.kind = r.u32() == 0 ? channel::Kind::kBsc : channel::Kind::kBec;
  model.channel.noise = r.f64();
  model.decoder_family = r.u32() == 0 ? DecoderFamily::kBernoulli : DecoderFamily::kGaussian;
  model.gaussian_variance = r.f64();

  checkpoint.config_echo.sample_count = r.u64();
  checkpoint.config_echo.epochs = r.u64();
  checkpoint.config_echo.batch_size = r.u64();
  checkpoint.config_echo.eval_every = r.u64();
  checkpoint.config_echo.lr = r.f64();
  checkpoint.config_echo.l2_encoder = r.f64();
  checkpoint.config_echo.seed = r.u64();
  checkpoint.seed_lineage = r.u64();

  std::vector<std::pair<std::size_t, std::size_t>> enc_shapes, dec_shapes;
  std::vector<nn::Activation> enc_acts, dec_acts;
  read_mlp_header(r, enc_shapes, enc_acts);
  read_mlp_payload(r, model.encoder, enc_shapes, enc_acts);
  read_mlp_header(r, dec_shapes, dec_acts);
  read_mlp_payload(r, model.decoder, dec_shapes, dec_acts);

  validate_model(model);
  return checkpoint;
}

}  // namespace necst::io
