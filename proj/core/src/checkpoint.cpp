#include "crobust/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "crobust/errors.hpp"
#include "crobust/rng.hpp"

namespace crobust {

namespace {

constexpr int64_t kMaxRank = 8;
constexpr int64_t kMaxDim = 1 << 24;
constexpr int64_t kMaxNumel = 1 << 26;

class Writer {
 public:
  std::vector<unsigned char> out;

  void bytes(const void* p, size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    out.insert(out.end(), b, b + n);
  }
  void u8(uint8_t v) { bytes(&v, 1); }
  void u16(uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
    bytes(b, 2);
  }
  void u32(uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 4);
  }
  void u64(uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 8);
  }
  void f32(float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    u32(bits);
  }
};

class Reader {
 public:
  Reader(const unsigned char* p, size_t n) : p_(p), n_(n) {}

  void bytes(void* dst, size_t n) {
    if (pos_ + n > n_) throw TruncatedError("checkpoint ends inside a record");
    std::memcpy(dst, p_ + pos_, n);
    pos_ += n;
  }
  uint8_t u8() {
    uint8_t v;
    bytes(&v, 1);
    return v;
  }
  uint16_t u16() {
    unsigned char b[2];
    bytes(b, 2);
    return static_cast<uint16_t>(b[0] | (b[1] << 8));
  }
  uint32_t u32() {
    unsigned char b[4];
    bytes(b, 4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
    return v;
  }
  uint64_t u64() {
    unsigned char b[8];
    bytes(b, 8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return v;
  }
  float f32() {
    uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  bool done() const { return pos_ == n_; }

 private:
  const unsigned char* p_;
  size_t n_;
  size_t pos_ = 0;
};

void write_record(Writer& w, const std::string& name, const Tensor& t) {
  if (name.empty() || name.size() > 0xffff) throw ContractError("bad parameter name");
  w.u16(static_cast<uint16_t>(name.size()));
  w.bytes(name.data(), name.size());
  w.u8(static_cast<uint8_t>(t.rank()));
  for (int64_t d : t.shape) w.u32(static_cast<uint32_t>(d));
  for (float v : t.data) w.f32(v);
}

std::pair<std::string, Tensor> read_record(Reader& r) {
  const uint16_t name_len = r.u16();
  if (name_len == 0) throw FormatError("empty parameter name in checkpoint");
  std::string name(name_len, '\0');
  r.bytes(name.data(), name_len);
  const uint8_t rank = r.u8();
  if (rank > kMaxRank) throw FormatError("implausible tensor rank " + std::to_string(rank));
  std::vector<int64_t> shape(rank);
  int64_t numel = 1;
  for (auto& d : shape) {
    d = static_cast<int64_t>(r.u32());
    if (d <= 0 || d > kMaxDim) throw FormatError("implausible dimension " + std::to_string(d));
    numel *= d;
    if (numel > kMaxNumel) throw FormatError("implausible tensor size in checkpoint");
  }
  Tensor t(std::move(shape));
  for (auto& v : t.data) v = r.f32();
  return {std::move(name), std::move(t)};
}

void write_set(Writer& w, const std::string& prefix, const ParameterSet& set, bool velocities) {
  for (const auto& [name, e] : set.entries) {
    const std::string base = prefix + "/" + name;
    if (velocities) {
      write_record(w, base + ".w.vel", e.weights_vel);
      write_record(w, base + ".b.vel", e.bias_vel);
    } else {
      write_record(w, base + ".w", e.weights);
      write_record(w, base + ".b", e.bias);
    }
  }
}

ParameterSet* set_for_prefix(ModelBundle& b, const std::string& name, std::string& rest) {
  const size_t slash = name.find('/');
  if (slash == std::string::npos) throw FormatError("malformed record name: " + name);
  const std::string prefix = name.substr(0, slash);
  rest = name.substr(slash + 1);
  if (prefix == "encoder") return &b.encoder;
  if (prefix == "classifier") return &b.classifier;
  if (prefix == "projector") return &b.projector;
  throw FormatError("unknown parameter set: " + prefix);
}

}  // namespace

std::vector<unsigned char> serialize_checkpoint(const ModelBundle& bundle) {
  Writer w;
  w.bytes(kCheckpointMagic, 4);
  w.u16(kCheckpointVersion);
  w.u32(bundle.arch.input_size);
  w.u32(bundle.arch.class_count);
  for (uint32_t c : bundle.arch.conv_channels) w.u32(c);
  w.u32(bundle.arch.projector_hidden);
  w.u32(bundle.arch.projection_dim);
  w.u64(bundle.init_seed);

  const auto count = static_cast<uint32_t>(
      2 * (bundle.encoder.entries.size() + bundle.classifier.entries.size() +
           bundle.projector.entries.size()));
  w.u32(count);
  write_set(w, "encoder", bundle.encoder, false);
  write_set(w, "classifier", bundle.classifier, false);
  write_set(w, "projector", bundle.projector, false);
  w.u32(count);
  write_set(w, "encoder", bundle.encoder, true);
  write_set(w, "classifier", bundle.classifier, true);
  write_set(w, "projector", bundle.projector, true);
  return std::move(w.out);
}

ModelBundle deserialize_checkpoint(const std::vector<unsigned char>& bytes) {
  Reader r(bytes.data(), bytes.size());
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kCheckpointMagic, 4) != 0) {
    throw BadMagicError("not a checkpoint file (bad magic bytes)");
  }
  const uint16_t version = r.u16();
  if (version != kCheckpointVersion) {
    throw VersionError("unsupported checkpoint version " + std::to_string(version));
  }
  ModelBundle b;
  b.arch.input_size = r.u32();
  b.arch.class_count = r.u32();
  for (auto& c : b.arch.conv_channels) c = r.u32();
  b.arch.projector_hidden = r.u32();
  b.arch.projection_dim = r.u32();
  b.init_seed = r.u64();
  try {
    b.arch.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("invalid architecture block: ") + e.what());
  }

  const uint32_t param_count = r.u32();
  std::string pending_name;
  Tensor pending_weights;
  for (uint32_t i = 0; i < param_count; ++i) {
    auto [name, t] = read_record(r);
    if (name.size() > 2 && name.compare(name.size() - 2, 2, ".w") == 0) {
      if (!pending_name.empty()) throw FormatError("weights record without matching bias");
      pending_name = name.substr(0, name.size() - 2);
      pending_weights = std::move(t);
    } else if (name.size() > 2 && name.compare(name.size() - 2, 2, ".b") == 0) {
      const std::string base = name.substr(0, name.size() - 2);
      if (base != pending_name) throw FormatError("bias record " + name + " out of order");
      std::string entry;
      ParameterSet* set = set_for_prefix(b, base, entry);
      set->add(entry, std::move(pending_weights), std::move(t));
      pending_name.clear();
    } else {
      throw FormatError("unrecognized record name: " + name);
    }
  }
  if (!pending_name.empty()) throw FormatError("dangling weights record " + pending_name);

  const uint32_t state_count = r.u32();
  for (uint32_t i = 0; i < state_count; ++i) {
    auto [name, t] = read_record(r);
    if (name.size() <= 4 || name.compare(name.size() - 4, 4, ".vel") != 0) {
      throw FormatError("unrecognized optimizer-state record: " + name);
    }
    const std::string base = name.substr(0, name.size() - 4);
    const bool is_weights = base.size() > 2 && base.compare(base.size() - 2, 2, ".w") == 0;
    const bool is_bias = base.size() > 2 && base.compare(base.size() - 2, 2, ".b") == 0;
    if (!is_weights && !is_bias) throw FormatError("unrecognized state record: " + name);
    std::string entry;
    ParameterSet* set = set_for_prefix(b, base.substr(0, base.size() - 2), entry);
    ParamEntry* e = set->find(entry);
    if (e == nullptr) throw FormatError("state record for unknown parameter: " + name);
    Tensor& slot = is_weights ? e->weights_vel : e->bias_vel;
    if (slot.shape != t.shape) {
      throw FormatError("state shape " + Tensor::shape_str(t.shape) + " does not match " + name);
    }
    slot = std::move(t);
  }
  if (!r.done()) throw FormatError("trailing bytes after checkpoint payload");
  return b;
}

void save_checkpoint(const ModelBundle& bundle, const std::string& path) {
  const auto bytes = serialize_checkpoint(bundle);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open checkpoint for writing: " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("short write to checkpoint: " + path);
}

ModelBundle load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary | std::ios::ate);
  if (!f) throw IoError("cannot open checkpoint: " + path);
  const auto size = f.tellg();
  f.seekg(0);
  std::vector<unsigned char> bytes(static_cast<size_t>(size));
  if (size > 0) f.read(reinterpret_cast<char*>(bytes.data()), size);
  if (!f) throw TruncatedError("failed reading checkpoint: " + path);
  return deserialize_checkpoint(bytes);
}

uint64_t checkpoint_digest(const ModelBundle& bundle) {
  const auto bytes = serialize_checkpoint(bundle);
  return fnv1a64(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

}  // namespace crobust
