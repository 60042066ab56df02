#include "frt/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "frt/image.hpp"
#include "json.hpp"

namespace frt {

using nlohmann::json;

namespace {

json parse_meta(const std::string& meta_json) {
  return json::parse(meta_json, nullptr, /*allow_exceptions=*/true);
}

void put_u16(std::string& out, uint16_t v) {
  out += char(v & 0xff);
  out += char((v >> 8) & 0xff);
}

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out += char((v >> (8 * i)) & 0xff);
}

class Reader {
 public:
  Reader(const std::string& bytes) : bytes_(bytes) {}

  void need(size_t n, const char* what) {
    if (pos_ + n > bytes_.size())
      throw CheckpointError(CheckpointError::Kind::kTruncated,
                            std::string("checkpoint truncated while reading ") + what);
  }
  const char* take(size_t n, const char* what) {
    need(n, what);
    const char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  uint16_t u16(const char* what) {
    const unsigned char* p = reinterpret_cast<const unsigned char*>(take(2, what));
    return uint16_t(p[0] | (p[1] << 8));
  }
  uint32_t u32(const char* what) {
    const unsigned char* p = reinterpret_cast<const unsigned char*>(take(4, what));
    return uint32_t(p[0]) | (uint32_t(p[1]) << 8) | (uint32_t(p[2]) << 16) |
           (uint32_t(p[3]) << 24);
  }
  uint8_t u8(const char* what) {
    return uint8_t(*take(1, what));
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  size_t pos_ = 0;
};

}  // namespace

std::string Checkpoint::arch() const { return parse_meta(meta_json).value("arch", ""); }
std::string Checkpoint::provenance() const { return parse_meta(meta_json).value("provenance", ""); }
uint64_t Checkpoint::seed() const { return parse_meta(meta_json).value("seed", uint64_t(0)); }
std::string Checkpoint::arch_config_json() const {
  json m = parse_meta(meta_json);
  return m.contains("arch_config") ? m["arch_config"].dump() : "{}";
}

void Checkpoint::set_meta(const std::string& arch, uint64_t seed, const std::string& provenance,
                          const std::string& config_hash, const std::string& arch_config_json) {
  json m;
  m["arch"] = arch;
  m["seed"] = seed;
  m["provenance"] = provenance;
  m["config_hash"] = config_hash;
  m["arch_config"] = json::parse(arch_config_json);
  meta_json = m.dump();
}

void Checkpoint::set_provenance(const std::string& tag) {
  json m = parse_meta(meta_json);
  m["provenance"] = tag;
  meta_json = m.dump();
}

std::string checkpoint_bytes(const Checkpoint& ckpt) {
  std::string out = "GFPK";
  put_u16(out, kCheckpointVersion);
  put_u32(out, uint32_t(ckpt.meta_json.size()));
  out += ckpt.meta_json;
  put_u32(out, uint32_t(ckpt.params.size()));
  for (const auto& [name, tensor] : ckpt.params) {  // std::map iterates sorted
    if (name.size() > 0xffff)
      throw CheckpointError(CheckpointError::Kind::kMalformed, "parameter name too long: " + name);
    put_u16(out, uint16_t(name.size()));
    out += name;
    out += char(0);  // dtype f32
    const auto& shape = tensor.shape();
    if (shape.size() > 255)
      throw CheckpointError(CheckpointError::Kind::kMalformed, "tensor rank too large");
    out += char(shape.size());
    for (int d : shape) put_u32(out, uint32_t(d));
    const size_t payload = tensor.data().size() * 4;
    const size_t at = out.size();
    out.resize(at + payload);
    static_assert(sizeof(float) == 4);
    std::memcpy(out.data() + at, tensor.data().data(), payload);  // LE host assumed
  }
  return out;
}

Checkpoint checkpoint_from_bytes(const std::string& bytes) {
  Reader r(bytes);
  const char* magic = r.take(4, "magic");
  if (std::memcmp(magic, "GFPK", 4) != 0)
    throw CheckpointError(CheckpointError::Kind::kBadMagic, "bad checkpoint magic");
  const uint16_t version = r.u16("version");
  if (version != kCheckpointVersion)
    throw CheckpointError(CheckpointError::Kind::kVersion,
                          "unsupported checkpoint version " + std::to_string(version));
  const uint32_t meta_len = r.u32("metadata length");
  Checkpoint ckpt;
  ckpt.meta_json.assign(r.take(meta_len, "metadata"), meta_len);
  try {
    parse_meta(ckpt.meta_json);
  } catch (const json::exception&) {
    throw CheckpointError(CheckpointError::Kind::kMalformed, "metadata is not valid JSON");
  }
  const uint32_t count = r.u32("entry count");
  std::string prev_name;
  for (uint32_t i = 0; i < count; ++i) {
    const uint16_t name_len = r.u16("name length");
    std::string name(r.take(name_len, "name"), name_len);
    if (i > 0 && !(prev_name < name))
      throw CheckpointError(CheckpointError::Kind::kUnsorted,
                            "entries not sorted: '" + prev_name + "' before '" + name + "'");
    prev_name = name;
    const uint8_t dtype = r.u8("dtype");
    if (dtype != 0)
      throw CheckpointError(CheckpointError::Kind::kDtype,
                            "unsupported dtype code " + std::to_string(dtype) + " for " + name);
    const uint8_t rank = r.u8("rank");
    Shape shape(rank);
    int64_t n = 1;
    for (int d = 0; d < rank; ++d) {
      shape[size_t(d)] = int(r.u32("dims"));
      n *= shape[size_t(d)];
    }
    std::vector<float> data(size_t(n), 0.f);
    const char* payload = r.take(size_t(n) * 4, ("payload of " + name).c_str());
    std::memcpy(data.data(), payload, size_t(n) * 4);
    ckpt.params.emplace(std::move(name), Tensor::from(std::move(shape), std::move(data)));
  }
  if (!r.done())
    throw CheckpointError(CheckpointError::Kind::kMalformed, "trailing bytes after last entry");
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  atomic_write_file(path, checkpoint_bytes(ckpt));
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointError::Kind::kIo, "cannot open checkpoint " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return checkpoint_from_bytes(bytes);
}

CompatReport compat_check(const Checkpoint& a, const Checkpoint& b) {
  CompatReport report;
  for (const auto& [name, tensor] : a.params) {
    auto it = b.params.find(name);
    if (it == b.params.end()) {
      report.missing_in_b.push_back(name);
    } else if (it->second.shape() != tensor.shape()) {
      report.shape_mismatch.push_back(name + ": " + shape_str(tensor.shape()) + " vs " +
                                      shape_str(it->second.shape()));
    }
  }
  for (const auto& [name, tensor] : b.params)
    if (!a.params.count(name)) report.extra_in_b.push_back(name);
  return report;
}

std::string CompatReport::to_string() const {
  if (compatible()) return "compatible\n";
  std::string out;
  for (const auto& n : missing_in_b) out += "missing," + n + "\n";
  for (const auto& n : extra_in_b) out += "extra," + n + "\n";
  for (const auto& n : shape_mismatch) out += "shape," + n + "\n";
  return out;
}

std::string fnv1a_hex(const std::string& text) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace frt
