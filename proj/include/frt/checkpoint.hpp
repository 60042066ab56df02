#ifndef FRT_CHECKPOINT_HPP
#define FRT_CHECKPOINT_HPP

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "frt/tensor.hpp"

namespace frt {

// Checkpoint: ordered map parameter name -> f32 tensor plus a JSON metadata
// document. The map ordering (lexicographic by name) is also the on-disk
// entry order.
//
// File layout (all integers little-endian):
//   magic "GFPK" | version u16 | meta length u32 | meta UTF-8 JSON bytes |
//   entry count u32 | entries, sorted by name:
//     name length u16 | name bytes | dtype u8 (0 = f32) | rank u8 |
//     dims u32[rank] | payload (4 * product(dims) LE f32 bytes)
struct Checkpoint {
  std::string meta_json = "{}";
  std::map<std::string, Tensor> params;

  // convenience accessors over the metadata document
  std::string arch() const;
  std::string provenance() const;
  uint64_t seed() const;
  void set_meta(const std::string& arch, uint64_t seed, const std::string& provenance,
                const std::string& config_hash, const std::string& arch_config_json);
  std::string arch_config_json() const;
  void set_provenance(const std::string& tag);
};

class CheckpointError : public std::runtime_error {
 public:
  enum class Kind { kIo, kBadMagic, kVersion, kTruncated, kUnsorted, kDtype, kMalformed };
  CheckpointError(Kind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

constexpr uint16_t kCheckpointVersion = 1;

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// serialize to bytes (exposed for round-trip tests)
std::string checkpoint_bytes(const Checkpoint& ckpt);
Checkpoint checkpoint_from_bytes(const std::string& bytes);

struct CompatReport {
  std::vector<std::string> missing_in_b;   // names only in A
  std::vector<std::string> extra_in_b;     // names only in B
  std::vector<std::string> shape_mismatch; // "name: [..] vs [..]"
  bool compatible() const {
    return missing_in_b.empty() && extra_in_b.empty() && shape_mismatch.empty();
  }
  std::string to_string() const;
};

CompatReport compat_check(const Checkpoint& a, const Checkpoint& b);

// FNV-1a 64 over a string, hex-encoded; used for config hashes in metadata
std::string fnv1a_hex(const std::string& text);

}  // namespace frt

#endif  // FRT_CHECKPOINT_HPP
