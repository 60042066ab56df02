#ifndef FRT_CONFIG_HPP
#define FRT_CONFIG_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "frt/checkpoint.hpp"
#include "frt/degrade.hpp"
#include "frt/image.hpp"
#include "frt/losses.hpp"
#include "frt/nn.hpp"

namespace frt {

inline constexpr const char* kArchRestorer = "restorer-v1";
inline constexpr const char* kArchDenoiser = "denoiser3-v1";

struct OptimizerSettings {
  double lr = 2e-3;
  std::vector<int64_t> milestones;  // iterations at which lr halves
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
};

struct TrainSettings {
  int64_t iterations = 5000;
  int batch_size = 4;
  int64_t pyramid_cutoff = -1;  // -1: defaults to iterations / 2
  int64_t checkpoint_every = 1000;
  int64_t log_every = 50;
  int64_t val_every = 250;
  double val_fraction = 0.1;
  int component_patch = 8;

  int64_t effective_pyramid_cutoff() const {
    return pyramid_cutoff >= 0 ? pyramid_cutoff : iterations / 2;
  }
};

struct SeedSettings {
  uint64_t model = 1, data = 2, noise = 3, extractor = 7;
};

struct DataSettings {
  std::string corpus;                  // manifest path or corpus directory
  std::string input_mode = "upsampled";  // "upsampled" or "reduced"
};

struct PriorSettings {
  std::string checkpoint;       // pretrained prior for restorer training
  int64_t iterations = 2000;    // pretraining budget
  double lr = 1e-3;
  bool adversarial = false;     // optional adversarial pretraining term
  double adversarial_weight = 0.05;
};

struct DenoiseSettings {
  double noise_level = 20.0;  // AWGN std on the 0..255 scale
  std::string tag;            // provenance tag, default "N<level>"
};

// Schema-validated run configuration; unknown keys anywhere are rejected.
struct RunConfig {
  std::string task;  // "restore" | "denoise"
  RestorerConfig restorer;
  DenoiserConfig denoiser;
  int image_size = 32;
  int in_channels = 1;
  LossWeights loss;
  OptimizerSettings optimizer;
  TrainSettings train;
  SeedSettings seeds;
  DataSettings data;
  DegradationRanges degrade;
  PriorSettings prior;
  DenoiseSettings denoise;
  double finetune_lr_scale = 0.5;  // default lr reduction for finetuning

  std::string canonical_json;  // normalized dump, hashed into checkpoints
  std::string config_hash() const { return fnv1a_hex(canonical_json); }
  std::string arch_json() const;  // architecture block for checkpoint metadata
  std::string arch_id() const;
};

RunConfig parse_run_config_file(const std::string& path);
RunConfig parse_run_config(const std::string& json_text);

// rebuild architectures from checkpoint metadata
RestorerConfig restorer_config_from_arch_json(const std::string& arch_json);
DenoiserConfig denoiser_config_from_arch_json(const std::string& arch_json);

// ---------------------------------------------------------------------------
// model <-> checkpoint bridging
// ---------------------------------------------------------------------------

Checkpoint checkpoint_from_params(const NamedParams<float>& params, const std::string& arch_id,
                                  const std::string& arch_json, uint64_t seed,
                                  const std::string& provenance, const std::string& config_hash);

void load_params_from_checkpoint(NamedParams<float>& params, const Checkpoint& ckpt,
                                 bool allow_extra = false);

// inference callable reconstructed from a checkpoint's architecture metadata;
// output clamped to [0,1]
std::function<Image(const Image&)> make_evaluator(const Checkpoint& ckpt);

}  // namespace frt

#endif  // FRT_CONFIG_HPP
