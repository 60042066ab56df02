#ifndef FRT_TRAIN_HPP
#define FRT_TRAIN_HPP

#include <string>

#include "frt/checkpoint.hpp"
#include "frt/config.hpp"

namespace frt {

struct TrainArtifacts {
  Checkpoint checkpoint;
  std::string log_csv;
  double final_val_psnr = 0.0;
  double final_val_l1 = 0.0;
  double baseline_val_psnr = 0.0;  // degraded/noisy input vs clean on the val split
};

// Autoencoder pretraining of the generative prior on clean faces. The
// returned checkpoint carries only the prior parameters.
TrainArtifacts pretrain_prior(const RunConfig& cfg);

// Full restorer training: alternating discriminator/generator steps per
// batch, frozen pretrained prior, five-term objective plus the early-stage
// pyramid loss. If out_dir is non-empty, periodic checkpoints and the
// training CSV are written there.
TrainArtifacts train_restorer(const RunConfig& cfg, const Checkpoint& prior,
                              const std::string& out_dir = "");

// Three-layer denoiser trained with MSE on freshly noised batches. If base
// is non-null, training continues from it (fine-tuning) and the provenance
// chain is extended.
TrainArtifacts train_denoiser(const RunConfig& cfg, const Checkpoint* base,
                              const std::string& out_dir = "");

// Continues training from a checkpoint of either architecture at a reduced
// default learning rate.
TrainArtifacts finetune_checkpoint(const Checkpoint& base, const RunConfig& cfg,
                                   const std::string& out_dir = "");

}  // namespace frt

#endif  // FRT_TRAIN_HPP
