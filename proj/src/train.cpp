#include "frt/train.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>

#include "frt/degrade.hpp"
#include "frt/losses.hpp"
#include "frt/metrics.hpp"
#include "frt/toyfaces.hpp"

namespace frt {

namespace fs = std::filesystem;

namespace {

constexpr const char* kArchPrior = "prior-v1";

struct Split {
  std::vector<ToyFace> train, val;
};

Split load_split(const RunConfig& cfg) {
  if (cfg.data.corpus.empty()) throw std::invalid_argument("train: data.corpus not set");
  Corpus corpus = read_corpus(cfg.data.corpus);
  if (corpus.entries.empty()) throw std::invalid_argument("train: corpus is empty");
  const size_t n = corpus.entries.size();
  const size_t n_val = size_t(double(n) * cfg.train.val_fraction);
  Split split;
  for (size_t i = 0; i < n; ++i) {
    ToyFace face = corpus.load(i);
    if (face.image.h != cfg.image_size || face.image.w != cfg.image_size)
      throw std::invalid_argument("train: corpus image size does not match the architecture");
    (i < n - n_val ? split.train : split.val).push_back(std::move(face));
  }
  return split;
}

double lr_at(const OptimizerSettings& opt, int64_t iter, double base_lr) {
  double lr = base_lr;
  for (int64_t m : opt.milestones)
    if (iter >= m) lr *= 0.5;  // decayed by a factor of 2 at each milestone
  return lr;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

class CsvLog {
 public:
  explicit CsvLog(std::string header) { text_ = std::move(header) + "\n"; }
  void row(const std::string& line) { text_ += line + "\n"; }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

void write_artifacts(const std::string& out_dir, const TrainArtifacts& art,
                     const Checkpoint* extra = nullptr, const std::string& extra_name = "") {
  if (out_dir.empty()) return;
  fs::create_directories(out_dir);
  save_checkpoint(art.checkpoint, (fs::path(out_dir) / "model.gfpk").string());
  atomic_write_file((fs::path(out_dir) / "training.csv").string(), art.log_csv);
  if (extra) save_checkpoint(*extra, (fs::path(out_dir) / extra_name).string());
}

std::vector<size_t> epoch_order(size_t n, Rng& rng) {
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t(0));
  for (size_t i = n; i > 1; --i) std::swap(order[i - 1], order[size_t(rng.uniform_int(0, int64_t(i) - 1))]);
  return order;
}

}  // namespace

// ---------------------------------------------------------------------------
// prior pretraining
// ---------------------------------------------------------------------------

TrainArtifacts pretrain_prior(const RunConfig& cfg) {
  if (cfg.task != "restore")
    throw std::invalid_argument("pretrain_prior: requires a restore-task config");
  Split split = load_split(cfg);

  Rng model_rng(cfg.seeds.model);
  PriorGenerator<float> gen(cfg.restorer.prior, model_rng);
  PriorEncoder<float> enc(cfg.in_channels, cfg.image_size, cfg.restorer.unet.depth,
                          cfg.restorer.unet.widths.back(), cfg.restorer.prior.latent_width,
                          model_rng);
  ConvDiscriminator<float> disc;
  if (cfg.prior.adversarial)
    disc = ConvDiscriminator<float>(cfg.in_channels, cfg.image_size, {16, 32, 32}, model_rng);

  NamedParams<float> gen_params, enc_params, disc_params;
  gen.named("prior", gen_params);
  enc.named("enc", enc_params);
  if (cfg.prior.adversarial) disc.named("disc", disc_params);
  for (auto& [name, t] : gen_params) t.set_name(name);
  for (auto& [name, t] : enc_params) t.set_name(name);

  NamedParams<float> g_all = gen_params;
  g_all.insert(g_all.end(), enc_params.begin(), enc_params.end());
  Adam<float> opt(param_tensors(g_all),
                  {float(cfg.prior.lr), float(cfg.optimizer.beta1), float(cfg.optimizer.beta2),
                   float(cfg.optimizer.eps)});
  Adam<float> opt_d(param_tensors(disc_params),
                    {float(cfg.prior.lr), float(cfg.optimizer.beta1), float(cfg.optimizer.beta2),
                     float(cfg.optimizer.eps)});

  Rng data_rng(cfg.seeds.data);
  CsvLog log("iter,l1,total");
  std::vector<size_t> order;
  size_t cursor = 0;
  const int batch = cfg.train.batch_size;

  for (int64_t iter = 0; iter < cfg.prior.iterations; ++iter) {
    std::vector<Image> clean;
    for (int b = 0; b < batch; ++b) {
      if (cursor == order.size()) {
        order = epoch_order(split.train.size(), data_rng);
        cursor = 0;
      }
      clean.push_back(split.train[order[cursor++]].image);
    }
    Tensor y = to_batch(clean);
    Tensor recon = gen.decode(gen.map_latent(enc(y)));
    Tensor loss = l1_loss(recon, y);

    if (cfg.prior.adversarial) {
      opt_d.zero_grad();
      auto adv = adversarial_losses(disc, recon, y, cfg.prior.adversarial_weight);
      backward(adv.d_loss);
      opt_d.step();
      loss = add(loss, adversarial_losses(disc, recon, y, cfg.prior.adversarial_weight).g_loss);
    }

    if (!std::isfinite(loss.item()))
      throw std::runtime_error("pretrain_prior: non-finite loss at iteration " +
                               std::to_string(iter));
    opt.zero_grad();
    backward(loss);
    opt.step();
    if (iter % cfg.train.log_every == 0 || iter + 1 == cfg.prior.iterations)
      log.row(std::to_string(iter) + "," + fmt(loss.item()) + "," + fmt(loss.item()));
  }

  TrainArtifacts art;
  art.checkpoint = checkpoint_from_params(gen_params, kArchPrior, cfg.arch_json(),
                                          cfg.seeds.model, "prior", cfg.config_hash());
  art.log_csv = log.text();

  // reconstruction quality on the val split, for reference
  double psnr_sum = 0.0;
  size_t n_val = std::min<size_t>(split.val.size(), 64);
  for (size_t i = 0; i < n_val; ++i) {
    Tensor y = to_tensor(split.val[i].image);
    Image recon = clamp01(to_image(gen.decode(gen.map_latent(enc(y)))));
    psnr_sum += psnr(recon, split.val[i].image);
  }
  art.final_val_psnr = n_val ? psnr_sum / double(n_val) : 0.0;
  return art;
}

// ---------------------------------------------------------------------------
// restorer training
// ---------------------------------------------------------------------------

namespace {

struct RestoreBatch {
  Tensor x, y;
  std::vector<ComponentBoxes> boxes;
};

// degraded input at training resolution per the configured input mode
Image make_input(const Image& clean, const DegradationSpec& spec, const RunConfig& cfg) {
  if (cfg.data.input_mode == "upsampled") return degrade_keep_size(clean, spec);
  return degrade(clean, spec);
}

Image target_for(const Image& clean, const RunConfig& cfg, int scale) {
  if (cfg.data.input_mode == "upsampled" || scale == 1) return clean;
  return downsample(clean, scale);  // reduced mode trains at the reduced size
}

}  // namespace

namespace {

TrainArtifacts train_restorer_impl(const RunConfig& cfg, const Checkpoint* prior,
                                   const Checkpoint* full_init, const std::string& out_dir) {
  if (cfg.task != "restore")
    throw std::invalid_argument("train_restorer: requires a restore-task config");
  if (cfg.data.input_mode == "reduced" && cfg.degrade.scale_lo != cfg.degrade.scale_hi)
    throw std::invalid_argument(
        "train_restorer: reduced input mode requires a fixed downsample factor");
  Split split = load_split(cfg);

  Rng model_rng(cfg.seeds.model);
  Restorer<float> model(cfg.restorer, model_rng);
  std::string provenance = "train";
  if (full_init) {
    NamedParams<float> all;
    model.named(all);
    load_params_from_checkpoint(all, *full_init);
    provenance = full_init->provenance() + "->tune";
  } else {
    NamedParams<float> prior_params;
    model.named_prior(prior_params);
    load_params_from_checkpoint(prior_params, *prior);
    model.init_output_from_prior();
  }
  model.freeze_prior();

  Rng disc_rng(mix_seed(cfg.seeds.model, 0x0d15c));
  ConvDiscriminator<float> d_global(cfg.in_channels, cfg.image_size, {16, 32, 32}, disc_rng);
  std::vector<ConvDiscriminator<float>> d_comp;
  for (int i = 0; i < 3; ++i)
    d_comp.emplace_back(cfg.in_channels, cfg.train.component_patch, std::vector<int>{8, 16},
                        disc_rng);

  FrozenExtractor<float> phi(cfg.in_channels, cfg.seeds.extractor);
  FrozenExtractor<float> eta(cfg.in_channels, mix_seed(cfg.seeds.extractor, 1));

  NamedParams<float> g_params, d_params;
  model.named_trainable(g_params);
  d_global.named("d_global", d_params);
  const char* comp_names[3] = {"d_left_eye", "d_right_eye", "d_mouth"};
  for (int i = 0; i < 3; ++i) d_comp[size_t(i)].named(comp_names[i], d_params);
  for (auto& [name, t] : g_params) t.set_name(name);
  for (auto& [name, t] : d_params) t.set_name(name);

  AdamConfig<float> adam_cfg{float(cfg.optimizer.lr), float(cfg.optimizer.beta1),
                             float(cfg.optimizer.beta2), float(cfg.optimizer.eps)};
  Adam<float> opt_g(param_tensors(g_params), adam_cfg);
  Adam<float> opt_d(param_tensors(d_params), adam_cfg);

  // fixed validation pairs
  Rng val_rng(mix_seed(cfg.seeds.noise, 0x7a1));
  std::vector<Image> val_x, val_y;
  std::vector<double> baseline;
  for (const auto& face : split.val) {
    DegradationSpec spec = sample_spec(cfg.degrade, face.image.h, face.image.w, val_rng);
    Image x = make_input(face.image, spec, cfg);
    Image y = target_for(face.image, cfg, spec.scale);
    baseline.push_back(psnr(x, y));
    val_x.push_back(std::move(x));
    val_y.push_back(std::move(y));
  }
  const double baseline_psnr =
      baseline.empty() ? 0.0
                       : std::accumulate(baseline.begin(), baseline.end(), 0.0) / baseline.size();

  auto run_val = [&](double* out_l1) {
    double psum = 0.0, l1sum = 0.0;
    for (size_t i = 0; i < val_x.size(); ++i) {
      Image out = clamp01(to_image(model.forward(to_tensor(val_x[i])).image));
      psum += psnr(out, val_y[i]);
      double l1 = 0.0;
      for (size_t k = 0; k < out.data.size(); ++k)
        l1 += std::abs(double(out.data[k]) - double(val_y[i].data[k]));
      l1sum += l1 / double(out.data.size());
    }
    if (out_l1) *out_l1 = val_x.empty() ? 0.0 : l1sum / double(val_x.size());
    return val_x.empty() ? 0.0 : psum / double(val_x.size());
  };

  Rng data_rng(cfg.seeds.data);
  CsvLog log("iter,l1,perceptual,adversarial,component,identity,pyramid,d_loss,total,val_psnr");
  std::vector<size_t> order;
  size_t cursor = 0;
  const int batch = cfg.train.batch_size;
  const int64_t pyr_cutoff = cfg.train.effective_pyramid_cutoff();
  double last_val = 0.0;
  double log_d = 0.0;
  bool have_val = false;

  fs::path ckpt_dir(out_dir);
  if (!out_dir.empty()) fs::create_directories(ckpt_dir);
  auto emit_checkpoint = [&](int64_t iter) {
    if (out_dir.empty()) return;
    NamedParams<float> all;
    model.named(all);
    Checkpoint ckpt = checkpoint_from_params(all, kArchRestorer, cfg.arch_json(),
                                             cfg.seeds.model, provenance, cfg.config_hash());
    char name[40];
    std::snprintf(name, sizeof name, "ckpt_%06lld.gfpk", static_cast<long long>(iter));
    save_checkpoint(ckpt, (ckpt_dir / name).string());
  };

  for (int64_t iter = 0; iter < cfg.train.iterations; ++iter) {
    const float lr = float(lr_at(cfg.optimizer, iter, cfg.optimizer.lr));
    opt_g.set_lr(lr);
    opt_d.set_lr(lr);

    RestoreBatch rb;
    {
      std::vector<Image> xs, ys;
      for (int b = 0; b < batch; ++b) {
        if (cursor == order.size()) {
          order = epoch_order(split.train.size(), data_rng);
          cursor = 0;
        }
        const ToyFace& face = split.train[order[cursor++]];
        DegradationSpec spec = sample_spec(cfg.degrade, face.image.h, face.image.w, data_rng);
        xs.push_back(make_input(face.image, spec, cfg));
        ys.push_back(target_for(face.image, cfg, spec.scale));
        rb.boxes.push_back(face.boxes);
      }
      rb.x = to_batch(xs);
      rb.y = to_batch(ys);
    }

    auto out = model.forward(rb.x);
    Tensor y_hat = out.image;

    // discriminator step on detached output
    {
      opt_d.zero_grad();
      Tensor y_det = y_hat.detach();
      auto adv = adversarial_losses(d_global, y_det, rb.y, cfg.loss.adversarial);
      Tensor d_total = adv.d_loss;
      auto fake_patches = crop_components(y_det, rb.boxes, cfg.train.component_patch);
      auto real_patches = crop_components(rb.y, rb.boxes, cfg.train.component_patch);
      for (int r = 0; r < 3; ++r) {
        d_total = add(d_total, mean(softplus(d_comp[size_t(r)](fake_patches[size_t(r)]))));
        d_total = add(d_total,
                      mean(softplus(affine(d_comp[size_t(r)](real_patches[size_t(r)]), -1.f))));
      }
      backward(d_total);
      opt_d.step();
      log_d = double(d_total.item());
    }

    // generator step
    Tensor l1 = l1_loss(y_hat, rb.y);
    Tensor perc = perceptual_loss(y_hat, rb.y, phi);
    Tensor g_adv = affine(mean(softplus(affine(d_global(y_hat), -1.f))),
                          float(cfg.loss.adversarial));
    auto fake_patches = crop_components(y_hat, rb.boxes, cfg.train.component_patch);
    auto real_patches = crop_components(rb.y, rb.boxes, cfg.train.component_patch);
    Tensor comp = component_loss(d_comp, fake_patches, real_patches, cfg.loss.local,
                                 cfg.loss.feature_style);
    Tensor id = identity_loss(eta, y_hat, rb.y, cfg.loss.identity);
    Tensor pyr = pyramid_loss(out.pyramid, rb.y, cfg.loss.pyramid, iter, pyr_cutoff);
    auto total = total_loss(l1, perc, g_adv, comp, id, pyr, cfg.loss);

    if (!std::isfinite(total.value.item())) {
      std::string detail;
      for (const auto& [k, v] : total.breakdown) detail += " " + k + "=" + fmt(v);
      throw std::runtime_error("train_restorer: non-finite loss at iteration " +
                               std::to_string(iter) + ";" + detail);
    }

    opt_g.zero_grad();
    backward(total.value);
    opt_g.step();

    const bool do_val = cfg.train.val_every > 0 && (iter + 1) % cfg.train.val_every == 0;
    if (do_val) {
      last_val = run_val(nullptr);
      have_val = true;
    }
    if (iter % cfg.train.log_every == 0 || iter + 1 == cfg.train.iterations || do_val) {
      log.row(std::to_string(iter) + "," + fmt(total.breakdown.at("l1")) + "," +
              fmt(total.breakdown.at("perceptual")) + "," +
              fmt(total.breakdown.at("adversarial")) + "," +
              fmt(total.breakdown.at("component")) + "," +
              fmt(total.breakdown.at("identity")) + "," + fmt(total.breakdown.at("pyramid")) +
              "," + fmt(log_d) + "," + fmt(total.breakdown.at("total")) + "," +
              (have_val ? fmt(last_val) : std::string()));
    }
    if (cfg.train.checkpoint_every > 0 && (iter + 1) % cfg.train.checkpoint_every == 0)
      emit_checkpoint(iter + 1);
  }

  TrainArtifacts art;
  NamedParams<float> all;
  model.named(all);
  art.checkpoint = checkpoint_from_params(all, kArchRestorer, cfg.arch_json(), cfg.seeds.model,
                                          provenance, cfg.config_hash());
  art.final_val_psnr = run_val(&art.final_val_l1);
  art.baseline_val_psnr = baseline_psnr;
  log.row(std::to_string(cfg.train.iterations) + ",,,,,,,,," + fmt(art.final_val_psnr));
  art.log_csv = log.text();
  write_artifacts(out_dir, art);
  return art;
}

}  // namespace

TrainArtifacts train_restorer(const RunConfig& cfg, const Checkpoint& prior,
                              const std::string& out_dir) {
  return train_restorer_impl(cfg, &prior, nullptr, out_dir);
}

// ---------------------------------------------------------------------------
// denoiser training / fine-tuning
// ---------------------------------------------------------------------------

TrainArtifacts train_denoiser_impl(const RunConfig& cfg, const Checkpoint* base,
                                   const std::string& out_dir, double lr) {
  if (cfg.task != "denoise")
    throw std::invalid_argument("train_denoiser: requires a denoise-task config");
  Split split = load_split(cfg);

  Rng model_rng(cfg.seeds.model);
  Denoiser<float> model(cfg.denoiser, model_rng);
  NamedParams<float> params;
  model.named(params);
  for (auto& [name, t] : params) t.set_name(name);

  std::string provenance = cfg.denoise.tag;
  if (base) {
    if (base->arch() != kArchDenoiser)
      throw std::invalid_argument("train_denoiser: base checkpoint is not a denoiser");
    load_params_from_checkpoint(params, *base);
    provenance = base->provenance() + "->" + cfg.denoise.tag;
  }

  Adam<float> opt(param_tensors(params),
                  {float(lr), float(cfg.optimizer.beta1), float(cfg.optimizer.beta2),
                   float(cfg.optimizer.eps)});

  // fixed validation pairs at the trained noise level
  std::vector<Image> val_x, val_y;
  double baseline_sum = 0.0;
  for (size_t i = 0; i < split.val.size(); ++i) {
    Image noisy = add_noise_level(split.val[i].image, cfg.denoise.noise_level,
                                  mix_seed(cfg.seeds.noise, 0xbeef00 + i));
    baseline_sum += psnr(noisy, split.val[i].image);
    val_x.push_back(std::move(noisy));
    val_y.push_back(split.val[i].image);
  }

  auto run_val = [&](double* out_l1) {
    double psum = 0.0, l1sum = 0.0;
    for (size_t i = 0; i < val_x.size(); ++i) {
      Image out = clamp01(to_image(model.forward(to_tensor(val_x[i]))));
      psum += psnr(out, val_y[i]);
      double l1 = 0.0;
      for (size_t k = 0; k < out.data.size(); ++k)
        l1 += std::abs(double(out.data[k]) - double(val_y[i].data[k]));
      l1sum += l1 / double(out.data.size());
    }
    if (out_l1) *out_l1 = val_x.empty() ? 0.0 : l1sum / double(val_x.size());
    return val_x.empty() ? 0.0 : psum / double(val_x.size());
  };

  Rng data_rng(cfg.seeds.data);
  Rng noise_rng(cfg.seeds.noise);
  CsvLog log("iter,mse,total,val_psnr");
  std::vector<size_t> order;
  size_t cursor = 0;
  const int batch = cfg.train.batch_size;
  double last_val = 0.0;
  bool have_val = false;

  for (int64_t iter = 0; iter < cfg.train.iterations; ++iter) {
    opt.set_lr(float(lr_at(cfg.optimizer, iter, lr)));
    std::vector<Image> xs, ys;
    for (int b = 0; b < batch; ++b) {
      if (cursor == order.size()) {
        order = epoch_order(split.train.size(), data_rng);
        cursor = 0;
      }
      const Image& clean = split.train[order[cursor++]].image;
      xs.push_back(add_noise_level(clean, cfg.denoise.noise_level, noise_rng.next_u64()));
      ys.push_back(clean);
    }
    Tensor x = to_batch(xs), y = to_batch(ys);
    Tensor loss = mse_loss(model.forward(x), y);
    if (!std::isfinite(loss.item()))
      throw std::runtime_error("train_denoiser: non-finite loss at iteration " +
                               std::to_string(iter) + "; mse=" + fmt(loss.item()));
    opt.zero_grad();
    backward(loss);
    opt.step();

    const bool do_val = cfg.train.val_every > 0 && (iter + 1) % cfg.train.val_every == 0;
    if (do_val) {
      last_val = run_val(nullptr);
      have_val = true;
    }
    if (iter % cfg.train.log_every == 0 || iter + 1 == cfg.train.iterations || do_val)
      log.row(std::to_string(iter) + "," + fmt(loss.item()) + "," + fmt(loss.item()) + "," +
              (have_val ? fmt(last_val) : std::string()));
  }

  TrainArtifacts art;
  art.checkpoint = checkpoint_from_params(params, kArchDenoiser, cfg.arch_json(),
                                          cfg.seeds.model, provenance, cfg.config_hash());
  art.final_val_psnr = run_val(&art.final_val_l1);
  art.baseline_val_psnr = val_x.empty() ? 0.0 : baseline_sum / double(val_x.size());
  log.row(std::to_string(cfg.train.iterations) + ",,," + fmt(art.final_val_psnr));
  art.log_csv = log.text();
  write_artifacts(out_dir, art);
  return art;
}

TrainArtifacts train_denoiser(const RunConfig& cfg, const Checkpoint* base,
                              const std::string& out_dir) {
  return train_denoiser_impl(cfg, base, out_dir, cfg.optimizer.lr);
}

TrainArtifacts finetune_checkpoint(const Checkpoint& base, const RunConfig& cfg,
                                   const std::string& out_dir) {
  const double lr = cfg.optimizer.lr * cfg.finetune_lr_scale;
  if (base.arch() == kArchDenoiser) return train_denoiser_impl(cfg, &base, out_dir, lr);
  if (base.arch() == kArchRestorer) {
    RunConfig tuned = cfg;
    tuned.optimizer.lr = lr;
    return train_restorer_impl(tuned, nullptr, &base, out_dir);
  }
  throw std::invalid_argument("finetune: unsupported base architecture '" + base.arch() + "'");
}

}  // namespace frt
