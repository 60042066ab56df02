#include "frt/config.hpp"

#include <fstream>
#include <set>

#include "json.hpp"

namespace frt {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument("config: " + msg);
}

void reject_unknown(const json& obj, const std::string& where,
                    const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) fail("unknown key '" + it.key() + "' in " + where);
}

template <class V>
V get_or(const json& obj, const char* key, V fallback) {
  if (!obj.contains(key)) return fallback;
  return obj.at(key).get<V>();
}

json arch_to_json(const RunConfig& cfg) {
  json a;
  if (cfg.task == "restore") {
    a["type"] = "restorer";
    a["image_size"] = cfg.image_size;
    a["in_channels"] = cfg.in_channels;
    a["depth"] = cfg.restorer.unet.depth;
    a["widths"] = cfg.restorer.unet.widths;
    a["latent_width"] = cfg.restorer.unet.latent_width;
    a["w_dim"] = cfg.restorer.prior.w_dim;
    a["mlp_layers"] = cfg.restorer.prior.mlp_layers;
    a["prior_channels"] = cfg.restorer.prior.base_channels;
    a["split_fraction"] = cfg.restorer.split_fraction;
  } else {
    a["type"] = "denoiser3";
    a["image_size"] = cfg.image_size;
    a["in_channels"] = cfg.in_channels;
    a["widths"] = cfg.denoiser.widths;
    a["kernels"] = cfg.denoiser.kernels;
  }
  return a;
}

RestorerConfig restorer_from_arch(const json& a) {
  RestorerConfig rc;
  rc.unet.image_size = a.at("image_size").get<int>();
  rc.unet.in_channels = a.at("in_channels").get<int>();
  rc.unet.depth = a.at("depth").get<int>();
  rc.unet.widths = a.at("widths").get<std::vector<int>>();
  rc.unet.latent_width = a.at("latent_width").get<int>();
  rc.prior.image_size = rc.unet.image_size;
  rc.prior.out_channels = rc.unet.in_channels;
  rc.prior.latent_width = rc.unet.latent_width;
  rc.prior.w_dim = get_or(a, "w_dim", rc.unet.latent_width);
  rc.prior.mlp_layers = get_or(a, "mlp_layers", 2);
  rc.prior.base_channels = get_or(a, "prior_channels", 32);
  rc.prior.base_size = rc.unet.image_size >> rc.unet.depth;
  rc.prior.widths.assign(rc.unet.widths.rbegin(), rc.unet.widths.rend());  // coarsest first
  rc.split_fraction = a.contains("split_fraction")
                          ? a.at("split_fraction").get<std::vector<double>>()
                          : std::vector<double>(size_t(rc.unet.depth), 0.5);
  if (int(rc.split_fraction.size()) != rc.unet.depth)
    fail("split_fraction needs one entry per scale");
  return rc;
}

DenoiserConfig denoiser_from_arch(const json& a) {
  DenoiserConfig dc;
  dc.in_channels = a.at("in_channels").get<int>();
  dc.widths = get_or(a, "widths", std::vector<int>{16, 16});
  dc.kernels = get_or(a, "kernels", std::vector<int>{9, 5, 9});
  return dc;
}

}  // namespace

std::string RunConfig::arch_json() const { return arch_to_json(*this).dump(); }

std::string RunConfig::arch_id() const {
  return task == "restore" ? kArchRestorer : kArchDenoiser;
}

RestorerConfig restorer_config_from_arch_json(const std::string& arch_json) {
  return restorer_from_arch(json::parse(arch_json));
}

DenoiserConfig denoiser_config_from_arch_json(const std::string& arch_json) {
  return denoiser_from_arch(json::parse(arch_json));
}

RunConfig parse_run_config(const std::string& json_text) {
  json root = json::parse(json_text);
  if (!root.is_object()) fail("top level must be an object");
  reject_unknown(root, "top level",
                 {"task", "arch", "loss", "optimizer", "train", "seeds", "data", "degrade",
                  "prior", "denoise", "finetune_lr_scale"});

  RunConfig cfg;
  cfg.task = root.at("task").get<std::string>();
  if (cfg.task != "restore" && cfg.task != "denoise")
    fail("task must be 'restore' or 'denoise'");

  const json& arch = root.at("arch");
  if (cfg.task == "restore") {
    reject_unknown(arch, "arch",
                   {"type", "image_size", "in_channels", "depth", "widths", "latent_width",
                    "w_dim", "mlp_layers", "prior_channels", "split_fraction"});
    if (get_or<std::string>(arch, "type", "restorer") != "restorer")
      fail("arch.type must be 'restorer' for the restore task");
    cfg.restorer = restorer_from_arch(arch);
    cfg.image_size = cfg.restorer.unet.image_size;
    cfg.in_channels = cfg.restorer.unet.in_channels;
  } else {
    reject_unknown(arch, "arch", {"type", "image_size", "in_channels", "widths", "kernels"});
    if (get_or<std::string>(arch, "type", "denoiser3") != "denoiser3")
      fail("arch.type must be 'denoiser3' for the denoise task");
    cfg.denoiser = denoiser_from_arch(arch);
    cfg.image_size = arch.at("image_size").get<int>();
    cfg.in_channels = cfg.denoiser.in_channels;
  }

  if (root.contains("loss")) {
    const json& l = root.at("loss");
    reject_unknown(l, "loss",
                   {"l1", "perceptual", "adversarial", "local", "feature_style", "identity",
                    "pyramid"});
    cfg.loss.l1 = get_or(l, "l1", cfg.loss.l1);
    cfg.loss.perceptual = get_or(l, "perceptual", cfg.loss.perceptual);
    cfg.loss.adversarial = get_or(l, "adversarial", cfg.loss.adversarial);
    cfg.loss.local = get_or(l, "local", cfg.loss.local);
    cfg.loss.feature_style = get_or(l, "feature_style", cfg.loss.feature_style);
    cfg.loss.identity = get_or(l, "identity", cfg.loss.identity);
    cfg.loss.pyramid = get_or(l, "pyramid", cfg.loss.pyramid);
    cfg.loss.validate();
  }

  if (root.contains("optimizer")) {
    const json& o = root.at("optimizer");
    reject_unknown(o, "optimizer", {"lr", "milestones", "beta1", "beta2", "eps"});
    cfg.optimizer.lr = get_or(o, "lr", cfg.optimizer.lr);
    cfg.optimizer.milestones = get_or(o, "milestones", cfg.optimizer.milestones);
    cfg.optimizer.beta1 = get_or(o, "beta1", cfg.optimizer.beta1);
    cfg.optimizer.beta2 = get_or(o, "beta2", cfg.optimizer.beta2);
    cfg.optimizer.eps = get_or(o, "eps", cfg.optimizer.eps);
    if (!(cfg.optimizer.lr > 0)) fail("optimizer.lr must be positive");
  }

  if (root.contains("train")) {
    const json& t = root.at("train");
    reject_unknown(t, "train",
                   {"iterations", "batch_size", "pyramid_cutoff", "checkpoint_every",
                    "log_every", "val_every", "val_fraction", "component_patch"});
    cfg.train.iterations = get_or(t, "iterations", cfg.train.iterations);
    cfg.train.batch_size = get_or(t, "batch_size", cfg.train.batch_size);
    cfg.train.pyramid_cutoff = get_or(t, "pyramid_cutoff", cfg.train.pyramid_cutoff);
    cfg.train.checkpoint_every = get_or(t, "checkpoint_every", cfg.train.checkpoint_every);
    cfg.train.log_every = get_or(t, "log_every", cfg.train.log_every);
    cfg.train.val_every = get_or(t, "val_every", cfg.train.val_every);
    cfg.train.val_fraction = get_or(t, "val_fraction", cfg.train.val_fraction);
    cfg.train.component_patch = get_or(t, "component_patch", cfg.train.component_patch);
    if (cfg.train.batch_size < 1) fail("train.batch_size must be >= 1");
    if (cfg.train.iterations < 0) fail("train.iterations must be >= 0");
    if (cfg.train.val_fraction < 0 || cfg.train.val_fraction >= 1)
      fail("train.val_fraction must be in [0, 1)");
  }

  if (root.contains("seeds")) {
    const json& s = root.at("seeds");
    reject_unknown(s, "seeds", {"model", "data", "noise", "extractor"});
    cfg.seeds.model = get_or(s, "model", cfg.seeds.model);
    cfg.seeds.data = get_or(s, "data", cfg.seeds.data);
    cfg.seeds.noise = get_or(s, "noise", cfg.seeds.noise);
    cfg.seeds.extractor = get_or(s, "extractor", cfg.seeds.extractor);
  }

  if (root.contains("data")) {
    const json& d = root.at("data");
    reject_unknown(d, "data", {"corpus", "input_mode"});
    cfg.data.corpus = get_or<std::string>(d, "corpus", "");
    cfg.data.input_mode = get_or<std::string>(d, "input_mode", cfg.data.input_mode);
    if (cfg.data.input_mode != "upsampled" && cfg.data.input_mode != "reduced")
      fail("data.input_mode must be 'upsampled' or 'reduced'");
  }

  if (root.contains("degrade")) {
    const json& g = root.at("degrade");
    reject_unknown(g, "degrade",
                   {"sigma", "scale", "noise", "quality", "jitter_brightness", "jitter_contrast"});
    auto pair_of = [&](const char* key, double lo, double hi) {
      if (!g.contains(key)) return std::pair<double, double>(lo, hi);
      auto v = g.at(key).get<std::vector<double>>();
      if (v.size() != 2 || v[0] > v[1]) fail(std::string("degrade.") + key + " must be [lo, hi]");
      return std::pair<double, double>(v[0], v[1]);
    };
    std::tie(cfg.degrade.sigma_lo, cfg.degrade.sigma_hi) = pair_of("sigma", 0.2, 10.0);
    auto sc = pair_of("scale", 1, 8);
    cfg.degrade.scale_lo = int(sc.first);
    cfg.degrade.scale_hi = int(sc.second);
    std::tie(cfg.degrade.noise_lo, cfg.degrade.noise_hi) = pair_of("noise", 0.0, 15.0);
    auto q = pair_of("quality", 60, 100);
    cfg.degrade.quality_lo = int(q.first);
    cfg.degrade.quality_hi = int(q.second);
    cfg.degrade.jitter_brightness = get_or(g, "jitter_brightness", 0.0);
    cfg.degrade.jitter_contrast = get_or(g, "jitter_contrast", 0.0);
  }

  if (root.contains("prior")) {
    const json& p = root.at("prior");
    reject_unknown(p, "prior",
                   {"checkpoint", "iterations", "lr", "adversarial", "adversarial_weight"});
    cfg.prior.checkpoint = get_or<std::string>(p, "checkpoint", "");
    cfg.prior.iterations = get_or(p, "iterations", cfg.prior.iterations);
    cfg.prior.lr = get_or(p, "lr", cfg.prior.lr);
    cfg.prior.adversarial = get_or(p, "adversarial", cfg.prior.adversarial);
    cfg.prior.adversarial_weight = get_or(p, "adversarial_weight", cfg.prior.adversarial_weight);
  }

  if (root.contains("denoise")) {
    const json& d = root.at("denoise");
    reject_unknown(d, "denoise", {"noise_level", "tag"});
    cfg.denoise.noise_level = get_or(d, "noise_level", cfg.denoise.noise_level);
    cfg.denoise.tag = get_or<std::string>(d, "tag", "");
    if (cfg.denoise.noise_level < 0) fail("denoise.noise_level must be >= 0");
  }
  if (cfg.denoise.tag.empty()) {
    char tag[32];
    std::snprintf(tag, sizeof tag, "N%g", cfg.denoise.noise_level);
    cfg.denoise.tag = tag;
  }

  cfg.finetune_lr_scale = get_or(root, "finetune_lr_scale", cfg.finetune_lr_scale);

  cfg.canonical_json = root.dump();
  return cfg;
}

RunConfig parse_run_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_run_config(text);
}

// ---------------------------------------------------------------------------
// checkpoint bridging
// ---------------------------------------------------------------------------

Checkpoint checkpoint_from_params(const NamedParams<float>& params, const std::string& arch_id,
                                  const std::string& arch_json, uint64_t seed,
                                  const std::string& provenance, const std::string& config_hash) {
  Checkpoint ckpt;
  ckpt.set_meta(arch_id, seed, provenance, config_hash, arch_json);
  for (const auto& [name, tensor] : params) {
    if (ckpt.params.count(name))
      throw std::runtime_error("duplicate parameter name '" + name + "'");
    ckpt.params.emplace(name, tensor.detach());
  }
  return ckpt;
}

void load_params_from_checkpoint(NamedParams<float>& params, const Checkpoint& ckpt,
                                 bool allow_extra) {
  size_t used = 0;
  for (auto& [name, tensor] : params) {
    auto it = ckpt.params.find(name);
    if (it == ckpt.params.end())
      throw std::runtime_error("checkpoint missing parameter '" + name + "'");
    if (it->second.shape() != tensor.shape())
      throw std::runtime_error("checkpoint shape mismatch for '" + name + "': " +
                               shape_str(it->second.shape()) + " vs " +
                               shape_str(tensor.shape()));
    tensor.data() = it->second.data();
    ++used;
  }
  if (!allow_extra && used != ckpt.params.size())
    throw std::runtime_error("checkpoint has " + std::to_string(ckpt.params.size() - used) +
                             " parameter(s) unknown to this architecture");
}

std::function<Image(const Image&)> make_evaluator(const Checkpoint& ckpt) {
  const std::string arch = ckpt.arch();
  if (arch == kArchRestorer) {
    Rng rng(0);
    auto model = std::make_shared<Restorer<float>>(
        restorer_config_from_arch_json(ckpt.arch_config_json()), rng);
    NamedParams<float> params;
    model->named(params);
    load_params_from_checkpoint(params, ckpt);
    return [model](const Image& in) {
      auto out = model->forward(to_tensor(in));
      return clamp01(to_image(out.image));
    };
  }
  if (arch == kArchDenoiser) {
    Rng rng(0);
    auto model = std::make_shared<Denoiser<float>>(
        denoiser_config_from_arch_json(ckpt.arch_config_json()), rng);
    NamedParams<float> params;
    model->named(params);
    load_params_from_checkpoint(params, ckpt);
    return [model](const Image& in) {
      return clamp01(to_image(model->forward(to_tensor(in))));
    };
  }
  throw std::runtime_error("unknown architecture id '" + arch + "' in checkpoint metadata");
}

}  // namespace frt
