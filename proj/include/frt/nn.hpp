#ifndef FRT_NN_HPP
#define FRT_NN_HPP

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "frt/tensor.hpp"
#include "frt/toyfaces.hpp"

namespace frt {

constexpr float kLeakySlope = 0.2f;  // StyleGAN2 convention, used everywhere

template <class T>
using NamedParams = std::vector<std::pair<std::string, TensorT<T>>>;

template <class T>
std::vector<TensorT<T>> param_tensors(const NamedParams<T>& named) {
  std::vector<TensorT<T>> out;
  out.reserve(named.size());
  for (const auto& [name, t] : named) out.push_back(t);
  return out;
}

// ---------------------------------------------------------------------------
// basic layers
// ---------------------------------------------------------------------------

template <class T>
struct Conv2dLayer {
  TensorT<T> weight, bias;
  int stride = 1;

  Conv2dLayer() = default;
  Conv2dLayer(int cin, int cout, int k, int stride_, Rng& rng) : stride(stride_) {
    const T std = T(std::sqrt(2.0 / double(cin) / double(k * k)));
    weight = TensorT<T>::randn({cout, cin, k, k}, rng, std, true);
    bias = TensorT<T>::zeros({cout}, true);
  }

  TensorT<T> operator()(const TensorT<T>& x) const { return conv2d(x, weight, bias, stride); }

  void named(const std::string& prefix, NamedParams<T>& out) const {
    out.emplace_back(prefix + ".weight", weight);
    out.emplace_back(prefix + ".bias", bias);
  }
};

template <class T>
struct LinearLayer {
  TensorT<T> weight, bias;

  LinearLayer() = default;
  LinearLayer(int din, int dout, Rng& rng) {
    const T std = T(std::sqrt(2.0 / double(din)));
    weight = TensorT<T>::randn({dout, din}, rng, std, true);
    bias = TensorT<T>::zeros({dout}, true);
  }

  TensorT<T> operator()(const TensorT<T>& x) const { return linear(x, weight, bias); }

  void named(const std::string& prefix, NamedParams<T>& out) const {
    out.emplace_back(prefix + ".weight", weight);
    out.emplace_back(prefix + ".bias", bias);
  }
};

// stack of linear layers with leaky-relu between them (not after the last)
template <class T>
struct Mlp {
  std::vector<LinearLayer<T>> layers;

  Mlp() = default;
  Mlp(int din, int dout, int n_layers, Rng& rng) {
    if (n_layers < 1) throw std::invalid_argument("mlp: need at least one layer");
    for (int i = 0; i < n_layers; ++i)
      layers.emplace_back(i == 0 ? din : dout, dout, rng);
  }

  TensorT<T> operator()(TensorT<T> x) const {
    for (size_t i = 0; i < layers.size(); ++i) {
      x = layers[i](x);
      if (i + 1 < layers.size()) x = leaky_relu(x, T(kLeakySlope));
    }
    return x;
  }

  void named(const std::string& prefix, NamedParams<T>& out) const {
    for (size_t i = 0; i < layers.size(); ++i)
      layers[i].named(prefix + "." + std::to_string(i), out);
  }
};

// alpha (.) F + beta with strict shape agreement
template <class T>
TensorT<T> sft(const TensorT<T>& f_gan, const TensorT<T>& alpha, const TensorT<T>& beta) {
  if (alpha.shape() != f_gan.shape() || beta.shape() != f_gan.shape())
    throw std::invalid_argument("sft: alpha/beta must match the feature shape");
  return add(mul(alpha, f_gan), beta);
}

// ---------------------------------------------------------------------------
// U-Net degradation removal module
// ---------------------------------------------------------------------------

struct UNetConfig {
  int image_size = 32;
  int in_channels = 1;
  int depth = 2;                  // number of down/up stages
  std::vector<int> widths{16, 32};  // channels at scale s (0 = full resolution)
  int latent_width = 64;
};

template <class T>
struct UNetOutput {
  TensorT<T> latent;                  // N x latent_width
  std::vector<TensorT<T>> f_spatial;  // depth entries, coarsest first
  std::vector<TensorT<T>> pyramid;    // depth entries, coarsest first, image range
};

template <class T>
class UNet {
 public:
  UNet() = default;
  UNet(const UNetConfig& cfg, Rng& rng) : cfg_(cfg) {
    if (int(cfg.widths.size()) != cfg.depth)
      throw std::invalid_argument("unet: widths must have one entry per stage");
    if (cfg.image_size % (1 << cfg.depth) != 0)
      throw std::invalid_argument("unet: image size must be divisible by 2^depth");
    conv_in_ = Conv2dLayer<T>(cfg.in_channels, cfg.widths[0], 3, 1, rng);
    for (int s = 0; s < cfg.depth; ++s) {
      enc_.push_back(Conv2dLayer<T>(cfg.widths[size_t(s)], cfg.widths[size_t(s)], 3, 1, rng));
      const int next = s + 1 < cfg.depth ? cfg.widths[size_t(s + 1)] : cfg.widths.back();
      down_.push_back(Conv2dLayer<T>(cfg.widths[size_t(s)], next, 3, 2, rng));
    }
    bott_ = Conv2dLayer<T>(cfg.widths.back(), cfg.widths.back(), 3, 1, rng);
    const int bres = cfg.image_size >> cfg.depth;
    latent_ = LinearLayer<T>(cfg.widths.back() * bres * bres, cfg.latent_width, rng);
    for (int s = cfg.depth - 1; s >= 0; --s) {
      const int prev = s + 1 < cfg.depth ? cfg.widths[size_t(s + 1)] : cfg.widths.back();
      dec_.push_back(Conv2dLayer<T>(prev + cfg.widths[size_t(s)], cfg.widths[size_t(s)], 3, 1, rng));
      pyr_.push_back(Conv2dLayer<T>(cfg.widths[size_t(s)], cfg.in_channels, 3, 1, rng));
    }
  }

  const UNetConfig& config() const { return cfg_; }

  UNetOutput<T> forward(const TensorT<T>& x) const {
    if (x.rank() != 4 || x.dim(1) != cfg_.in_channels)
      throw std::invalid_argument("unet: input must be N x " + std::to_string(cfg_.in_channels) +
                                  " x H x W");
    if (x.dim(2) % (1 << cfg_.depth) != 0 || x.dim(3) % (1 << cfg_.depth) != 0)
      throw std::invalid_argument("unet: input extents must be divisible by 2^depth");
    const T slope = T(kLeakySlope);
    std::vector<TensorT<T>> skips;
    TensorT<T> h = leaky_relu(conv_in_(x), slope);
    for (int s = 0; s < cfg_.depth; ++s) {
      h = leaky_relu(enc_[size_t(s)](h), slope);
      skips.push_back(h);
      h = leaky_relu(down_[size_t(s)](h), slope);
    }
    h = leaky_relu(bott_(h), slope);

    UNetOutput<T> out;
    out.latent = latent_(reshape(h, {h.dim(0), int(h.numel() / h.dim(0))}));
    // decoder, coarsest scale first
    for (int i = 0; i < cfg_.depth; ++i) {
      const int s = cfg_.depth - 1 - i;
      h = resample2d(h, Resample::kBilinear, 2);
      h = concat_channels<T>({h, skips[size_t(s)]});
      h = leaky_relu(dec_[size_t(i)](h), slope);
      out.f_spatial.push_back(h);
      out.pyramid.push_back(pyr_[size_t(i)](h));
    }
    return out;
  }

  void named(const std::string& prefix, NamedParams<T>& out) const {
    conv_in_.named(prefix + ".conv_in", out);
    for (size_t s = 0; s < enc_.size(); ++s) {
      enc_[s].named(prefix + ".enc" + std::to_string(s), out);
      down_[s].named(prefix + ".down" + std::to_string(s), out);
    }
    bott_.named(prefix + ".bott", out);
    latent_.named(prefix + ".latent", out);
    for (size_t i = 0; i < dec_.size(); ++i) {
      dec_[i].named(prefix + ".dec" + std::to_string(i), out);
      pyr_[i].named(prefix + ".pyr" + std::to_string(i), out);
    }
  }

 private:
  UNetConfig cfg_;
  Conv2dLayer<T> conv_in_, bott_;
  std::vector<Conv2dLayer<T>> enc_, down_, dec_, pyr_;
  LinearLayer<T> latent_;
};

// ---------------------------------------------------------------------------
// miniature generative prior
// ---------------------------------------------------------------------------

struct PriorConfig {
  int image_size = 32;
  int out_channels = 1;
  int latent_width = 64;  // input width of the mapping MLP
  int w_dim = 64;
  int mlp_layers = 2;
  int base_channels = 32;
  int base_size = 8;               // resolution of the learned constant
  std::vector<int> widths{32, 16};  // per emitted scale, coarsest first
};

// Learned-constant + conv/upsample stack conditioned on the mapped latent W
// through per-channel affine modulation. Emits one feature tensor per scale,
// coarsest first. Stands in for a pretrained face GAN: trained once as the
// decoder of an autoencoder over clean faces, then frozen.
template <class T>
class PriorGenerator {
 public:
  PriorGenerator() = default;
  PriorGenerator(const PriorConfig& cfg, Rng& rng) : cfg_(cfg) {
    if (cfg.widths.empty()) throw std::invalid_argument("prior: needs at least one scale");
    if ((cfg.base_size << cfg.widths.size()) != cfg.image_size)
      throw std::invalid_argument("prior: base_size * 2^scales must equal image_size");
    mlp_ = Mlp<T>(cfg.latent_width, cfg.w_dim, cfg.mlp_layers, rng);
    const_base_ = TensorT<T>::randn({1, cfg.base_channels, cfg.base_size, cfg.base_size}, rng,
                                    T(0.5), true);
    int prev = cfg.base_channels;
    for (int ch : cfg.widths) {
      stages_.push_back(Stage{Conv2dLayer<T>(prev, ch, 3, 1, rng),
                              LinearLayer<T>(cfg.w_dim, ch, rng),
                              LinearLayer<T>(cfg.w_dim, ch, rng)});
      prev = ch;
    }
    to_img_ = Conv2dLayer<T>(cfg.widths.back(), cfg.out_channels, 3, 1, rng);
  }

  const PriorConfig& config() const { return cfg_; }
  int num_scales() const { return int(stages_.size()); }
  const Conv2dLayer<T>& to_img() const { return to_img_; }

  TensorT<T> map_latent(const TensorT<T>& f_latent) const {
    if (f_latent.rank() != 2 || f_latent.dim(1) != cfg_.latent_width)
      throw std::invalid_argument("prior: latent width mismatch, expected " +
                                  std::to_string(cfg_.latent_width));
    return mlp_(f_latent);
  }

  // one stage of the synthesis chain; used by both the raw feature walk
  // and the modulated restoration path
  TensorT<T> run_stage(int s, const TensorT<T>& feat, const TensorT<T>& w) const {
    const auto& st = stages_[size_t(s)];
    TensorT<T> h = resample2d(feat, Resample::kNearest, 2);
    h = st.conv(h);
    TensorT<T> gain = affine(st.gain(w), T(1), T(1));  // 1 + learned gain
    h = channel_affine(h, gain, st.shift(w));
    return leaky_relu(h, T(kLeakySlope));
  }

  TensorT<T> initial_feature(int batch) const { return batch_repeat(const_base_, batch); }

  // raw per-scale prior features, coarsest first
  std::vector<TensorT<T>> prior_features(const TensorT<T>& w) const {
    std::vector<TensorT<T>> feats;
    TensorT<T> h = initial_feature(w.dim(0));
    for (int s = 0; s < num_scales(); ++s) {
      h = run_stage(s, h, w);
      feats.push_back(h);
    }
    return feats;
  }

  // decoded image from the raw chain (pretraining head)
  TensorT<T> decode(const TensorT<T>& w) const {
    auto feats = prior_features(w);
    return to_img_(feats.back());
  }

  void named(const std::string& prefix, NamedParams<T>& out) const {
    mlp_.named(prefix + ".mlp", out);
    out.emplace_back(prefix + ".const", const_base_);
    for (size_t s = 0; s < stages_.size(); ++s) {
      const std::string sp = prefix + ".stage" + std::to_string(s);
      stages_[s].conv.named(sp + ".conv", out);
      stages_[s].gain.named(sp + ".gain", out);
      stages_[s].shift.named(sp + ".shift", out);
    }
    to_img_.named(prefix + ".to_img", out);
  }

 private:
  struct Stage {
    Conv2dLayer<T> conv;
    LinearLayer<T> gain, shift;
  };
  PriorConfig cfg_;
  Mlp<T> mlp_;
  TensorT<T> const_base_;
  std::vector<Stage> stages_;
  Conv2dLayer<T> to_img_;
};

// small conv encoder used only while pretraining the prior as an autoencoder
template <class T>
class PriorEncoder {
 public:
  PriorEncoder() = default;
  PriorEncoder(int in_channels, int image_size, int depth, int width, int latent_width, Rng& rng) {
    int prev = in_channels;
    for (int s = 0; s < depth; ++s) {
      convs_.push_back(Conv2dLayer<T>(prev, width, 3, 2, rng));
      prev = width;
    }
    const int res = image_size >> depth;
    head_ = LinearLayer<T>(width * res * res, latent_width, rng);
  }

  TensorT<T> operator()(TensorT<T> x) const {
    for (const auto& c : convs_) x = leaky_relu(c(x), T(kLeakySlope));
    return head_(reshape(x, {x.dim(0), int(x.numel() / x.dim(0))}));
  }

  void named(const std::string& prefix, NamedParams<T>& out) const {
    for (size_t i = 0; i < convs_.size(); ++i)
      convs_[i].named(prefix + ".conv" + std::to_string(i), out);
    head_.named(prefix + ".head", out);
  }

 private:
  std::vector<Conv2dLayer<T>> convs_;
  LinearLayer<T> head_;
};

// ---------------------------------------------------------------------------
// channel-split spatial feature transform
// ---------------------------------------------------------------------------

// Modulates the upper (1-rho is passed through) channel split of the prior
// features with affine parameters predicted from the spatial features by
// two separate convolutions. Channels below split_index() pass through
// bitwise untouched.
template <class T>
class CSSFTLayer {
 public:
  CSSFTLayer() = default;
  CSSFTLayer(int gan_channels, int cond_channels, double rho, Rng& rng)
      : channels_(gan_channels), rho_(rho) {
    if (!(rho > 0.0 && rho <= 1.0))
      throw std::invalid_argument("cs-sft: split fraction must be in (0, 1]");
    split_ = int(std::floor((1.0 - rho) * gan_channels));
    const int mod = gan_channels - split_;
    alpha_ = Conv2dLayer<T>(cond_channels, mod, 3, 1, rng);
    beta_ = Conv2dLayer<T>(cond_channels, mod, 3, 1, rng);
    // start as identity modulation: alpha = 1, beta = 0
    std::fill(alpha_.weight.data().begin(), alpha_.weight.data().end(), T(0));
    std::fill(alpha_.bias.data().begin(), alpha_.bias.data().end(), T(1));
    std::fill(beta_.weight.data().begin(), beta_.weight.data().end(), T(0));
  }

  int split_index() const { return split_; }
  double rho() const { return rho_; }

  TensorT<T> operator()(const TensorT<T>& f_gan, const TensorT<T>& f_spatial) const {
    if (f_gan.dim(1) != channels_)
      throw std::invalid_argument("cs-sft: feature channel mismatch");
    TensorT<T> alpha = alpha_(f_spatial);
    TensorT<T> beta = beta_(f_spatial);
    if (split_ == 0) return sft(f_gan, alpha, beta);
    TensorT<T> pass = slice_channels(f_gan, 0, split_);
    TensorT<T> modulated = sft(slice_channels(f_gan, split_, channels_), alpha, beta);
    return concat_channels<T>({pass, modulated});
  }

  void named(const std::string& prefix, NamedParams<T>& out) const {
    alpha_.named(prefix + ".alpha", out);
    beta_.named(prefix + ".beta", out);
  }

 private:
  int channels_ = 0;
  int split_ = 0;
  double rho_ = 1.0;
  Conv2dLayer<T> alpha_, beta_;
};

// ---------------------------------------------------------------------------
// discriminators
// ---------------------------------------------------------------------------

// strided conv stack to a single logit; intermediate pre-activation feature
// maps are returned for the feature-style loss
template <class T>
class ConvDiscriminator {
 public:
  struct Out {
    TensorT<T> logit;                   // N x 1
    std::vector<TensorT<T>> features;   // pre-activation conv outputs
  };

  ConvDiscriminator() = default;
  ConvDiscriminator(int in_channels, int input_size, std::vector<int> widths, Rng& rng) {
    int prev = in_channels, res = input_size;
    for (int wch : widths) {
      convs_.push_back(Conv2dLayer<T>(prev, wch, 3, 2, rng));
      prev = wch;
      res /= 2;
    }
    if (res < 1) throw std::invalid_argument("discriminator: too many stages for input size");
    head_ = LinearLayer<T>(prev * res * res, 1, rng);
  }

  Out forward(const TensorT<T>& x) const {
    Out out;
    TensorT<T> h = x;
    for (const auto& c : convs_) {
      TensorT<T> pre = c(h);
      out.features.push_back(pre);
      h = leaky_relu(pre, T(kLeakySlope));
    }
    out.logit = head_(reshape(h, {h.dim(0), int(h.numel() / h.dim(0))}));
    return out;
  }

  TensorT<T> operator()(const TensorT<T>& x) const { return forward(x).logit; }

  void named(const std::string& prefix, NamedParams<T>& out) const {
    for (size_t i = 0; i < convs_.size(); ++i)
      convs_[i].named(prefix + ".conv" + std::to_string(i), out);
    head_.named(prefix + ".head", out);
  }

 private:
  std::vector<Conv2dLayer<T>> convs_;
  LinearLayer<T> head_;
};

// bilinear patch extraction for the component losses; per-sample boxes
template <class T>
std::vector<TensorT<T>> crop_components(const TensorT<T>& image,
                                        const std::vector<ComponentBoxes>& boxes, int out_size) {
  if (out_size < 4) throw std::invalid_argument("crop_components: out_size must be >= 4");
  if (int(boxes.size()) != image.dim(0))
    throw std::invalid_argument("crop_components: need boxes for every batch item");
  std::vector<BoxF> left, right, mouth;
  for (const auto& b : boxes) {
    if (!b.valid()) throw std::invalid_argument("crop_components: invalid component boxes");
    left.push_back(b.left_eye);
    right.push_back(b.right_eye);
    mouth.push_back(b.mouth);
  }
  return {bilinear_crop(image, left, out_size), bilinear_crop(image, right, out_size),
          bilinear_crop(image, mouth, out_size)};
}

// ---------------------------------------------------------------------------
// full restorer
// ---------------------------------------------------------------------------

struct RestorerConfig {
  UNetConfig unet;
  PriorConfig prior;
  std::vector<double> split_fraction{0.5, 0.5};  // rho per scale, coarsest first
};

template <class T>
struct RestorerOutput {
  TensorT<T> image;                   // unclamped restored output
  std::vector<TensorT<T>> pyramid;    // U-Net side outputs, coarsest first
};

// U-Net + frozen prior + per-scale CS-SFT. The modulated features feed the
// next prior stage, so the spatial conditioning acts coarse-to-fine.
template <class T>
class Restorer {
 public:
  Restorer() = default;
  Restorer(const RestorerConfig& cfg, Rng& rng)
      : cfg_(cfg), unet_(cfg.unet, rng), prior_(cfg.prior, rng) {
    if (int(cfg.split_fraction.size()) != cfg.unet.depth)
      throw std::invalid_argument("restorer: one split fraction per scale required");
    if (int(cfg.prior.widths.size()) != cfg.unet.depth)
      throw std::invalid_argument("restorer: prior scale count must match unet depth");
    for (int s = 0; s < cfg.unet.depth; ++s) {
      const int gan_ch = cfg.prior.widths[size_t(s)];
      const int cond_ch = cfg.unet.widths[size_t(cfg.unet.depth - 1 - s)];  // coarsest first
      cssft_.push_back(CSSFTLayer<T>(gan_ch, cond_ch, cfg.split_fraction[size_t(s)], rng));
    }
    out_conv_ = Conv2dLayer<T>(cfg.prior.widths.back(), cfg.unet.in_channels, 3, 1, rng);
  }

  const RestorerConfig& config() const { return cfg_; }
  UNet<T>& unet() { return unet_; }
  const UNet<T>& unet() const { return unet_; }
  PriorGenerator<T>& prior() { return prior_; }
  const PriorGenerator<T>& prior() const { return prior_; }
  std::vector<CSSFTLayer<T>>& cssft() { return cssft_; }

  // copy the pretrained prior image head into the trainable output conv
  void init_output_from_prior() {
    out_conv_.weight.data() = prior_.to_img().weight.data();
    out_conv_.bias.data() = prior_.to_img().bias.data();
  }

  RestorerOutput<T> forward(const TensorT<T>& x) const {
    UNetOutput<T> u = unet_.forward(x);
    TensorT<T> w = prior_.map_latent(u.latent);
    TensorT<T> feat = prior_.initial_feature(x.dim(0));
    for (int s = 0; s < int(cssft_.size()); ++s) {
      feat = prior_.run_stage(s, feat, w);
      feat = cssft_[size_t(s)](feat, u.f_spatial[size_t(s)]);
    }
    RestorerOutput<T> out;
    out.image = out_conv_(feat);
    out.pyramid = std::move(u.pyramid);
    return out;
  }

  // parameters updated while training the restorer (prior stays frozen)
  void named_trainable(NamedParams<T>& out) const {
    unet_.named("unet", out);
    for (size_t s = 0; s < cssft_.size(); ++s)
      cssft_[s].named("cssft" + std::to_string(s), out);
    out_conv_.named("out_conv", out);
  }

  void named_prior(NamedParams<T>& out) const { prior_.named("prior", out); }

  void named(NamedParams<T>& out) const {
    named_trainable(out);
    named_prior(out);
  }

  void freeze_prior() {
    NamedParams<T> prior_params;
    named_prior(prior_params);
    for (auto& [name, t] : prior_params) t.set_requires_grad(false);
  }

 private:
  RestorerConfig cfg_;
  UNet<T> unet_;
  PriorGenerator<T> prior_;
  std::vector<CSSFTLayer<T>> cssft_;
  Conv2dLayer<T> out_conv_;
};

// ---------------------------------------------------------------------------
// three-layer denoiser (feature extraction / mapping / reconstruction)
// ---------------------------------------------------------------------------

struct DenoiserConfig {
  int in_channels = 1;
  std::vector<int> widths{16, 16};
  std::vector<int> kernels{9, 5, 9};
};

// conv1 and conv3 are the wide feature-extraction and reconstruction
// layers; a global residual connection makes the stack predict the noise.
template <class T>
class Denoiser {
 public:
  Denoiser() = default;
  Denoiser(const DenoiserConfig& cfg, Rng& rng) : cfg_(cfg) {
    if (cfg.widths.size() != 2 || cfg.kernels.size() != 3)
      throw std::invalid_argument("denoiser: two widths and three kernels required");
    conv1_ = Conv2dLayer<T>(cfg.in_channels, cfg.widths[0], cfg.kernels[0], 1, rng);
    conv2_ = Conv2dLayer<T>(cfg.widths[0], cfg.widths[1], cfg.kernels[1], 1, rng);
    conv3_ = Conv2dLayer<T>(cfg.widths[1], cfg.in_channels, cfg.kernels[2], 1, rng);
  }

  const DenoiserConfig& config() const { return cfg_; }

  TensorT<T> forward(const TensorT<T>& x) const {
    TensorT<T> h = leaky_relu(conv1_(x), T(kLeakySlope));
    h = leaky_relu(conv2_(h), T(kLeakySlope));
    return add(x, conv3_(h));
  }

  void named(NamedParams<T>& out) const {
    conv1_.named("conv1", out);
    conv2_.named("conv2", out);
    conv3_.named("conv3", out);
  }

 private:
  DenoiserConfig cfg_;
  Conv2dLayer<T> conv1_, conv2_, conv3_;
};

// ---------------------------------------------------------------------------
// checkpoint bridging
// ---------------------------------------------------------------------------

template <class T, class Model>
NamedParams<T> model_params(const Model& m) {
  NamedParams<T> out;
  m.named(out);
  return out;
}

// copy checkpoint-style values into live parameters; names and shapes must
// match exactly
template <class T>
void load_named(NamedParams<T>& params,
                const std::function<const std::vector<float>*(const std::string&, const Shape&)>& lookup) {
  for (auto& [name, tensor] : params) {
    const std::vector<float>* src = lookup(name, tensor.shape());
    if (!src) throw std::runtime_error("checkpoint missing parameter '" + name + "'");
    if (int64_t(src->size()) != tensor.numel())
      throw std::runtime_error("checkpoint size mismatch for '" + name + "'");
    for (size_t i = 0; i < src->size(); ++i) tensor.data()[i] = T((*src)[i]);
  }
}

}  // namespace frt

#endif  // FRT_NN_HPP
