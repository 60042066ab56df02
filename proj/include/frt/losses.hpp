#ifndef FRT_LOSSES_HPP
#define FRT_LOSSES_HPP

#include <map>
#include <string>
#include <vector>

#include "frt/nn.hpp"
#include "frt/tensor.hpp"

namespace frt {

// weights of the individual objective terms
struct LossWeights {
  double l1 = 0.1;
  double perceptual = 1.0;
  double adversarial = 0.1;
  double local = 1.0;
  double feature_style = 200.0;
  double identity = 10.0;
  double pyramid = 1.0;

  void validate() const {
    for (double v : {l1, perceptual, adversarial, local, feature_style, identity, pyramid})
      if (!(v >= 0.0) || !std::isfinite(v))
        throw std::invalid_argument("loss weights must be finite and >= 0");
  }
};

// Seeded frozen conv pyramid standing in for a pretrained feature network.
// Four stride-2 stages; per-stage pre-activation maps feed the perceptual
// distance. The embedder variant appends global pooling and a unit-norm
// head for the identity distance.
template <class T>
class FrozenExtractor {
 public:
  FrozenExtractor() = default;
  FrozenExtractor(int in_channels, uint64_t seed, std::vector<int> widths = {8, 16, 32, 32}) {
    Rng rng(seed);
    int prev = in_channels;
    for (int wch : widths) {
      convs_.push_back(Conv2dLayer<T>(prev, wch, 3, 2, rng));
      prev = wch;
    }
    for (auto& c : convs_) {
      c.weight.set_requires_grad(false);
      c.bias.set_requires_grad(false);
      // non-zero bias so features are not centered at the origin
      for (auto& b : c.bias.data()) b = T(rng.normal()) * T(0.1);
    }
  }

  // pre-activation feature maps, one per stage
  std::vector<TensorT<T>> features(const TensorT<T>& x) const {
    std::vector<TensorT<T>> feats;
    TensorT<T> h = x;
    for (const auto& c : convs_) {
      TensorT<T> pre = c(h);
      feats.push_back(pre);
      h = leaky_relu(pre, T(kLeakySlope));
    }
    return feats;
  }

  // unit-normalized embedding from the deepest stage
  TensorT<T> embed(const TensorT<T>& x) const {
    TensorT<T> h = x;
    for (const auto& c : convs_) h = leaky_relu(c(h), T(kLeakySlope));
    return unit_normalize(spatial_mean(h));
  }

 private:
  std::vector<Conv2dLayer<T>> convs_;
};

// ---------------------------------------------------------------------------
// individual terms (all mean-reduced)
// ---------------------------------------------------------------------------

template <class T>
TensorT<T> l1_loss(const TensorT<T>& a, const TensorT<T>& b) {
  detail::check_same_shape(a, b, "l1_loss");
  return mean(vabs(sub(a, b)));
}

template <class T>
TensorT<T> mse_loss(const TensorT<T>& a, const TensorT<T>& b) {
  detail::check_same_shape(a, b, "mse_loss");
  TensorT<T> d = sub(a, b);
  return mean(mul(d, d));
}

// stage-summed L1 between pre-activation extractor features
template <class T>
TensorT<T> perceptual_loss(const TensorT<T>& a, const TensorT<T>& b,
                           const FrozenExtractor<T>& phi) {
  auto fa = phi.features(a);
  auto fb = phi.features(b);
  TensorT<T> total = TensorT<T>::scalar(T(0));
  for (size_t i = 0; i < fa.size(); ++i) total = add(total, l1_loss(fa[i], fb[i]));
  return total;
}

template <class T>
struct AdvLosses {
  TensorT<T> g_loss;  // weighted generator objective
  TensorT<T> d_loss;  // unweighted discriminator objective
};

// Non-saturating logistic objective:
//   g = lambda_adv * mean softplus(-D(fake))
//   d = mean softplus(D(fake_detached)) + mean softplus(-D(real))
template <class T>
AdvLosses<T> adversarial_losses(const ConvDiscriminator<T>& d, const TensorT<T>& fake,
                                const TensorT<T>& real, double lambda_adv) {
  AdvLosses<T> out;
  out.g_loss = affine(mean(softplus(affine(d(fake), T(-1)))), T(lambda_adv));
  TensorT<T> fake_detached = fake.detach();
  out.d_loss = add(mean(softplus(d(fake_detached))),
                   mean(softplus(affine(d(real), T(-1)))));
  return out;
}

// Per-region discriminative + feature-style term:
//   sum_ROI lambda_local * mean log(1 - sigmoid(D(fake_patch)))
//         + lambda_fs * sum_layers mean |Gram(psi(fake)) - Gram(psi(real))|
// The log argument is clamped at 1e-8.
template <class T>
TensorT<T> component_loss(const std::vector<ConvDiscriminator<T>>& rois,
                          const std::vector<TensorT<T>>& fake_patches,
                          const std::vector<TensorT<T>>& real_patches, double lambda_local,
                          double lambda_fs) {
  if (rois.size() != fake_patches.size() || rois.size() != real_patches.size())
    throw std::invalid_argument("component_loss: discriminator for every region required");
  TensorT<T> total = TensorT<T>::scalar(T(0));
  for (size_t r = 0; r < rois.size(); ++r) {
    auto fake_out = rois[r].forward(fake_patches[r]);
    auto real_out = rois[r].forward(real_patches[r]);
    TensorT<T> one_minus = affine(sigmoid(fake_out.logit), T(-1), T(1));
    total = add(total, affine(mean(vlog(one_minus, T(1e-8))), T(lambda_local)));
    TensorT<T> style = TensorT<T>::scalar(T(0));
    for (size_t l = 0; l < fake_out.features.size(); ++l)
      style = add(style, l1_loss(gram(fake_out.features[l]), gram(real_out.features[l])));
    total = add(total, affine(style, T(lambda_fs)));
  }
  return total;
}

template <class T>
TensorT<T> identity_loss(const FrozenExtractor<T>& eta, const TensorT<T>& a, const TensorT<T>& b,
                         double lambda_id) {
  return affine(l1_loss(eta.embed(a), eta.embed(b)), T(lambda_id));
}

// Per-scale L1 between decoder side outputs (coarsest first) and the area
// pyramid of the ground truth. Returns exact zero after the cutoff.
template <class T>
TensorT<T> pyramid_loss(const std::vector<TensorT<T>>& outputs, const TensorT<T>& target,
                        double lambda_pyr, int64_t iteration, int64_t cutoff) {
  if (iteration >= cutoff) return TensorT<T>::scalar(T(0));
  TensorT<T> total = TensorT<T>::scalar(T(0));
  const int scales = int(outputs.size());
  for (int i = 0; i < scales; ++i) {
    const int factor = 1 << (scales - 1 - i);  // coarsest first
    TensorT<T> ref = factor == 1 ? target : resample2d(target, Resample::kArea, factor);
    total = add(total, l1_loss(outputs[size_t(i)], ref));
  }
  return affine(total, T(lambda_pyr));
}

// Weighted sum of the generator-side terms plus the raw per-term breakdown
// for logging.
template <class T>
struct TotalLoss {
  TensorT<T> value;
  std::map<std::string, double> breakdown;  // raw (unweighted) term values
};

template <class T>
TotalLoss<T> total_loss(const TensorT<T>& l1, const TensorT<T>& perceptual,
                        const TensorT<T>& g_adv_weighted, const TensorT<T>& comp_weighted,
                        const TensorT<T>& id_weighted, const TensorT<T>& pyr_weighted,
                        const LossWeights& w) {
  TotalLoss<T> out;
  TensorT<T> rec = add(affine(l1, T(w.l1)), affine(perceptual, T(w.perceptual)));
  out.value = add(add(add(rec, g_adv_weighted), comp_weighted), add(id_weighted, pyr_weighted));
  out.breakdown["l1"] = double(l1.item());
  out.breakdown["perceptual"] = double(perceptual.item());
  out.breakdown["adversarial"] = double(g_adv_weighted.item());
  out.breakdown["component"] = double(comp_weighted.item());
  out.breakdown["identity"] = double(id_weighted.item());
  out.breakdown["pyramid"] = double(pyr_weighted.item());
  out.breakdown["total"] = double(out.value.item());
  return out;
}

}  // namespace frt

#endif  // FRT_LOSSES_HPP
