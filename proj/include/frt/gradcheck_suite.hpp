#ifndef FRT_GRADCHECK_SUITE_HPP
#define FRT_GRADCHECK_SUITE_HPP

#include <functional>
#include <string>
#include <vector>

#include "frt/losses.hpp"
#include "frt/nn.hpp"
#include "frt/tensor.hpp"

namespace frt {

// 64-bit finite-difference verification of every layer and loss at small
// sizes. Shared between `gradcheck` on the command line and the acceptance
// suite.

struct SuiteCheck {
  std::string name;
  std::function<GradCheckReport()> run;
};

namespace gradcheck_detail {

template <class Layer>
void collect(const Layer& layer, const std::string& prefix, std::vector<Tensor64>& out) {
  NamedParams<double> named;
  layer.named(prefix, named);
  for (auto& [name, t] : named) {
    t.set_name(name);
    out.push_back(t);
  }
}

}  // namespace gradcheck_detail

inline std::vector<SuiteCheck> gradcheck_suite() {
  using gradcheck_detail::collect;
  std::vector<SuiteCheck> checks;

  checks.push_back({"conv2d", [] {
    Rng rng(101);
    auto x = Tensor64::randn({1, 2, 6, 6}, rng, 0.5).set_name("x");
    Conv2dLayer<double> conv(2, 3, 3, 1, rng);
    std::vector<Tensor64> params{x};
    collect(conv, "conv", params);
    return gradcheck([&] { return mean(vabs(conv(x))); }, params);
  }});

  checks.push_back({"conv2d_stride2", [] {
    Rng rng(102);
    auto x = Tensor64::randn({1, 2, 6, 6}, rng, 0.5).set_name("x");
    Conv2dLayer<double> conv(2, 2, 3, 2, rng);
    std::vector<Tensor64> params{x};
    collect(conv, "conv", params);
    return gradcheck([&] { return sum(mul(conv(x), conv(x))); }, params);
  }});

  checks.push_back({"linear", [] {
    Rng rng(103);
    auto x = Tensor64::randn({2, 5}, rng, 0.5).set_name("x");
    LinearLayer<double> lin(5, 3, rng);
    std::vector<Tensor64> params{x};
    collect(lin, "linear", params);
    return gradcheck([&] { return mean(softplus(lin(x))); }, params);
  }});

  checks.push_back({"sft", [] {
    Rng rng(104);
    auto f = Tensor64::randn({1, 3, 4, 4}, rng, 0.5).set_name("f");
    auto a = Tensor64::randn({1, 3, 4, 4}, rng, 0.5).set_name("alpha");
    auto b = Tensor64::randn({1, 3, 4, 4}, rng, 0.5).set_name("beta");
    return gradcheck([&] { return mean(vabs(sft(f, a, b))); }, {f, a, b});
  }});

  checks.push_back({"cs_sft", [] {
    Rng rng(105);
    auto f = Tensor64::randn({1, 4, 4, 4}, rng, 0.5).set_name("f_gan");
    auto cond = Tensor64::randn({1, 3, 4, 4}, rng, 0.5).set_name("f_spatial");
    CSSFTLayer<double> layer(4, 3, 0.5, rng);
    std::vector<Tensor64> params{f, cond};
    collect(layer, "cssft", params);
    for (auto& p : params)
      if (p.name() == "cssft.alpha.weight" || p.name() == "cssft.beta.weight") {
        Rng wrng(99);
        for (auto& v : p.data()) v = wrng.normal() * 0.3;
      }
    return gradcheck([&] { return mean(vabs(layer(f, cond))); }, params);
  }});

  checks.push_back({"resample_nearest_up", [] {
    Rng rng(106);
    auto x = Tensor64::randn({1, 2, 3, 3}, rng, 0.5).set_name("x");
    return gradcheck([&] {
      auto u = resample2d(x, Resample::kNearest, 2);
      return mean(mul(u, u));
    }, {x});
  }});

  checks.push_back({"resample_bilinear_up", [] {
    Rng rng(107);
    auto x = Tensor64::randn({1, 2, 3, 3}, rng, 0.5).set_name("x");
    return gradcheck([&] {
      auto u = resample2d(x, Resample::kBilinear, 2);
      return mean(mul(u, u));
    }, {x});
  }});

  checks.push_back({"resample_area_down", [] {
    Rng rng(108);
    auto x = Tensor64::randn({1, 2, 4, 4}, rng, 0.5).set_name("x");
    return gradcheck([&] {
      auto d = resample2d(x, Resample::kArea, 2);
      return mean(mul(d, d));
    }, {x});
  }});

  checks.push_back({"bilinear_crop", [] {
    Rng rng(109);
    auto x = Tensor64::randn({1, 1, 8, 8}, rng, 0.5).set_name("x");
    std::vector<BoxF> boxes{{0.15f, 0.1f, 0.8f, 0.75f}};
    return gradcheck([&] {
      auto p = bilinear_crop(x, boxes, 4);
      return mean(mul(p, p));
    }, {x});
  }});

  checks.push_back({"gram", [] {
    Rng rng(110);
    auto f = Tensor64::randn({1, 3, 4, 4}, rng, 0.5).set_name("f");
    return gradcheck([&] { return mean(vabs(gram(f))); }, {f});
  }});

  checks.push_back({"unet_1stage", [] {
    Rng rng(111);
    UNetConfig cfg;
    cfg.image_size = 8;
    cfg.depth = 1;
    cfg.widths = {3};
    cfg.latent_width = 4;
    UNet<double> unet(cfg, rng);
    auto x = Tensor64::randn({1, 1, 8, 8}, rng, 0.5).set_name("x");
    std::vector<Tensor64> params{x};
    collect(unet, "unet", params);
    return gradcheck([&] {
      auto out = unet.forward(x);
      return add(mean(vabs(out.latent)),
                 add(mean(vabs(out.f_spatial[0])), mean(vabs(out.pyramid[0]))));
    }, params);
  }});

  checks.push_back({"prior_generator", [] {
    Rng rng(112);
    PriorConfig cfg;
    cfg.image_size = 8;
    cfg.latent_width = 4;
    cfg.w_dim = 4;
    cfg.mlp_layers = 2;
    cfg.base_channels = 3;
    cfg.base_size = 2;
    cfg.widths = {3, 2};
    PriorGenerator<double> gen(cfg, rng);
    auto latent = Tensor64::randn({1, 4}, rng, 0.5).set_name("latent");
    std::vector<Tensor64> params{latent};
    collect(gen, "prior", params);
    return gradcheck([&] {
      auto feats = gen.prior_features(gen.map_latent(latent));
      Tensor64 loss = TensorT<double>::scalar(0.0);
      for (auto& f : feats) loss = add(loss, mean(vabs(f)));
      return loss;
    }, params);
  }});

  checks.push_back({"discriminator", [] {
    Rng rng(113);
    ConvDiscriminator<double> d(1, 8, {3, 4}, rng);
    auto x = Tensor64::randn({2, 1, 8, 8}, rng, 0.5).set_name("x");
    std::vector<Tensor64> params{x};
    collect(d, "d", params);
    return gradcheck([&] { return mean(softplus(d(x))); }, params);
  }});

  checks.push_back({"loss_l1", [] {
    Rng rng(114);
    auto a = Tensor64::randn({1, 1, 4, 4}, rng, 0.5).set_name("a");
    auto b = Tensor64::randn({1, 1, 4, 4}, rng, 0.5).set_name("b");
    return gradcheck([&] { return l1_loss(a, b); }, {a, b});
  }});

  checks.push_back({"loss_mse", [] {
    Rng rng(115);
    auto a = Tensor64::randn({1, 1, 4, 4}, rng, 0.5).set_name("a");
    auto b = Tensor64::randn({1, 1, 4, 4}, rng, 0.5).set_name("b");
    return gradcheck([&] { return mse_loss(a, b); }, {a, b});
  }});

  checks.push_back({"loss_perceptual", [] {
    Rng rng(116);
    FrozenExtractor<double> phi(1, 4242, {3, 4});
    auto a = Tensor64::randn({1, 1, 8, 8}, rng, 0.5).set_name("a");
    auto b = Tensor64::randn({1, 1, 8, 8}, rng, 0.5).set_name("b");
    return gradcheck([&] { return perceptual_loss(a, b, phi); }, {a, b});
  }});

  checks.push_back({"loss_adversarial_g", [] {
    Rng rng(117);
    ConvDiscriminator<double> d(1, 8, {3, 4}, rng);
    auto fake = Tensor64::randn({1, 1, 8, 8}, rng, 0.5).set_name("fake");
    auto real = Tensor64::randn({1, 1, 8, 8}, rng, 0.5).set_name("real");
    return gradcheck([&] { return adversarial_losses(d, fake, real, 0.1).g_loss; }, {fake});
  }});

  checks.push_back({"loss_adversarial_d", [] {
    Rng rng(118);
    ConvDiscriminator<double> d(1, 8, {3, 4}, rng);
    auto fake = Tensor64::randn({1, 1, 8, 8}, rng, 0.5).set_name("fake");
    auto real = Tensor64::randn({1, 1, 8, 8}, rng, 0.5).set_name("real");
    std::vector<Tensor64> params;
    collect(d, "d", params);
    return gradcheck([&] { return adversarial_losses(d, fake, real, 0.1).d_loss; }, params);
  }});

  checks.push_back({"loss_component", [] {
    Rng rng(119);
    std::vector<ConvDiscriminator<double>> rois;
    for (int i = 0; i < 3; ++i) rois.emplace_back(1, 4, std::vector<int>{3}, rng);
    auto fake = Tensor64::randn({1, 1, 8, 8}, rng, 0.3).set_name("fake");
    auto real = Tensor64::randn({1, 1, 8, 8}, rng, 0.3).set_name("real");
    std::vector<ComponentBoxes> boxes{{{0.1f, 0.2f, 0.4f, 0.45f},
                                       {0.6f, 0.2f, 0.9f, 0.45f},
                                       {0.3f, 0.6f, 0.7f, 0.85f}}};
    return gradcheck([&] {
      auto fp = crop_components(fake, boxes, 4);
      auto rp = crop_components(real, boxes, 4);
      return component_loss(rois, fp, rp, 1.0, 200.0);
    }, {fake});
  }});

  checks.push_back({"loss_identity", [] {
    Rng rng(120);
    FrozenExtractor<double> eta(1, 777, {3, 4});
    auto a = Tensor64::randn({1, 1, 8, 8}, rng, 0.5).set_name("a");
    auto b = Tensor64::randn({1, 1, 8, 8}, rng, 0.5).set_name("b");
    return gradcheck([&] { return identity_loss(eta, a, b, 10.0); }, {a, b});
  }});

  checks.push_back({"loss_pyramid", [] {
    Rng rng(121);
    auto p0 = Tensor64::randn({1, 1, 4, 4}, rng, 0.5).set_name("p0");
    auto p1 = Tensor64::randn({1, 1, 8, 8}, rng, 0.5).set_name("p1");
    auto y = Tensor64::randn({1, 1, 8, 8}, rng, 0.5).set_name("y");
    return gradcheck([&] {
      return pyramid_loss(std::vector<Tensor64>{p0, p1}, y, 1.0, 0, 100);
    }, {p0, p1, y});
  }});

  checks.push_back({"restorer_tiny", [] {
    Rng rng(122);
    RestorerConfig cfg;
    cfg.unet.image_size = 8;
    cfg.unet.depth = 1;
    cfg.unet.widths = {3};
    cfg.unet.latent_width = 4;
    cfg.prior.image_size = 8;
    cfg.prior.latent_width = 4;
    cfg.prior.w_dim = 4;
    cfg.prior.mlp_layers = 1;
    cfg.prior.base_channels = 3;
    cfg.prior.base_size = 4;
    cfg.prior.widths = {3};
    cfg.split_fraction = {0.5};
    Restorer<double> model(cfg, rng);
    auto x = Tensor64::randn({1, 1, 8, 8}, rng, 0.3).set_name("x");
    std::vector<Tensor64> params{x};
    NamedParams<double> named;
    model.named(named);
    for (auto& [name, t] : named) {
      t.set_name(name);
      params.push_back(t);
    }
    return gradcheck([&] { return mean(vabs(model.forward(x).image)); }, params);
  }});

  checks.push_back({"denoiser3", [] {
    Rng rng(123);
    DenoiserConfig cfg;
    cfg.widths = {3, 3};
    cfg.kernels = {5, 3, 5};
    Denoiser<double> model(cfg, rng);
    auto x = Tensor64::randn({1, 1, 8, 8}, rng, 0.3).set_name("x");
    std::vector<Tensor64> params{x};
    NamedParams<double> named;
    model.named(named);
    for (auto& [name, t] : named) {
      t.set_name(name);
      params.push_back(t);
    }
    return gradcheck([&] { return mean(vabs(model.forward(x))); }, params);
  }});

  return checks;
}

}  // namespace frt

#endif  // FRT_GRADCHECK_SUITE_HPP
