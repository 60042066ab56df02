#include <cmath>
#include <numeric>

#include "doctest.h"
#include "frt/degrade.hpp"
#include "frt/metrics.hpp"
#include "frt/rng.hpp"

using namespace frt;

namespace {

Image gradient_image(int size) {
  Image img(size, size, 1);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x)
      img.at(0, y, x) = float(x + y) / float(2 * size - 2);
  return img;
}

Image textured_image(int size, uint64_t seed) {
  Rng rng(seed);
  Image img = gradient_image(size);
  for (auto& v : img.data) v = std::min(1.f, std::max(0.f, v + float(rng.uniform(-0.2, 0.2))));
  return img;
}

}  // namespace

TEST_SUITE("degrade") {

TEST_CASE("gaussian blur basics") {
  Image img = textured_image(16, 3);
  Image same = gaussian_blur(img, 0.0);
  CHECK(same.data == img.data);

  for (double sigma : {0.3, 1.0, 2.5}) {
    auto k = gaussian_kernel(sigma);
    CHECK(int(k.size()) == 2 * int(std::ceil(3 * sigma)) + 1);
    CHECK(std::accumulate(k.begin(), k.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-6));
  }

  // unit impulse at the center reproduces the separable kernel values
  Image impulse(15, 15, 1, 0.f);
  impulse.at(0, 7, 7) = 1.f;
  Image blurred = gaussian_blur(impulse, 1.0);
  auto k = gaussian_kernel(1.0);  // radius 3, 7 taps
  REQUIRE(k.size() == 7);
  for (int dy = -3; dy <= 3; ++dy)
    for (int dx = -3; dx <= 3; ++dx)
      CHECK(blurred.at(0, 7 + dy, 7 + dx) ==
            doctest::Approx(k[size_t(dy + 3)] * k[size_t(dx + 3)]).epsilon(1e-5));
}

TEST_CASE("down/up sampling") {
  Image img = textured_image(16, 5);
  CHECK(downsample(img, 1).data == img.data);
  CHECK(upsample(img, 1).data == img.data);

  Image constant(8, 8, 1, 0.37f);
  Image down = downsample(constant, 2);
  for (float v : down.data) CHECK(v == doctest::Approx(0.37f));
  Image up = upsample(down, 2);
  for (float v : up.data) CHECK(v == doctest::Approx(0.37f));

  // checkerboard with period 2 averages to exactly 0.5
  Image checker(8, 8, 1);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) checker.at(0, y, x) = float((x + y) % 2);
  Image half = downsample(checker, 2);
  for (float v : half.data) CHECK(v == doctest::Approx(0.5f));

  CHECK_THROWS_AS(downsample(textured_image(10, 1), 4), std::invalid_argument);
}

TEST_CASE("awgn statistics and determinism") {
  Image img(1000, 1000, 1, 0.5f);
  {
    Rng rng(7);
    CHECK(add_awgn(img, 0.0, rng).data == img.data);
  }
  Rng rng_a(42), rng_b(42);
  Image na = add_awgn(img, 15.0, rng_a);
  Image nb = add_awgn(img, 15.0, rng_b);
  CHECK(na.data == nb.data);

  // empirical std over 1e6 samples within 1% of delta/255
  double mean = 0.0;
  for (float v : na.data) mean += v - 0.5;
  mean /= double(na.data.size());
  double var = 0.0;
  for (float v : na.data) var += (v - 0.5 - mean) * (v - 0.5 - mean);
  var /= double(na.data.size() - 1);
  const double want = 15.0 / 255.0;
  CHECK(std::sqrt(var) == doctest::Approx(want).epsilon(0.01));
}

TEST_CASE("quantization tables") {
  // q=100: scale factor 0, every entry clamps up to 1
  auto q100 = quant_table(100);
  for (int i = 0; i < 64; ++i)
    if (base_luminance_table()[size_t(i)] <= 50) CHECK(q100[size_t(i)] == 1);
  // q=50 reproduces the base table
  auto q50 = quant_table(50);
  for (int i = 0; i < 64; ++i) CHECK(q50[size_t(i)] == base_luminance_table()[size_t(i)]);
  CHECK_THROWS_AS(quant_table(0), std::invalid_argument);
  CHECK_THROWS_AS(quant_table(101), std::invalid_argument);
}

TEST_CASE("dct orthonormality") {
  Rng rng(9);
  double block[64], coeff[64], back[64];
  for (auto& v : block) v = rng.uniform(-128.0, 127.0);
  dct8x8(block, coeff);
  idct8x8(coeff, back);
  for (int i = 0; i < 64; ++i) CHECK(back[i] == doctest::Approx(block[i]).epsilon(1e-10));
  // energy preserved (orthonormal transform)
  double e_in = 0, e_out = 0;
  for (int i = 0; i < 64; ++i) {
    e_in += block[i] * block[i];
    e_out += coeff[i] * coeff[i];
  }
  CHECK(e_in == doctest::Approx(e_out).epsilon(1e-10));
}

TEST_CASE("jpeg_like constant image matches the single-coefficient hand computation") {
  for (int q : {10, 50, 90}) {
    const float c = 0.3f;
    Image img(16, 16, 1, c);
    Image out = jpeg_like(img, q);
    // DC-only block: F00 = 8*v, quantize, invert, unshift
    const double v = double(c) * 255.0 - 128.0;
    const int q00 = quant_table(q)[0];
    const double rec = std::round(8.0 * v / q00) * q00 / 8.0;
    const float expect = float((rec + 128.0) / 255.0);
    for (float p : out.data) CHECK(p == doctest::Approx(expect).epsilon(1e-6));
  }
}

TEST_CASE("jpeg_like quality behavior") {
  Image img = gradient_image(32);
  CHECK(psnr(clamp01(jpeg_like(img, 100)), img) > 45.0);

  Image tex = textured_image(32, 11);
  const double p10 = psnr(clamp01(jpeg_like(tex, 10)), tex);
  const double p50 = psnr(clamp01(jpeg_like(tex, 50)), tex);
  const double p90 = psnr(clamp01(jpeg_like(tex, 90)), tex);
  CHECK(p10 < p50);
  CHECK(p50 < p90);
}

TEST_CASE("jpeg_like handles non-multiple-of-8 extents") {
  Image img = textured_image(20, 13);
  Image out = jpeg_like(img, 75);
  CHECK(out.h == 20);
  CHECK(out.w == 20);
  for (float v : out.data) CHECK(std::isfinite(v));
}

TEST_CASE("color jitter") {
  Image img = textured_image(8, 2);
  Rng rng(1);
  CHECK(color_jitter(img, 0.0, 0.0, rng).data == img.data);
  Rng ra(5), rb(5);
  CHECK(color_jitter(img, 0.1, 0.2, ra).data == color_jitter(img, 0.1, 0.2, rb).data);
}

TEST_CASE("degrade composition") {
  Image img = gradient_image(32);
  DegradationSpec identity_spec;  // sigma 0, r 1, delta 0, q 100
  Image out = degrade(img, identity_spec);
  CHECK(psnr(out, img) > 45.0);  // only codec rounding

  DegradationSpec spec{2.0, 2, 10.0, 70, 0.0, 0.0, 1234};
  Image a = degrade(img, spec);
  Image b = degrade(img, spec);
  CHECK(a.data == b.data);
  CHECK(a.h == 16);
  Image kept = degrade_keep_size(img, spec);
  CHECK(kept.h == 32);
  for (float v : kept.data) {
    CHECK(v >= 0.f);
    CHECK(v <= 1.f);
  }

  DegradationSpec bad;
  bad.quality = 0;
  CHECK_THROWS_AS(degrade(img, bad), std::invalid_argument);
}

TEST_CASE("spec sampling respects ranges and divisibility") {
  DegradationRanges ranges;  // defaults match the training sampling ranges
  Rng rng(77);
  for (int i = 0; i < 200; ++i) {
    DegradationSpec s = sample_spec(ranges, 32, 32, rng);
    CHECK(s.sigma >= 0.2);
    CHECK(s.sigma <= 10.0);
    CHECK(s.scale >= 1);
    CHECK(s.scale <= 8);
    CHECK(32 % s.scale == 0);
    CHECK(s.noise >= 0.0);
    CHECK(s.noise <= 15.0);
    CHECK(s.quality >= 60);
    CHECK(s.quality <= 100);
  }
}

TEST_CASE("add_noise_level for the denoising experiments") {
  Image img(64, 64, 1, 0.5f);
  CHECK(add_noise_level(img, 0.0, 9).data == img.data);

  // analytic PSNR of AWGN on mid-gray: 10*log10(1/(delta/255)^2) = 22.1 dB at N20
  Image big(256, 256, 1, 0.5f);
  const double p20 = psnr(add_noise_level(big, 20.0, 3), big);
  const double expect = 10.0 * std::log10(1.0 / ((20.0 / 255.0) * (20.0 / 255.0)));
  CHECK(p20 == doctest::Approx(expect).epsilon(0.015));  // within 0.3 dB
  const double p60 = psnr(add_noise_level(big, 60.0, 3), big);
  CHECK(p60 < p20);
}

}  // TEST_SUITE
