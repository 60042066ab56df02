#include <cmath>

#include "doctest.h"
#include "frt/degrade.hpp"
#include "frt/metrics.hpp"
#include "frt/rng.hpp"

using namespace frt;

namespace {

Image noisy_base(int size, uint64_t seed) {
  Rng rng(seed);
  Image img(size, size, 1);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x)
      img.at(0, y, x) = float(0.5 + 0.3 * std::sin(x * 0.7) * std::cos(y * 0.5) +
                              0.1 * rng.uniform(-1, 1));
  return clamp01(img);
}

// independent windowed SSIM oracle in double precision, plain loops
double ssim_reference(const Image& a, const Image& b) {
  const int win = 11;
  const double sigma = 1.5, c1 = 1e-4, c2 = 9e-4;
  std::vector<double> w(win * win);
  double wsum = 0;
  for (int y = 0; y < win; ++y)
    for (int x = 0; x < win; ++x) {
      double dy = y - 5.0, dx = x - 5.0;
      w[size_t(y * win + x)] = std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
      wsum += w[size_t(y * win + x)];
    }
  for (auto& v : w) v /= wsum;
  double total = 0;
  int count = 0;
  for (int ch = 0; ch < a.c; ++ch)
    for (int y = 0; y + win <= a.h; ++y)
      for (int x = 0; x + win <= a.w; ++x) {
        double ma = 0, mb = 0, vaa = 0, vbb = 0, vab = 0;
        for (int i = 0; i < win; ++i)
          for (int j = 0; j < win; ++j) {
            double wa = a.at(ch, y + i, x + j), wb = b.at(ch, y + i, x + j);
            ma += w[size_t(i * win + j)] * wa;
            mb += w[size_t(i * win + j)] * wb;
            vaa += w[size_t(i * win + j)] * wa * wa;
            vbb += w[size_t(i * win + j)] * wb * wb;
            vab += w[size_t(i * win + j)] * wa * wb;
          }
        vaa -= ma * ma;
        vbb -= mb * mb;
        vab -= ma * mb;
        total += ((2 * ma * mb + c1) * (2 * vab + c2)) /
                 ((ma * ma + mb * mb + c1) * (vaa + vbb + c2));
        ++count;
      }
  return total / count;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("psnr") {
  Image a = noisy_base(32, 1);
  CHECK(psnr(a, a) == doctest::Approx(99.0));  // identical -> cap

  // uniform offset of 0.1: MSE = 0.01 -> exactly 20 dB
  Image lo(16, 16, 1, 0.2f), hi(16, 16, 1, 0.3f);
  CHECK(psnr(lo, hi) == doctest::Approx(20.0).epsilon(1e-4));

  Image b = noisy_base(32, 2);
  CHECK(psnr(a, b) == doctest::Approx(psnr(b, a)));
  CHECK_THROWS_AS(psnr(a, Image(16, 16, 1)), std::invalid_argument);
}

TEST_CASE("psnr decreases with noise level") {
  Image base = noisy_base(64, 3);
  double prev = 1e9;
  for (double delta : {5.0, 10.0, 20.0}) {
    double p = psnr(add_noise_level(base, delta, 900), base);
    CHECK(p < prev);
    prev = p;
  }
}

TEST_CASE("ssim") {
  Image a = noisy_base(32, 4);
  CHECK(ssim(a, a) == doctest::Approx(1.0));

  Image b = noisy_base(32, 5);
  CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-9));
  CHECK(ssim(a, b) == doctest::Approx(ssim_reference(a, b)).epsilon(1e-9));

  CHECK_THROWS_AS(ssim(Image(8, 8, 1), Image(8, 8, 1)), std::invalid_argument);
}

TEST_CASE("ssim of an inverted binary image is negative") {
  Rng rng(6);
  Image a(32, 32, 1);
  for (auto& v : a.data) v = rng.uniform() < 0.5 ? 0.f : 1.f;
  Image b(32, 32, 1);
  for (size_t i = 0; i < a.data.size(); ++i) b.data[i] = 1.f - a.data[i];
  const double s = ssim(a, b);
  CHECK(s < 0.0);
  CHECK(s == doctest::Approx(ssim_reference(a, b)).epsilon(1e-9));
}

TEST_CASE("luminance shift penalized less than equal-MSE noise") {
  Image base = noisy_base(32, 7);
  const float c = 0.05f;
  Image shifted = base;
  for (auto& v : shifted.data) v += c;  // constant shift, MSE = c^2

  Rng rng(8);
  Image noised = base;
  for (auto& v : noised.data) v += float(rng.normal(0.0, c));  // same MSE in expectation
  CHECK(ssim(base, shifted) > ssim(base, noised));
}

}  // TEST_SUITE
