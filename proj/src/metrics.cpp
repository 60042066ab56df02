#include "frt/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace frt {

double psnr(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("psnr: shape mismatch");
  double mse = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double d = double(a.data[i]) - double(b.data[i]);
    mse += d * d;
  }
  mse /= double(a.data.size());
  if (mse <= 0.0) return 99.0;
  return std::min(99.0, 10.0 * std::log10(1.0 / mse));
}

namespace {

constexpr int kWin = 11;

const std::vector<double>& ssim_window() {
  static const std::vector<double> win = [] {
    std::vector<double> w(kWin * kWin);
    const double sigma = 1.5;
    double sum = 0.0;
    for (int y = 0; y < kWin; ++y)
      for (int x = 0; x < kWin; ++x) {
        const double dy = y - (kWin - 1) / 2.0, dx = x - (kWin - 1) / 2.0;
        const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
        w[size_t(y * kWin + x)] = v;
        sum += v;
      }
    for (auto& v : w) v /= sum;
    return w;
  }();
  return win;
}

}  // namespace

double ssim(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("ssim: shape mismatch");
  if (a.h < kWin || a.w < kWin)
    throw std::invalid_argument("ssim: image smaller than the 11x11 window");
  const auto& win = ssim_window();
  const double c1 = 0.01 * 0.01;  // (K1*L)^2, L=1
  const double c2 = 0.03 * 0.03;
  double total = 0.0;
  int64_t count = 0;
  for (int ch = 0; ch < a.c; ++ch)
    for (int y = 0; y + kWin <= a.h; ++y)
      for (int x = 0; x + kWin <= a.w; ++x) {
        double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
        for (int wy = 0; wy < kWin; ++wy)
          for (int wx = 0; wx < kWin; ++wx) {
            const double wv = win[size_t(wy * kWin + wx)];
            const double va = a.at(ch, y + wy, x + wx);
            const double vb = b.at(ch, y + wy, x + wx);
            ma += wv * va;
            mb += wv * vb;
            saa += wv * va * va;
            sbb += wv * vb * vb;
            sab += wv * va * vb;
          }
        const double var_a = saa - ma * ma;
        const double var_b = sbb - mb * mb;
        const double cov = sab - ma * mb;
        const double num = (2 * ma * mb + c1) * (2 * cov + c2);
        const double den = (ma * ma + mb * mb + c1) * (var_a + var_b + c2);
        total += num / den;
        ++count;
      }
  return total / double(count);
}

MetricResult compare(const Image& a, const Image& b) { return {psnr(a, b), ssim(a, b)}; }

}  // namespace frt
