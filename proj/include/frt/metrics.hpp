#ifndef FRT_METRICS_HPP
#define FRT_METRICS_HPP

#include "frt/image.hpp"

namespace frt {

struct MetricResult {
  double psnr_db = 0.0;
  double ssim = 0.0;
};

// 10*log10(1/MSE) for data in [0,1]; identical images cap at 99 dB.
double psnr(const Image& a, const Image& b);

// Mean local SSIM: 11x11 Gaussian window (sigma 1.5), K1=0.01, K2=0.03,
// L=1, valid-window positions, channels averaged. Requires min(H,W) >= 11.
double ssim(const Image& a, const Image& b);

MetricResult compare(const Image& a, const Image& b);

}  // namespace frt

#endif  // FRT_METRICS_HPP
