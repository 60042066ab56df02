#ifndef FRT_DEGRADE_HPP
#define FRT_DEGRADE_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "frt/image.hpp"
#include "frt/rng.hpp"

namespace frt {

// Parameters of the synthetic degradation chain
// blur(sigma) -> area downsample(scale) -> AWGN(noise, on the 0..255 scale)
// -> block-DCT compression(quality) -> optional per-channel jitter.
struct DegradationSpec {
  double sigma = 0.0;            // Gaussian blur std, pixels
  int scale = 1;                 // integer downsample factor r >= 1
  double noise = 0.0;            // AWGN std delta on the 0..255 scale
  int quality = 100;             // compression quality 1..100
  double jitter_brightness = 0;  // max additive per-channel offset
  double jitter_contrast = 0;    // max multiplicative per-channel deviation
  uint64_t seed = 0;

  void validate() const;
};

// Inclusive sampling ranges for random degradation specs.
struct DegradationRanges {
  double sigma_lo = 0.2, sigma_hi = 10.0;
  int scale_lo = 1, scale_hi = 8;
  double noise_lo = 0.0, noise_hi = 15.0;
  int quality_lo = 60, quality_hi = 100;
  double jitter_brightness = 0.0;
  double jitter_contrast = 0.0;
};

// Draws a spec from the ranges. The downsample factor is drawn uniformly
// from the factors in [scale_lo, scale_hi] that divide both image extents,
// since the area downsample is defined only for divisible sizes.
DegradationSpec sample_spec(const DegradationRanges& r, int h, int w, Rng& rng);

// Separable Gaussian blur, kernel radius ceil(3*sigma), weights normalized
// to sum 1, reflect padding. sigma < 0.05 is treated as identity.
Image gaussian_blur(const Image& img, double sigma);

// kernel weights used by gaussian_blur (exposed for tests)
std::vector<double> gaussian_kernel(double sigma);

// r x r block mean; requires H and W divisible by r.
Image downsample(const Image& img, int r);
// bilinear (align-corners-false) upsample by integer factor r
Image upsample(const Image& img, int r);

// adds N(0, (delta/255)^2) per pixel; output not clamped
Image add_awgn(const Image& img, double delta, Rng& rng);

// Compression round-trip: per channel, level shift to the signed 255 scale,
// 8x8 orthonormal DCT-II, quantization by the standard luminance table
// scaled with the IJG quality factor, rounding, dequantization, inverse
// DCT. Edge blocks are replicate-padded. No entropy coding (it is lossless
// and has no pixel effect). Output not clamped.
Image jpeg_like(const Image& img, int quality);

// quantization table for a quality level: Q'[i] = clamp((Q[i]*S+50)/100, 1, 255)
// with S = 5000/q for q < 50 else 200 - 2q
std::array<int, 64> quant_table(int quality);

// base luminance table (Annex K); exposed for tests
const std::array<int, 64>& base_luminance_table();

// 8x8 orthonormal DCT-II and its inverse on a single block (row-major)
void dct8x8(const double in[64], double out[64]);
void idct8x8(const double in[64], double out[64]);

// per-channel affine v' = a*v + b with a in [1-jc, 1+jc], b in [-jb, jb]
Image color_jitter(const Image& img, double jitter_brightness, double jitter_contrast, Rng& rng);

// Full chain at reduced size, clamped to [0,1] at the end.
Image degrade(const Image& img, const DegradationSpec& spec);
// Same, bilinearly re-upsampled back to the input size.
Image degrade_keep_size(const Image& img, const DegradationSpec& spec);

// standalone noising used by the denoising experiments: AWGN then clamp
Image add_noise_level(const Image& img, double delta, uint64_t seed);

}  // namespace frt

#endif  // FRT_DEGRADE_HPP
