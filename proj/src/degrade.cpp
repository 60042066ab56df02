#include "frt/degrade.hpp"

#include <cmath>
#include <stdexcept>

namespace frt {

void DegradationSpec::validate() const {
  if (sigma < 0) throw std::invalid_argument("degradation: sigma must be >= 0");
  if (scale < 1) throw std::invalid_argument("degradation: scale must be >= 1");
  if (noise < 0) throw std::invalid_argument("degradation: noise must be >= 0");
  if (quality < 1 || quality > 100)
    throw std::invalid_argument("degradation: quality must be in [1,100]");
  if (jitter_brightness < 0 || jitter_contrast < 0)
    throw std::invalid_argument("degradation: jitter bounds must be >= 0");
}

DegradationSpec sample_spec(const DegradationRanges& r, int h, int w, Rng& rng) {
  std::vector<int> factors;
  for (int f = r.scale_lo; f <= r.scale_hi; ++f)
    if (h % f == 0 && w % f == 0) factors.push_back(f);
  if (factors.empty()) throw std::invalid_argument("sample_spec: no valid downsample factor");
  DegradationSpec s;
  s.sigma = rng.uniform(r.sigma_lo, r.sigma_hi);
  s.scale = factors[size_t(rng.uniform_int(0, int64_t(factors.size()) - 1))];
  s.noise = rng.uniform(r.noise_lo, r.noise_hi);
  s.quality = int(rng.uniform_int(r.quality_lo, r.quality_hi));
  s.jitter_brightness = r.jitter_brightness;
  s.jitter_contrast = r.jitter_contrast;
  s.seed = rng.next_u64();
  return s;
}

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = int(std::ceil(3.0 * sigma));
  std::vector<double> k(size_t(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    k[size_t(i + radius)] = v;
    sum += v;
  }
  for (auto& v : k) v /= sum;
  return k;
}

namespace {

inline int reflect(int i, int n) {
  // reflect without repeating the edge sample: -1 -> 1, n -> n-2
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return i;
}

}  // namespace

Image gaussian_blur(const Image& img, double sigma) {
  if (sigma < 0) throw std::invalid_argument("gaussian_blur: sigma must be >= 0");
  if (sigma < 0.05) return img;
  const auto k = gaussian_kernel(sigma);
  const int radius = int(k.size() / 2);
  Image tmp(img.h, img.w, img.c);
  // horizontal
  for (int ch = 0; ch < img.c; ++ch)
    for (int y = 0; y < img.h; ++y)
      for (int x = 0; x < img.w; ++x) {
        double acc = 0.0;
        for (int t = -radius; t <= radius; ++t)
          acc += k[size_t(t + radius)] * img.at(ch, y, reflect(x + t, img.w));
        tmp.at(ch, y, x) = float(acc);
      }
  // vertical
  Image out(img.h, img.w, img.c);
  for (int ch = 0; ch < img.c; ++ch)
    for (int y = 0; y < img.h; ++y)
      for (int x = 0; x < img.w; ++x) {
        double acc = 0.0;
        for (int t = -radius; t <= radius; ++t)
          acc += k[size_t(t + radius)] * tmp.at(ch, reflect(y + t, img.h), x);
        out.at(ch, y, x) = float(acc);
      }
  return out;
}

Image downsample(const Image& img, int r) {
  if (r < 1) throw std::invalid_argument("downsample: factor must be >= 1");
  if (r == 1) return img;
  if (img.h % r != 0 || img.w % r != 0)
    throw std::invalid_argument("downsample: extents not divisible by factor " + std::to_string(r));
  Image out(img.h / r, img.w / r, img.c);
  const float inv = 1.f / float(r * r);
  for (int ch = 0; ch < img.c; ++ch)
    for (int y = 0; y < out.h; ++y)
      for (int x = 0; x < out.w; ++x) {
        float acc = 0.f;
        for (int dy = 0; dy < r; ++dy)
          for (int dx = 0; dx < r; ++dx) acc += img.at(ch, y * r + dy, x * r + dx);
        out.at(ch, y, x) = acc * inv;
      }
  return out;
}

Image upsample(const Image& img, int r) {
  if (r < 1) throw std::invalid_argument("upsample: factor must be >= 1");
  if (r == 1) return img;
  // reuse the tensor op so the CLI and the training path agree exactly
  Tensor t = to_tensor(img);
  Tensor up = resample2d(t, Resample::kBilinear, r);
  return to_image(up);
}

Image add_awgn(const Image& img, double delta, Rng& rng) {
  if (delta < 0) throw std::invalid_argument("add_awgn: delta must be >= 0");
  if (delta == 0) return img;
  Image out = img;
  const double std01 = delta / 255.0;
  for (auto& v : out.data) v = float(v + std01 * rng.normal());
  return out;
}

const std::array<int, 64>& base_luminance_table() {
  static const std::array<int, 64> table = {
      16, 11, 10, 16, 24,  40,  51,  61,   //
      12, 12, 14, 19, 26,  58,  60,  55,   //
      14, 13, 16, 24, 40,  57,  69,  56,   //
      14, 17, 22, 29, 51,  87,  80,  62,   //
      18, 22, 37, 56, 68,  109, 103, 77,   //
      24, 35, 55, 64, 81,  104, 113, 92,   //
      49, 64, 78, 87, 103, 121, 120, 101,  //
      72, 92, 95, 98, 112, 100, 103, 99};
  return table;
}

std::array<int, 64> quant_table(int quality) {
  if (quality < 1 || quality > 100)
    throw std::invalid_argument("quant_table: quality must be in [1,100]");
  const int s = quality < 50 ? 5000 / quality : 200 - 2 * quality;
  std::array<int, 64> q{};
  const auto& base = base_luminance_table();
  for (int i = 0; i < 64; ++i) {
    int v = (base[size_t(i)] * s + 50) / 100;
    q[size_t(i)] = v < 1 ? 1 : (v > 255 ? 255 : v);
  }
  return q;
}

namespace {

struct DctBasis {
  double c[8][8];  // c[u][x] = a(u) cos((2x+1) u pi / 16)
  DctBasis() {
    const double pi = 3.14159265358979323846;
    for (int u = 0; u < 8; ++u) {
      const double a = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int x = 0; x < 8; ++x) c[u][x] = a * std::cos((2 * x + 1) * u * pi / 16.0);
    }
  }
};
const DctBasis& basis() {
  static const DctBasis b;
  return b;
}

}  // namespace

void dct8x8(const double in[64], double out[64]) {
  const auto& b = basis();
  double tmp[64];
  // rows
  for (int y = 0; y < 8; ++y)
    for (int u = 0; u < 8; ++u) {
      double acc = 0.0;
      for (int x = 0; x < 8; ++x) acc += b.c[u][x] * in[y * 8 + x];
      tmp[y * 8 + u] = acc;
    }
  // columns
  for (int v = 0; v < 8; ++v)
    for (int u = 0; u < 8; ++u) {
      double acc = 0.0;
      for (int y = 0; y < 8; ++y) acc += b.c[v][y] * tmp[y * 8 + u];
      out[v * 8 + u] = acc;
    }
}

void idct8x8(const double in[64], double out[64]) {
  const auto& b = basis();
  double tmp[64];
  for (int v = 0; v < 8; ++v)
    for (int x = 0; x < 8; ++x) {
      double acc = 0.0;
      for (int u = 0; u < 8; ++u) acc += b.c[u][x] * in[v * 8 + u];
      tmp[v * 8 + x] = acc;
    }
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      double acc = 0.0;
      for (int v = 0; v < 8; ++v) acc += b.c[v][y] * tmp[v * 8 + x];
      out[y * 8 + x] = acc;
    }
}

Image jpeg_like(const Image& img, int quality) {
  const auto q = quant_table(quality);
  Image out(img.h, img.w, img.c);
  const int bh = (img.h + 7) / 8, bw = (img.w + 7) / 8;
  double block[64], coeff[64], rec[64];
  for (int ch = 0; ch < img.c; ++ch)
    for (int by = 0; by < bh; ++by)
      for (int bx = 0; bx < bw; ++bx) {
        for (int y = 0; y < 8; ++y)
          for (int x = 0; x < 8; ++x) {
            // replicate-pad the rightmost/bottom partial blocks
            const int sy = std::min(by * 8 + y, img.h - 1);
            const int sx = std::min(bx * 8 + x, img.w - 1);
            block[y * 8 + x] = double(img.at(ch, sy, sx)) * 255.0 - 128.0;
          }
        dct8x8(block, coeff);
        for (int i = 0; i < 64; ++i)
          coeff[i] = std::round(coeff[i] / q[size_t(i)]) * q[size_t(i)];
        idct8x8(coeff, rec);
        for (int y = 0; y < 8; ++y) {
          const int sy = by * 8 + y;
          if (sy >= img.h) break;
          for (int x = 0; x < 8; ++x) {
            const int sx = bx * 8 + x;
            if (sx >= img.w) break;
            out.at(ch, sy, sx) = float((rec[y * 8 + x] + 128.0) / 255.0);
          }
        }
      }
  return out;
}

Image color_jitter(const Image& img, double jitter_brightness, double jitter_contrast, Rng& rng) {
  if (jitter_brightness == 0 && jitter_contrast == 0) return img;
  Image out = img;
  for (int ch = 0; ch < img.c; ++ch) {
    const double a = rng.uniform(1.0 - jitter_contrast, 1.0 + jitter_contrast);
    const double b = rng.uniform(-jitter_brightness, jitter_brightness);
    for (int y = 0; y < img.h; ++y)
      for (int x = 0; x < img.w; ++x) out.at(ch, y, x) = float(a * out.at(ch, y, x) + b);
  }
  return out;
}

Image degrade(const Image& img, const DegradationSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  Image x = gaussian_blur(img, spec.sigma);
  x = downsample(x, spec.scale);
  x = add_awgn(x, spec.noise, rng);
  x = jpeg_like(x, spec.quality);
  x = color_jitter(x, spec.jitter_brightness, spec.jitter_contrast, rng);
  return clamp01(x);
}

Image degrade_keep_size(const Image& img, const DegradationSpec& spec) {
  Image reduced = degrade(img, spec);
  return spec.scale == 1 ? reduced : clamp01(upsample(reduced, spec.scale));
}

Image add_noise_level(const Image& img, double delta, uint64_t seed) {
  Rng rng(seed);
  return clamp01(add_awgn(img, delta, rng));
}

}  // namespace frt
