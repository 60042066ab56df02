#ifndef FRT_IMAGE_HPP
#define FRT_IMAGE_HPP

#include <string>
#include <vector>

#include "frt/tensor.hpp"

namespace frt {

// Planar float image: c planes of h x w, values nominally in [0,1].
// Grayscale c=1, RGB c=3. PGM (P5) and PPM (P6) binary with maxval 255
// are the only on-disk formats.
struct Image {
  int h = 0, w = 0, c = 1;
  std::vector<float> data;

  Image() = default;
  Image(int height, int width, int channels, float fill = 0.f)
      : h(height), w(width), c(channels),
        data(size_t(height) * width * channels, fill) {}

  float& at(int ch, int y, int x) { return data[size_t((ch * h + y) * w + x)]; }
  float at(int ch, int y, int x) const { return data[size_t((ch * h + y) * w + x)]; }
  size_t size() const { return data.size(); }
  bool same_shape(const Image& o) const { return h == o.h && w == o.w && c == o.c; }
};

Image read_image(const std::string& path);
// Clamps to [0,1] and quantizes to bytes; c=1 writes P5, c=3 writes P6.
void write_image(const Image& img, const std::string& path);

Image clamp01(const Image& img);

// Image <-> tensor bridges (tensor layout 1 x C x H x W, or N stacked images).
Tensor to_tensor(const Image& img);
Tensor to_batch(const std::vector<Image>& imgs);
Image to_image(const Tensor& t, int batch_index = 0);

// atomic file write helper: writes to path + ".tmp" then renames
void atomic_write_file(const std::string& path, const std::string& bytes);

}  // namespace frt

#endif  // FRT_IMAGE_HPP
