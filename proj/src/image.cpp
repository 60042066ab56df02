#include "frt/image.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace frt {

namespace {

// skips whitespace and '#' comment lines between header tokens
int next_header_int(std::istream& in, const std::string& path) {
  while (true) {
    int ch = in.peek();
    if (ch == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(ch)) {
      in.get();
    } else {
      break;
    }
  }
  int value = -1;
  if (!(in >> value)) throw std::runtime_error("bad PNM header in " + path);
  return value;
}

}  // namespace

Image read_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open image " + path);
  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  int channels;
  if (m0 == 'P' && m1 == '5') {
    channels = 1;
  } else if (m0 == 'P' && m1 == '6') {
    channels = 3;
  } else {
    throw std::runtime_error("unsupported image format in " + path + " (want P5/P6)");
  }
  const int w = next_header_int(in, path);
  const int h = next_header_int(in, path);
  const int maxval = next_header_int(in, path);
  if (w <= 0 || h <= 0) throw std::runtime_error("bad image dimensions in " + path);
  if (maxval != 255) throw std::runtime_error("maxval must be 255 in " + path);
  in.get();  // single whitespace after maxval

  std::vector<unsigned char> raw(size_t(w) * h * channels);
  in.read(reinterpret_cast<char*>(raw.data()), std::streamsize(raw.size()));
  if (size_t(in.gcount()) != raw.size())
    throw std::runtime_error("truncated image data in " + path);

  Image img(h, w, channels);
  // interleaved bytes -> planar floats
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int ch = 0; ch < channels; ++ch)
        img.at(ch, y, x) = float(raw[size_t((y * w + x) * channels + ch)]) / 255.f;
  return img;
}

void write_image(const Image& img, const std::string& path) {
  if (img.c != 1 && img.c != 3)
    throw std::invalid_argument("write_image: channels must be 1 or 3");
  std::string out;
  out.reserve(img.size() + 32);
  char header[64];
  std::snprintf(header, sizeof header, "P%c\n%d %d\n255\n", img.c == 1 ? '5' : '6', img.w, img.h);
  out += header;
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x)
      for (int ch = 0; ch < img.c; ++ch) {
        float v = img.at(ch, y, x);
        v = v < 0.f ? 0.f : (v > 1.f ? 1.f : v);
        out += char(int(std::lround(v * 255.f)));
      }
  atomic_write_file(path, out);
}

Image clamp01(const Image& img) {
  Image out = img;
  for (auto& v : out.data) v = v < 0.f ? 0.f : (v > 1.f ? 1.f : v);
  return out;
}

Tensor to_tensor(const Image& img) {
  return Tensor::from({1, img.c, img.h, img.w}, img.data);
}

Tensor to_batch(const std::vector<Image>& imgs) {
  if (imgs.empty()) throw std::invalid_argument("to_batch: empty image list");
  const Image& first = imgs[0];
  std::vector<float> data;
  data.reserve(imgs.size() * first.size());
  for (const auto& im : imgs) {
    if (!im.same_shape(first)) throw std::invalid_argument("to_batch: mixed image shapes");
    data.insert(data.end(), im.data.begin(), im.data.end());
  }
  return Tensor::from({int(imgs.size()), first.c, first.h, first.w}, std::move(data));
}

Image to_image(const Tensor& t, int batch_index) {
  if (t.rank() != 4) throw std::invalid_argument("to_image: rank-4 tensor required");
  const int c = t.dim(1), h = t.dim(2), w = t.dim(3);
  Image img(h, w, c);
  const size_t off = size_t(batch_index) * c * h * w;
  std::copy_n(t.data().begin() + std::ptrdiff_t(off), img.size(), img.data.begin());
  return img;
}

void atomic_write_file(const std::string& path, const std::string& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
    out.write(bytes.data(), std::streamsize(bytes.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("rename failed for " + path);
}

}  // namespace frt
