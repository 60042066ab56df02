#include "frt/toyfaces.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "frt/rng.hpp"
#include "json.hpp"

namespace frt {

namespace fs = std::filesystem;
using nlohmann::json;

bool ComponentBoxes::valid() const {
  if (!left_eye.valid() || !right_eye.valid() || !mouth.valid()) return false;
  // eyes disjoint
  const bool overlap = left_eye.x0 < right_eye.x1 && right_eye.x0 < left_eye.x1 &&
                       left_eye.y0 < right_eye.y1 && right_eye.y0 < left_eye.y1;
  return !overlap;
}

namespace {

// smooth background texture: coarse seeded grid, bilinearly upsampled
Image value_noise(int size, double amplitude, Rng& rng) {
  const int grid = std::max(2, size / 8);
  std::vector<double> coarse(size_t(grid) * grid);
  for (auto& v : coarse) v = rng.uniform(-amplitude, amplitude);
  Image out(size, size, 1);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const double gy = double(y) / size * (grid - 1);
      const double gx = double(x) / size * (grid - 1);
      const int y0 = int(gy), x0 = int(gx);
      const int y1 = std::min(y0 + 1, grid - 1), x1 = std::min(x0 + 1, grid - 1);
      const double fy = gy - y0, fx = gx - x0;
      const double v = (1 - fy) * ((1 - fx) * coarse[size_t(y0 * grid + x0)] +
                                   fx * coarse[size_t(y0 * grid + x1)]) +
                       fy * ((1 - fx) * coarse[size_t(y1 * grid + x0)] +
                             fx * coarse[size_t(y1 * grid + x1)]);
      out.at(0, y, x) = float(v);
    }
  return out;
}

// soft-edged subtractive gaussian dab; depth > 0 darkens
void stamp_dab(Image& img, double cx, double cy, double radius, double depth) {
  const int size = img.h;
  const int r = int(std::ceil(radius * 3)) + 1;
  const int icx = int(std::round(cx)), icy = int(std::round(cy));
  for (int y = std::max(0, icy - r); y <= std::min(size - 1, icy + r); ++y)
    for (int x = std::max(0, icx - r); x <= std::min(size - 1, icx + r); ++x) {
      const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
      img.at(0, y, x) -= float(depth * std::exp(-0.5 * d2 / (radius * radius)));
    }
}

BoxF box_around(double cx, double cy, double half_w, double half_h, int size) {
  auto clampf = [](double v) { return float(std::min(std::max(v, 0.0), 1.0)); };
  return BoxF{clampf((cx - half_w) / size), clampf((cy - half_h) / size),
              clampf((cx + half_w) / size), clampf((cy + half_h) / size)};
}

}  // namespace

ToyFace gen_toyface(int size, uint64_t seed) {
  if (size < 16) throw std::invalid_argument("gen_toyface: size must be >= 16");
  Rng rng(seed);
  const double s = size;

  // background: dark, mildly textured
  const double bg = rng.uniform(0.08, 0.22);
  Image img(size, size, 1, float(bg));
  Image tex = value_noise(size, 0.04, rng);
  for (size_t i = 0; i < img.data.size(); ++i) img.data[i] += tex.data[i];

  // head ellipse, soft edge
  const double head_cx = s * (0.5 + rng.uniform(-0.03, 0.03));
  const double head_cy = s * (0.52 + rng.uniform(-0.03, 0.03));
  const double head_rx = s * (0.32 + rng.uniform(-0.03, 0.03));
  const double head_ry = s * (0.38 + rng.uniform(-0.03, 0.03));
  const double head_val = rng.uniform(0.65, 0.85);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const double dx = (x - head_cx) / head_rx, dy = (y - head_cy) / head_ry;
      const double d = std::sqrt(dx * dx + dy * dy);
      if (d < 1.15) {
        const double t = d < 0.95 ? 1.0 : (1.15 - d) / 0.20;  // soft rim
        img.at(0, y, x) = float((1 - t) * img.at(0, y, x) + t * head_val);
      }
    }

  // eyes: dark blob, darker pupil at the blob center
  const double eye_dy = head_cy - s * (0.12 + rng.uniform(-0.02, 0.02));
  const double eye_dx = s * (0.13 + rng.uniform(-0.015, 0.015));
  const double eye_r = s * (0.055 + rng.uniform(-0.01, 0.01));
  const double eye_depth = rng.uniform(0.45, 0.6) * head_val;
  const double lx = head_cx - eye_dx, rx = head_cx + eye_dx;
  stamp_dab(img, lx, eye_dy, eye_r * 1.6, eye_depth * 0.5);
  stamp_dab(img, lx, eye_dy, eye_r * 0.7, eye_depth);  // pupil
  stamp_dab(img, rx, eye_dy, eye_r * 1.6, eye_depth * 0.5);
  stamp_dab(img, rx, eye_dy, eye_r * 0.7, eye_depth);

  // mouth: dark horizontal bar with gaussian vertical profile
  const double mouth_cy = head_cy + s * (0.18 + rng.uniform(-0.02, 0.02));
  const double mouth_hw = s * (0.13 + rng.uniform(-0.03, 0.03));
  const double mouth_hh = s * 0.028;
  const double mouth_depth = rng.uniform(0.35, 0.55) * head_val;
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const double ax = std::abs(x - head_cx), ay = y - mouth_cy;
      if (ax < mouth_hw * 1.5) {
        const double fall_x = ax < mouth_hw ? 1.0 : std::exp(-2.0 * (ax - mouth_hw));
        img.at(0, y, x) -=
            float(mouth_depth * fall_x * std::exp(-0.5 * ay * ay / (mouth_hh * mouth_hh)));
      }
    }

  for (auto& v : img.data) v = std::min(std::max(v, 0.f), 1.f);

  ToyFace face;
  face.image = std::move(img);
  const double eye_half = eye_r * 2.2;
  face.boxes.left_eye = box_around(lx, eye_dy, eye_half, eye_half, size);
  face.boxes.right_eye = box_around(rx, eye_dy, eye_half, eye_half, size);
  face.boxes.mouth = box_around(head_cx, mouth_cy, mouth_hw * 1.3, mouth_hh * 4.0, size);
  if (!face.boxes.valid()) throw std::logic_error("gen_toyface: generated boxes violate invariants");
  return face;
}

std::vector<ToyFace> gen_toyfaces(int count, int size, uint64_t seed) {
  std::vector<ToyFace> faces;
  faces.reserve(size_t(count));
  for (int i = 0; i < count; ++i)
    faces.push_back(gen_toyface(size, mix_seed(seed, uint64_t(i))));
  return faces;
}

namespace {

json box_to_json(const BoxF& b) { return json::array({b.x0, b.y0, b.x1, b.y1}); }

BoxF box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw std::runtime_error("manifest: bad box entry");
  return BoxF{j[0].get<float>(), j[1].get<float>(), j[2].get<float>(), j[3].get<float>()};
}

}  // namespace

void write_corpus(const std::vector<ToyFace>& faces, uint64_t seed, const std::string& dir) {
  fs::create_directories(dir);
  json manifest;
  manifest["seed"] = seed;
  manifest["size"] = faces.empty() ? 0 : faces[0].image.h;
  json images = json::array();
  char name[32];
  for (size_t i = 0; i < faces.size(); ++i) {
    std::snprintf(name, sizeof name, "face_%05zu.pgm", i);
    write_image(faces[i].image, (fs::path(dir) / name).string());
    json entry;
    entry["path"] = name;
    entry["boxes"] = {{"left_eye", box_to_json(faces[i].boxes.left_eye)},
                      {"right_eye", box_to_json(faces[i].boxes.right_eye)},
                      {"mouth", box_to_json(faces[i].boxes.mouth)}};
    images.push_back(std::move(entry));
  }
  manifest["images"] = std::move(images);
  atomic_write_file((fs::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

Corpus read_corpus(const std::string& manifest_path) {
  fs::path mpath(manifest_path);
  if (fs::is_directory(mpath)) mpath /= "manifest.json";
  std::ifstream in(mpath);
  if (!in) throw std::runtime_error("cannot open corpus manifest " + mpath.string());
  json manifest = json::parse(in);
  Corpus corpus;
  corpus.seed = manifest.at("seed").get<uint64_t>();
  corpus.size = manifest.at("size").get<int>();
  corpus.dir = mpath.parent_path().string();
  for (const auto& entry : manifest.at("images")) {
    CorpusEntry e;
    e.path = entry.at("path").get<std::string>();
    const auto& boxes = entry.at("boxes");
    e.boxes.left_eye = box_from_json(boxes.at("left_eye"));
    e.boxes.right_eye = box_from_json(boxes.at("right_eye"));
    e.boxes.mouth = box_from_json(boxes.at("mouth"));
    corpus.entries.push_back(std::move(e));
  }
  return corpus;
}

ToyFace Corpus::load(size_t index) const {
  const auto& e = entries.at(index);
  ToyFace face;
  face.image = read_image((fs::path(dir) / e.path).string());
  face.boxes = e.boxes;
  return face;
}

}  // namespace frt
