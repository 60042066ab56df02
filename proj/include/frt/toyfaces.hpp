#ifndef FRT_TOYFACES_HPP
#define FRT_TOYFACES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "frt/image.hpp"
#include "frt/tensor.hpp"

namespace frt {

// Normalized component rectangles on a face image. Eye boxes never overlap
// and all boxes lie inside the unit square.
struct ComponentBoxes {
  BoxF left_eye, right_eye, mouth;
  bool valid() const;
};

struct ToyFace {
  Image image;
  ComponentBoxes boxes;
};

// Procedural face: elliptical head over a textured background, two dark
// eye blobs with darker pupils, a mouth bar. Geometry and intensities are
// jittered per image; the darkest pixel of each eye neighborhood sits at
// the pupil center inside the recorded box.
ToyFace gen_toyface(int size, uint64_t seed);

std::vector<ToyFace> gen_toyfaces(int count, int size, uint64_t seed);

// Corpus directory layout: face_%05d.pgm plus manifest.json listing image
// paths, per-image component boxes and the generation seed.
struct CorpusEntry {
  std::string path;  // relative to the manifest directory
  ComponentBoxes boxes;
};

struct Corpus {
  uint64_t seed = 0;
  int size = 0;
  std::string dir;
  std::vector<CorpusEntry> entries;

  ToyFace load(size_t index) const;
};

void write_corpus(const std::vector<ToyFace>& faces, uint64_t seed, const std::string& dir);
Corpus read_corpus(const std::string& manifest_path);

}  // namespace frt

#endif  // FRT_TOYFACES_HPP
