// Keyframe dataset schema, text serialization and validation.
//
// File format (UTF-8, line oriented, '#' starts a comment):
//   vocovar-dataset v1
//   meta <pixel_scale> <source>                  (optional)
//   K fx fy cx cy w h                            (exactly one)
//   F id qw qx qy qz tx ty tz                    (keyframe pose, cam-to-world)
//   S frame u v d                                (pixel sample, inverse depth)
//   M i j sample_idx u* v* [s11 s12 s22]         (flow measurement; optional
//                                                 upper-triangular 2x2 sigma)

#ifndef VOCOVAR_DATASET_HPP
#define VOCOVAR_DATASET_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vocovar/camera.hpp"
#include "vocovar/liegroup.hpp"

namespace vocovar {

struct PixelSample {
  Pixel pixel = Pixel::Zero();
  double inv_depth = 0;
};

struct Keyframe {
  int id = -1;
  Pose pose;
  std::vector<PixelSample> samples;
};

struct FlowMeasurement {
  int frame_i = -1;
  int frame_j = -1;
  int sample_index = -1;  // into keyframes[frame_i].samples
  Pixel target = Pixel::Zero();
  std::optional<Mat2> sigma;  // defaults to (1 px)^2 I when absent
};

struct DatasetMeta {
  double pixel_scale = 1.0;
  std::string source = "unknown";
};

struct KeyframeDataset {
  PinholeIntrinsics intrinsics;
  std::vector<Keyframe> keyframes;  // ids dense 0..n-1, sorted
  std::vector<FlowMeasurement> measurements;
  DatasetMeta meta;
};

// Throws ValidationError describing the first violated invariant:
// dense keyframe ids, valid intrinsics, in-frame sample pixels with
// positive inverse depth, measurement references in range, SPD sigmas.
void validate(const KeyframeDataset& ds);

// Parse + validate. Diagnostics carry 1-based line numbers.
KeyframeDataset load_dataset(const std::filesystem::path& path);
KeyframeDataset parse_dataset(const std::string& text);

void save_dataset(const std::filesystem::path& path,
                  const KeyframeDataset& ds);
std::string serialize_dataset(const KeyframeDataset& ds);

// Restriction to the first `count` keyframes, keeping only samples and
// measurements fully inside the prefix.
KeyframeDataset prefix_window(const KeyframeDataset& ds, int count);

// Global index of a sample, flattening per-frame lists in frame order.
int sample_global_index(const KeyframeDataset& ds, int frame,
                        int sample_index);

}  // namespace vocovar

#endif  // VOCOVAR_DATASET_HPP
