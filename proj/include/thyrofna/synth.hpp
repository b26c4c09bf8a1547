#pragma once

#include "thyrofna/core_types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

namespace thyrofna {

// Per-class rendering statistics for the toy cytology corpus. Classes differ
// in cluster count, nucleus size, and stain darkness, so they are separable
// by construction and the cluster count is visible to the region proposer.
struct ClusterStyle {
  int min_clusters = 1;
  int max_clusters = 2;
  double min_nucleus_radius = 5.0;
  double max_nucleus_radius = 7.0;
  double nucleus_gray = 110.0; // mean stain intensity before tinting
};

ClusterStyle cluster_style(ClassLabel label);

struct SyntheticImage {
  cv::Mat image;                 // 1024x768 BGR
  std::vector<cv::Rect> clusters; // ground-truth cluster bounding boxes
};

SyntheticImage render_cluster_image(ClassLabel label, std::uint64_t seed);

// Writes n images per class as PNG plus `manifest.csv` (unsplit, labeled).
std::vector<ImageRecord> synth_corpus(const std::filesystem::path &out_dir, int n_per_class,
                                      std::uint64_t seed);

// "Discriminative blob" corpus: identical background clutter for every class;
// MALIGNANT adds one large dark purple blob, INDET_SUS one medium blue blob,
// BENIGN nothing. `blob` is empty for BENIGN.
struct BlobImage {
  cv::Mat image;
  cv::Rect blob;
};

BlobImage render_blob_image(ClassLabel label, std::uint64_t seed);

struct BlobRecord {
  ImageRecord record;
  cv::Rect blob;
};

// Writes images, `manifest.csv`, and `blobs.csv` (id,x,y,w,h).
std::vector<BlobRecord> synth_blob_corpus(const std::filesystem::path &out_dir, int n_per_class,
                                          std::uint64_t seed);

} // namespace thyrofna
