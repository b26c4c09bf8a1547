#pragma once

#include "thyrofna/core_types.hpp"
#include "thyrofna/region_proposal.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

namespace thyrofna {

// Augmentation families: A full image, B proposal overlay, C proposal or
// supplementary crops, D overlay grid tiles, E original grid tiles.
enum class SetTag : std::uint8_t { A, B, C, D, E };

std::string_view set_tag_name(SetTag tag);

inline constexpr int kSetBOverlayBoxes = 8;
inline constexpr int kSetCCrops = 8;
inline constexpr int kGridTile = 256;
inline constexpr int kGridColumns = 4;
inline constexpr int kGridRows = 3;
inline constexpr int kGridTiles = kGridColumns * kGridRows;
inline constexpr int kSamplesPerRecord = 1 + 1 + kSetCCrops + kGridTiles + kGridTiles; // 34
inline constexpr int kOverlayThickness = 4;

enum class CropOrigin : std::uint8_t { FULL, PROPOSAL, SUPPLEMENTARY, GRID };

// One training unit. Pixels are not stored; materialize() cuts them from the
// record's original or overlay raster on demand.
struct AugmentedSample {
  std::string source_id;
  SetTag set_tag = SetTag::A;
  int index = 0; // position within its set
  CropOrigin origin = CropOrigin::FULL;
  cv::Rect crop;  // canonical-frame geometry; the full frame for A and B
  ClassLabel label = ClassLabel::BENIGN;
  SplitTag split = SplitTag::TRAIN;

  bool is_full() const { return origin == CropOrigin::FULL; }
  bool operator==(const AugmentedSample &) const = default;
};

// The 12 non-overlapping 256x256 tiles of the canonical frame, row-major.
std::array<cv::Rect, kGridTiles> grid_rects();

// Supplementary crops used when fewer than 8 proposals exist: six 512x512
// at {0,256,512}x{0,256} and two 768x768 at (0,0) and (256,0).
std::array<cv::Rect, kSetCCrops> supplementary_pool();

// Draws red unfilled 4 px outlines of the top min(8, n) proposals.
cv::Mat generate_set_b(const cv::Mat &canonical, const std::vector<RegionProposal> &proposals);

// Geometry of the eight Set C crops for the given (sorted or unsorted) proposals.
std::vector<cv::Rect> set_c_geometry(const std::vector<RegionProposal> &proposals, std::uint64_t seed);

std::vector<cv::Mat> generate_set_c(const cv::Mat &canonical,
                                    const std::vector<RegionProposal> &proposals, std::uint64_t seed);

std::vector<cv::Mat> generate_grid(const cv::Mat &canonical);

// Expands one TRAIN record into its 34 samples. The Set C draw uses
// derive_seed(seed, record.id), so results do not depend on record order.
std::vector<AugmentedSample> augment_record(const ImageRecord &record,
                                            const std::vector<RegionProposal> &proposals,
                                            std::uint64_t seed);

// The single Set A sample used when training without augmentation.
AugmentedSample full_image_sample(const ImageRecord &record);

// Pixel sources for one record.
struct RecordRasters {
  cv::Mat original; // canonical
  cv::Mat overlay;  // Set B rendering
};

RecordRasters prepare_rasters(const cv::Mat &canonical, const std::vector<RegionProposal> &proposals);

// Cuts the sample's pixels: A/C/E from the original, B/D from the overlay.
cv::Mat materialize(const AugmentedSample &sample, const RecordRasters &rasters);

// Debug export: <dir>/<record_id>/<set>_<index>.png plus geometry.json.
void export_augmented(const std::filesystem::path &dir, const std::string &record_id,
                      const std::vector<AugmentedSample> &samples, const RecordRasters &rasters);

} // namespace thyrofna
