#include "thyrofna/augmentation.hpp"

#include "thyrofna/error.hpp"
#include "thyrofna/image.hpp"
#include "thyrofna/rng.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

namespace thyrofna {

std::string_view set_tag_name(SetTag tag) {
  switch (tag) {
  case SetTag::A: return "A";
  case SetTag::B: return "B";
  case SetTag::C: return "C";
  case SetTag::D: return "D";
  case SetTag::E: return "E";
  }
  return "?";
}

std::array<cv::Rect, kGridTiles> grid_rects() {
  std::array<cv::Rect, kGridTiles> rects;
  for (int row = 0; row < kGridRows; ++row) {
    for (int col = 0; col < kGridColumns; ++col) {
      rects[static_cast<std::size_t>(row * kGridColumns + col)] =
          cv::Rect(col * kGridTile, row * kGridTile, kGridTile, kGridTile);
    }
  }
  return rects;
}

std::array<cv::Rect, kSetCCrops> supplementary_pool() {
  return {cv::Rect(0, 0, 512, 512),   cv::Rect(256, 0, 512, 512), cv::Rect(512, 0, 512, 512),
          cv::Rect(0, 256, 512, 512), cv::Rect(256, 256, 512, 512), cv::Rect(512, 256, 512, 512),
          cv::Rect(0, 0, 768, 768),   cv::Rect(256, 0, 768, 768)};
}

namespace {

std::vector<RegionProposal> top_proposals(std::vector<RegionProposal> proposals, int limit) {
  for (const auto &p : proposals) {
    if (!is_valid_proposal(p)) {
      fail(ErrorCode::OutOfBoundsBox, "proposal outside the canonical frame");
    }
  }
  sort_proposals(proposals);
  if (proposals.size() > static_cast<std::size_t>(limit)) {
    proposals.resize(static_cast<std::size_t>(limit));
  }
  return proposals;
}

void draw_outline(cv::Mat &image, const cv::Rect &box) {
  const cv::Scalar red(0, 0, 255);
  const int t = std::min({kOverlayThickness, box.width, box.height});
  // Strips lie inside the box so the outline never leaves the frame.
  image(cv::Rect(box.x, box.y, box.width, t)).setTo(red);
  image(cv::Rect(box.x, box.y + box.height - t, box.width, t)).setTo(red);
  image(cv::Rect(box.x, box.y, t, box.height)).setTo(red);
  image(cv::Rect(box.x + box.width - t, box.y, t, box.height)).setTo(red);
}

} // namespace

cv::Mat generate_set_b(const cv::Mat &canonical, const std::vector<RegionProposal> &proposals) {
  require_canonical(canonical, "generate_set_b");
  cv::Mat overlay = canonical.clone();
  for (const auto &p : top_proposals(proposals, kSetBOverlayBoxes)) {
    draw_outline(overlay, p.rect());
  }
  return overlay;
}

std::vector<cv::Rect> set_c_geometry(const std::vector<RegionProposal> &proposals, std::uint64_t seed) {
  std::vector<cv::Rect> rects;
  for (const auto &p : top_proposals(proposals, kSetCCrops)) {
    rects.push_back(p.rect());
  }
  const auto pool = supplementary_pool();
  std::array<std::size_t, kSetCCrops> order{};
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  // Partial Fisher-Yates: slot i receives a uniform draw from the remaining pool.
  const std::size_t needed = static_cast<std::size_t>(kSetCCrops) - rects.size();
  for (std::size_t i = 0; i < needed; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(order.size() - i));
    std::swap(order[i], order[j]);
    rects.push_back(pool[order[i]]);
  }
  return rects;
}

std::vector<cv::Mat> generate_set_c(const cv::Mat &canonical,
                                    const std::vector<RegionProposal> &proposals, std::uint64_t seed) {
  require_canonical(canonical, "generate_set_c");
  std::vector<cv::Mat> crops;
  for (const auto &rect : set_c_geometry(proposals, seed)) {
    crops.push_back(canonical(rect).clone());
  }
  return crops;
}

std::vector<cv::Mat> generate_grid(const cv::Mat &canonical) {
  require_canonical(canonical, "generate_grid");
  std::vector<cv::Mat> tiles;
  tiles.reserve(kGridTiles);
  for (const auto &rect : grid_rects()) {
    tiles.push_back(canonical(rect).clone());
  }
  return tiles;
}

std::vector<AugmentedSample> augment_record(const ImageRecord &record,
                                            const std::vector<RegionProposal> &proposals,
                                            std::uint64_t seed) {
  if (record.split != SplitTag::TRAIN) {
    fail(ErrorCode::SplitViolation,
         "augmentation is restricted to TRAIN records; '" + record.id + "' is " +
             std::string(record.split == SplitTag::UNSPLIT ? "UNSPLIT" : split_name(record.split)));
  }
  if (!record.label) {
    fail(ErrorCode::UnlabeledRecord, "record '" + record.id + "' has no label");
  }
  if ((record.width != 0 || record.height != 0) &&
      (record.width != kCanonicalWidth || record.height != kCanonicalHeight)) {
    fail(ErrorCode::InvalidCanonicalSize, "record '" + record.id + "' is not in the canonical frame");
  }

  const cv::Rect frame(0, 0, kCanonicalWidth, kCanonicalHeight);
  std::vector<AugmentedSample> samples;
  samples.reserve(kSamplesPerRecord);
  auto add = [&](SetTag tag, int index, CropOrigin origin, const cv::Rect &rect) {
    samples.push_back({record.id, tag, index, origin, rect, *record.label, SplitTag::TRAIN});
  };

  add(SetTag::A, 0, CropOrigin::FULL, frame);
  add(SetTag::B, 0, CropOrigin::FULL, frame);
  const std::size_t proposal_crops =
      std::min(proposals.size(), static_cast<std::size_t>(kSetCCrops));
  const auto c_rects = set_c_geometry(proposals, derive_seed(seed, record.id));
  for (std::size_t i = 0; i < c_rects.size(); ++i) {
    add(SetTag::C, static_cast<int>(i),
        i < proposal_crops ? CropOrigin::PROPOSAL : CropOrigin::SUPPLEMENTARY, c_rects[i]);
  }
  const auto tiles = grid_rects();
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    add(SetTag::D, static_cast<int>(i), CropOrigin::GRID, tiles[i]);
  }
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    add(SetTag::E, static_cast<int>(i), CropOrigin::GRID, tiles[i]);
  }
  return samples;
}

AugmentedSample full_image_sample(const ImageRecord &record) {
  if (!record.label) {
    fail(ErrorCode::UnlabeledRecord, "record '" + record.id + "' has no label");
  }
  return {record.id, SetTag::A, 0, CropOrigin::FULL,
          cv::Rect(0, 0, kCanonicalWidth, kCanonicalHeight), *record.label, record.split};
}

RecordRasters prepare_rasters(const cv::Mat &canonical, const std::vector<RegionProposal> &proposals) {
  return {canonical, generate_set_b(canonical, proposals)};
}

cv::Mat materialize(const AugmentedSample &sample, const RecordRasters &rasters) {
  const bool from_overlay = sample.set_tag == SetTag::B || sample.set_tag == SetTag::D;
  const cv::Mat &source = from_overlay ? rasters.overlay : rasters.original;
  require_canonical(source, "materialize");
  if (sample.is_full()) {
    return source;
  }
  return source(sample.crop);
}

void export_augmented(const std::filesystem::path &dir, const std::string &record_id,
                      const std::vector<AugmentedSample> &samples, const RecordRasters &rasters) {
  const auto record_dir = dir / record_id;
  std::filesystem::create_directories(record_dir);
  nlohmann::json geometry = nlohmann::json::array();
  for (const auto &sample : samples) {
    const std::string name =
        std::string(set_tag_name(sample.set_tag)) + "_" + std::to_string(sample.index);
    write_png(record_dir / (name + ".png"), materialize(sample, rasters));
    nlohmann::json entry = {{"file", name + ".png"},
                            {"set", set_tag_name(sample.set_tag)},
                            {"index", sample.index},
                            {"label", label_name(sample.label)}};
    if (sample.is_full()) {
      entry["crop"] = "FULL";
    } else {
      entry["crop"] = {{"x", sample.crop.x}, {"y", sample.crop.y}, {"w", sample.crop.width},
                       {"h", sample.crop.height}};
    }
    entry["origin"] = sample.origin == CropOrigin::PROPOSAL        ? "proposal"
                      : sample.origin == CropOrigin::SUPPLEMENTARY ? "supplementary"
                      : sample.origin == CropOrigin::GRID          ? "grid"
                                                                   : "full";
    geometry.push_back(std::move(entry));
  }
  std::ofstream out(record_dir / "geometry.json", std::ios::binary);
  if (!out) {
    fail(ErrorCode::IoFailure, "cannot write geometry.json for " + record_id);
  }
  out << geometry.dump(2) << '\n';
}

} // namespace thyrofna
