#include "thyrofna/synth.hpp"

#include "thyrofna/error.hpp"
#include "thyrofna/image.hpp"
#include "thyrofna/manifest.hpp"
#include "thyrofna/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <opencv2/imgproc.hpp>

namespace thyrofna {

namespace {

const cv::Vec3d kBackground{232.0, 222.0, 238.0}; // pale pink-lilac, BGR
const cv::Vec3d kStainTint{1.15, 0.75, 1.05};      // purple haematoxylin-like

cv::Mat blank_slide(Rng &rng) {
  cv::Mat image(kCanonicalHeight, kCanonicalWidth, CV_8UC3);
  for (int y = 0; y < image.rows; ++y) {
    auto *row = image.ptr<cv::Vec3b>(y);
    for (int x = 0; x < image.cols; ++x) {
      const double shade = 4.0 * rng.normal();
      for (int c = 0; c < 3; ++c) {
        row[x][c] = cv::saturate_cast<uchar>(kBackground[c] + shade + 2.0 * rng.normal());
      }
    }
  }
  return image;
}

cv::Scalar stain(double gray, Rng &rng) {
  const double g = gray + 8.0 * rng.normal();
  return {std::clamp(g * kStainTint[0], 0.0, 255.0), std::clamp(g * kStainTint[1], 0.0, 255.0),
          std::clamp(g * kStainTint[2], 0.0, 255.0)};
}

void draw_nucleus(cv::Mat &image, cv::Point2d centre, double radius, double gray, Rng &rng) {
  const cv::Size axes(std::max(1, static_cast<int>(std::lround(radius * rng.uniform(0.8, 1.2)))),
                      std::max(1, static_cast<int>(std::lround(radius * rng.uniform(0.8, 1.2)))));
  cv::ellipse(image, cv::Point(static_cast<int>(std::lround(centre.x)), static_cast<int>(std::lround(centre.y))),
              axes, rng.uniform(0.0, 180.0), 0.0, 360.0, stain(gray, rng), cv::FILLED, cv::LINE_AA);
}

// Places `count` discs of the given radii without overlap (plus `gap`).
std::vector<cv::Point2d> place_discs(const std::vector<double> &radii, double gap, Rng &rng) {
  std::vector<cv::Point2d> centres;
  for (const double r : radii) {
    for (int attempt = 0; attempt < 2000; ++attempt) {
      const cv::Point2d c(rng.uniform(r + 4.0, kCanonicalWidth - r - 4.0),
                          rng.uniform(r + 4.0, kCanonicalHeight - r - 4.0));
      bool clear = true;
      for (std::size_t i = 0; i < centres.size() && clear; ++i) {
        clear = cv::norm(c - centres[i]) > r + radii[i] + gap;
      }
      if (clear) {
        centres.push_back(c);
        break;
      }
    }
  }
  return centres;
}

cv::Rect disc_box(cv::Point2d c, double r) {
  const cv::Rect box(static_cast<int>(std::floor(c.x - r)), static_cast<int>(std::floor(c.y - r)),
                     static_cast<int>(std::ceil(2 * r)) + 1, static_cast<int>(std::ceil(2 * r)) + 1);
  return box & cv::Rect(0, 0, kCanonicalWidth, kCanonicalHeight);
}

void scatter_loose_cells(cv::Mat &image, int count, Rng &rng) {
  for (int i = 0; i < count; ++i) {
    const cv::Point2d c(rng.uniform(0.0, kCanonicalWidth), rng.uniform(0.0, kCanonicalHeight));
    draw_nucleus(image, c, rng.uniform(4.0, 6.0), 120.0, rng);
  }
}

void ensure_directory(const std::filesystem::path &dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    fail(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
  }
}

std::string image_id(ClassLabel label, int index) {
  std::string name(label_name(label));
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
  char suffix[16];
  std::snprintf(suffix, sizeof suffix, "_%04d", index);
  return name + suffix;
}

} // namespace

ClusterStyle cluster_style(ClassLabel label) {
  switch (label) {
  case ClassLabel::BENIGN:
    return {1, 2, 5.0, 7.0, 125.0};
  case ClassLabel::INDET_SUS:
    return {5, 6, 7.0, 9.0, 105.0};
  case ClassLabel::MALIGNANT:
    return {10, 12, 9.0, 12.0, 80.0};
  }
  return {};
}

SyntheticImage render_cluster_image(ClassLabel label, std::uint64_t seed) {
  Rng rng(seed);
  SyntheticImage out;
  out.image = blank_slide(rng);
  scatter_loose_cells(out.image, 25, rng);
  const ClusterStyle style = cluster_style(label);
  const int count = rng.uniform_int(style.min_clusters, style.max_clusters);
  std::vector<double> radii;
  for (int i = 0; i < count; ++i) {
    radii.push_back(rng.uniform(55.0, 80.0));
  }
  const auto centres = place_discs(radii, 30.0, rng);
  for (std::size_t k = 0; k < centres.size(); ++k) {
    const double cluster_r = radii[k];
    const double nucleus_mean = 0.5 * (style.min_nucleus_radius + style.max_nucleus_radius);
    // Enough nuclei to cover roughly 70% of the cluster disc.
    const int nuclei = static_cast<int>(0.7 * cluster_r * cluster_r / (nucleus_mean * nucleus_mean));
    for (int n = 0; n < nuclei; ++n) {
      const double rho = cluster_r * std::sqrt(rng.uniform());
      const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const cv::Point2d p = centres[k] + cv::Point2d(rho * std::cos(theta), rho * std::sin(theta));
      draw_nucleus(out.image, p, rng.uniform(style.min_nucleus_radius, style.max_nucleus_radius),
                   style.nucleus_gray, rng);
    }
    out.clusters.push_back(disc_box(centres[k], cluster_r + style.max_nucleus_radius));
  }
  return out;
}

std::vector<ImageRecord> synth_corpus(const std::filesystem::path &out_dir, int n_per_class,
                                      std::uint64_t seed) {
  if (n_per_class < 1) {
    fail(ErrorCode::InvalidArgument, "n_per_class must be >= 1");
  }
  ensure_directory(out_dir / "images");
  std::vector<ImageRecord> records;
  for (const ClassLabel label : kAllLabels) {
    for (int i = 0; i < n_per_class; ++i) {
      ImageRecord record;
      record.id = image_id(label, i);
      record.path = out_dir / "images" / (record.id + ".png");
      record.label = label;
      record.split = SplitTag::UNSPLIT;
      const auto image = render_cluster_image(label, derive_seed(seed, record.id));
      write_png(record.path, image.image);
      record.width = image.image.cols;
      record.height = image.image.rows;
      records.push_back(std::move(record));
    }
  }
  write_manifest(out_dir / "manifest.csv", records);
  return records;
}

BlobImage render_blob_image(ClassLabel label, std::uint64_t seed) {
  Rng rng(seed);
  BlobImage out;
  out.image = blank_slide(rng);
  scatter_loose_cells(out.image, 60, rng);
  if (label == ClassLabel::BENIGN) {
    return out;
  }
  const bool malignant = label == ClassLabel::MALIGNANT;
  const double radius = malignant ? rng.uniform(70.0, 90.0) : rng.uniform(50.0, 65.0);
  const auto centres = place_discs({radius}, 0.0, rng);
  const cv::Point centre(static_cast<int>(std::lround(centres[0].x)), static_cast<int>(std::lround(centres[0].y)));
  const int r = static_cast<int>(std::lround(radius));
  const cv::Scalar colour = malignant ? cv::Scalar(70, 35, 60) : cv::Scalar(165, 120, 55);
  cv::circle(out.image, centre, r, colour, cv::FILLED, cv::LINE_AA);
  out.blob = cv::Rect(centre.x - r - 1, centre.y - r - 1, 2 * r + 3, 2 * r + 3) &
             cv::Rect(0, 0, kCanonicalWidth, kCanonicalHeight);
  return out;
}

std::vector<BlobRecord> synth_blob_corpus(const std::filesystem::path &out_dir, int n_per_class,
                                          std::uint64_t seed) {
  if (n_per_class < 1) {
    fail(ErrorCode::InvalidArgument, "n_per_class must be >= 1");
  }
  ensure_directory(out_dir / "images");
  std::vector<BlobRecord> out;
  std::vector<ImageRecord> records;
  std::ofstream blobs(out_dir / "blobs.csv");
  if (!blobs) {
    fail(ErrorCode::IoFailure, "cannot write " + (out_dir / "blobs.csv").string());
  }
  blobs << "id,x,y,w,h\n";
  for (const ClassLabel label : kAllLabels) {
    for (int i = 0; i < n_per_class; ++i) {
      BlobRecord br;
      br.record.id = "blob_" + image_id(label, i);
      br.record.path = out_dir / "images" / (br.record.id + ".png");
      br.record.label = label;
      const auto image = render_blob_image(label, derive_seed(seed, br.record.id));
      write_png(br.record.path, image.image);
      br.record.width = image.image.cols;
      br.record.height = image.image.rows;
      br.blob = image.blob;
      blobs << br.record.id << ',' << br.blob.x << ',' << br.blob.y << ',' << br.blob.width << ','
            << br.blob.height << '\n';
      records.push_back(br.record);
      out.push_back(std::move(br));
    }
  }
  write_manifest(out_dir / "manifest.csv", records);
  return out;
}

} // namespace thyrofna
