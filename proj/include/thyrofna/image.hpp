#pragma once

#include <filesystem>
#include <string>

#include <opencv2/core.hpp>

namespace thyrofna {

inline constexpr int kCanonicalWidth = 1024;
inline constexpr int kCanonicalHeight = 768;
inline constexpr int kModelInputSize = 224;

struct ResizeResult {
  cv::Mat image;             // CV_8UC3
  std::string interpolation; // provenance, e.g. "identity", "bilinear", "area"
};

// Bilinear resize, area-averaged (antialiased) when any axis shrinks.
ResizeResult resize_to(const cv::Mat &image, int width, int height);

// First stage of the two-stage resize: any raster -> 1024x768x3.
ResizeResult canonical_resize(const cv::Mat &image);

// Second stage: any raster (canonical image or crop) -> 224x224x3.
ResizeResult model_input_resize(const cv::Mat &image);

bool is_canonical(const cv::Mat &image);

// Throws InvalidCanonicalSize unless the raster is exactly 1024x768.
void require_canonical(const cv::Mat &image, const char *what);

// Loads a colour image from disk; MissingFile / EmptyImage on failure.
cv::Mat read_image(const std::filesystem::path &path);

void write_png(const std::filesystem::path &path, const cv::Mat &image);

} // namespace thyrofna
