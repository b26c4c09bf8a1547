#include "thyrofna/image.hpp"

#include "thyrofna/error.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace thyrofna {

namespace {

cv::Mat to_three_channels(const cv::Mat &image) {
  if (image.empty()) {
    fail(ErrorCode::EmptyImage, "empty raster");
  }
  cv::Mat out;
  if (image.channels() == 3) {
    out = image;
  } else if (image.channels() == 1) {
    cv::cvtColor(image, out, cv::COLOR_GRAY2BGR);
  } else if (image.channels() == 4) {
    cv::cvtColor(image, out, cv::COLOR_BGRA2BGR);
  } else {
    fail(ErrorCode::InvalidArgument, "unsupported channel count");
  }
  if (out.depth() != CV_8U) {
    cv::Mat converted;
    out.convertTo(converted, CV_8U);
    out = converted;
  }
  return out;
}

} // namespace

ResizeResult resize_to(const cv::Mat &image, int width, int height) {
  const cv::Mat src = to_three_channels(image);
  if (src.cols == width && src.rows == height) {
    return {src.clone(), "identity"};
  }
  const bool shrinking = src.cols > width || src.rows > height;
  ResizeResult result;
  cv::resize(src, result.image, cv::Size(width, height), 0.0, 0.0,
             shrinking ? cv::INTER_AREA : cv::INTER_LINEAR);
  result.interpolation = shrinking ? "area" : "bilinear";
  return result;
}

ResizeResult canonical_resize(const cv::Mat &image) {
  return resize_to(image, kCanonicalWidth, kCanonicalHeight);
}

ResizeResult model_input_resize(const cv::Mat &image) {
  return resize_to(image, kModelInputSize, kModelInputSize);
}

bool is_canonical(const cv::Mat &image) {
  return image.cols == kCanonicalWidth && image.rows == kCanonicalHeight && image.type() == CV_8UC3;
}

void require_canonical(const cv::Mat &image, const char *what) {
  if (!is_canonical(image)) {
    fail(ErrorCode::InvalidCanonicalSize,
         std::string(what) + ": expected 1024x768x3, got " + std::to_string(image.cols) + "x" +
             std::to_string(image.rows) + "x" + std::to_string(image.channels()));
  }
}

cv::Mat read_image(const std::filesystem::path &path) {
  if (!std::filesystem::exists(path)) {
    fail(ErrorCode::MissingFile, "image not found: " + path.string());
  }
  cv::Mat image = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (image.empty()) {
    fail(ErrorCode::EmptyImage, "could not decode image: " + path.string());
  }
  return image;
}

void write_png(const std::filesystem::path &path, const cv::Mat &image) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  if (!cv::imwrite(path.string(), image)) {
    fail(ErrorCode::IoFailure, "cannot write image: " + path.string());
  }
}

} // namespace thyrofna
