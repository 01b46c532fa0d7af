#include "salbench/image.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <cstring>

#include "salbench/error.hpp"

namespace salbench {
namespace {

cv::Mat as_mat(const RgbImage& image) {
  // OpenCV never writes through this header; the const_cast only satisfies its API.
  return cv::Mat(image.height, image.width, CV_8UC3, const_cast<std::uint8_t*>(image.pixels.data()));
}

RgbImage from_mat(const cv::Mat& mat) {
  RgbImage out(mat.cols, mat.rows);
  for (int r = 0; r < mat.rows; ++r) {
    std::memcpy(out.at(r, 0), mat.ptr<std::uint8_t>(r), static_cast<std::size_t>(mat.cols) * 3);
  }
  return out;
}

}  // namespace

RgbImage::RgbImage(int w, int h)
    : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, 0) {}

RgbImage RgbImage::filled(int w, int h, std::array<std::uint8_t, 3> rgb) {
  RgbImage out(w, h);
  for (std::size_t i = 0; i < out.pixels.size(); i += 3) {
    out.pixels[i] = rgb[0];
    out.pixels[i + 1] = rgb[1];
    out.pixels[i + 2] = rgb[2];
  }
  return out;
}

RgbImage load_image(const std::filesystem::path& path) {
  cv::Mat bgr;
  try {
    bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  } catch (const cv::Exception& e) {
    throw Error(ErrorCode::decode_failure, path.string() + ": " + e.what());
  }
  if (bgr.empty()) throw Error(ErrorCode::decode_failure, "cannot decode " + path.string());
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  return from_mat(rgb);
}

void write_png(const RgbImage& image, const std::filesystem::path& path) {
  cv::Mat bgr;
  cv::cvtColor(as_mat(image), bgr, cv::COLOR_RGB2BGR);
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), bgr, {cv::IMWRITE_PNG_COMPRESSION, 6});
  } catch (const cv::Exception& e) {
    throw Error(ErrorCode::io_failure, path.string() + ": " + e.what());
  }
  if (!ok) throw Error(ErrorCode::io_failure, "cannot write " + path.string());
}

RgbImage resize_bilinear(const RgbImage& image, int width, int height) {
  if (image.empty() || width <= 0 || height <= 0) {
    throw Error(ErrorCode::resize_failure, "empty source or target size");
  }
  if (image.width == width && image.height == height) return image;
  cv::Mat resized;
  try {
    cv::resize(as_mat(image), resized, cv::Size(width, height), 0.0, 0.0, cv::INTER_LINEAR);
  } catch (const cv::Exception& e) {
    throw Error(ErrorCode::resize_failure, e.what());
  }
  return from_mat(resized);
}

void blit(const RgbImage& src, RgbImage& dst, int row, int col) {
  if (row < 0 || col < 0 || row + src.height > dst.height || col + src.width > dst.width) {
    throw Error(ErrorCode::out_of_range, "blit outside destination");
  }
  for (int r = 0; r < src.height; ++r) {
    std::memcpy(dst.at(row + r, col), src.at(r, 0), static_cast<std::size_t>(src.width) * 3);
  }
}

}  // namespace salbench
