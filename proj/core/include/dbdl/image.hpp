#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <string>
#include <string_view>

namespace dbdl {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Single-channel image with row-major real intensities, nominally in [0,1].
class Image {
public:
  Image() = default;
  Image(int height, int width, double fill = 0.0);
  explicit Image(RowMatrix pixels);

  int height() const { return static_cast<int>(pixels_.rows()); }
  int width() const { return static_cast<int>(pixels_.cols()); }
  bool empty() const { return pixels_.size() == 0; }

  double operator()(int row, int col) const { return pixels_(row, col); }
  double& operator()(int row, int col) { return pixels_(row, col); }

  const RowMatrix& pixels() const { return pixels_; }
  RowMatrix& pixels() { return pixels_; }

  /// Copy of the rectangle starting at (row, col).
  Image crop(int row, int col, int height, int width) const;

  /// Copy with every value clamped to [0,1].
  Image clamped() const;

private:
  RowMatrix pixels_;
};

/// Reads a PGM (P2/P5) or PNG (8/16-bit gray, RGB, with or without alpha).
/// Color input is reduced to luminance 0.299 R + 0.587 G + 0.114 B.
Image load_image(const std::filesystem::path& path);

/// Writes an 8-bit image; the format follows the extension (.pgm or .png).
/// Values are clamped to [0,1] before quantization.
void save_image(const Image& image, const std::filesystem::path& path);

Image decode_pgm(std::string_view bytes);
std::string encode_pgm(const Image& image);

} // namespace dbdl
