#include "dbdl/image.hpp"

#include "dbdl/errors.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <sstream>
#include <vector>

namespace dbdl {

namespace {

constexpr double kLumaR = 0.299;
constexpr double kLumaG = 0.587;
constexpr double kLumaB = 0.114;

std::string lowercase_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path.string() + "' for reading");
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw IoError("failed writing '" + path.string() + "'");
  }
}

// Header tokenizer for PGM; '#' starts a comment that runs to end of line.
class PgmCursor {
public:
  explicit PgmCursor(std::string_view bytes) : bytes_(bytes) {}

  std::string token() {
    skip_space_and_comments();
    std::size_t begin = pos_;
    while (pos_ < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      ++pos_;
    }
    if (begin == pos_) {
      throw FormatError("PGM: unexpected end of data");
    }
    return std::string(bytes_.substr(begin, pos_ - begin));
  }

  long number() {
    std::string t = token();
    char* end = nullptr;
    long value = std::strtol(t.c_str(), &end, 10);
    if (end == t.c_str() || *end != '\0' || value < 0) {
      throw FormatError("PGM: invalid number '" + t + "'");
    }
    return value;
  }

  // A single whitespace byte separates the header from binary raster data.
  std::size_t raster_offset() const { return pos_ + 1; }

private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

Image load_png(const std::filesystem::path& path) {
  std::string bytes = read_file(path);
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
    std::string msg = png.message;
    png_image_free(&png);
    throw FormatError("PNG '" + path.string() + "': " + msg);
  }
  const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (png.width == 0 || png.height == 0) {
    png_image_free(&png);
    throw FormatError("PNG '" + path.string() + "' has a zero dimension");
  }
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(png));
  // Black background for any alpha channel being composited away.
  png_color background{0, 0, 0};
  if (!png_image_finish_read(&png, &background, buffer.data(), 0, nullptr)) {
    std::string msg = png.message;
    png_image_free(&png);
    throw FormatError("PNG '" + path.string() + "': " + msg);
  }
  const int h = static_cast<int>(png.height);
  const int w = static_cast<int>(png.width);
  Image image(h, w);
  const int channels = color ? 3 : 1;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::uint8_t* px = &buffer[(static_cast<std::size_t>(r) * w + c) * channels];
      double value = color ? (kLumaR * px[0] + kLumaG * px[1] + kLumaB * px[2]) / 255.0
                           : px[0] / 255.0;
      image(r, c) = std::clamp(value, 0.0, 1.0);
    }
  }
  return image;
}

std::vector<std::uint8_t> quantize(const Image& image) {
  std::vector<std::uint8_t> out(static_cast<std::size_t>(image.height()) * image.width());
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < image.width(); ++c) {
      double v = std::clamp(image(r, c), 0.0, 1.0);
      if (!std::isfinite(v)) v = 0.0;
      out[static_cast<std::size_t>(r) * image.width() + c] =
          static_cast<std::uint8_t>(std::lround(v * 255.0));
    }
  }
  return out;
}

void save_png(const Image& image, const std::filesystem::path& path) {
  std::vector<std::uint8_t> gray = quantize(image);
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width());
  png.height = static_cast<png_uint_32>(image.height());
  png.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&png, path.string().c_str(), 0, gray.data(), 0, nullptr)) {
    std::string msg = png.message;
    png_image_free(&png);
    throw IoError("PNG write '" + path.string() + "': " + msg);
  }
}

} // namespace

Image::Image(int height, int width, double fill) {
  if (height < 1 || width < 1) {
    throw DimensionError("image dimensions must be positive");
  }
  pixels_ = RowMatrix::Constant(height, width, fill);
}

Image::Image(RowMatrix pixels) : pixels_(std::move(pixels)) {
  if (pixels_.rows() < 1 || pixels_.cols() < 1) {
    throw DimensionError("image dimensions must be positive");
  }
}

Image Image::crop(int row, int col, int h, int w) const {
  if (row < 0 || col < 0 || h < 1 || w < 1 || row + h > height() || col + w > width()) {
    throw DimensionError("crop rectangle outside image");
  }
  return Image(RowMatrix(pixels_.block(row, col, h, w)));
}

Image Image::clamped() const {
  return Image(RowMatrix(pixels_.cwiseMax(0.0).cwiseMin(1.0)));
}

Image decode_pgm(std::string_view bytes) {
  PgmCursor cursor(bytes);
  std::string magic = cursor.token();
  if (magic != "P2" && magic != "P5") {
    throw FormatError("PGM: unsupported magic '" + magic + "'");
  }
  long width = cursor.number();
  long height = cursor.number();
  long maxval = cursor.number();
  if (width == 0 || height == 0) {
    throw FormatError("PGM: zero dimension");
  }
  if (maxval == 0 || maxval > 65535) {
    throw FormatError("PGM: maxval out of range");
  }
  Image image(static_cast<int>(height), static_cast<int>(width));
  const double scale = 1.0 / static_cast<double>(maxval);
  if (magic == "P2") {
    for (long r = 0; r < height; ++r) {
      for (long c = 0; c < width; ++c) {
        long v = cursor.number();
        if (v > maxval) throw FormatError("PGM: sample exceeds maxval");
        image(static_cast<int>(r), static_cast<int>(c)) = v * scale;
      }
    }
    return image;
  }
  const std::size_t bytes_per_sample = maxval > 255 ? 2 : 1;
  const std::size_t offset = cursor.raster_offset();
  const std::size_t needed = static_cast<std::size_t>(width * height) * bytes_per_sample;
  if (offset > bytes.size() || bytes.size() - offset < needed) {
    throw FormatError("PGM: truncated raster");
  }
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data() + offset);
  for (long r = 0; r < height; ++r) {
    for (long c = 0; c < width; ++c) {
      std::size_t i = static_cast<std::size_t>(r * width + c) * bytes_per_sample;
      long v = bytes_per_sample == 2 ? (data[i] << 8) | data[i + 1] : data[i];
      image(static_cast<int>(r), static_cast<int>(c)) = std::min(1.0, v * scale);
    }
  }
  return image;
}

std::string encode_pgm(const Image& image) {
  std::ostringstream header;
  header << "P5\n" << image.width() << ' ' << image.height() << "\n255\n";
  std::vector<std::uint8_t> gray = quantize(image);
  std::string out = header.str();
  out.append(reinterpret_cast<const char*>(gray.data()), gray.size());
  return out;
}

Image load_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw IoError("no such file '" + path.string() + "'");
  }
  const std::string ext = lowercase_extension(path);
  if (ext == ".png") {
    return load_png(path);
  }
  if (ext == ".pgm") {
    return decode_pgm(read_file(path));
  }
  throw FormatError("unsupported image format '" + ext + "' for '" + path.string() + "'");
}

void save_image(const Image& image, const std::filesystem::path& path) {
  const std::string ext = lowercase_extension(path);
  if (ext == ".png") {
    save_png(image, path);
  } else if (ext == ".pgm") {
    write_file(path, encode_pgm(image));
  } else {
    throw FormatError("unsupported output format '" + ext + "'");
  }
}

} // namespace dbdl
