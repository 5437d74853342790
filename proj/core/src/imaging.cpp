#include "dbdl/imaging.hpp"

#include "dbdl/config.hpp"
#include "dbdl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace dbdl {

Kernel gaussian_kernel(const GaussianKernelSpec& spec) {
  if (spec.size < 1 || spec.size % 2 == 0) {
    throw std::invalid_argument("gaussian kernel size must be odd and >= 1");
  }
  if (!(spec.sigma > 0.0) || !std::isfinite(spec.sigma)) {
    throw std::invalid_argument("gaussian sigma must be positive");
  }
  const int k = spec.size;
  const double centre = (k - 1) / 2.0;
  const double denom = 2.0 * spec.sigma * spec.sigma;
  Kernel kernel(k, k);
  for (int u = 0; u < k; ++u) {
    for (int v = 0; v < k; ++v) {
      const double x = u - centre;
      const double y = v - centre;
      kernel(u, v) = std::exp(-(x * x + y * y) / denom);
    }
  }
  kernel /= kernel.sum();
  return kernel;
}

Image narrow_convolve(const Image& image, const Kernel& kernel) {
  const int kh = static_cast<int>(kernel.rows());
  const int kw = static_cast<int>(kernel.cols());
  if (kh < 1 || kw < 1) {
    throw DimensionError("empty kernel");
  }
  if (kh > image.height() || kw > image.width()) {
    throw DimensionError("kernel larger than image");
  }
  const int oh = image.height() - kh + 1;
  const int ow = image.width() - kw + 1;
  RowMatrix out = RowMatrix::Zero(oh, ow);
  const RowMatrix& src = image.pixels();
  for (int u = 0; u < kh; ++u) {
    for (int v = 0; v < kw; ++v) {
      out.noalias() += kernel(u, v) * src.block(u, v, oh, ow);
    }
  }
  return Image(std::move(out));
}

Eigen::VectorXd vectorize(const RowMatrix& patch) {
  return Eigen::Map<const Eigen::VectorXd>(patch.data(), patch.size());
}

RowMatrix devectorize(const Eigen::Ref<const Eigen::VectorXd>& column, int height, int width) {
  if (column.size() != static_cast<Eigen::Index>(height) * width) {
    throw DimensionError("vector length does not match patch shape");
  }
  RowMatrix patch(height, width);
  Eigen::Map<Eigen::VectorXd>(patch.data(), patch.size()) = column;
  return patch;
}

namespace {

// Picks `count` (image, row, col) origins for windows of size `window`,
// uniformly over every valid position of every image.
std::vector<PatchOrigin> sample_origins(std::span<const Image> images, int window, int count,
                                        std::uint64_t seed) {
  std::vector<long long> positions;
  positions.reserve(images.size());
  for (const Image& img : images) {
    if (window > img.height() || window > img.width()) {
      throw DimensionError("patch larger than image");
    }
    positions.push_back(static_cast<long long>(img.height() - window + 1) *
                        (img.width() - window + 1));
  }
  std::vector<long long> cumulative(positions.size());
  std::partial_sum(positions.begin(), positions.end(), cumulative.begin());

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<long long> pick(0, cumulative.back() - 1);
  std::vector<PatchOrigin> origins;
  origins.reserve(static_cast<std::size_t>(count));
  for (int n = 0; n < count; ++n) {
    long long flat = pick(rng);
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), flat);
    const int id = static_cast<int>(it - cumulative.begin());
    if (id > 0) flat -= cumulative[static_cast<std::size_t>(id - 1)];
    const int cols = images[static_cast<std::size_t>(id)].width() - window + 1;
    origins.push_back({id, static_cast<int>(flat / cols), static_cast<int>(flat % cols)});
  }
  return origins;
}

PatchSet gather(std::span<const Image> images, const std::vector<PatchOrigin>& origins, int side) {
  PatchSet set;
  set.patch_height = side;
  set.patch_width = side;
  set.columns.resize(static_cast<Eigen::Index>(side) * side,
                     static_cast<Eigen::Index>(origins.size()));
  for (std::size_t n = 0; n < origins.size(); ++n) {
    const PatchOrigin& o = origins[n];
    const RowMatrix block = images[static_cast<std::size_t>(o.image)].pixels().block(o.row, o.col,
                                                                                       side, side);
    set.columns.col(static_cast<Eigen::Index>(n)) = vectorize(block);
  }
  set.origins = origins;
  return set;
}

} // namespace

PatchPairs extract_patch_pairs(std::span<const Image> hr, std::span<const Image> lr, int patch,
                               int kernel, int count, std::uint64_t seed) {
  if (hr.empty() || hr.size() != lr.size()) {
    throw DimensionError("paired extraction needs equally many HR and LR images");
  }
  if (kernel < 1) {
    throw std::invalid_argument("kernel size must be >= 1");
  }
  if (patch < kernel) {
    throw DimensionError("patch side must be at least the kernel side");
  }
  if (count < 1) {
    throw std::invalid_argument("patch count must be >= 1");
  }
  for (std::size_t i = 0; i < hr.size(); ++i) {
    if (lr[i].height() != hr[i].height() - kernel + 1 ||
        lr[i].width() != hr[i].width() - kernel + 1) {
      throw DimensionError("LR image dimensions must equal HR dimensions minus k-1");
    }
  }
  std::vector<PatchOrigin> origins = sample_origins(hr, patch, count, seed);
  PatchPairs pairs;
  pairs.hr = gather(hr, origins, patch);
  pairs.lr = gather(lr, origins, patch - kernel + 1);
  return pairs;
}

PatchPairs extract_patch_pairs(const Image& hr, const Image& lr, int patch, int kernel, int count,
                               std::uint64_t seed) {
  return extract_patch_pairs(std::span<const Image>(&hr, 1), std::span<const Image>(&lr, 1), patch,
                             kernel, count, seed);
}

PatchSet extract_patches(std::span<const Image> images, int side, int count, std::uint64_t seed) {
  if (images.empty()) {
    throw std::invalid_argument("no images to sample from");
  }
  if (side < 1 || count < 1) {
    throw std::invalid_argument("patch side and count must be >= 1");
  }
  return gather(images, sample_origins(images, side, count, seed), side);
}

PatchSet shuffle_patches(const PatchSet& patches, std::uint64_t seed) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(patches.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  PatchSet out;
  out.patch_height = patches.patch_height;
  out.patch_width = patches.patch_width;
  out.columns.resize(patches.columns.rows(), patches.columns.cols());
  for (std::size_t n = 0; n < order.size(); ++n) {
    out.columns.col(static_cast<Eigen::Index>(n)) = patches.columns.col(order[n]);
  }
  return out;
}

Image embed_centered(const Image& image, int height, int width) {
  if (height < image.height() || width < image.width()) {
    throw DimensionError("frame smaller than image");
  }
  const int top = (height - image.height()) / 2;
  const int left = (width - image.width()) / 2;
  Image out(height, width);
  for (int r = 0; r < height; ++r) {
    const int sr = std::clamp(r - top, 0, image.height() - 1);
    for (int c = 0; c < width; ++c) {
      const int sc = std::clamp(c - left, 0, image.width() - 1);
      out(r, c) = image(sr, sc);
    }
  }
  return out;
}

std::string Manifest::to_text() const {
  std::ostringstream out;
  out << "# blurred dataset manifest\n";
  for (const ManifestRecord& r : records) {
    out << "\n[image]\n"
        << "source = " << r.source << '\n'
        << "output = " << r.output << '\n'
        << "k = " << r.k << '\n'
        << "sigma = " << format_double(r.sigma) << '\n'
        << "height = " << r.height << '\n'
        << "width = " << r.width << '\n';
  }
  return out.str();
}

Manifest Manifest::parse(std::string_view text) {
  Manifest manifest;
  for (const KeyValueSection& section : parse_key_value(text)) {
    if (section.name.empty() && section.entries.empty()) continue;
    if (section.name != "image") {
      throw FormatError("manifest: unexpected section '" + section.name + "'");
    }
    ManifestRecord r;
    r.source = section.require("source");
    r.output = section.require("output");
    r.k = parse_int(section.require("k"));
    r.sigma = parse_double(section.require("sigma"));
    r.height = parse_int(section.require("height"));
    r.width = parse_int(section.require("width"));
    manifest.records.push_back(std::move(r));
  }
  return manifest;
}

Manifest generate_blurred_dataset(std::span<const std::filesystem::path> inputs,
                                  const GaussianKernelSpec& spec,
                                  const std::filesystem::path& out_dir) {
  if (inputs.empty()) {
    throw std::invalid_argument("no input images");
  }
  const Kernel kernel = gaussian_kernel(spec);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());
  }
  Manifest manifest;
  for (const std::filesystem::path& source : inputs) {
    const Image blurred = narrow_convolve(load_image(source), kernel);
    const std::filesystem::path output = out_dir / source.filename();
    save_image(blurred, output);
    manifest.records.push_back({source.string(), output.string(), spec.size, spec.sigma,
                                blurred.height(), blurred.width()});
  }
  const std::filesystem::path manifest_path = out_dir / "manifest.txt";
  std::ofstream out(manifest_path, std::ios::binary | std::ios::trunc);
  out << manifest.to_text();
  if (!out) {
    throw IoError("failed writing '" + manifest_path.string() + "'");
  }
  return manifest;
}

} // namespace dbdl
