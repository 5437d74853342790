#pragma once

#include "dbdl/image.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dbdl {

/// k x k filter taps, row-major.
using Kernel = RowMatrix;

struct GaussianKernelSpec {
  int size = 7;       // odd, >= 1
  double sigma = 1.2; // > 0
};

/// exp(-(x^2+y^2)/(2 sigma^2)) sampled on the integer grid centred at
/// (k-1)/2 and normalized to unit sum.
Kernel gaussian_kernel(const GaussianKernelSpec& spec);

/// Valid-region correlation: out(i,j) = sum_{u,v} kernel(u,v) img(i+u, j+v).
/// The output shrinks by k-1 in each axis. The kernel is not flipped.
Image narrow_convolve(const Image& image, const Kernel& kernel);

/// Row-major raster order, the same order the blur-matrix builder uses.
Eigen::VectorXd vectorize(const RowMatrix& patch);
RowMatrix devectorize(const Eigen::Ref<const Eigen::VectorXd>& column, int height, int width);

struct PatchOrigin {
  int image = 0;
  int row = 0;
  int col = 0;

  friend bool operator==(const PatchOrigin&, const PatchOrigin&) = default;
};

/// Vectorized patches stored as columns. `origins` is empty when the set was
/// shuffled or synthesized.
struct PatchSet {
  int patch_height = 0;
  int patch_width = 0;
  Eigen::MatrixXd columns;
  std::vector<PatchOrigin> origins;

  Eigen::Index dimension() const { return columns.rows(); }
  Eigen::Index size() const { return columns.cols(); }
};

struct PatchPairs {
  PatchSet hr; // p x p
  PatchSet lr; // (p-k+1) x (p-k+1), same origins as hr
};

/// Samples `count` origins uniformly over all valid positions of all image
/// pairs. An HR patch of side p at (r,c) is paired with the LR patch of side
/// p-k+1 at the same (r,c), so lr = B hr holds exactly for blurred data.
PatchPairs extract_patch_pairs(std::span<const Image> hr, std::span<const Image> lr, int patch,
                               int kernel, int count, std::uint64_t seed);
PatchPairs extract_patch_pairs(const Image& hr, const Image& lr, int patch, int kernel, int count,
                               std::uint64_t seed);

/// Independent uniform sampling of square patches over a set of images.
PatchSet extract_patches(std::span<const Image> images, int side, int count, std::uint64_t seed);

/// Random column permutation; the result carries no origins.
PatchSet shuffle_patches(const PatchSet& patches, std::uint64_t seed);

/// Places `image` in the centre of a height x width frame, filling the
/// border by replicating the nearest edge pixel.
Image embed_centered(const Image& image, int height, int width);

struct ManifestRecord {
  std::string source;
  std::string output;
  int k = 0;
  double sigma = 0.0;
  int height = 0;
  int width = 0;

  friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

struct Manifest {
  std::vector<ManifestRecord> records;

  std::string to_text() const;
  static Manifest parse(std::string_view text);
};

/// Blurs every input with the Gaussian spec and writes the results (same
/// file name, 8-bit) plus `manifest.txt` into `out_dir`.
Manifest generate_blurred_dataset(std::span<const std::filesystem::path> inputs,
                                  const GaussianKernelSpec& spec,
                                  const std::filesystem::path& out_dir);

} // namespace dbdl
