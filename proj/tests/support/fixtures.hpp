#pragma once

#include "dbdl/image.hpp"
#include "dbdl/imaging.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace dbdl::testing {

/// Piecewise-smooth grayscale scene: a shaded background, random ellipses
/// and rectangles with sharp edges and a faint oriented texture. Values stay
/// inside [0.02, 0.98].
Image synthetic_scene(int height, int width, std::uint64_t seed);

std::vector<Image> synthetic_scenes(int count, int height, int width, std::uint64_t seed);

/// Narrow-convolves every image with the Gaussian spec.
std::vector<Image> blur_all(const std::vector<Image>& images, const GaussianKernelSpec& spec);

/// Uniform random matrix in [lo, hi).
Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed,
                              double lo = -1.0, double hi = 1.0);

/// Column-sparse random codes with exactly `nonzeros` entries per column.
Eigen::MatrixXd random_sparse_codes(Eigen::Index atoms, Eigen::Index signals, int nonzeros,
                                    std::uint64_t seed);

} // namespace dbdl::testing
