#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace dbdl::testing {

Image synthetic_scene(int height, int width, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  const double base = uniform(0.3, 0.6);
  const double gx = uniform(-0.15, 0.15);
  const double gy = uniform(-0.15, 0.15);
  RowMatrix px(height, width);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      px(r, c) = base + gx * c / width + gy * r / height;
    }
  }

  const int shapes = 8 + static_cast<int>(unit(rng) * 6);
  const double max_extent = std::max(4.0, std::min(height, width) / 3.0);
  for (int s = 0; s < shapes; ++s) {
    const double cy = uniform(0, height);
    const double cx = uniform(0, width);
    const double ry = uniform(2.5, max_extent);
    const double rx = uniform(2.5, max_extent);
    const double delta = uniform(0.15, 0.4) * (unit(rng) < 0.5 ? -1.0 : 1.0);
    const bool ellipse = unit(rng) < 0.5;
    for (int r = 0; r < height; ++r) {
      for (int c = 0; c < width; ++c) {
        const double dy = (r - cy) / ry;
        const double dx = (c - cx) / rx;
        const bool inside = ellipse ? dx * dx + dy * dy <= 1.0
                                    : std::abs(dx) <= 1.0 && std::abs(dy) <= 1.0;
        if (inside) px(r, c) += delta;
      }
    }
  }

  const double fx = uniform(0.3, 0.9);
  const double fy = uniform(0.3, 0.9);
  const double phase = uniform(0.0, 2.0 * std::numbers::pi);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      px(r, c) += 0.03 * std::sin(fx * c + fy * r + phase);
    }
  }
  return Image(RowMatrix(px.cwiseMax(0.02).cwiseMin(0.98)));
}

std::vector<Image> synthetic_scenes(int count, int height, int width, std::uint64_t seed) {
  std::vector<Image> out;
  for (int i = 0; i < count; ++i) out.push_back(synthetic_scene(height, width, seed + 7919u * i));
  return out;
}

std::vector<Image> blur_all(const std::vector<Image>& images, const GaussianKernelSpec& spec) {
  const Kernel kernel = gaussian_kernel(spec);
  std::vector<Image> out;
  for (const Image& img : images) out.push_back(narrow_convolve(img, kernel));
  return out;
}

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, double lo,
                              double hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
  }
  return m;
}

Eigen::MatrixXd random_sparse_codes(Eigen::Index atoms, Eigen::Index signals, int nonzeros,
                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> value(0.2, 1.0);
  std::uniform_int_distribution<Eigen::Index> pick(0, atoms - 1);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(atoms, signals);
  for (Eigen::Index j = 0; j < signals; ++j) {
    int placed = 0;
    while (placed < nonzeros) {
      const Eigen::Index t = pick(rng);
      if (c(t, j) != 0.0) continue;
      c(t, j) = value(rng) * (rng() % 2 == 0 ? 1.0 : -1.0);
      ++placed;
    }
  }
  return c;
}

} // namespace dbdl::testing
