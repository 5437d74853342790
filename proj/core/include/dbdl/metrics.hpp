#pragma once

#include "dbdl/image.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <string_view>

namespace dbdl {

/// 10 log10(1 / MSE) for intensities in [0,1]; +infinity for identical images.
double psnr(const Image& a, const Image& b);

/// Mean SSIM over all valid 11x11 Gaussian windows (sigma 1.5),
/// C1 = 0.01^2, C2 = 0.03^2. Both sides must be at least 11 pixels.
double ssim(const Image& a, const Image& b);

/// Variance of the Sobel gradient magnitude over interior pixels, on
/// intensities scaled to [0,255].
double sobel_variance(const Image& image);

/// Variance of the 4-neighbour Laplacian response over interior pixels, on
/// intensities scaled to [0,255].
double laplace_variance(const Image& image);

/// 20 log10(||estimate - truth||_F / ||truth||_F); -infinity on an exact match.
double blur_error_db(const Eigen::Ref<const Eigen::MatrixXd>& estimate,
                     const Eigen::Ref<const Eigen::MatrixXd>& truth);

struct MetricReport {
  std::optional<double> psnr;
  std::optional<double> ssim;
  double sobel_var = 0.0;
  double laplace_var = 0.0;
  std::optional<double> blur_error_db;

  /// Full-reference metrics are filled only when `reference` is given.
  static MetricReport evaluate(const Image& image, const Image* reference = nullptr);

  std::string to_key_value() const;
};

inline constexpr std::string_view kCsvHeader =
    "image,k,sigma,mode,psnr,ssim,sobel_var,laplace_var";

/// One CSV row matching kCsvHeader; absent values are left empty.
std::string csv_row(std::string_view image, int k, std::optional<double> sigma,
                    std::string_view mode, const MetricReport& report);

} // namespace dbdl
