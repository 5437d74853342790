#include "dbdl/metrics.hpp"

#include "dbdl/config.hpp"
#include "dbdl/errors.hpp"
#include "dbdl/imaging.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace dbdl {

namespace {

void require_same_shape(const Image& a, const Image& b) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw DimensionError("images differ in size");
  }
}

void require_min_size(const Image& image, int side) {
  if (image.height() < side || image.width() < side) {
    throw DimensionError("image smaller than " + std::to_string(side) + "x" + std::to_string(side));
  }
}

double variance(const RowMatrix& m) {
  const double mean = m.mean();
  return (m.array() - mean).square().mean();
}

std::string optional_field(const std::optional<double>& v) {
  if (!v) return {};
  if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
  return format_double(*v);
}

} // namespace

double psnr(const Image& a, const Image& b) {
  require_same_shape(a, b);
  const double mse = (a.pixels() - b.pixels()).squaredNorm() / static_cast<double>(a.pixels().size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

double ssim(const Image& a, const Image& b) {
  require_same_shape(a, b);
  require_min_size(a, 11);
  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;
  const Kernel window = gaussian_kernel({11, 1.5});
  auto filter = [&](const RowMatrix& m) { return narrow_convolve(Image(m), window).pixels(); };
  const RowMatrix& x = a.pixels();
  const RowMatrix& y = b.pixels();
  const RowMatrix mx = filter(x);
  const RowMatrix my = filter(y);
  const RowMatrix sxx = filter(x.cwiseProduct(x)) - mx.cwiseProduct(mx);
  const RowMatrix syy = filter(y.cwiseProduct(y)) - my.cwiseProduct(my);
  const RowMatrix sxy = filter(x.cwiseProduct(y)) - mx.cwiseProduct(my);
  const auto num = (2.0 * mx.array() * my.array() + c1) * (2.0 * sxy.array() + c2);
  const auto den = (mx.array().square() + my.array().square() + c1) * (sxx.array() + syy.array() + c2);
  return (num / den).mean();
}

double sobel_variance(const Image& image) {
  require_min_size(image, 3);
  Kernel gx(3, 3);
  gx << -1, 0, 1, -2, 0, 2, -1, 0, 1;
  const Kernel gy = gx.transpose();
  const Image scaled(RowMatrix(image.pixels() * 255.0));
  const RowMatrix dx = narrow_convolve(scaled, gx).pixels();
  const RowMatrix dy = narrow_convolve(scaled, gy).pixels();
  return variance(RowMatrix((dx.array().square() + dy.array().square()).sqrt()));
}

double laplace_variance(const Image& image) {
  require_min_size(image, 3);
  Kernel lap(3, 3);
  lap << 0, 1, 0, 1, -4, 1, 0, 1, 0;
  const Image scaled(RowMatrix(image.pixels() * 255.0));
  return variance(narrow_convolve(scaled, lap).pixels());
}

double blur_error_db(const Eigen::Ref<const Eigen::MatrixXd>& estimate,
                     const Eigen::Ref<const Eigen::MatrixXd>& truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
    throw DimensionError("blur matrices differ in shape");
  }
  const double reference = truth.norm();
  if (!(reference > 0.0)) {
    throw std::invalid_argument("reference blur matrix is zero");
  }
  const double error = (estimate - truth).norm();
  if (error == 0.0) return -std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(error / reference);
}

MetricReport MetricReport::evaluate(const Image& image, const Image* reference) {
  MetricReport r;
  if (reference) {
    r.psnr = dbdl::psnr(image, *reference);
    r.ssim = dbdl::ssim(image, *reference);
  }
  r.sobel_var = sobel_variance(image);
  r.laplace_var = laplace_variance(image);
  return r;
}

std::string MetricReport::to_key_value() const {
  std::ostringstream out;
  if (psnr) out << "psnr = " << optional_field(psnr) << '\n';
  if (ssim) out << "ssim = " << optional_field(ssim) << '\n';
  out << "sobel_var = " << format_double(sobel_var) << '\n';
  out << "laplace_var = " << format_double(laplace_var) << '\n';
  if (blur_error_db) out << "b_error_db = " << optional_field(blur_error_db) << '\n';
  return out.str();
}

std::string csv_row(std::string_view image, int k, std::optional<double> sigma,
                    std::string_view mode, const MetricReport& report) {
  std::ostringstream out;
  out << image << ',' << k << ',' << optional_field(sigma) << ',' << mode << ','
      << optional_field(report.psnr) << ',' << optional_field(report.ssim) << ','
      << format_double(report.sobel_var) << ',' << format_double(report.laplace_var);
  return out.str();
}

} // namespace dbdl
