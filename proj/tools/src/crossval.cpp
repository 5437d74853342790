#include "dbdl/cli.hpp"

#include "dbdl/errors.hpp"
#include "dbdl/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <set>

namespace dbdl::cli {

SelectionMetric parse_selection_metric(std::string_view text) {
  if (text == "psnr") return SelectionMetric::psnr;
  if (text == "sobel_var") return SelectionMetric::sobel_var;
  if (text == "laplace_var") return SelectionMetric::laplace_var;
  throw std::invalid_argument("unknown selection metric: " + std::string(text));
}

std::string_view to_string(SelectionMetric metric) {
  switch (metric) {
  case SelectionMetric::psnr: return "psnr";
  case SelectionMetric::sobel_var: return "sobel_var";
  case SelectionMetric::laplace_var: return "laplace_var";
  }
  return "?";
}

Image center_crop(const Image& image, int height, int width) {
  const int dh = image.height() - height;
  const int dw = image.width() - width;
  if (dh < 0 || dw < 0 || dh % 2 != 0 || dw % 2 != 0) {
    throw DimensionError("cannot center-crop " + std::to_string(image.height()) + "x" +
                         std::to_string(image.width()) + " to " + std::to_string(height) + "x" +
                         std::to_string(width));
  }
  return image.crop(dh / 2, dw / 2, height, width);
}

std::pair<Image, Image> crop_to_common(const Image& a, const Image& b) {
  const int h = std::min(a.height(), b.height());
  const int w = std::min(a.width(), b.width());
  return {center_crop(a, h, w), center_crop(b, h, w)};
}

std::pair<Image, Image> align_training_pair(const Image& hr, const Image& lr, int k) {
  if (k < 1) throw DimensionError("kernel side must be >= 1");
  const int lr_h = std::min(lr.height(), hr.height() - k + 1);
  const int lr_w = std::min(lr.width(), hr.width() - k + 1);
  if (lr_h < 1 || lr_w < 1) throw DimensionError("HR image is smaller than the kernel");
  return {center_crop(hr, lr_h + k - 1, lr_w + k - 1), center_crop(lr, lr_h, lr_w)};
}

Eigen::Index argmax_first(const Eigen::Ref<const Eigen::VectorXd>& scores) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < scores.size(); ++i) {
    if (scores(i) > scores(best)) best = i;
  }
  return best;
}

namespace {

double score(const Image& output, const Image* reference, SelectionMetric metric) {
  switch (metric) {
  case SelectionMetric::psnr: return psnr(output, *reference);
  case SelectionMetric::sobel_var: return sobel_variance(output);
  case SelectionMetric::laplace_var: return laplace_variance(output);
  }
  return 0.0;
}

} // namespace

CrossValReport cross_validate(std::span<const ModelCheckpoint> models,
                              std::span<const NamedImage> inputs,
                              std::span<const Image> references, SelectionMetric metric,
                              const DeblurOptions& options) {
  if (models.empty()) throw std::invalid_argument("cross-validation needs at least one model");
  if (inputs.empty()) throw std::invalid_argument("cross-validation needs at least one image");
  if (!references.empty() && references.size() != inputs.size()) {
    throw DimensionError("one reference per input image is required");
  }
  if (metric == SelectionMetric::psnr && references.empty()) {
    throw std::invalid_argument("PSNR selection needs ground truth");
  }
  std::vector<std::size_t> order(models.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return models[a].kernel_size < models[b].kernel_size;
  });
  std::set<int> distinct;
  for (const auto& m : models) distinct.insert(m.kernel_size);
  if (distinct.size() != models.size()) {
    throw std::invalid_argument("cross-validation models must have distinct kernel sizes");
  }

  CrossValReport report;
  report.metric = metric;
  const int k_min = models[order.front()].kernel_size;
  for (std::size_t idx : order) report.ks.push_back(models[idx].kernel_size);
  const auto n_img = static_cast<Eigen::Index>(inputs.size());
  const auto n_k = static_cast<Eigen::Index>(models.size());
  report.scores.resize(n_img, n_k);

  for (Eigen::Index i = 0; i < n_img; ++i) {
    const NamedImage& input = inputs[static_cast<std::size_t>(i)];
    report.images.push_back(input.name);
    // Evaluation window: the smallest model's output (or the reference, if
    // smaller), so every candidate is scored on the same pixels.
    int h = input.image.height() + k_min - 1;
    int w = input.image.width() + k_min - 1;
    const Image* reference = references.empty() ? nullptr : &references[static_cast<std::size_t>(i)];
    if (reference) {
      h = std::min(h, reference->height());
      w = std::min(w, reference->width());
    }
    std::optional<Image> ref_window;
    if (reference) ref_window = center_crop(*reference, h, w);
    for (Eigen::Index j = 0; j < n_k; ++j) {
      const ModelCheckpoint& model = models[order[static_cast<std::size_t>(j)]];
      const Image output = center_crop(deblur(input.image, model, options), h, w);
      report.scores(i, j) = score(output, ref_window ? &*ref_window : nullptr, metric);
    }
    report.best_per_image.push_back(
        report.ks[static_cast<std::size_t>(argmax_first(report.scores.row(i).transpose()))]);
  }
  report.mean_scores = report.scores.colwise().mean().transpose();
  report.selected_k = report.ks[static_cast<std::size_t>(argmax_first(report.mean_scores))];
  return report;
}

void print_report(const CrossValReport& report, std::ostream& out) {
  out << "metric," << to_string(report.metric) << '\n';
  out << "image";
  for (int k : report.ks) out << ",k=" << k;
  out << ",best_k\n";
  for (std::size_t i = 0; i < report.images.size(); ++i) {
    out << report.images[i];
    for (Eigen::Index j = 0; j < report.scores.cols(); ++j) {
      out << ',' << format_double(report.scores(static_cast<Eigen::Index>(i), j));
    }
    out << ',' << report.best_per_image[i] << '\n';
  }
  out << "mean";
  for (Eigen::Index j = 0; j < report.mean_scores.size(); ++j) {
    out << ',' << format_double(report.mean_scores(j));
  }
  out << ',' << report.selected_k << '\n';
  out << "selected_k," << report.selected_k << '\n';
}

} // namespace dbdl::cli
