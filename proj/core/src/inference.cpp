#include "dbdl/inference.hpp"

#include "dbdl/errors.hpp"
#include "dbdl/imaging.hpp"

#include <algorithm>

namespace dbdl {

using Eigen::Index;
using Eigen::MatrixXd;
using IntMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

MatrixXd derive_lr_dictionary(const ModelCheckpoint& checkpoint) {
  checkpoint.validate();
  if (checkpoint.dense_blur) {
    return *checkpoint.dense_blur * checkpoint.dictionary.atoms();
  }
  return checkpoint.structured_blur().apply(checkpoint.dictionary.atoms());
}

CoupledDictionaries coupled_dictionaries(const ModelCheckpoint& checkpoint) {
  return {derive_lr_dictionary(checkpoint), checkpoint.dictionary.atoms(), checkpoint.patch_size,
          checkpoint.kernel_size};
}

std::vector<int> patch_offsets(int length, int window, int stride) {
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");
  if (window > length || window < 1) throw DimensionError("patch does not fit the image");
  std::vector<int> offsets;
  for (int o = 0; o + window <= length; o += stride) offsets.push_back(o);
  if (offsets.back() != length - window) offsets.push_back(length - window);
  return offsets;
}

AggregationBuffer::AggregationBuffer(int height, int width)
    : sum_(RowMatrix::Zero(height, width)), counts_(IntMatrix::Zero(height, width)) {}

void AggregationBuffer::add(int row, int col, const RowMatrix& patch) {
  sum_.block(row, col, patch.rows(), patch.cols()) += patch;
  counts_.block(row, col, patch.rows(), patch.cols()).array() += 1;
}

Image AggregationBuffer::average() const {
  if ((counts_.array() == 0).any()) {
    throw NumericalError("aggregation left uncovered pixels");
  }
  return Image(RowMatrix(sum_.array() / counts_.cast<double>().array()));
}

IntMatrix coverage_counts(int lr_height, int lr_width, int patch_size, int kernel_size,
                          int stride) {
  const int q = patch_size - kernel_size + 1;
  const int step = std::min(stride, patch_size);
  IntMatrix counts = IntMatrix::Zero(lr_height + kernel_size - 1, lr_width + kernel_size - 1);
  for (int r : patch_offsets(lr_height, q, step)) {
    for (int c : patch_offsets(lr_width, q, step)) {
      counts.block(r, c, patch_size, patch_size).array() += 1;
    }
  }
  return counts;
}

Image deblur(const Image& lr, const CoupledDictionaries& dicts, double lambda,
             const DeblurOptions& options) {
  const int p = dicts.patch_size;
  const int k = dicts.kernel_size;
  const int q = p - k + 1;
  if (k < 1 || q < 1) throw DimensionError("invalid patch geometry");
  if (dicts.lr.rows() != static_cast<Index>(q) * q ||
      dicts.hr.rows() != static_cast<Index>(p) * p || dicts.lr.cols() != dicts.hr.cols()) {
    throw DimensionError("coupled dictionaries do not match the patch geometry");
  }
  if (q > lr.height() || q > lr.width()) {
    throw DimensionError("LR patch side exceeds the LR image");
  }
  // Strides wider than an HR patch would leave gaps in the output.
  const int step = std::min(options.stride, p);
  const std::vector<int> rows = patch_offsets(lr.height(), q, step);
  const std::vector<int> cols = patch_offsets(lr.width(), q, step);
  std::vector<std::pair<int, int>> origins;
  origins.reserve(rows.size() * cols.size());
  for (int r : rows) {
    for (int c : cols) origins.emplace_back(r, c);
  }

  AggregationBuffer buffer(lr.height() + k - 1, lr.width() + k - 1);
  const Index batch = std::max<Index>(1, options.batch);
  for (std::size_t start = 0; start < origins.size(); start += static_cast<std::size_t>(batch)) {
    const std::size_t end = std::min(origins.size(), start + static_cast<std::size_t>(batch));
    MatrixXd signals(static_cast<Index>(q) * q, static_cast<Index>(end - start));
    for (std::size_t n = start; n < end; ++n) {
      const auto [r, c] = origins[n];
      signals.col(static_cast<Index>(n - start)) = vectorize(lr.pixels().block(r, c, q, q));
    }
    const SparseCodes codes = fista_solve({dicts.lr, signals, lambda}, options.fista).codes;
    // Column by column so the result does not depend on the batch size.
    Eigen::VectorXd patch(static_cast<Index>(p) * p);
    for (std::size_t n = start; n < end; ++n) {
      const auto [r, c] = origins[n];
      patch.noalias() = dicts.hr * codes.values.col(static_cast<Index>(n - start));
      buffer.add(r, c, devectorize(patch, p, p));
    }
  }
  return buffer.average().clamped();
}

Image deblur(const Image& lr, const ModelCheckpoint& checkpoint, const DeblurOptions& options) {
  return deblur(lr, coupled_dictionaries(checkpoint),
                options.lambda.value_or(checkpoint.config.lambda), options);
}

} // namespace dbdl
