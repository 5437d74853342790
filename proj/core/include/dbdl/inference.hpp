#pragma once

#include "dbdl/image.hpp"
#include "dbdl/sparse.hpp"
#include "dbdl/training.hpp"

#include <Eigen/Core>

#include <optional>
#include <vector>

namespace dbdl {

/// D^l = B D^h for the realized blur of a checkpoint.
Eigen::MatrixXd derive_lr_dictionary(const ModelCheckpoint& checkpoint);

/// A coding dictionary for LR patches and the matching synthesis dictionary
/// for HR patches, column-aligned.
struct CoupledDictionaries {
  Eigen::MatrixXd lr; // (p-k+1)^2 x N_c
  Eigen::MatrixXd hr; // p^2 x N_c
  int patch_size = 0;
  int kernel_size = 0;
};

CoupledDictionaries coupled_dictionaries(const ModelCheckpoint& checkpoint);

struct DeblurOptions {
  int stride = 1; // values above the HR patch side act as the patch side
  std::optional<double> lambda; // defaults to the training lambda
  FistaOptions fista{};
  Eigen::Index batch = 4096;    // patches sparse-coded per FISTA call
};

/// Window origins 0, stride, 2 stride, ... plus a final origin snapped to
/// length - window when the stride does not land on it.
std::vector<int> patch_offsets(int length, int window, int stride);

/// Overlap-averaging accumulator over the HR frame.
class AggregationBuffer {
public:
  AggregationBuffer(int height, int width);

  void add(int row, int col, const RowMatrix& patch);

  const RowMatrix& accumulator() const { return sum_; }
  const Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>& counts() const {
    return counts_;
  }

  /// Count-normalized average; throws if any pixel is uncovered.
  Image average() const;

private:
  RowMatrix sum_;
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> counts_;
};

/// Number of reconstructed HR patches covering each output pixel.
Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
coverage_counts(int lr_height, int lr_width, int patch_size, int kernel_size, int stride);

/// Sparse-codes every (p-k+1)^2 LR patch against D^l, synthesizes the p x p
/// HR patch D^h c at the same origin and averages overlaps. The output is
/// (H_l + k - 1) x (W_l + k - 1), clamped to [0,1].
Image deblur(const Image& lr, const CoupledDictionaries& dictionaries, double lambda,
             const DeblurOptions& options = {});

Image deblur(const Image& lr, const ModelCheckpoint& checkpoint, const DeblurOptions& options = {});

} // namespace dbdl
