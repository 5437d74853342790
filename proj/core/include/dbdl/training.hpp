#pragma once

#include "dbdl/blur.hpp"
#include "dbdl/config.hpp"
#include "dbdl/imaging.hpp"
#include "dbdl/types.hpp"

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <vector>

namespace dbdl {

/// Objective terms after one outer iteration. Paired mode:
/// hr = ||Y_h - D C||^2, lr = ||Y_l - B D C||^2, sparsity = lambda ||C||_1.
/// No-correspondence mode: hr = ||X_h - D C~||^2, lr = ||Y_l - B D C||^2,
/// sparsity = lambda (||C||_1 + ||C~||_1).
struct LossTerms {
  double hr_fidelity = 0.0;
  double lr_fidelity = 0.0;
  double sparsity = 0.0;

  double total() const { return hr_fidelity + lr_fidelity + sparsity; }
  friend bool operator==(const LossTerms&, const LossTerms&) = default;
};

using LossTrace = std::vector<LossTerms>;

struct ModelCheckpoint {
  int kernel_size = 1;
  int patch_size = 1;
  Eigen::VectorXd theta;                   // k^2 taps; projection of the dense estimate for BME-GR
  Dictionary dictionary;                   // D^h
  TrainConfig config;
  LossTrace trace;
  std::optional<Eigen::MatrixXd> dense_blur; // BME-GR estimate, N_l x N_h

  /// The realized N_l x N_h blur: the dense estimate when present, the
  /// Toeplitz matrix of theta otherwise.
  Eigen::MatrixXd blur_matrix() const;
  BlurMatrix structured_blur() const { return BlurMatrix(theta, kernel_size, patch_size); }

  /// Throws FormatError when dimensions are not self-consistent.
  void validate() const;
};

/// Snapshot handed to an observer after every outer iteration. Returning
/// false stops training early; the checkpoint then reflects the last
/// completed iteration.
struct TrainProgress {
  int iteration = 0; // 1-based
  const LossTerms& loss;
  const Eigen::MatrixXd& blur; // current realized blur
  const Dictionary& dictionary;
};
using TrainObserver = std::function<bool(const TrainProgress&)>;

/// Alternates sparse coding of the HR patches, a K-SVD sweep and blur
/// estimation (GR or SR) for cfg.outer_iterations rounds.
ModelCheckpoint train_paired(const PatchSet& hr, const PatchSet& lr, const TrainConfig& cfg,
                             const TrainObserver& observer = {});

/// Unpaired variant: the HR set X_h and LR set Y_l are coded independently
/// (against D^h and B D^h), the blur is re-estimated with BME-SR, then the
/// joint K-SVD sweep updates D^h and both code matrices. The kernel taps are
/// rescaled to unit sum after every blur update.
ModelCheckpoint train_no_correspondence(const PatchSet& hr, const PatchSet& lr,
                                        const TrainConfig& cfg,
                                        const TrainObserver& observer = {});

/// Dispatches on cfg.mode.
ModelCheckpoint train(const PatchSet& hr, const PatchSet& lr, const TrainConfig& cfg,
                      const TrainObserver& observer = {});

} // namespace dbdl
