#include "dbdl/training.hpp"

#include "dbdl/dictionary.hpp"
#include "dbdl/errors.hpp"
#include "dbdl/sparse.hpp"

#include <cmath>
#include <string>

namespace dbdl {

using Eigen::Index;
using Eigen::MatrixXd;

Eigen::MatrixXd ModelCheckpoint::blur_matrix() const {
  if (dense_blur) return *dense_blur;
  return structured_blur().dense();
}

void ModelCheckpoint::validate() const {
  if (kernel_size < 1 || patch_size < kernel_size) {
    throw FormatError("checkpoint: invalid kernel/patch sizes");
  }
  const Index hr_dim = static_cast<Index>(patch_size) * patch_size;
  const Index lr_side = patch_size - kernel_size + 1;
  if (theta.size() != static_cast<Index>(kernel_size) * kernel_size) {
    throw FormatError("checkpoint: theta length does not match k^2");
  }
  if (dictionary.dimension() != hr_dim || dictionary.size() < 1) {
    throw FormatError("checkpoint: dictionary shape does not match the patch size");
  }
  if (dense_blur && (dense_blur->rows() != lr_side * lr_side || dense_blur->cols() != hr_dim)) {
    throw FormatError("checkpoint: dense blur shape does not match the patch geometry");
  }
  if (!theta.allFinite() || !dictionary.atoms().allFinite()) {
    throw FormatError("checkpoint: non-finite parameters");
  }
}

namespace {

void check_geometry(const PatchSet& hr, const PatchSet& lr, const TrainConfig& cfg) {
  const Index p = cfg.patch_size;
  const Index q = cfg.patch_size - cfg.kernel_size + 1;
  if (hr.dimension() != p * p) {
    throw DimensionError("HR patches must be " + std::to_string(p) + "x" + std::to_string(p));
  }
  if (lr.dimension() != q * q) {
    throw DimensionError("LR patches must be " + std::to_string(q) + "x" + std::to_string(q));
  }
  if (hr.size() == 0 || lr.size() == 0) {
    throw DimensionError("empty training patch set");
  }
}

void record(LossTrace& trace, const LossTerms& loss, int iteration) {
  if (!std::isfinite(loss.total())) {
    throw NumericalError("training diverged: non-finite loss at outer iteration " +
                         std::to_string(iteration));
  }
  trace.push_back(loss);
}

AdamOptions adam_options(const TrainConfig& cfg) {
  return {cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon};
}

FistaOptions fista_options(const TrainConfig& cfg) {
  return {cfg.fista_max_iterations, cfg.fista_tolerance};
}

} // namespace

ModelCheckpoint train_paired(const PatchSet& hr, const PatchSet& lr, const TrainConfig& config,
                             const TrainObserver& observer) {
  TrainConfig cfg = config;
  cfg.mode = TrainMode::paired;
  cfg.validate();
  check_geometry(hr, lr, cfg);
  if (hr.size() != lr.size()) {
    throw DimensionError("paired training needs equally many HR and LR patches");
  }
  const MatrixXd& yh = hr.columns;
  const MatrixXd& yl = lr.columns;

  Dictionary dictionary = init_dictionary(yh, cfg.atoms, cfg.seed);
  BlurMatrix blur = uniform_blur(cfg.kernel_size, cfg.patch_size);
  std::optional<MatrixXd> dense;
  AdamState adam(blur.theta().size(), adam_options(cfg));
  SparseCodes codes = SparseCodes::zeros(cfg.atoms, yh.cols());
  LossTrace trace;

  for (int it = 1; it <= cfg.outer_iterations; ++it) {
    const MatrixXd* warm = cfg.warm_start && it > 1 ? &codes.values : nullptr;
    codes = fista_solve({dictionary.atoms(), yh, cfg.lambda}, fista_options(cfg), warm).codes;
    ksvd_update_paired(yh, dictionary, codes);
    if ((it - 1) % cfg.blur_every == 0) {
      if (cfg.bme == BlurEstimator::structured) {
        blur = bme_sr(yl, dictionary, codes, blur, adam, cfg.adam_steps).blur;
      } else {
        dense = bme_gr(yl, dictionary, codes).matrix;
      }
    }
    const MatrixXd synthesis = dictionary.atoms() * codes.values;
    const MatrixXd current = dense ? *dense : blur.dense();
    LossTerms loss{(yh - synthesis).squaredNorm(), (yl - current * synthesis).squaredNorm(),
                   cfg.lambda * codes.l1_norm()};
    record(trace, loss, it);
    if (observer && !observer({it, trace.back(), current, dictionary})) break;
  }

  ModelCheckpoint cp;
  cp.kernel_size = cfg.kernel_size;
  cp.patch_size = cfg.patch_size;
  cp.theta = dense ? project_to_structure(*dense, blur.basis()) : blur.theta();
  cp.dictionary = std::move(dictionary);
  cp.config = cfg;
  cp.trace = std::move(trace);
  cp.dense_blur = std::move(dense);
  return cp;
}

ModelCheckpoint train_no_correspondence(const PatchSet& hr, const PatchSet& lr,
                                        const TrainConfig& config, const TrainObserver& observer) {
  TrainConfig cfg = config;
  cfg.mode = TrainMode::no_correspondence;
  cfg.validate();
  check_geometry(hr, lr, cfg);
  const MatrixXd& xh = hr.columns;
  const MatrixXd& yl = lr.columns;

  Dictionary dictionary = init_dictionary(xh, cfg.atoms, cfg.seed);
  BlurMatrix blur = uniform_blur(cfg.kernel_size, cfg.patch_size);
  AdamState adam(blur.theta().size(), adam_options(cfg));
  SparseCodes lr_codes = SparseCodes::zeros(cfg.atoms, yl.cols());
  SparseCodes hr_codes = SparseCodes::zeros(cfg.atoms, xh.cols());
  LossTrace trace;

  for (int it = 1; it <= cfg.outer_iterations; ++it) {
    const bool warm = cfg.warm_start && it > 1;
    const MatrixXd lr_atoms = blur.apply(dictionary.atoms());
    lr_codes = fista_solve({lr_atoms, yl, cfg.lambda}, fista_options(cfg),
                           warm ? &lr_codes.values : nullptr)
                   .codes;
    hr_codes = fista_solve({dictionary.atoms(), xh, cfg.lambda}, fista_options(cfg),
                           warm ? &hr_codes.values : nullptr)
                   .codes;
    if ((it - 1) % cfg.blur_every == 0) {
      blur = bme_sr(yl, dictionary, lr_codes, blur, adam, cfg.adam_steps).blur;
      // B -> sB, C -> C/s keeps the LR fit and shrinks the l1 term, so the
      // gain is fixed at one.
      const double gain = blur.theta().sum();
      if (gain > 0.0) blur = BlurMatrix(blur.theta() / gain, cfg.kernel_size, cfg.patch_size);
    }
    const MatrixXd current = blur.dense();
    joint_ksvd_update(yl, xh, current, dictionary, lr_codes, hr_codes);

    LossTerms loss{(xh - dictionary.atoms() * hr_codes.values).squaredNorm(),
                   (yl - current * dictionary.atoms() * lr_codes.values).squaredNorm(),
                   cfg.lambda * (lr_codes.l1_norm() + hr_codes.l1_norm())};
    record(trace, loss, it);
    if (observer && !observer({it, trace.back(), current, dictionary})) break;
  }

  ModelCheckpoint cp;
  cp.kernel_size = cfg.kernel_size;
  cp.patch_size = cfg.patch_size;
  cp.theta = blur.theta();
  cp.dictionary = std::move(dictionary);
  cp.config = cfg;
  cp.trace = std::move(trace);
  return cp;
}

ModelCheckpoint train(const PatchSet& hr, const PatchSet& lr, const TrainConfig& cfg,
                      const TrainObserver& observer) {
  return cfg.mode == TrainMode::paired ? train_paired(hr, lr, cfg, observer)
                                       : train_no_correspondence(hr, lr, cfg, observer);
}

} // namespace dbdl
