#pragma once

#include "dbdl/sparse.hpp"
#include "dbdl/types.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace dbdl {

/// Picks `atoms` columns of `patches` at random (with replacement only when
/// there are fewer patches than atoms) and normalizes them.
Dictionary init_dictionary(const Eigen::Ref<const Eigen::MatrixXd>& patches, Eigen::Index atoms,
                           std::uint64_t seed);

/// Best rank-1 approximation atom * coefficients^T of a residual block.
/// The atom has unit norm and its largest-magnitude entry is positive.
struct Rank1Fit {
  Eigen::VectorXd atom;
  Eigen::VectorXd coefficients; // sigma_1 * v_1
  double sigma = 0.0;
};

/// `warm_start` seeds the power iteration used for large blocks; small
/// blocks are solved through a dense eigendecomposition.
Rank1Fit leading_rank1(const Eigen::Ref<const Eigen::MatrixXd>& residual,
                       const Eigen::VectorXd* warm_start = nullptr);

struct KsvdReport {
  double error_before = 0.0; // ||Y - D C||_F^2
  double error_after = 0.0;
  std::vector<Eigen::Index> replaced;
};

/// One K-SVD sweep over the atoms in ascending order. Atoms with an empty
/// support are replaced by the worst-represented signal (normalized), each
/// signal used at most once per sweep; nothing is replaced when every signal
/// is reconstructed exactly.
KsvdReport ksvd_update_paired(const Eigen::Ref<const Eigen::MatrixXd>& signals,
                              Dictionary& dictionary, SparseCodes& codes);

/// (B^T B)^{-1} B^T. Falls back to B^T B + 1e-8 tr(B^T B)/N_h I when B^T B is
/// numerically singular.
struct BackProjector {
  Eigen::MatrixXd matrix; // N_h x N_l
  bool regularized = false;
};
BackProjector back_projector(const Eigen::Ref<const Eigen::MatrixXd>& blur);

struct JointKsvdReport {
  std::vector<double> surrogate_before; // ||E_t - d_t gamma_t^T||^2 per updated atom, old (d, gamma)
  std::vector<double> surrogate_after;
  std::vector<Eigen::Index> updated;
  std::vector<Eigen::Index> replaced;
  double objective_before = 0.0; // ||Y_l - B D C||^2 + ||X_h - D C~||^2
  double objective_after = 0.0;
  bool regularized = false;
};

/// Dual-domain K-SVD sweep for unpaired data: HR residuals and
/// back-projected LR residuals of each atom are concatenated and refit by
/// a single rank-1 update shared by both code matrices.
JointKsvdReport joint_ksvd_update(const Eigen::Ref<const Eigen::MatrixXd>& lr_signals,
                                  const Eigen::Ref<const Eigen::MatrixXd>& hr_signals,
                                  const Eigen::Ref<const Eigen::MatrixXd>& blur,
                                  Dictionary& dictionary, SparseCodes& lr_codes,
                                  SparseCodes& hr_codes);

struct CdlOptions {
  Eigen::Index atoms = 400;
  FistaOptions fista{};
  std::uint64_t seed = 0;
  bool warm_start = true;
};

struct CdlModel {
  Eigen::MatrixXd lr_atoms; // top block of the stacked dictionary
  Eigen::MatrixXd hr_atoms; // bottom block
  SparseCodes codes;
  std::vector<double> error_trace;     // stacked ||Y - D C||^2 after each iteration
  std::vector<double> objective_trace; // plus lambda ||C||_1
};

/// Coupled dictionary learning baseline on the stacked system [Y_l; Y_h].
/// Requires paired data (equal column counts).
CdlModel cdl_train(const Eigen::Ref<const Eigen::MatrixXd>& hr_signals,
                   const Eigen::Ref<const Eigen::MatrixXd>& lr_signals, double lambda,
                   int iterations, const CdlOptions& options = {});

} // namespace dbdl
