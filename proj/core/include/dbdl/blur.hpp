#pragma once

#include "dbdl/adam.hpp"
#include "dbdl/imaging.hpp"
#include "dbdl/types.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace dbdl {

/// The k^2 binary selectors M_i whose theta-weighted sum is the narrow
/// convolution matrix for a p x p patch. Selector i corresponds to kernel tap
/// (i / k, i % k) and puts exactly one 1 in every row; it is stored as the
/// column index of that 1 per row.
class BasisMatrixSet {
public:
  BasisMatrixSet() = default;
  BasisMatrixSet(int kernel_size, int patch_size);

  int kernel_size() const { return kernel_; }
  int patch_size() const { return patch_; }
  int lr_side() const { return patch_ - kernel_ + 1; }
  Eigen::Index lr_dimension() const { return static_cast<Eigen::Index>(lr_side()) * lr_side(); }
  Eigen::Index hr_dimension() const { return static_cast<Eigen::Index>(patch_) * patch_; }
  int count() const { return kernel_ * kernel_; }

  /// Column holding the 1 of selector `tap` in LR row `row`.
  Eigen::Index column(int tap, Eigen::Index row) const {
    return base_[static_cast<std::size_t>(row)] + offset_[static_cast<std::size_t>(tap)];
  }

  Eigen::MatrixXd dense(int tap) const;

  /// sum_i theta_i M_i as a dense N_l x N_h matrix.
  Eigen::MatrixXd combine(const Eigen::Ref<const Eigen::VectorXd>& theta) const;

  /// (sum_i theta_i M_i) X without forming the matrix.
  Eigen::MatrixXd apply(const Eigen::Ref<const Eigen::VectorXd>& theta,
                        const Eigen::Ref<const Eigen::MatrixXd>& hr) const;

private:
  int kernel_ = 0;
  int patch_ = 0;
  std::vector<Eigen::Index> base_;   // per LR row: HR index of the window's top-left pixel
  std::vector<Eigen::Index> offset_; // per tap: HR index offset inside the window
};

BasisMatrixSet build_basis_matrices(int kernel_size, int patch_size);

/// Block-Toeplitz blur operator for p x p patches, parameterized by the k^2
/// kernel taps theta (row-major).
class BlurMatrix {
public:
  BlurMatrix() = default;
  BlurMatrix(Eigen::VectorXd theta, int kernel_size, int patch_size);

  int kernel_size() const { return basis_.kernel_size(); }
  int patch_size() const { return basis_.patch_size(); }
  Eigen::Index rows() const { return basis_.lr_dimension(); }
  Eigen::Index cols() const { return basis_.hr_dimension(); }

  const Eigen::VectorXd& theta() const { return theta_; }
  const BasisMatrixSet& basis() const { return basis_; }
  Kernel kernel() const;

  Eigen::MatrixXd dense() const { return basis_.combine(theta_); }
  Eigen::MatrixXd apply(const Eigen::Ref<const Eigen::MatrixXd>& hr) const {
    return basis_.apply(theta_, hr);
  }

private:
  Eigen::VectorXd theta_;
  BasisMatrixSet basis_;
};

BlurMatrix build_blur_matrix(const Kernel& kernel, int patch_size);

/// Flat normalized kernel, theta_i = 1/k^2.
BlurMatrix uniform_blur(int kernel_size, int patch_size);

/// Least-squares projection of a dense N_l x N_h matrix onto the Toeplitz
/// family (the mean over each selector's support).
Eigen::VectorXd project_to_structure(const Eigen::Ref<const Eigen::MatrixXd>& dense,
                                     const BasisMatrixSet& basis);

/// Frobenius distance from `dense` to its structured projection.
double structure_residual(const Eigen::Ref<const Eigen::MatrixXd>& dense,
                          const BasisMatrixSet& basis);

struct GeneralBlurEstimate {
  Eigen::MatrixXd matrix; // N_l x N_h, no structure imposed
  Eigen::Index rank = 0;
  bool rank_deficient = false;
  std::string warning;
};

/// Unstructured estimate B = Y_l (D C)^+ through a truncated SVD
/// (singular values below 1e-10 sigma_max dropped). Throws NumericalError
/// when D C is identically zero.
GeneralBlurEstimate bme_gr(const Eigen::Ref<const Eigen::MatrixXd>& lr_signals,
                           const Dictionary& dictionary, const SparseCodes& codes);

/// ||Y_l - sum theta_i M_i D C||_F^2.
double structured_blur_objective(const Eigen::Ref<const Eigen::MatrixXd>& lr_signals,
                                 const Eigen::Ref<const Eigen::MatrixXd>& synthesis,
                                 const BasisMatrixSet& basis,
                                 const Eigen::Ref<const Eigen::VectorXd>& theta);

/// Exact gradient -2 <Y_l - B D C, M_i D C>_F for every tap.
Eigen::VectorXd structured_blur_gradient(const Eigen::Ref<const Eigen::MatrixXd>& lr_signals,
                                         const Eigen::Ref<const Eigen::MatrixXd>& synthesis,
                                         const BasisMatrixSet& basis,
                                         const Eigen::Ref<const Eigen::VectorXd>& theta);

struct StructuredBlurEstimate {
  BlurMatrix blur;
  std::vector<double> objective; // before the first step, then after every step
};

/// Runs `iterations` Adam steps on theta starting from `initial`. The Adam
/// state is carried by the caller so successive calls continue the same run.
StructuredBlurEstimate bme_sr(const Eigen::Ref<const Eigen::MatrixXd>& lr_signals,
                              const Dictionary& dictionary, const SparseCodes& codes,
                              const BlurMatrix& initial, AdamState& adam, int iterations);

} // namespace dbdl
