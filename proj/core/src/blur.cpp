#include "dbdl/blur.hpp"

#include "dbdl/errors.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

namespace dbdl {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Row-gathering product evaluated on the transposed (signal-major) layout so
// that every gathered HR row is a contiguous column: out_t = (B X)^T.
MatrixXd apply_transposed(const BasisMatrixSet& basis, const Eigen::Ref<const VectorXd>& theta,
                          const MatrixXd& hr_t) {
  const Index lr_dim = basis.lr_dimension();
  MatrixXd out_t = MatrixXd::Zero(hr_t.rows(), lr_dim);
  for (Index r = 0; r < lr_dim; ++r) {
    auto col = out_t.col(r);
    for (int tap = 0; tap < basis.count(); ++tap) {
      col.noalias() += theta(tap) * hr_t.col(basis.column(tap, r));
    }
  }
  return out_t;
}

VectorXd gradient_transposed(const BasisMatrixSet& basis, const MatrixXd& residual_t,
                             const MatrixXd& hr_t) {
  VectorXd grad = VectorXd::Zero(basis.count());
  for (Index r = 0; r < basis.lr_dimension(); ++r) {
    for (int tap = 0; tap < basis.count(); ++tap) {
      grad(tap) += residual_t.col(r).dot(hr_t.col(basis.column(tap, r)));
    }
  }
  return -2.0 * grad;
}

void check_theta(const BasisMatrixSet& basis, Index size) {
  if (size != basis.count()) {
    throw DimensionError("theta length must equal k^2");
  }
}

} // namespace

BasisMatrixSet::BasisMatrixSet(int kernel_size, int patch_size)
    : kernel_(kernel_size), patch_(patch_size) {
  if (kernel_size < 1) {
    throw std::invalid_argument("kernel size must be >= 1");
  }
  if (kernel_size > patch_size) {
    throw DimensionError("kernel side exceeds patch side");
  }
  const int q = lr_side();
  base_.reserve(static_cast<std::size_t>(q) * q);
  for (int a = 0; a < q; ++a) {
    for (int b = 0; b < q; ++b) {
      base_.push_back(static_cast<Index>(a) * patch_ + b);
    }
  }
  offset_.reserve(static_cast<std::size_t>(kernel_) * kernel_);
  for (int u = 0; u < kernel_; ++u) {
    for (int v = 0; v < kernel_; ++v) {
      offset_.push_back(static_cast<Index>(u) * patch_ + v);
    }
  }
}

MatrixXd BasisMatrixSet::dense(int tap) const {
  if (tap < 0 || tap >= count()) {
    throw std::out_of_range("basis index out of range");
  }
  MatrixXd m = MatrixXd::Zero(lr_dimension(), hr_dimension());
  for (Index r = 0; r < lr_dimension(); ++r) {
    m(r, column(tap, r)) = 1.0;
  }
  return m;
}

MatrixXd BasisMatrixSet::combine(const Eigen::Ref<const VectorXd>& theta) const {
  check_theta(*this, theta.size());
  MatrixXd m = MatrixXd::Zero(lr_dimension(), hr_dimension());
  for (Index r = 0; r < lr_dimension(); ++r) {
    for (int tap = 0; tap < count(); ++tap) {
      m(r, column(tap, r)) = theta(tap);
    }
  }
  return m;
}

MatrixXd BasisMatrixSet::apply(const Eigen::Ref<const VectorXd>& theta,
                               const Eigen::Ref<const MatrixXd>& hr) const {
  check_theta(*this, theta.size());
  if (hr.rows() != hr_dimension()) {
    throw DimensionError("HR signal dimension does not match the blur operator");
  }
  const MatrixXd hr_t = hr.transpose();
  return apply_transposed(*this, theta, hr_t).transpose();
}

BasisMatrixSet build_basis_matrices(int kernel_size, int patch_size) {
  return BasisMatrixSet(kernel_size, patch_size);
}

BlurMatrix::BlurMatrix(VectorXd theta, int kernel_size, int patch_size)
    : theta_(std::move(theta)), basis_(kernel_size, patch_size) {
  check_theta(basis_, theta_.size());
}

Kernel BlurMatrix::kernel() const {
  return devectorize(theta_, kernel_size(), kernel_size());
}

BlurMatrix build_blur_matrix(const Kernel& kernel, int patch_size) {
  if (kernel.rows() != kernel.cols()) {
    throw DimensionError("blur kernel must be square");
  }
  return BlurMatrix(vectorize(kernel), static_cast<int>(kernel.rows()), patch_size);
}

BlurMatrix uniform_blur(int kernel_size, int patch_size) {
  const int taps = kernel_size * kernel_size;
  return BlurMatrix(VectorXd::Constant(taps, 1.0 / taps), kernel_size, patch_size);
}

VectorXd project_to_structure(const Eigen::Ref<const MatrixXd>& dense,
                              const BasisMatrixSet& basis) {
  if (dense.rows() != basis.lr_dimension() || dense.cols() != basis.hr_dimension()) {
    throw DimensionError("matrix shape does not match the basis");
  }
  VectorXd theta = VectorXd::Zero(basis.count());
  for (Index r = 0; r < basis.lr_dimension(); ++r) {
    for (int tap = 0; tap < basis.count(); ++tap) {
      theta(tap) += dense(r, basis.column(tap, r));
    }
  }
  return theta / static_cast<double>(basis.lr_dimension());
}

double structure_residual(const Eigen::Ref<const MatrixXd>& dense, const BasisMatrixSet& basis) {
  return (dense - basis.combine(project_to_structure(dense, basis))).norm();
}

GeneralBlurEstimate bme_gr(const Eigen::Ref<const MatrixXd>& lr_signals,
                           const Dictionary& dictionary, const SparseCodes& codes) {
  if (dictionary.size() != codes.atoms()) {
    throw DimensionError("dictionary and codes disagree on the atom count");
  }
  if (lr_signals.cols() != codes.signals()) {
    throw DimensionError("LR signals and codes disagree on the signal count");
  }
  const MatrixXd synthesis = dictionary.atoms() * codes.values;
  Eigen::BDCSVD<MatrixXd> svd(synthesis, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd& s = svd.singularValues();
  if (s.size() == 0 || !(s(0) > 0.0)) {
    throw NumericalError("blur estimation: D C is zero (rank-zero system)");
  }
  const double cutoff = 1e-10 * s(0);
  Index rank = 0;
  while (rank < s.size() && s(rank) > cutoff) ++rank;

  GeneralBlurEstimate est;
  est.rank = rank;
  est.rank_deficient = rank < synthesis.rows();
  if (est.rank_deficient) {
    est.warning = "D C has numerical rank " + std::to_string(rank) + " < " +
                  std::to_string(synthesis.rows()) + "; using the truncated pseudo-inverse";
  }
  const auto u = svd.matrixU().leftCols(rank);
  const auto v = svd.matrixV().leftCols(rank);
  const VectorXd inv = s.head(rank).cwiseInverse();
  est.matrix = ((lr_signals * v) * inv.asDiagonal()) * u.transpose();
  return est;
}

double structured_blur_objective(const Eigen::Ref<const MatrixXd>& lr_signals,
                                 const Eigen::Ref<const MatrixXd>& synthesis,
                                 const BasisMatrixSet& basis,
                                 const Eigen::Ref<const VectorXd>& theta) {
  return (lr_signals - basis.apply(theta, synthesis)).squaredNorm();
}

VectorXd structured_blur_gradient(const Eigen::Ref<const MatrixXd>& lr_signals,
                                  const Eigen::Ref<const MatrixXd>& synthesis,
                                  const BasisMatrixSet& basis,
                                  const Eigen::Ref<const VectorXd>& theta) {
  check_theta(basis, theta.size());
  const MatrixXd hr_t = synthesis.transpose();
  const MatrixXd residual_t = lr_signals.transpose() - apply_transposed(basis, theta, hr_t);
  return gradient_transposed(basis, residual_t, hr_t);
}

StructuredBlurEstimate bme_sr(const Eigen::Ref<const MatrixXd>& lr_signals,
                              const Dictionary& dictionary, const SparseCodes& codes,
                              const BlurMatrix& initial, AdamState& adam, int iterations) {
  const BasisMatrixSet& basis = initial.basis();
  if (dictionary.size() != codes.atoms() || dictionary.dimension() != basis.hr_dimension()) {
    throw DimensionError("dictionary shape does not match codes or blur operator");
  }
  if (lr_signals.rows() != basis.lr_dimension() || lr_signals.cols() != codes.signals()) {
    throw DimensionError("LR signals do not match the blur operator or codes");
  }
  if (adam.first_moment().size() != basis.count()) {
    throw DimensionError("Adam state length must equal k^2");
  }
  if (iterations < 0) {
    throw std::invalid_argument("iteration count must be non-negative");
  }

  const MatrixXd hr_t = (dictionary.atoms() * codes.values).transpose();
  const MatrixXd lr_t = lr_signals.transpose();
  VectorXd theta = initial.theta();

  StructuredBlurEstimate out;
  out.objective.reserve(static_cast<std::size_t>(iterations) + 1);
  for (int it = 0; it <= iterations; ++it) {
    const MatrixXd residual_t = lr_t - apply_transposed(basis, theta, hr_t);
    out.objective.push_back(residual_t.squaredNorm());
    if (it == iterations) break;
    theta += adam.step(gradient_transposed(basis, residual_t, hr_t));
  }
  out.blur = BlurMatrix(std::move(theta), basis.kernel_size(), basis.patch_size());
  return out;
}

} // namespace dbdl
