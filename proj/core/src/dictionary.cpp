#include "dbdl/dictionary.hpp"

#include "dbdl/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace dbdl {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr Index kDenseRank1Limit = 96;

VectorXd unit_coordinate(Index dim, Index t) {
  VectorXd e = VectorXd::Zero(dim);
  e(t % dim) = 1.0;
  return e;
}

void fix_sign(VectorXd& atom, VectorXd& coefficients) {
  Index idx = 0;
  atom.cwiseAbs().maxCoeff(&idx);
  if (atom(idx) < 0.0) {
    atom = -atom;
    coefficients = -coefficients;
  }
}

std::vector<Index> row_support(const MatrixXd& codes, Index row) {
  std::vector<Index> support;
  for (Index j = 0; j < codes.cols(); ++j) {
    if (codes(row, j) != 0.0) support.push_back(j);
  }
  return support;
}

MatrixXd gather_columns(const MatrixXd& m, const std::vector<Index>& cols) {
  MatrixXd out(m.rows(), static_cast<Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out.col(static_cast<Index>(i)) = m.col(cols[i]);
  }
  return out;
}

// Worst-represented signal not yet used as a replacement, or -1 when every
// remaining signal is reconstructed exactly.
Index worst_signal(const MatrixXd& residual, std::vector<bool>& used) {
  Index best = -1;
  double best_norm = 0.0;
  for (Index j = 0; j < residual.cols(); ++j) {
    if (used[static_cast<std::size_t>(j)]) continue;
    const double n = residual.col(j).squaredNorm();
    if (n > best_norm) {
      best_norm = n;
      best = j;
    }
  }
  if (best >= 0) used[static_cast<std::size_t>(best)] = true;
  return best;
}

} // namespace

Dictionary::Dictionary(MatrixXd atoms) : atoms_(std::move(atoms)) {
  for (Index t = 0; t < atoms_.cols(); ++t) {
    set_atom(t, VectorXd(atoms_.col(t)));
  }
}

void Dictionary::set_atom(Index t, const Eigen::Ref<const VectorXd>& atom) {
  const double norm = atom.norm();
  if (norm > 0.0 && std::isfinite(norm)) {
    atoms_.col(t) = atom / norm;
  } else {
    atoms_.col(t) = unit_coordinate(atoms_.rows(), t);
  }
}

Dictionary init_dictionary(const Eigen::Ref<const MatrixXd>& patches, Index atoms,
                           std::uint64_t seed) {
  if (patches.cols() == 0 || patches.rows() == 0) {
    throw std::invalid_argument("cannot initialize a dictionary from an empty patch set");
  }
  if (atoms < 1) {
    throw std::invalid_argument("atom count must be positive");
  }
  std::mt19937_64 rng(seed);
  const Index n = patches.cols();
  std::vector<Index> chosen;
  chosen.reserve(static_cast<std::size_t>(atoms));
  if (n >= atoms) {
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    for (Index i = 0; i < atoms; ++i) {
      std::uniform_int_distribution<Index> pick(i, n - 1);
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(pick(rng))]);
      chosen.push_back(order[static_cast<std::size_t>(i)]);
    }
  } else {
    std::uniform_int_distribution<Index> pick(0, n - 1);
    for (Index i = 0; i < atoms; ++i) chosen.push_back(pick(rng));
  }
  MatrixXd d(patches.rows(), atoms);
  for (Index t = 0; t < atoms; ++t) {
    d.col(t) = patches.col(chosen[static_cast<std::size_t>(t)]);
  }
  return Dictionary(std::move(d));
}

Rank1Fit leading_rank1(const Eigen::Ref<const MatrixXd>& residual, const VectorXd* warm_start) {
  const Index m = residual.rows();
  const Index n = residual.cols();
  Rank1Fit fit;
  if (m == 0) {
    throw DimensionError("empty residual block");
  }
  if (n == 0 || residual.squaredNorm() == 0.0) {
    fit.atom = (warm_start && warm_start->norm() > 0.0) ? VectorXd(warm_start->normalized())
                                                       : unit_coordinate(m, 0);
    fit.coefficients = VectorXd::Zero(n);
    return fit;
  }

  VectorXd u;
  if (std::min(m, n) <= kDenseRank1Limit) {
    if (n <= m) {
      Eigen::SelfAdjointEigenSolver<MatrixXd> eig(residual.transpose() * residual);
      u = residual * eig.eigenvectors().col(n - 1);
    } else {
      Eigen::SelfAdjointEigenSolver<MatrixXd> eig(residual * residual.transpose());
      u = eig.eigenvectors().col(m - 1);
    }
    u.normalize();
  } else {
    if (warm_start && warm_start->size() == m && (residual.transpose() * *warm_start).norm() > 0.0) {
      u = warm_start->normalized();
    } else {
      Index j = 0;
      residual.colwise().squaredNorm().maxCoeff(&j);
      u = residual.col(j).normalized();
    }
    double previous = 0.0;
    for (int it = 0; it < 2000; ++it) {
      VectorXd w = residual * (residual.transpose() * u);
      const double rayleigh = u.dot(w);
      u = w.normalized();
      if (it > 0 && std::abs(rayleigh - previous) <= 1e-15 * rayleigh) break;
      previous = rayleigh;
    }
  }
  fit.coefficients = residual.transpose() * u;
  fix_sign(u, fit.coefficients);
  fit.atom = std::move(u);
  fit.sigma = fit.coefficients.norm();
  return fit;
}

KsvdReport ksvd_update_paired(const Eigen::Ref<const MatrixXd>& signals, Dictionary& dictionary,
                              SparseCodes& codes) {
  if (signals.rows() != dictionary.dimension() || codes.atoms() != dictionary.size() ||
      codes.signals() != signals.cols()) {
    throw DimensionError("K-SVD: signals, dictionary and codes disagree in shape");
  }
  KsvdReport report;
  MatrixXd residual = signals - dictionary.atoms() * codes.values;
  report.error_before = residual.squaredNorm();
  std::vector<bool> used(static_cast<std::size_t>(signals.cols()), false);

  for (Index t = 0; t < dictionary.size(); ++t) {
    const std::vector<Index> support = row_support(codes.values, t);
    if (support.empty()) {
      const Index j = worst_signal(residual, used);
      if (j >= 0) {
        dictionary.set_atom(t, signals.col(j));
        report.replaced.push_back(t);
      }
      continue;
    }
    const VectorXd old_atom = dictionary.atom(t);
    MatrixXd block = gather_columns(residual, support);
    for (std::size_t i = 0; i < support.size(); ++i) {
      block.col(static_cast<Index>(i)) += old_atom * codes.values(t, support[i]);
    }
    const Rank1Fit fit = leading_rank1(block, &old_atom);
    dictionary.set_unit_atom(t, fit.atom);
    for (std::size_t i = 0; i < support.size(); ++i) {
      const Index j = support[i];
      codes.values(t, j) = fit.coefficients(static_cast<Index>(i));
      residual.col(j) = block.col(static_cast<Index>(i)) - fit.atom * codes.values(t, j);
    }
  }
  report.error_after = (signals - dictionary.atoms() * codes.values).squaredNorm();
  return report;
}

BackProjector back_projector(const Eigen::Ref<const MatrixXd>& blur) {
  const MatrixXd gram = blur.transpose() * blur;
  const double trace = gram.trace();
  if (!(trace > 0.0)) {
    throw NumericalError("blur matrix is zero; cannot back-project");
  }
  BackProjector out;
  Eigen::LLT<MatrixXd> llt(gram);
  if (llt.info() == Eigen::Success && llt.rcond() > 1e-12) {
    out.matrix = llt.solve(blur.transpose());
    return out;
  }
  const double ridge = 1e-8 * trace / static_cast<double>(gram.rows());
  MatrixXd regularized = gram;
  regularized.diagonal().array() += ridge;
  Eigen::LLT<MatrixXd> reg(regularized);
  if (reg.info() != Eigen::Success) {
    throw NumericalError("regularized B^T B is not positive definite");
  }
  out.matrix = reg.solve(blur.transpose());
  out.regularized = true;
  return out;
}

JointKsvdReport joint_ksvd_update(const Eigen::Ref<const MatrixXd>& lr_signals,
                                  const Eigen::Ref<const MatrixXd>& hr_signals,
                                  const Eigen::Ref<const MatrixXd>& blur, Dictionary& dictionary,
                                  SparseCodes& lr_codes, SparseCodes& hr_codes) {
  const Index hr_dim = dictionary.dimension();
  if (blur.cols() != hr_dim || blur.rows() != lr_signals.rows() ||
      hr_signals.rows() != hr_dim || lr_codes.atoms() != dictionary.size() ||
      hr_codes.atoms() != dictionary.size() || lr_codes.signals() != lr_signals.cols() ||
      hr_codes.signals() != hr_signals.cols()) {
    throw DimensionError("joint K-SVD: operand shapes disagree");
  }
  const BackProjector projector = back_projector(blur);

  JointKsvdReport report;
  report.regularized = projector.regularized;
  MatrixXd lr_atoms = blur * dictionary.atoms();
  MatrixXd hr_residual = hr_signals - dictionary.atoms() * hr_codes.values;
  MatrixXd lr_residual = lr_signals - lr_atoms * lr_codes.values;
  report.objective_before = lr_residual.squaredNorm() + hr_residual.squaredNorm();
  std::vector<bool> used(static_cast<std::size_t>(hr_signals.cols()), false);

  for (Index t = 0; t < dictionary.size(); ++t) {
    const std::vector<Index> hr_support = row_support(hr_codes.values, t);
    const std::vector<Index> lr_support = row_support(lr_codes.values, t);
    if (hr_support.empty() && lr_support.empty()) {
      const Index j = worst_signal(hr_residual, used);
      if (j >= 0) {
        dictionary.set_atom(t, hr_signals.col(j));
        lr_atoms.col(t) = blur * dictionary.atom(t);
        report.replaced.push_back(t);
      }
      continue;
    }
    const VectorXd old_atom = dictionary.atom(t);
    const VectorXd old_lr_atom = lr_atoms.col(t);
    const Index nh = static_cast<Index>(hr_support.size());
    const Index nl = static_cast<Index>(lr_support.size());

    // Residuals with atom t removed.
    MatrixXd hr_block = gather_columns(hr_residual, hr_support);
    VectorXd gamma(nh + nl);
    for (Index i = 0; i < nh; ++i) {
      gamma(i) = hr_codes.values(t, hr_support[static_cast<std::size_t>(i)]);
      hr_block.col(i) += old_atom * gamma(i);
    }
    MatrixXd lr_block = gather_columns(lr_residual, lr_support);
    for (Index i = 0; i < nl; ++i) {
      gamma(nh + i) = lr_codes.values(t, lr_support[static_cast<std::size_t>(i)]);
      lr_block.col(i) += old_lr_atom * gamma(nh + i);
    }

    MatrixXd joint(hr_dim, nh + nl);
    joint.leftCols(nh) = hr_block;
    joint.rightCols(nl) = projector.matrix * lr_block;

    report.surrogate_before.push_back((joint - old_atom * gamma.transpose()).squaredNorm());
    const Rank1Fit fit = leading_rank1(joint, &old_atom);
    report.surrogate_after.push_back(
        (joint - fit.atom * fit.coefficients.transpose()).squaredNorm());
    report.updated.push_back(t);

    dictionary.set_unit_atom(t, fit.atom);
    const VectorXd new_lr_atom = blur * fit.atom;
    lr_atoms.col(t) = new_lr_atom;
    for (Index i = 0; i < nh; ++i) {
      const Index j = hr_support[static_cast<std::size_t>(i)];
      hr_codes.values(t, j) = fit.coefficients(i);
      hr_residual.col(j) = hr_block.col(i) - fit.atom * fit.coefficients(i);
    }
    for (Index i = 0; i < nl; ++i) {
      const Index j = lr_support[static_cast<std::size_t>(i)];
      lr_codes.values(t, j) = fit.coefficients(nh + i);
      lr_residual.col(j) = lr_block.col(i) - new_lr_atom * fit.coefficients(nh + i);
    }
  }
  report.objective_after =
      (lr_signals - blur * dictionary.atoms() * lr_codes.values).squaredNorm() +
      (hr_signals - dictionary.atoms() * hr_codes.values).squaredNorm();
  return report;
}

CdlModel cdl_train(const Eigen::Ref<const MatrixXd>& hr_signals,
                   const Eigen::Ref<const MatrixXd>& lr_signals, double lambda, int iterations,
                   const CdlOptions& options) {
  if (hr_signals.cols() != lr_signals.cols()) {
    throw DimensionError("CDL requires paired data: HR and LR column counts differ");
  }
  if (iterations < 0) {
    throw std::invalid_argument("iteration count must be non-negative");
  }
  const Index lr_dim = lr_signals.rows();
  MatrixXd stacked(lr_dim + hr_signals.rows(), hr_signals.cols());
  stacked.topRows(lr_dim) = lr_signals;
  stacked.bottomRows(hr_signals.rows()) = hr_signals;

  Dictionary dictionary = init_dictionary(stacked, options.atoms, options.seed);
  SparseCodes codes = SparseCodes::zeros(dictionary.size(), stacked.cols());
  CdlModel model;
  for (int it = 0; it < iterations; ++it) {
    const MatrixXd* warm = options.warm_start && it > 0 ? &codes.values : nullptr;
    codes = fista_solve({dictionary.atoms(), stacked, lambda}, options.fista, warm).codes;
    ksvd_update_paired(stacked, dictionary, codes);
    const double error = (stacked - dictionary.atoms() * codes.values).squaredNorm();
    model.error_trace.push_back(error);
    model.objective_trace.push_back(error + lambda * codes.l1_norm());
  }
  model.lr_atoms = dictionary.atoms().topRows(lr_dim);
  model.hr_atoms = dictionary.atoms().bottomRows(hr_signals.rows());
  model.codes = std::move(codes);
  return model;
}

} // namespace dbdl
