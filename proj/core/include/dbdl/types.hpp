#pragma once

#include <Eigen/Core>

#include <vector>

namespace dbdl {

/// N_h x N_c matrix of unit-norm atoms. Every mutation goes through
/// `set_atom`, which renormalizes; a zero column becomes a unit coordinate
/// vector.
class Dictionary {
public:
  Dictionary() = default;
  explicit Dictionary(Eigen::MatrixXd atoms);

  Eigen::Index dimension() const { return atoms_.rows(); }
  Eigen::Index size() const { return atoms_.cols(); }

  const Eigen::MatrixXd& atoms() const { return atoms_; }
  auto atom(Eigen::Index t) const { return atoms_.col(t); }

  void set_atom(Eigen::Index t, const Eigen::Ref<const Eigen::VectorXd>& atom);

  /// Stores `atom` verbatim; the caller guarantees unit norm.
  void set_unit_atom(Eigen::Index t, const Eigen::Ref<const Eigen::VectorXd>& atom) {
    atoms_.col(t) = atom;
  }

private:
  Eigen::MatrixXd atoms_;
};

/// N_c x N coefficient matrix, one column per signal.
struct SparseCodes {
  Eigen::MatrixXd values;

  SparseCodes() = default;
  explicit SparseCodes(Eigen::MatrixXd v) : values(std::move(v)) {}
  static SparseCodes zeros(Eigen::Index atoms, Eigen::Index signals) {
    return SparseCodes(Eigen::MatrixXd::Zero(atoms, signals));
  }

  Eigen::Index atoms() const { return values.rows(); }
  Eigen::Index signals() const { return values.cols(); }

  std::vector<Eigen::Index> support_sizes() const;
  /// Largest support over all columns (the sparsity level S actually reached).
  Eigen::Index max_support() const;
  double l1_norm() const { return values.cwiseAbs().sum(); }
};

} // namespace dbdl
