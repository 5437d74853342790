#pragma once

#include "dbdl/types.hpp"

#include <Eigen/Core>

#include <vector>

namespace dbdl {

/// min_C ||Y - A C||_F^2 + lambda ||C||_{1,1}, solved column by column.
/// A is either D^h or the derived B D^h.
struct LassoProblem {
  Eigen::Ref<const Eigen::MatrixXd> dictionary;
  Eigen::Ref<const Eigen::MatrixXd> signals;
  double lambda;
};

struct FistaOptions {
  int max_iterations = 200;
  double tolerance = 1e-6; // relative objective change per column
};

struct FistaResult {
  SparseCodes codes;
  std::vector<int> iterations; // per column
  long restarts = 0;
};

/// Monotone FISTA with adaptive restart: a column whose accelerated step
/// would raise its objective takes a plain proximal step from its current
/// iterate instead and resets its momentum. Each column stops on its own
/// once the relative objective change drops below the tolerance, so solving
/// columns jointly is identical to solving them one at a time. `initial`,
/// when given, replaces the zero starting point.
FistaResult fista_solve(const LassoProblem& problem, const FistaOptions& options = {},
                        const Eigen::MatrixXd* initial = nullptr);

/// 1 / (2 sigma_max(A)^2), the step for the unhalved quadratic term;
/// sigma_max by power iteration.
double lipschitz_step(const Eigen::Ref<const Eigen::MatrixXd>& dictionary);

/// Largest eigenvalue of a symmetric positive semidefinite matrix.
double largest_eigenvalue(const Eigen::Ref<const Eigen::MatrixXd>& gram, double tolerance = 1e-12,
                          int max_iterations = 5000);

double lasso_objective(const Eigen::Ref<const Eigen::MatrixXd>& dictionary,
                       const Eigen::Ref<const Eigen::VectorXd>& signal,
                       const Eigen::Ref<const Eigen::VectorXd>& code, double lambda);

Eigen::VectorXd soft_threshold(const Eigen::Ref<const Eigen::VectorXd>& v, double level);

} // namespace dbdl
