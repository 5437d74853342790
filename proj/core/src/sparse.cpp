#include "dbdl/sparse.hpp"

#include "dbdl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dbdl {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::vector<Index> SparseCodes::support_sizes() const {
  std::vector<Index> sizes(static_cast<std::size_t>(signals()));
  for (Index j = 0; j < signals(); ++j) {
    sizes[static_cast<std::size_t>(j)] = (values.col(j).array() != 0.0).count();
  }
  return sizes;
}

Index SparseCodes::max_support() const {
  const auto sizes = support_sizes();
  return sizes.empty() ? 0 : *std::max_element(sizes.begin(), sizes.end());
}

VectorXd soft_threshold(const Eigen::Ref<const VectorXd>& v, double level) {
  VectorXd out(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i)) - level;
    out(i) = a > 0.0 ? std::copysign(a, v(i)) : 0.0;
  }
  return out;
}

double largest_eigenvalue(const Eigen::Ref<const MatrixXd>& gram, double tolerance,
                          int max_iterations) {
  const Index n = gram.rows();
  if (n == 0) return 0.0;
  VectorXd v = VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  double estimate = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    VectorXd w = gram * v;
    const double rayleigh = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    if (it > 0 && std::abs(rayleigh - estimate) <= tolerance * std::abs(rayleigh)) {
      return std::max(rayleigh, estimate);
    }
    estimate = rayleigh;
  }
  return estimate;
}

double lipschitz_step(const Eigen::Ref<const MatrixXd>& dictionary) {
  const MatrixXd gram = dictionary.rows() < dictionary.cols()
                            ? MatrixXd(dictionary * dictionary.transpose())
                            : MatrixXd(dictionary.transpose() * dictionary);
  const double top = largest_eigenvalue(gram);
  if (!(top > 0.0)) {
    throw std::invalid_argument("dictionary is zero");
  }
  return 1.0 / (2.0 * top);
}

double lasso_objective(const Eigen::Ref<const MatrixXd>& dictionary,
                       const Eigen::Ref<const VectorXd>& signal,
                       const Eigen::Ref<const VectorXd>& code, double lambda) {
  return (signal - dictionary * code).squaredNorm() + lambda * code.lpNorm<1>();
}

FistaResult fista_solve(const LassoProblem& problem, const FistaOptions& options,
                        const MatrixXd* initial) {
  const auto& a = problem.dictionary;
  const auto& y = problem.signals;
  const double lambda = problem.lambda;
  if (a.rows() != y.rows()) {
    throw DimensionError("dictionary rows must equal signal dimension");
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("lambda must be positive and finite");
  }
  if (!a.allFinite() || !y.allFinite()) {
    throw std::invalid_argument("LASSO inputs must be finite");
  }
  if (initial && (initial->rows() != a.cols() || initial->cols() != y.cols())) {
    throw DimensionError("initial codes have the wrong shape");
  }
  if (options.max_iterations < 0) {
    throw std::invalid_argument("iteration cap must be non-negative");
  }

  const MatrixXd gram = a.transpose() * a;
  const double top = largest_eigenvalue(gram);
  if (!(top > 0.0)) {
    throw std::invalid_argument("dictionary is zero");
  }
  const double step = 1.0 / (2.0 * top);
  const double threshold = lambda * step;
  const Index atoms = a.cols();

  FistaResult result;
  result.codes = SparseCodes::zeros(atoms, y.cols());
  result.iterations.assign(static_cast<std::size_t>(y.cols()), 0);

  VectorXd x(atoms), gx(atoms), z(atoms), gz(atoms), u(atoms), gu(atoms);
  for (Index j = 0; j < y.cols(); ++j) {
    const VectorXd b = a.transpose() * y.col(j);
    const double yy = y.col(j).squaredNorm();
    auto objective = [&](const VectorXd& c, const VectorXd& gc) {
      return yy - 2.0 * c.dot(b) + c.dot(gc) + lambda * c.lpNorm<1>();
    };

    if (initial) {
      x = initial->col(j);
    } else {
      x.setZero();
    }
    gx.noalias() = gram * x;
    double fx = objective(x, gx);
    z = x;
    gz = gx;
    double t = 1.0;

    int it = 0;
    while (it < options.max_iterations) {
      ++it;
      u = soft_threshold(z - 2.0 * step * (gz - b), threshold);
      gu.noalias() = gram * u;
      double fu = objective(u, gu);
      if (fu > fx) {
        ++result.restarts;
        t = 1.0;
        u = soft_threshold(x - 2.0 * step * (gx - b), threshold);
        gu.noalias() = gram * u;
        fu = objective(u, gu);
        if (fu > fx) { // rounding only; stay put
          u = x;
          gu = gx;
          fu = fx;
        }
        z = u;
        gz = gu;
      } else {
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double beta = (t - 1.0) / t_next;
        z = u + beta * (u - x);
        gz = gu + beta * (gu - gx);
        t = t_next;
      }
      const double change = fx - fu;
      x.swap(u);
      gx.swap(gu);
      fx = fu;
      if (change <= options.tolerance * std::max(std::abs(fx + change),
                                                 std::numeric_limits<double>::min())) {
        break;
      }
    }
    result.codes.values.col(j) = x;
    result.iterations[static_cast<std::size_t>(j)] = it;
  }
  return result;
}

} // namespace dbdl
