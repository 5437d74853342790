#include "dbdl/adam.hpp"

#include "dbdl/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace dbdl {

AdamState::AdamState(Eigen::Index parameters, AdamOptions options)
    : options_(options),
      first_(Eigen::VectorXd::Zero(parameters)),
      second_(Eigen::VectorXd::Zero(parameters)) {}

Eigen::VectorXd AdamState::step(const Eigen::Ref<const Eigen::VectorXd>& gradient) {
  if (gradient.size() != first_.size()) {
    throw DimensionError("Adam gradient length does not match the state");
  }
  if (!gradient.allFinite()) {
    throw std::invalid_argument("Adam gradient is not finite");
  }
  ++steps_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  first_ = b1 * first_ + (1.0 - b1) * gradient;
  second_ = b2 * second_ + (1.0 - b2) * gradient.cwiseAbs2();
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  return (-options_.learning_rate * (first_ / c1).array() /
          ((second_ / c2).array().sqrt() + options_.epsilon))
      .matrix();
}

} // namespace dbdl
