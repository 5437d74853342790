#pragma once

#include <Eigen/Core>

namespace dbdl {

struct AdamOptions {
  double learning_rate = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam optimizer state for a fixed-length parameter vector.
class AdamState {
public:
  AdamState() = default;
  AdamState(Eigen::Index parameters, AdamOptions options = {});

  /// Advances the moments with `gradient` and returns the bias-corrected
  /// update to add to the parameters. Rejects non-finite gradients.
  Eigen::VectorXd step(const Eigen::Ref<const Eigen::VectorXd>& gradient);

  long steps() const { return steps_; }
  const AdamOptions& options() const { return options_; }
  const Eigen::VectorXd& first_moment() const { return first_; }
  const Eigen::VectorXd& second_moment() const { return second_; }

private:
  AdamOptions options_;
  long steps_ = 0;
  Eigen::VectorXd first_;
  Eigen::VectorXd second_;
};

inline Eigen::VectorXd adam_step(AdamState& state, const Eigen::Ref<const Eigen::VectorXd>& gradient) {
  return state.step(gradient);
}

} // namespace dbdl
