#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dbdl {

// Structured key-value text:
//
//   # comment
//   key = value
//   [section]
//   key = value
//
// Keys outside any section land in a section with an empty name.
struct KeyValueSection {
  std::string name;
  std::vector<std::pair<std::string, std::string>> entries;

  std::optional<std::string> find(std::string_view key) const;
  const std::string& require(std::string_view key) const;
};

std::vector<KeyValueSection> parse_key_value(std::string_view text);

int parse_int(std::string_view text);
std::uint64_t parse_u64(std::string_view text);
double parse_double(std::string_view text);

/// Shortest text that parses back to the identical double.
std::string format_double(double value);

enum class TrainMode { paired, no_correspondence };
enum class BlurEstimator { general, structured }; // BME-GR, BME-SR

std::string_view to_string(TrainMode mode);
std::string_view to_string(BlurEstimator bme);
TrainMode parse_train_mode(std::string_view text);       // "paired" | "nc" | "no_correspondence"
BlurEstimator parse_blur_estimator(std::string_view text); // "gr" | "sr"

struct TrainConfig {
  TrainMode mode = TrainMode::paired;
  BlurEstimator bme = BlurEstimator::structured;
  int atoms = 400;
  double lambda = 0.02;
  double learning_rate = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int outer_iterations = 5000;
  int patch_size = 15;
  int kernel_size = 7;
  int patches = 20000;
  std::uint64_t seed = 0;
  int fista_max_iterations = 200;
  double fista_tolerance = 1e-6;
  int adam_steps = 10;  // per outer iteration
  int blur_every = 1;   // re-estimate the blur every n outer iterations
  bool warm_start = true; // seed each sparse-coding call with the previous codes

  /// Throws std::invalid_argument on any violated invariant, including
  /// no-correspondence mode paired with the general blur estimator.
  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

std::string to_text(const TrainConfig& config);

/// Applies every recognised key in `text` on top of `base`. Unknown keys are
/// rejected.
TrainConfig parse_train_config(std::string_view text, TrainConfig base = {});

} // namespace dbdl
