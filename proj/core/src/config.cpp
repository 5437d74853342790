#include "dbdl/config.hpp"

#include "dbdl/errors.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dbdl {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_bool(std::string_view text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw FormatError("invalid boolean '" + std::string(text) + "'");
}

} // namespace

std::optional<std::string> KeyValueSection::find(std::string_view key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) return v;
  }
  return std::nullopt;
}

const std::string& KeyValueSection::require(std::string_view key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) return v;
  }
  throw FormatError("missing key '" + std::string(key) + "' in section '" + name + "'");
}

std::vector<KeyValueSection> parse_key_value(std::string_view text) {
  std::vector<KeyValueSection> sections(1);
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto eol = text.find('\n');
    std::string_view line = trim(text.substr(0, eol));
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw FormatError("line " + std::to_string(line_no) + ": unterminated section header");
      }
      sections.push_back({std::string(trim(line.substr(1, line.size() - 2))), {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw FormatError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string_view key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw FormatError("line " + std::to_string(line_no) + ": empty key");
    }
    sections.back().entries.emplace_back(std::string(key), std::string(trim(line.substr(eq + 1))));
  }
  return sections;
}

int parse_int(std::string_view text) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw FormatError("invalid integer '" + std::string(text) + "'");
  }
  return value;
}

std::uint64_t parse_u64(std::string_view text) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw FormatError("invalid unsigned integer '" + std::string(text) + "'");
  }
  return value;
}

double parse_double(std::string_view text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw FormatError("invalid number '" + std::string(text) + "'");
  }
  return value;
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

std::string_view to_string(TrainMode mode) {
  return mode == TrainMode::paired ? "paired" : "nc";
}

std::string_view to_string(BlurEstimator bme) {
  return bme == BlurEstimator::general ? "gr" : "sr";
}

TrainMode parse_train_mode(std::string_view text) {
  if (text == "paired") return TrainMode::paired;
  if (text == "nc" || text == "no_correspondence") return TrainMode::no_correspondence;
  throw std::invalid_argument("unknown training mode '" + std::string(text) + "'");
}

BlurEstimator parse_blur_estimator(std::string_view text) {
  if (text == "gr" || text == "GR") return BlurEstimator::general;
  if (text == "sr" || text == "SR") return BlurEstimator::structured;
  throw std::invalid_argument("unknown blur estimator '" + std::string(text) + "'");
}

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(atoms > 0, "atoms must be positive");
  require(lambda > 0.0 && std::isfinite(lambda), "lambda must be positive");
  require(learning_rate > 0.0, "learning rate must be positive");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, "Adam betas must lie in [0,1)");
  require(epsilon > 0.0, "Adam epsilon must be positive");
  require(outer_iterations >= 0, "outer iterations must be non-negative");
  require(kernel_size >= 1, "kernel size must be >= 1");
  require(patch_size >= kernel_size, "patch size must be at least the kernel size");
  require(patches > 0, "patch count must be positive");
  require(fista_max_iterations > 0, "FISTA iteration cap must be positive");
  require(fista_tolerance >= 0.0, "FISTA tolerance must be non-negative");
  require(adam_steps > 0, "Adam steps must be positive");
  require(blur_every > 0, "blur_every must be positive");
  require(!(mode == TrainMode::no_correspondence && bme == BlurEstimator::general),
          "no-correspondence mode requires the structured (SR) blur estimator");
}

std::string to_text(const TrainConfig& c) {
  std::ostringstream out;
  out << "mode = " << to_string(c.mode) << '\n'
      << "bme = " << to_string(c.bme) << '\n'
      << "atoms = " << c.atoms << '\n'
      << "lambda = " << format_double(c.lambda) << '\n'
      << "lr = " << format_double(c.learning_rate) << '\n'
      << "beta1 = " << format_double(c.beta1) << '\n'
      << "beta2 = " << format_double(c.beta2) << '\n'
      << "epsilon = " << format_double(c.epsilon) << '\n'
      << "iters = " << c.outer_iterations << '\n'
      << "patch = " << c.patch_size << '\n'
      << "k = " << c.kernel_size << '\n'
      << "patches = " << c.patches << '\n'
      << "seed = " << c.seed << '\n'
      << "fista_iters = " << c.fista_max_iterations << '\n'
      << "fista_tol = " << format_double(c.fista_tolerance) << '\n'
      << "adam_steps = " << c.adam_steps << '\n'
      << "blur_every = " << c.blur_every << '\n'
      << "warm_start = " << (c.warm_start ? "true" : "false") << '\n';
  return out.str();
}

TrainConfig parse_train_config(std::string_view text, TrainConfig c) {
  for (const KeyValueSection& section : parse_key_value(text)) {
    for (const auto& [key, value] : section.entries) {
      if (key == "mode") c.mode = parse_train_mode(value);
      else if (key == "bme") c.bme = parse_blur_estimator(value);
      else if (key == "atoms") c.atoms = parse_int(value);
      else if (key == "lambda") c.lambda = parse_double(value);
      else if (key == "lr") c.learning_rate = parse_double(value);
      else if (key == "beta1") c.beta1 = parse_double(value);
      else if (key == "beta2") c.beta2 = parse_double(value);
      else if (key == "epsilon") c.epsilon = parse_double(value);
      else if (key == "iters") c.outer_iterations = parse_int(value);
      else if (key == "patch") c.patch_size = parse_int(value);
      else if (key == "k") c.kernel_size = parse_int(value);
      else if (key == "patches") c.patches = parse_int(value);
      else if (key == "seed") c.seed = parse_u64(value);
      else if (key == "fista_iters") c.fista_max_iterations = parse_int(value);
      else if (key == "fista_tol") c.fista_tolerance = parse_double(value);
      else if (key == "adam_steps") c.adam_steps = parse_int(value);
      else if (key == "blur_every") c.blur_every = parse_int(value);
      else if (key == "warm_start") c.warm_start = parse_bool(value);
      else throw FormatError("unknown config key '" + key + "'");
    }
  }
  return c;
}

} // namespace dbdl
