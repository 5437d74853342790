#pragma once

#include "dbdl/image.hpp"
#include "dbdl/inference.hpp"
#include "dbdl/training.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dbdl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Thrown for flag combinations that parse but make no sense; mapped to
/// exit code 2.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class SelectionMetric { psnr, sobel_var, laplace_var };
SelectionMetric parse_selection_metric(std::string_view text);
std::string_view to_string(SelectionMetric metric);

/// A single image file, or every .pgm/.png in a directory sorted by name.
/// Throws IoError when nothing is found.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& path);

struct NamedImage {
  std::string name;
  Image image;
};
std::vector<NamedImage> load_images(const std::filesystem::path& path);

/// Centered crop; both margins must be even-split (difference even).
Image center_crop(const Image& image, int height, int width);

/// Center-crops a and b to their common size.
std::pair<Image, Image> crop_to_common(const Image& a, const Image& b);

/// Makes an (HR, LR) training pair consistent with kernel side k: LR must be
/// HR - k + 1 per axis. The larger of the two is center-cropped; a pair that
/// cannot be aligned symmetrically throws DimensionError.
std::pair<Image, Image> align_training_pair(const Image& hr, const Image& lr, int k);

struct CrossValReport {
  SelectionMetric metric = SelectionMetric::psnr;
  std::vector<int> ks;                 // ascending
  std::vector<std::string> images;
  Eigen::MatrixXd scores;              // images x ks
  std::vector<int> best_per_image;
  Eigen::VectorXd mean_scores;
  int selected_k = 0;
};

/// Index of the largest score; ties go to the first (smallest k).
Eigen::Index argmax_first(const Eigen::Ref<const Eigen::VectorXd>& scores);

/// Deblurs every input with every model and scores the outputs on their
/// common centered region. `references` is either empty or parallel to
/// `inputs`; PSNR selection requires it.
CrossValReport cross_validate(std::span<const ModelCheckpoint> models,
                              std::span<const NamedImage> inputs,
                              std::span<const Image> references, SelectionMetric metric,
                              const DeblurOptions& options);

void print_report(const CrossValReport& report, std::ostream& out);

/// Full command-line entry point (args excludes the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace dbdl::cli
