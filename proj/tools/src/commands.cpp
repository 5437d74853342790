#include "dbdl/cli.hpp"

#include "dbdl/checkpoint.hpp"
#include "dbdl/errors.hpp"
#include "dbdl/imaging.hpp"
#include "dbdl/metrics.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

namespace dbdl::cli {

namespace fs = std::filesystem;

std::vector<fs::path> list_images(const fs::path& path) {
  std::vector<fs::path> out;
  if (fs::is_regular_file(path)) {
    out.push_back(path);
    return out;
  }
  if (!fs::is_directory(path)) throw IoError("no such file or directory: " + path.string());
  for (const auto& entry : fs::directory_iterator(path)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (ext == ".pgm" || ext == ".png") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw IoError("no .pgm or .png images in " + path.string());
  return out;
}

std::vector<NamedImage> load_images(const fs::path& path) {
  std::vector<NamedImage> out;
  for (const auto& p : list_images(path)) out.push_back({p.filename().string(), load_image(p)});
  return out;
}

namespace {

struct TrainArgs {
  std::string hr;
  std::string lr;
  std::string out;
  std::string config;
  std::string mode;
  std::string bme;
  std::string scenario = "unpaired";
  std::optional<int> k, atoms, iters, patch, patches, fista_iters, adam_steps, blur_every;
  std::optional<double> lambda, learning_rate, fista_tol;
  std::optional<std::uint64_t> seed;
  bool cold_start = false;
};

struct DeblurArgs {
  std::string checkpoint;
  std::string in;
  std::string out;
  std::string gt;
  std::optional<double> sigma;
  int stride = 1;
  std::optional<double> lambda;
  int fista_iters = 200;
  double fista_tol = 1e-6;
};

struct CrossValArgs {
  std::vector<std::string> checkpoints;
  std::string in;
  std::string gt;
  std::string metric = "psnr";
  int stride = 1;
  std::optional<double> lambda;
  int fista_iters = 200;
  double fista_tol = 1e-6;
};

struct EvalArgs {
  std::string in;
  std::string gt;
  std::optional<int> k;
  std::optional<double> sigma;
  std::string mode = "input";
  bool embed = false;
};

// Pairs images of two sets by file name; every entry of `primary` needs a
// partner.
std::vector<std::pair<NamedImage, Image>> match_by_name(std::vector<NamedImage> primary,
                                                       std::vector<NamedImage> secondary) {
  std::map<std::string, Image> lookup;
  for (auto& s : secondary) lookup.emplace(s.name, std::move(s.image));
  if (primary.size() == 1 && secondary.size() == 1 && lookup.count(primary[0].name) == 0) {
    return {{std::move(primary[0]), std::move(lookup.begin()->second)}};
  }
  std::vector<std::pair<NamedImage, Image>> out;
  for (auto& p : primary) {
    auto it = lookup.find(p.name);
    if (it == lookup.end()) throw IoError("no matching image for " + p.name);
    out.emplace_back(std::move(p), it->second);
  }
  return out;
}

std::vector<Image> images_of(const std::vector<NamedImage>& named) {
  std::vector<Image> out;
  for (const auto& n : named) out.push_back(n.image);
  return out;
}

TrainConfig resolve_config(const TrainArgs& a) {
  TrainConfig cfg;
  if (!a.config.empty()) {
    std::ifstream in(a.config, std::ios::binary);
    if (!in) throw IoError("cannot read config " + a.config);
    std::stringstream text;
    text << in.rdbuf();
    try {
      cfg = parse_train_config(text.str(), cfg);
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("config: ") + e.what());
    } catch (const FormatError& e) {
      throw UsageError(std::string("config: ") + e.what());
    }
  }
  if (!a.mode.empty()) cfg.mode = parse_train_mode(a.mode);
  if (!a.bme.empty()) cfg.bme = parse_blur_estimator(a.bme);
  if (a.k) cfg.kernel_size = *a.k;
  if (a.atoms) cfg.atoms = *a.atoms;
  if (a.iters) cfg.outer_iterations = *a.iters;
  if (a.patch) cfg.patch_size = *a.patch;
  if (a.patches) cfg.patches = *a.patches;
  if (a.fista_iters) cfg.fista_max_iterations = *a.fista_iters;
  if (a.adam_steps) cfg.adam_steps = *a.adam_steps;
  if (a.blur_every) cfg.blur_every = *a.blur_every;
  if (a.lambda) cfg.lambda = *a.lambda;
  if (a.learning_rate) cfg.learning_rate = *a.learning_rate;
  if (a.fista_tol) cfg.fista_tolerance = *a.fista_tol;
  if (a.seed) cfg.seed = *a.seed;
  if (a.cold_start) cfg.warm_start = false;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  const TrainConfig cfg = resolve_config(a);
  if (a.scenario != "unpaired" && a.scenario != "shuffled") {
    throw UsageError("--scenario must be unpaired or shuffled");
  }
  const int k = cfg.kernel_size;
  const int p = cfg.patch_size;
  PatchSet hr_patches;
  PatchSet lr_patches;
  const bool needs_pairs = cfg.mode == TrainMode::paired || a.scenario == "shuffled";
  if (needs_pairs) {
    std::vector<Image> hr_images;
    std::vector<Image> lr_images;
    for (auto& [hr, lr] : match_by_name(load_images(a.hr), load_images(a.lr))) {
      auto [h, l] = align_training_pair(hr.image, lr, k);
      hr_images.push_back(std::move(h));
      lr_images.push_back(std::move(l));
    }
    PatchPairs pairs = extract_patch_pairs(hr_images, lr_images, p, k, cfg.patches, cfg.seed);
    hr_patches = std::move(pairs.hr);
    lr_patches = cfg.mode == TrainMode::paired ? std::move(pairs.lr)
                                               : shuffle_patches(pairs.lr, cfg.seed + 1);
  } else {
    const std::vector<Image> hr_images = images_of(load_images(a.hr));
    const std::vector<Image> lr_images = images_of(load_images(a.lr));
    hr_patches = extract_patches(hr_images, p, cfg.patches, cfg.seed);
    lr_patches = extract_patches(lr_images, p - k + 1, cfg.patches, cfg.seed + 1);
  }

  const ModelCheckpoint cp = train(hr_patches, lr_patches, cfg, [&](const TrainProgress& pr) {
    if (pr.iteration % 50 == 0 || pr.iteration == cfg.outer_iterations) {
      err << "iter " << pr.iteration << " loss " << pr.loss.total() << " (hr "
          << pr.loss.hr_fidelity << ", lr " << pr.loss.lr_fidelity << ", l1 " << pr.loss.sparsity
          << ")\n";
    }
    return true;
  });
  save_checkpoint(cp, a.out);
  out << "checkpoint," << a.out << '\n';
  if (!cp.trace.empty()) out << "final_loss," << format_double(cp.trace.back().total()) << '\n';
  return kExitOk;
}

DeblurOptions deblur_options(int stride, std::optional<double> lambda, int iters, double tol) {
  DeblurOptions o;
  o.stride = stride;
  o.lambda = lambda;
  o.fista.max_iterations = iters;
  o.fista.tolerance = tol;
  return o;
}

int cmd_deblur(const DeblurArgs& a, std::ostream& out, std::ostream&) {
  if (a.stride < 1) throw UsageError("--stride must be >= 1");
  const ModelCheckpoint cp = load_checkpoint(a.checkpoint);
  const DeblurOptions options = deblur_options(a.stride, a.lambda, a.fista_iters, a.fista_tol);
  std::vector<NamedImage> inputs = load_images(a.in);
  std::vector<std::optional<Image>> refs(inputs.size());
  if (!a.gt.empty()) {
    auto matched = match_by_name(inputs, load_images(a.gt));
    for (std::size_t i = 0; i < matched.size(); ++i) refs[i] = std::move(matched[i].second);
  }
  const bool single = fs::is_regular_file(a.in);
  if (!single) fs::create_directories(a.out);
  const std::string mode(to_string(cp.config.mode));

  out << kCsvHeader << '\n';
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const Image restored = deblur(inputs[i].image, cp, options);
    save_image(restored, single ? fs::path(a.out) : fs::path(a.out) / inputs[i].name);
    MetricReport report;
    if (refs[i]) {
      auto [x, y] = crop_to_common(restored, *refs[i]);
      report = MetricReport::evaluate(x, &y);
    } else {
      report = MetricReport::evaluate(restored);
    }
    out << csv_row(inputs[i].name, cp.kernel_size, a.sigma, mode, report) << '\n';
  }
  return kExitOk;
}

int cmd_crossval(const CrossValArgs& a, std::ostream& out, std::ostream& err) {
  const SelectionMetric metric = parse_selection_metric(a.metric);
  if (metric == SelectionMetric::psnr && a.gt.empty()) {
    throw UsageError("--metric psnr requires --gt");
  }
  std::vector<ModelCheckpoint> models;
  for (const auto& path : a.checkpoints) models.push_back(load_checkpoint(path));
  std::vector<NamedImage> inputs = load_images(a.in);
  std::vector<Image> refs;
  if (!a.gt.empty()) {
    for (auto& [named, ref] : match_by_name(inputs, load_images(a.gt))) refs.push_back(ref);
  }
  err << "cross-validating " << models.size() << " models on " << inputs.size() << " images\n";
  const CrossValReport report =
      cross_validate(models, inputs, refs, metric,
                     deblur_options(a.stride, a.lambda, a.fista_iters, a.fista_tol));
  print_report(report, out);
  return kExitOk;
}

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream&) {
  std::vector<NamedImage> inputs = load_images(a.in);
  std::vector<std::optional<Image>> refs(inputs.size());
  if (!a.gt.empty()) {
    auto matched = match_by_name(inputs, load_images(a.gt));
    for (std::size_t i = 0; i < matched.size(); ++i) refs[i] = std::move(matched[i].second);
  }
  out << kCsvHeader << '\n';
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    Image image = inputs[i].image;
    MetricReport report;
    if (refs[i]) {
      if (a.embed) image = embed_centered(image, refs[i]->height(), refs[i]->width());
      auto [x, y] = crop_to_common(image, *refs[i]);
      report = MetricReport::evaluate(x, &y);
    } else {
      report = MetricReport::evaluate(image);
    }
    out << csv_row(inputs[i].name, a.k.value_or(0), a.sigma, a.mode, report) << '\n';
  }
  return kExitOk;
}

int cmd_blur_gen(int k, double sigma, const std::string& in, const std::string& out_dir,
                 std::ostream& out) {
  const auto inputs = list_images(in);
  const Manifest manifest = generate_blurred_dataset(inputs, {k, sigma}, out_dir);
  out << "manifest," << (fs::path(out_dir) / "manifest.txt").string() << '\n';
  out << "images," << manifest.records.size() << '\n';
  return kExitOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Blur-aware dictionary learning for image deblurring", "dbdl"};
  app.require_subcommand(1);

  int gen_k = 0;
  double gen_sigma = 0.0;
  std::string gen_in, gen_out;
  auto* gen = app.add_subcommand("blur-gen", "Blur a directory of images with a Gaussian kernel");
  gen->add_option("--k", gen_k, "Kernel side (odd)")->required()->check(CLI::PositiveNumber);
  gen->add_option("--sigma", gen_sigma, "Gaussian standard deviation")->required();
  gen->add_option("--in", gen_in, "Input image or directory")->required();
  gen->add_option("--out", gen_out, "Output directory")->required();

  TrainArgs ta;
  auto* tr = app.add_subcommand("train", "Learn a blur operator and an HR dictionary");
  tr->add_option("--hr", ta.hr, "HR image or directory")->required();
  tr->add_option("--lr-images", ta.lr, "LR (blurred) image or directory")->required();
  tr->add_option("--out", ta.out, "Checkpoint path")->required();
  tr->add_option("--config", ta.config, "Key-value config file (flags override it)");
  tr->add_option("--mode", ta.mode, "paired | nc");
  tr->add_option("--bme", ta.bme, "gr | sr");
  tr->add_option("--scenario", ta.scenario, "nc data: unpaired | shuffled");
  tr->add_option("--k", ta.k, "Kernel side");
  tr->add_option("--atoms", ta.atoms, "Dictionary size");
  tr->add_option("--lambda", ta.lambda, "l1 weight");
  tr->add_option("--lr", ta.learning_rate, "Adam learning rate");
  tr->add_option("--iters", ta.iters, "Outer iterations");
  tr->add_option("--patch", ta.patch, "HR patch side");
  tr->add_option("--patches", ta.patches, "Number of training patches");
  tr->add_option("--fista-iters", ta.fista_iters, "FISTA iteration cap per solve");
  tr->add_option("--fista-tol", ta.fista_tol, "FISTA relative tolerance");
  tr->add_option("--adam-steps", ta.adam_steps, "Adam steps per outer iteration");
  tr->add_option("--blur-every", ta.blur_every, "Re-estimate the blur every n iterations");
  tr->add_option("--seed", ta.seed, "Random seed");
  tr->add_flag("--cold-start", ta.cold_start, "Start every sparse-coding call from zero");

  DeblurArgs da;
  auto* db = app.add_subcommand("deblur", "Deblur images with a trained checkpoint");
  db->add_option("--checkpoint", da.checkpoint, "Checkpoint path")->required();
  db->add_option("--in", da.in, "LR image or directory")->required();
  db->add_option("--out", da.out, "Output image or directory")->required();
  db->add_option("--gt", da.gt, "Ground-truth image or directory");
  db->add_option("--sigma", da.sigma, "Blur sigma recorded in the CSV");
  db->add_option("--stride", da.stride, "Patch stride");
  db->add_option("--lambda", da.lambda, "Inference l1 weight (default: training value)");
  db->add_option("--fista-iters", da.fista_iters, "FISTA iteration cap");
  db->add_option("--fista-tol", da.fista_tol, "FISTA relative tolerance");

  CrossValArgs ca;
  auto* cv = app.add_subcommand("crossval", "Select the kernel size among trained checkpoints");
  cv->add_option("--checkpoints", ca.checkpoints, "One checkpoint per candidate k")
      ->required()
      ->expected(1, -1);
  cv->add_option("--in", ca.in, "LR image or directory")->required();
  cv->add_option("--gt", ca.gt, "Ground-truth image or directory");
  cv->add_option("--metric", ca.metric, "psnr | sobel_var | laplace_var");
  cv->add_option("--stride", ca.stride, "Patch stride");
  cv->add_option("--lambda", ca.lambda, "Inference l1 weight");
  cv->add_option("--fista-iters", ca.fista_iters, "FISTA iteration cap");
  cv->add_option("--fista-tol", ca.fista_tol, "FISTA relative tolerance");

  EvalArgs ea;
  auto* ev = app.add_subcommand("eval", "Score images, optionally against ground truth");
  ev->add_option("--in", ea.in, "Image or directory")->required();
  ev->add_option("--gt", ea.gt, "Ground-truth image or directory");
  ev->add_option("--k", ea.k, "Kernel side recorded in the CSV");
  ev->add_option("--sigma", ea.sigma, "Blur sigma recorded in the CSV");
  ev->add_option("--mode", ea.mode, "Label recorded in the CSV");
  ev->add_flag("--embed", ea.embed, "Embed smaller inputs centered in the reference frame");

  std::vector<const char*> argv{"dbdl"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_blur_gen(gen_k, gen_sigma, gen_in, gen_out, out);
    if (tr->parsed()) return cmd_train(ta, out, err);
    if (db->parsed()) return cmd_deblur(da, out, err);
    if (cv->parsed()) return cmd_crossval(ca, out, err);
    if (ev->parsed()) return cmd_eval(ea, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

} // namespace dbdl::cli
