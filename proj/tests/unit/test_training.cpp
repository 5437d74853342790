#include "fixtures.hpp"

#include "dbdl/checkpoint.hpp"
#include "dbdl/config.hpp"
#include "dbdl/dictionary.hpp"
#include "dbdl/errors.hpp"
#include "dbdl/training.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace dbdl;
namespace fs = std::filesystem;

namespace {

struct SmallData {
  PatchPairs pairs;
};

SmallData small_data(int p, int k, int count, std::uint64_t seed) {
  const auto hr = testing::synthetic_scenes(3, 32, 32, seed);
  const auto lr = testing::blur_all(hr, {k, 1.0});
  return {extract_patch_pairs(hr, lr, p, k, count, seed + 1)};
}

TrainConfig small_config(int p, int k, int atoms, int iters) {
  TrainConfig cfg;
  cfg.patch_size = p;
  cfg.kernel_size = k;
  cfg.atoms = atoms;
  cfg.outer_iterations = iters;
  cfg.patches = 500;
  cfg.fista_max_iterations = 50;
  cfg.seed = 3;
  return cfg;
}

} // namespace

TEST_SUITE("training") {

TEST_CASE("config text round trip and validation") {
  TrainConfig cfg;
  cfg.mode = TrainMode::no_correspondence;
  cfg.lambda = 0.1 + 0.2; // not exactly representable in short decimal
  cfg.seed = 18446744073709551615ull;
  cfg.warm_start = false;
  CHECK(parse_train_config(to_text(cfg)) == cfg);

  const TrainConfig partial = parse_train_config("# comment\natoms = 12\nbme = gr\n");
  CHECK(partial.atoms == 12);
  CHECK(partial.bme == BlurEstimator::general);
  CHECK(partial.lambda == 0.02);

  CHECK_THROWS(parse_train_config("colour = blue\n"));
  CHECK_THROWS(parse_train_config("atoms = many\n"));

  TrainConfig nc_gr;
  nc_gr.mode = TrainMode::no_correspondence;
  nc_gr.bme = BlurEstimator::general;
  CHECK_THROWS(nc_gr.validate());
  TrainConfig bad;
  bad.lambda = 0.0;
  CHECK_THROWS(bad.validate());
  bad = TrainConfig{};
  bad.atoms = 0;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("default configuration") {
  const TrainConfig cfg;
  CHECK(cfg.atoms == 400);
  CHECK(cfg.lambda == 0.02);
  CHECK(cfg.learning_rate == 0.05);
  CHECK(cfg.patch_size == 15);
  CHECK(cfg.patches == 20000);
  CHECK(cfg.outer_iterations == 5000);
  CHECK(cfg.fista_max_iterations == 200);
  CHECK(cfg.fista_tolerance == 1e-6);
  CHECK(cfg.adam_steps == 10);
}

TEST_CASE("zero iterations return the initialization") {
  const SmallData data = small_data(8, 3, 200, 1);
  TrainConfig cfg = small_config(8, 3, 16, 0);
  const ModelCheckpoint cp = train_paired(data.pairs.hr, data.pairs.lr, cfg);
  CHECK(cp.trace.empty());
  CHECK(cp.dictionary.atoms() == init_dictionary(data.pairs.hr.columns, 16, cfg.seed).atoms());
  CHECK(cp.theta == uniform_blur(3, 8).theta());
}

TEST_CASE("paired training lowers the objective") {
  const SmallData data = small_data(8, 3, 500, 2);
  const TrainConfig cfg = small_config(8, 3, 32, 50);
  int calls = 0;
  const ModelCheckpoint cp =
      train_paired(data.pairs.hr, data.pairs.lr, cfg, [&](const TrainProgress& p) {
        ++calls;
        CHECK(p.iteration == calls);
        return true;
      });
  REQUIRE(cp.trace.size() == 50);
  CHECK(calls == 50);
  CHECK(cp.trace.back().total() < cp.trace.front().total());
  for (const LossTerms& t : cp.trace) CHECK(std::isfinite(t.total()));
  for (Eigen::Index a = 0; a < cp.dictionary.size(); ++a) {
    CHECK(std::abs(cp.dictionary.atom(a).norm() - 1.0) < 1e-10);
  }
  CHECK_FALSE(cp.dense_blur.has_value());
}

TEST_CASE("observer can stop training early") {
  const SmallData data = small_data(8, 3, 200, 3);
  const TrainConfig cfg = small_config(8, 3, 16, 20);
  const ModelCheckpoint cp = train_paired(data.pairs.hr, data.pairs.lr, cfg,
                                          [](const TrainProgress& p) { return p.iteration < 4; });
  CHECK(cp.trace.size() == 4);
}

TEST_CASE("paired training with the general estimator keeps a dense blur") {
  const SmallData data = small_data(6, 3, 300, 4);
  TrainConfig cfg = small_config(6, 3, 16, 5);
  cfg.bme = BlurEstimator::general;
  const ModelCheckpoint cp = train_paired(data.pairs.hr, data.pairs.lr, cfg);
  REQUIRE(cp.dense_blur.has_value());
  CHECK(cp.dense_blur->rows() == 16);
  CHECK(cp.dense_blur->cols() == 36);
  CHECK(cp.blur_matrix() == *cp.dense_blur);
  CHECK(cp.theta.size() == 9);
}

TEST_CASE("no-correspondence training runs on unaligned sets of different sizes") {
  const auto hr = testing::synthetic_scenes(2, 32, 32, 5);
  const auto lr = testing::blur_all(testing::synthetic_scenes(2, 32, 32, 50), {3, 1.0});
  const PatchSet xh = extract_patches(hr, 8, 300, 6);
  const PatchSet yl = extract_patches(lr, 6, 250, 7);
  TrainConfig cfg = small_config(8, 3, 16, 10);
  cfg.mode = TrainMode::no_correspondence;
  const ModelCheckpoint cp = train_no_correspondence(xh, yl, cfg);
  CHECK(cp.trace.size() == 10);
  CHECK(cp.config.mode == TrainMode::no_correspondence);
  for (const LossTerms& t : cp.trace) CHECK(std::isfinite(t.total()));
  // The unpaired objective cannot fix the blur's overall gain.
  CHECK(cp.theta.sum() == doctest::Approx(1.0).epsilon(1e-12));

  cfg.bme = BlurEstimator::general;
  CHECK_THROWS(train_no_correspondence(xh, yl, cfg));
}

TEST_CASE("geometry errors") {
  const SmallData data = small_data(8, 3, 50, 8);
  TrainConfig cfg = small_config(8, 5, 8, 1);
  CHECK_THROWS_AS(train_paired(data.pairs.hr, data.pairs.lr, cfg), DimensionError);
  cfg = small_config(8, 3, 8, 1);
  PatchSet fewer = data.pairs.lr;
  fewer.columns.conservativeResize(Eigen::NoChange, 40);
  fewer.origins.resize(40);
  CHECK_THROWS_AS(train_paired(data.pairs.hr, fewer, cfg), DimensionError);
}

TEST_CASE("training is bitwise deterministic") {
  const SmallData data = small_data(8, 3, 300, 9);
  const TrainConfig cfg = small_config(8, 3, 16, 8);
  const std::string a = serialize_checkpoint(train_paired(data.pairs.hr, data.pairs.lr, cfg));
  const std::string b = serialize_checkpoint(train_paired(data.pairs.hr, data.pairs.lr, cfg));
  CHECK(a == b);
}

TEST_CASE("checkpoint round trip") {
  const SmallData data = small_data(8, 3, 200, 10);
  TrainConfig cfg = small_config(8, 3, 12, 3);
  const ModelCheckpoint cp = train_paired(data.pairs.hr, data.pairs.lr, cfg);
  const std::string bytes = serialize_checkpoint(cp);
  CHECK(bytes.substr(0, 4) == "DBDL");
  const ModelCheckpoint back = deserialize_checkpoint(bytes);
  CHECK(back.kernel_size == 3);
  CHECK(back.patch_size == 8);
  CHECK(back.theta == cp.theta);
  CHECK(back.dictionary.atoms() == cp.dictionary.atoms());
  CHECK(back.config == cp.config);
  CHECK(back.trace == cp.trace);
  CHECK(serialize_checkpoint(back) == bytes);

  cfg.bme = BlurEstimator::general;
  const ModelCheckpoint gr = train_paired(data.pairs.hr, data.pairs.lr, cfg);
  const ModelCheckpoint gr_back = deserialize_checkpoint(serialize_checkpoint(gr));
  REQUIRE(gr_back.dense_blur.has_value());
  CHECK(*gr_back.dense_blur == *gr.dense_blur);

  const fs::path path = fs::temp_directory_path() / "dbdl_ckpt_roundtrip.bin";
  save_checkpoint(cp, path);
  CHECK(serialize_checkpoint(load_checkpoint(path)) == bytes);
}

TEST_CASE("checkpoint header layout") {
  ModelCheckpoint cp;
  cp.kernel_size = 7;
  cp.patch_size = 9;
  cp.theta = Eigen::VectorXd::Constant(49, 1.0 / 49);
  cp.dictionary = Dictionary(Eigen::MatrixXd::Identity(81, 2));
  cp.config.kernel_size = 7;
  cp.config.patch_size = 9;
  cp.config.atoms = 2;
  const std::string bytes = serialize_checkpoint(cp);
  auto u32 = [&](std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(bytes[at + i]);
    return v;
  };
  CHECK(u32(4) == kCheckpointVersion);
  CHECK(u32(8) == 7);
  CHECK(u32(12) == 9);
  CHECK(u32(16) == 2);
  CHECK(deserialize_checkpoint(bytes).kernel_size == 7);
}

TEST_CASE("corrupt checkpoints are rejected") {
  ModelCheckpoint cp;
  cp.kernel_size = 3;
  cp.patch_size = 4;
  cp.theta = Eigen::VectorXd::Constant(9, 1.0 / 9);
  cp.dictionary = Dictionary(Eigen::MatrixXd::Identity(16, 3));
  cp.config.kernel_size = 3;
  cp.config.patch_size = 4;
  cp.config.atoms = 3;
  const std::string bytes = serialize_checkpoint(cp);
  CHECK_THROWS_AS(deserialize_checkpoint(bytes.substr(0, bytes.size() - 5)), FormatError);
  CHECK_THROWS_AS(deserialize_checkpoint(bytes.substr(0, 10)), FormatError);
  std::string magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(deserialize_checkpoint(magic), FormatError);
  std::string version = bytes;
  version[4] = 9;
  CHECK_THROWS_AS(deserialize_checkpoint(version), FormatError);
  CHECK_THROWS_AS(deserialize_checkpoint(bytes + "x"), FormatError);
  CHECK_THROWS_AS(load_checkpoint(fs::temp_directory_path() / "dbdl_no_such.ckpt"), IoError);
}

} // TEST_SUITE
