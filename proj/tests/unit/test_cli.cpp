#include "fixtures.hpp"

#include "dbdl/checkpoint.hpp"
#include "dbdl/cli.hpp"
#include "dbdl/image.hpp"
#include "dbdl/imaging.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace dbdl;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// HR scenes and their k=3 blurred versions on disk.
struct Workspace {
  fs::path root;
  fs::path hr;
  fs::path lr;

  explicit Workspace(const std::string& name) {
    root = fs::temp_directory_path() / ("dbdl_cli_" + name);
    fs::remove_all(root);
    hr = root / "hr";
    lr = root / "lr";
    fs::create_directories(hr);
    for (int i = 0; i < 2; ++i) {
      save_image(testing::synthetic_scene(28, 28, 40 + i), hr / ("s" + std::to_string(i) + ".pgm"));
    }
  }
};

std::vector<std::string> quick_train(const Workspace& ws, const std::string& out) {
  return {"train", "--hr", ws.hr.string(), "--lr-images", ws.lr.string(), "--out", out,
          "--k", "3", "--patch", "6", "--atoms", "8", "--patches", "150", "--iters", "3",
          "--fista-iters", "30", "--seed", "5"};
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit with 2, help with 0") {
  CHECK(run({}).code == cli::kExitUsage);
  CHECK(run({"frobnicate"}).code == cli::kExitUsage);
  CHECK(run({"blur-gen", "--k", "7", "--in", "a", "--out", "b"}).code == cli::kExitUsage);
  const Result help = run({"--help"});
  CHECK(help.code == cli::kExitOk);
  CHECK(help.out.find("blur-gen") != std::string::npos);
}

TEST_CASE("blur-gen writes images and a manifest") {
  Workspace ws("blurgen");
  const Result r = run({"blur-gen", "--k", "3", "--sigma", "1.0", "--in", ws.hr.string(),
                        "--out", ws.lr.string()});
  CHECK(r.code == cli::kExitOk);
  CHECK(fs::exists(ws.lr / "manifest.txt"));
  CHECK(load_image(ws.lr / "s0.pgm").height() == 26);
  const std::string first = slurp(ws.lr / "s1.pgm");
  CHECK(run({"blur-gen", "--k", "3", "--sigma", "1.0", "--in", ws.hr.string(), "--out",
             ws.lr.string()})
            .code == cli::kExitOk);
  CHECK(slurp(ws.lr / "s1.pgm") == first);

  fs::create_directories(ws.root / "empty");
  const Result empty = run({"blur-gen", "--k", "3", "--sigma", "1.0", "--in",
                            (ws.root / "empty").string(), "--out", (ws.root / "o").string()});
  CHECK(empty.code == cli::kExitFailure);
  CHECK_FALSE(empty.err.empty());
}

TEST_CASE("train, deblur and eval") {
  Workspace ws("pipeline");
  REQUIRE(run({"blur-gen", "--k", "3", "--sigma", "1.0", "--in", ws.hr.string(), "--out",
               ws.lr.string()})
              .code == 0);
  const fs::path ckpt = ws.root / "model.ckpt";
  const Result tr = run(quick_train(ws, ckpt.string()));
  REQUIRE(tr.code == cli::kExitOk);
  CHECK(tr.out.find("checkpoint,") != std::string::npos);
  CHECK(tr.err.find("iter 3") != std::string::npos);
  const ModelCheckpoint cp = load_checkpoint(ckpt);
  CHECK(cp.kernel_size == 3);
  CHECK(cp.trace.size() == 3);

  const std::string first = slurp(ckpt);
  REQUIRE(run(quick_train(ws, ckpt.string())).code == 0);
  CHECK(slurp(ckpt) == first);

  const Result db = run({"deblur", "--checkpoint", ckpt.string(), "--in", ws.lr.string(), "--out",
                         (ws.root / "out").string(), "--gt", ws.hr.string(), "--sigma", "1.0"});
  REQUIRE(db.code == cli::kExitOk);
  std::istringstream lines(db.out);
  std::string header;
  std::string row;
  std::getline(lines, header);
  std::getline(lines, row);
  CHECK(header == "image,k,sigma,mode,psnr,ssim,sobel_var,laplace_var");
  CHECK(row.rfind("s0.pgm,3,1,paired,", 0) == 0);
  CHECK(row.find(",,") == std::string::npos);
  CHECK(load_image(ws.root / "out" / "s0.pgm").height() == 28);

  const Result blind = run({"deblur", "--checkpoint", ckpt.string(), "--in",
                            (ws.lr / "s0.pgm").string(), "--out", (ws.root / "one.png").string()});
  REQUIRE(blind.code == cli::kExitOk);
  CHECK(blind.out.find("s0.pgm,3,,paired,,,") != std::string::npos);
  CHECK(fs::exists(ws.root / "one.png"));

  const Result ev = run({"eval", "--in", ws.lr.string(), "--gt", ws.hr.string(), "--embed"});
  CHECK(ev.code == cli::kExitOk);
  CHECK(ev.out.find("s1.pgm,0,,input,") != std::string::npos);

  CHECK(run({"deblur", "--checkpoint", (ws.root / "missing.ckpt").string(), "--in",
             ws.lr.string(), "--out", (ws.root / "x").string()})
            .code == cli::kExitFailure);
}

TEST_CASE("train rejects no-correspondence with the general estimator") {
  Workspace ws("ncgr");
  REQUIRE(run({"blur-gen", "--k", "3", "--sigma", "1.0", "--in", ws.hr.string(), "--out",
               ws.lr.string()})
              .code == 0);
  auto args = quick_train(ws, (ws.root / "m.ckpt").string());
  args.insert(args.end(), {"--mode", "nc", "--bme", "gr"});
  const Result r = run(args);
  CHECK(r.code == cli::kExitUsage);
  CHECK_FALSE(fs::exists(ws.root / "m.ckpt"));
}

TEST_CASE("no-correspondence scenarios and config files") {
  Workspace ws("nc");
  REQUIRE(run({"blur-gen", "--k", "3", "--sigma", "1.0", "--in", ws.hr.string(), "--out",
               ws.lr.string()})
              .code == 0);
  for (const std::string scenario : {"unpaired", "shuffled"}) {
    auto args = quick_train(ws, (ws.root / (scenario + ".ckpt")).string());
    args.insert(args.end(), {"--mode", "nc", "--scenario", scenario});
    CHECK(run(args).code == cli::kExitOk);
    CHECK(load_checkpoint(ws.root / (scenario + ".ckpt")).config.mode ==
          TrainMode::no_correspondence);
  }

  std::ofstream(ws.root / "cfg.txt") << "atoms = 6\nlambda = 0.05\n";
  auto args = quick_train(ws, (ws.root / "cfg.ckpt").string());
  args.erase(args.begin() + 11, args.begin() + 13); // drop --atoms 8
  args.insert(args.end(), {"--config", (ws.root / "cfg.txt").string()});
  REQUIRE(run(args).code == cli::kExitOk);
  const ModelCheckpoint cp = load_checkpoint(ws.root / "cfg.ckpt");
  CHECK(cp.config.atoms == 6);
  CHECK(cp.config.lambda == 0.05);

  std::ofstream(ws.root / "bad.txt") << "flavour = mint\n";
  args = quick_train(ws, (ws.root / "bad.ckpt").string());
  args.insert(args.end(), {"--config", (ws.root / "bad.txt").string()});
  CHECK(run(args).code == cli::kExitUsage);
}

TEST_CASE("cross-validation helpers") {
  CHECK(cli::argmax_first(Eigen::Vector3d(1.0, 3.0, 3.0)) == 1);
  CHECK(cli::argmax_first(Eigen::Vector3d(2.0, 2.0, 2.0)) == 0);
  const Image img(9, 11, 0.5);
  CHECK(cli::center_crop(img, 5, 7).height() == 5);
  CHECK_THROWS(cli::center_crop(img, 6, 7));
  const auto [h, l] = cli::align_training_pair(Image(30, 30), Image(26, 26), 3);
  CHECK(h.height() == 28);
  CHECK(l.height() == 26);
  const auto [h2, l2] = cli::align_training_pair(Image(30, 30), Image(26, 26), 7);
  CHECK(h2.height() == 30);
  CHECK(l2.height() == 24);
  CHECK(cli::parse_selection_metric("sobel_var") == cli::SelectionMetric::sobel_var);
  CHECK_THROWS(cli::parse_selection_metric("mse"));
}

TEST_CASE("crossval command prints a table and ties pick the smallest k") {
  Workspace ws("crossval");
  REQUIRE(run({"blur-gen", "--k", "3", "--sigma", "1.0", "--in", ws.hr.string(), "--out",
               ws.lr.string()})
              .code == 0);
  // Two checkpoints that deblur to the same constant output: all scores tie.
  std::vector<std::string> paths;
  for (int k : {5, 3}) {
    ModelCheckpoint cp;
    cp.kernel_size = k;
    cp.patch_size = 6;
    cp.theta = vectorize(gaussian_kernel({k, 1.0}));
    cp.dictionary = Dictionary(Eigen::MatrixXd::Constant(36, 1, 1.0 / 6));
    cp.config.kernel_size = k;
    cp.config.patch_size = 6;
    cp.config.atoms = 1;
    cp.config.lambda = 1e6;
    paths.push_back((ws.root / ("k" + std::to_string(k) + ".ckpt")).string());
    save_checkpoint(cp, paths.back());
  }
  const Result r = run({"crossval", "--checkpoints", paths[0], paths[1], "--in", ws.lr.string(),
                        "--metric", "sobel_var"});
  REQUIRE(r.code == cli::kExitOk);
  CHECK(r.out.find("image,k=3,k=5,best_k") != std::string::npos);
  CHECK(r.out.find("selected_k,3") != std::string::npos);

  CHECK(run({"crossval", "--checkpoints", paths[0], "--in", ws.lr.string()}).code ==
        cli::kExitUsage); // psnr without --gt
  CHECK(run({"crossval", "--checkpoints", (ws.root / "nope.ckpt").string(), "--in",
             ws.lr.string(), "--metric", "sobel_var"})
            .code == cli::kExitFailure);
}

} // TEST_SUITE
