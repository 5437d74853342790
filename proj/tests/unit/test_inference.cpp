#include "fixtures.hpp"
#include "oracles.hpp"

#include "dbdl/errors.hpp"
#include "dbdl/inference.hpp"
#include "dbdl/metrics.hpp"

#include <doctest.h>

using namespace dbdl;
using Eigen::Index;
using Eigen::MatrixXd;

namespace {

ModelCheckpoint checkpoint_with(int k, int p, const MatrixXd& atoms, double lambda = 0.02) {
  ModelCheckpoint cp;
  cp.kernel_size = k;
  cp.patch_size = p;
  cp.theta = vectorize(gaussian_kernel({k, 1.0}));
  cp.dictionary = Dictionary(atoms);
  cp.config.kernel_size = k;
  cp.config.patch_size = p;
  cp.config.atoms = static_cast<int>(atoms.cols());
  cp.config.lambda = lambda;
  return cp;
}

} // namespace

TEST_SUITE("inference") {

TEST_CASE("LR dictionary is B times D") {
  const MatrixXd atoms = testing::random_matrix(225, 12, 1);
  const ModelCheckpoint cp = checkpoint_with(7, 15, atoms);
  const MatrixXd dl = derive_lr_dictionary(cp);
  CHECK(dl.rows() == 81);
  CHECK(dl.cols() == 12);
  const Kernel kern = gaussian_kernel({7, 1.0});
  for (Index t = 0; t < 12; ++t) {
    const testing::Grid atom = devectorize(cp.dictionary.atom(t), 15, 15);
    const Eigen::VectorXd expect = testing::flatten(testing::convolve_oracle(atom, kern));
    CHECK((dl.col(t) - expect).cwiseAbs().maxCoeff() < 1e-12);
  }
  const ModelCheckpoint ident = checkpoint_with(1, 6, testing::random_matrix(36, 5, 2));
  CHECK((derive_lr_dictionary(ident) - ident.dictionary.atoms()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("LR dictionary with a dense blur") {
  ModelCheckpoint cp = checkpoint_with(3, 5, testing::random_matrix(25, 4, 3));
  cp.dense_blur = testing::random_matrix(9, 25, 4);
  CHECK((derive_lr_dictionary(cp) - *cp.dense_blur * cp.dictionary.atoms()).norm() < 1e-14);
}

TEST_CASE("patch offsets snap to the far edge") {
  CHECK(patch_offsets(10, 4, 1) == std::vector<int>{0, 1, 2, 3, 4, 5, 6});
  CHECK(patch_offsets(10, 4, 3) == std::vector<int>{0, 3, 6});
  CHECK(patch_offsets(10, 4, 4) == std::vector<int>{0, 4, 6});
  CHECK(patch_offsets(4, 4, 5) == std::vector<int>{0});
  CHECK_THROWS(patch_offsets(10, 4, 0));
  CHECK_THROWS_AS(patch_offsets(3, 4, 1), DimensionError);
}

TEST_CASE("coverage counts match the closed form") {
  const int p = 5;
  const int k = 3;
  const auto counts = coverage_counts(12, 10, p, k, 1);
  REQUIRE(counts.rows() == 14);
  REQUIRE(counts.cols() == 12);
  const int q = p - k + 1;
  const int origins_r = 12 - q + 1;
  const int origins_c = 10 - q + 1;
  for (int r = 0; r < 14; ++r) {
    for (int c = 0; c < 12; ++c) {
      const int nr = std::min(r, origins_r - 1) - std::max(0, r - p + 1) + 1;
      const int nc = std::min(c, origins_c - 1) - std::max(0, c - p + 1) + 1;
      CHECK(counts(r, c) == nr * nc);
    }
  }
  CHECK(counts(7, 6) == p * p);
  for (int stride : {2, 3, 7}) {
    CHECK((coverage_counts(12, 10, p, k, stride).array() > 0).all());
  }
}

TEST_CASE("aggregation buffer") {
  AggregationBuffer buf(3, 3);
  buf.add(0, 0, RowMatrix::Constant(2, 2, 1.0));
  buf.add(1, 1, RowMatrix::Constant(2, 2, 3.0));
  CHECK_THROWS_AS(buf.average(), NumericalError);
  buf.add(0, 1, RowMatrix::Constant(2, 2, 0.0));
  buf.add(1, 0, RowMatrix::Constant(2, 2, 0.0));
  const Image avg = buf.average();
  CHECK(buf.counts()(1, 1) == 4);
  CHECK(avg(1, 1) == doctest::Approx(1.0));
  CHECK(avg(2, 2) == 3.0);
}

TEST_CASE("self-representation with an identity blur") {
  const Image img = testing::synthetic_scene(12, 12, 4);
  const int p = 4;
  std::vector<Eigen::VectorXd> cols;
  for (int r = 0; r + p <= 12; ++r) {
    for (int c = 0; c + p <= 12; ++c) cols.push_back(vectorize(img.pixels().block(r, c, p, p)));
  }
  MatrixXd atoms(p * p, static_cast<Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) atoms.col(static_cast<Index>(i)) = cols[i];
  ModelCheckpoint cp = checkpoint_with(1, p, atoms, 1e-6);
  DeblurOptions opts;
  opts.fista = {20000, 1e-14};
  const Image out = deblur(img, cp, opts);
  REQUIRE(out.height() == 12);
  CHECK((out.pixels() - img.pixels()).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("constant image aggregates without seams") {
  const int p = 5;
  const int k = 3;
  // One atom that is exactly the constant HR patch; its blurred version is
  // exactly the constant LR patch, so every LR patch is coded exactly up to
  // the l1 shrinkage, which the tiny lambda keeps below the tolerance.
  MatrixXd atoms = MatrixXd::Constant(p * p, 1, 1.0 / p);
  ModelCheckpoint cp = checkpoint_with(k, p, atoms);
  const Image lr(9, 11, 0.6);
  CoupledDictionaries dicts = coupled_dictionaries(cp);
  const Image out = deblur(lr, dicts, 1e-12, {1, std::nullopt, {5000, 1e-16}});
  REQUIRE(out.height() == 11);
  REQUIRE(out.width() == 13);
  CHECK((out.pixels().array() - 0.6).abs().maxCoeff() < 1e-10);
}

TEST_CASE("output dimensions for every stride") {
  const ModelCheckpoint cp = checkpoint_with(3, 6, testing::random_matrix(36, 8, 5, 0.0, 1.0));
  const Image lr = testing::synthetic_scene(13, 17, 6);
  for (int stride : {1, 2, 3, 5, 100}) {
    DeblurOptions o;
    o.stride = stride;
    const Image out = deblur(lr, cp, o);
    CHECK(out.height() == 15);
    CHECK(out.width() == 19);
    CHECK(out.pixels().minCoeff() >= 0.0);
    CHECK(out.pixels().maxCoeff() <= 1.0);
  }
}

TEST_CASE("deblur is deterministic and validates geometry") {
  const ModelCheckpoint cp = checkpoint_with(3, 6, testing::random_matrix(36, 8, 7, 0.0, 1.0));
  const Image lr = testing::synthetic_scene(10, 10, 8);
  CHECK(deblur(lr, cp).pixels() == deblur(lr, cp).pixels());
  DeblurOptions small_batch;
  small_batch.batch = 7;
  CHECK(deblur(lr, cp, small_batch).pixels() == deblur(lr, cp).pixels());
  CHECK_THROWS_AS(deblur(Image(3, 10, 0.5), cp), DimensionError);
  DeblurOptions bad;
  bad.stride = 0;
  CHECK_THROWS(deblur(lr, cp, bad));
  ModelCheckpoint broken = cp;
  broken.theta.resize(4);
  CHECK_THROWS_AS(deblur(lr, broken), FormatError);
}

TEST_CASE("explicit inference lambda overrides the training value") {
  const ModelCheckpoint cp = checkpoint_with(3, 6, testing::random_matrix(36, 8, 9, 0.0, 1.0), 0.02);
  const Image lr = testing::synthetic_scene(10, 10, 10);
  DeblurOptions big;
  big.lambda = 1e6;
  const Image out = deblur(lr, cp, big);
  CHECK(out.pixels().isZero(0.0)); // every code is zero
}

} // TEST_SUITE
