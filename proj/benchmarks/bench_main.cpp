#include "dbdl/blur.hpp"
#include "dbdl/dictionary.hpp"
#include "dbdl/imaging.hpp"
#include "dbdl/sparse.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace dbdl;
using Eigen::MatrixXd;

namespace {

MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

void BM_NarrowConvolve(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const int k = static_cast<int>(state.range(1));
  const Image img(RowMatrix(random_matrix(side, side, 1)));
  const Kernel kern = gaussian_kernel({k, 1.2});
  for (auto _ : state) benchmark::DoNotOptimize(narrow_convolve(img, kern));
  state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_NarrowConvolve)->Args({64, 3})->Args({64, 7})->Args({256, 7})->Args({256, 11});

void BM_BlurApply(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const BlurMatrix b = build_blur_matrix(gaussian_kernel({7, 1.2}), p);
  const MatrixXd x = random_matrix(p * p, 2000, 2);
  for (auto _ : state) benchmark::DoNotOptimize(b.apply(x));
}
BENCHMARK(BM_BlurApply)->Arg(11)->Arg(15)->Unit(benchmark::kMillisecond);

void BM_Fista(benchmark::State& state) {
  const auto atoms = state.range(0);
  const auto signals = state.range(1);
  const MatrixXd d = random_matrix(225, atoms, 3).colwise().normalized();
  const MatrixXd y = random_matrix(225, signals, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fista_solve({d, y, 0.02}, {50, 1e-6}).codes.values.data());
  }
  state.SetItemsProcessed(state.iterations() * signals);
}
BENCHMARK(BM_Fista)->Args({128, 500})->Args({400, 500})->Unit(benchmark::kMillisecond);

void BM_KsvdSweep(benchmark::State& state) {
  const auto atoms = state.range(0);
  const MatrixXd y = random_matrix(225, 2000, 5);
  const Dictionary d0 = init_dictionary(y, atoms, 6);
  const SparseCodes c0 = fista_solve({d0.atoms(), y, 0.5}, {30, 1e-6}).codes;
  for (auto _ : state) {
    state.PauseTiming();
    Dictionary d = d0;
    SparseCodes c = c0;
    state.ResumeTiming();
    ksvd_update_paired(y, d, c);
  }
}
BENCHMARK(BM_KsvdSweep)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_BmeSr(benchmark::State& state) {
  const int p = 15;
  const MatrixXd y = random_matrix(p * p, 2000, 7);
  const Dictionary d = init_dictionary(y, 128, 8);
  const SparseCodes c = fista_solve({d.atoms(), y, 0.5}, {30, 1e-6}).codes;
  const MatrixXd yl = build_blur_matrix(gaussian_kernel({7, 1.2}), p).apply(y);
  for (auto _ : state) {
    AdamState adam(49);
    benchmark::DoNotOptimize(bme_sr(yl, d, c, uniform_blur(7, p), adam, 10).blur.theta().data());
  }
}
BENCHMARK(BM_BmeSr)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
