#include <benchmark/benchmark.h>

#include "qforest/linalg.hpp"
#include "qforest/rng.hpp"
#include "qforest/svm.hpp"

namespace {

using namespace qforest;

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Stream rng{StreamKey(seed)};
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

void BM_Eigh(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const Eigen::MatrixXd f = gaussian(n, n, 1);
  const Eigen::MatrixXd a = f * f.transpose();
  for (auto _ : state) benchmark::DoNotOptimize(linalg::eigh(a));
}
BENCHMARK(BM_Eigh)->Arg(10)->Arg(40)->Arg(100);

void BM_Smo(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const Eigen::MatrixXd X = gaussian(n, 10, 2);
  std::vector<double> y(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = X(i, 0) + 0.5 * X(i, 1) > 0 ? 1.0 : -1.0;
  for (auto _ : state) benchmark::DoNotOptimize(svm::train_linear(X, y, 1.0));
}
BENCHMARK(BM_Smo)->Arg(50)->Arg(200)->Arg(800);

}  // namespace
