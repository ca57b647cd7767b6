// Serial reference vs OpenMP kernels.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "mpf/kernels.hpp"

using namespace mpf;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

std::vector<geometry::BoundingBox> random_boxes(int n) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pos(0.0, 1200.0), size(20.0, 200.0);
  std::vector<geometry::BoundingBox> boxes;
  for (int i = 0; i < n; ++i) {
    const double u = pos(rng), v = pos(rng) * 0.5;
    boxes.push_back({u, v, u + size(rng), v + 2.0 * size(rng)});
  }
  return boxes;
}

void BM_GramSerial(benchmark::State& st) {
  const auto x = random_matrix(512, st.range(0), 1);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::gram_serial(x));
}
void BM_GramParallel(benchmark::State& st) {
  const auto x = random_matrix(512, st.range(0), 1);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::gram_parallel(x));
}

void BM_ResponseSerial(benchmark::State& st) {
  const auto x = random_matrix(512, st.range(0), 2);
  const Eigen::VectorXd w = random_matrix(512, 1, 3);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::affine_response_serial(x, w, 0.1));
}
void BM_ResponseParallel(benchmark::State& st) {
  const auto x = random_matrix(512, st.range(0), 2);
  const Eigen::VectorXd w = random_matrix(512, 1, 3);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::affine_response_parallel(x, w, 0.1));
}

void BM_IouSerial(benchmark::State& st) {
  const auto boxes = random_boxes(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(kernels::pairwise_iou_serial(boxes));
}
void BM_IouParallel(benchmark::State& st) {
  const auto boxes = random_boxes(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(kernels::pairwise_iou_parallel(boxes));
}

void BM_DistancesSerial(benchmark::State& st) {
  const auto a = random_matrix(2, st.range(0), 4), b = random_matrix(2, st.range(0), 5);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::squared_distances_serial(a, b));
}
void BM_DistancesParallel(benchmark::State& st) {
  const auto a = random_matrix(2, st.range(0), 4), b = random_matrix(2, st.range(0), 5);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::squared_distances_parallel(a, b));
}

}  // namespace

BENCHMARK(BM_GramSerial)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_GramParallel)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_ResponseSerial)->Arg(16)->Arg(256);
BENCHMARK(BM_ResponseParallel)->Arg(16)->Arg(256);
BENCHMARK(BM_IouSerial)->Arg(10)->Arg(200);
BENCHMARK(BM_IouParallel)->Arg(10)->Arg(200);
BENCHMARK(BM_DistancesSerial)->Arg(10)->Arg(500);
BENCHMARK(BM_DistancesParallel)->Arg(10)->Arg(500);

BENCHMARK_MAIN();
