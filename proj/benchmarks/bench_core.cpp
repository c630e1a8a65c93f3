#include <benchmark/benchmark.h>

#include <random>

#include "nonpure/forms.hpp"
#include "nonpure/grid.hpp"
#include "nonpure/nc.hpp"
#include "nonpure/nonpure_map.hpp"
#include "nonpure/wasserstein.hpp"

using namespace nonpure;

namespace {

void BM_Divergence(benchmark::State& state) {
  const double h = 2.0 / static_cast<double>(state.range(0));
  const BoxGrid g = BoxGrid::with_spacing({-1.0, -1.0}, {1.0, 1.0}, h);
  const GridVectorField v = sample_field(g, [](std::span<const double> p, std::span<double> out) {
    out[0] = p[0] * p[1];
    out[1] = p[0] - p[1] * p[1];
  });
  for (auto _ : state) benchmark::DoNotOptimize(divergence(v));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.size()));
}
BENCHMARK(BM_Divergence)->Arg(64)->Arg(256)->Arg(1024);

void BM_Pullback(benchmark::State& state) {
  const double h = 0.8 / static_cast<double>(state.range(0));
  const BoxGrid space = BoxGrid::with_spacing({-1.2, -1.2}, {2.4, 2.2}, h);
  Eigen::MatrixXd a(2, 2);
  a << 1.0, 0.2, 0.0, 1.0;
  const NonpureMap f = make_affine_family(a, Bump::normalized_on(space, {0.0, 0.0}, 0.8, 6.0),
                                          ParamBox({0.0, 0.0}, {1.0, 1.0}, {9, 9}), space);
  ScalarFunction p{[](std::span<const double> x) { return x[0] * x[1]; }, {}};
  ScalarFunction q{[](std::span<const double> x) { return x[0] - x[1]; }, {}};
  const SpaceForm omega(2, 1, {p, q});
  for (auto _ : state) benchmark::DoNotOptimize(pullback(f, omega));
}
BENCHMARK(BM_Pullback)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_W1Lp(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> pos(-1.0, 1.0), w(0.1, 1.0);
  auto measure = [&] {
    std::vector<DiscreteMeasure::Atom> atoms(static_cast<std::size_t>(state.range(0)));
    double total = 0.0;
    for (auto& x : atoms) {
      x.position = {pos(rng)};
      x.weight = w(rng);
      total += x.weight;
    }
    for (auto& x : atoms) x.weight /= total;
    return DiscreteMeasure(atoms);
  };
  const DiscreteMeasure mu = measure(), nu = measure();
  for (auto _ : state) benchmark::DoNotOptimize(w1_lp(mu, nu));
}
BENCHMARK(BM_W1Lp)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_MatrixExp(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Matrix x(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) x(i, j) = Complex(d(rng), d(rng));
  }
  for (auto _ : state) benchmark::DoNotOptimize(matrix_exp(x));
}
BENCHMARK(BM_MatrixExp)->Arg(2)->Arg(4)->Arg(6);

}  // namespace

BENCHMARK_MAIN();
