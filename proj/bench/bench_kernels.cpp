#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "dqa/kernels.hpp"
#include "dqa/spectrum.hpp"
#include "dqa/synth.hpp"

using namespace dqa;
using kernels::Exec;

namespace {

std::vector<kernels::PixelCoord> scattered_points(int n) {
  synth::Rng rng(7);
  std::vector<kernels::PixelCoord> pts;
  for (int i = 0; i < n; ++i) {
    pts.push_back({static_cast<int>(rng.uniform() * 1024), static_cast<int>(rng.uniform() * 768)});
  }
  return pts;
}

GrayImage noise_image(int w, int h) {
  synth::Rng rng(11);
  GrayImage g(w, h);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = rng.uniform();
  return g;
}

void BM_HoughVote(benchmark::State& state) {
  const auto exec = static_cast<Exec>(state.range(0));
  const auto pts = scattered_points(20000);
  const auto grid = kernels::HoughGrid::make(0.0, 3.14159265358979 / 180.0, 180, 1281.0, 1.0);
  std::vector<std::uint32_t> acc(grid.cells());
  for (auto _ : state) {
    std::fill(acc.begin(), acc.end(), 0u);
    kernels::hough_vote(pts, grid, acc, exec);
    benchmark::DoNotOptimize(acc.data());
  }
}

void BM_RadiusHistogram(benchmark::State& state) {
  const auto exec = static_cast<Exec>(state.range(0));
  const auto pts = scattered_points(200000);
  std::vector<std::uint32_t> hist(1300);
  for (auto _ : state) {
    kernels::radius_histogram(pts, {512.0, -80.0}, 0, 1299, hist, exec);
    benchmark::DoNotOptimize(hist.data());
  }
}

void BM_GraphLaplacian(benchmark::State& state) {
  const auto exec = static_cast<Exec>(state.range(0));
  const auto gray = noise_image(1024, 512);
  const auto graph = spectrum::build_grid_graph(gray, 130.0);
  std::vector<double> x(gray.data().begin(), gray.data().end()), y(x.size());
  for (auto _ : state) {
    kernels::graph_laplacian_apply(graph, x, y, exec);
    benchmark::DoNotOptimize(y.data());
  }
}

void BM_NeumannLaplacian(benchmark::State& state) {
  const auto exec = static_cast<Exec>(state.range(0));
  kernels::Window w{0, 0, 1024, 512, 1024, 512};
  std::vector<double> x(w.size(), 1.0), y(w.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.001 * static_cast<double>(i));
  for (auto _ : state) {
    kernels::neumann_laplacian_apply(w, x, y, exec);
    benchmark::DoNotOptimize(y.data());
  }
}

void BM_Dot(benchmark::State& state) {
  const auto exec = static_cast<Exec>(state.range(0));
  std::vector<double> a(1 << 20), b(1 << 20);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = std::cos(0.01 * static_cast<double>(i));
    b[i] = std::sin(0.02 * static_cast<double>(i));
  }
  for (auto _ : state) benchmark::DoNotOptimize(kernels::dot(a, b, exec));
}

void BM_RandomWalker(benchmark::State& state) {
  SolverOptions opt;
  opt.exec = static_cast<Exec>(state.range(0));
  synth::SpectrumSpec spec;
  spec.n_waveforms = 4;
  spec.peak_heights = {150, 140, 160, 150};
  spec.intensity = {0.8, 0.7, 0.6, 0.8};
  spec.noise_sigma = 0.02;
  const auto [img, truth] = synth::gen_spectrum(spec);
  const auto gray = spectrum::to_gray(img);
  const auto seeds = spectrum::make_seeds(gray, truth.axis_row);
  for (auto _ : state) {
    benchmark::DoNotOptimize(spectrum::random_walker_probability(gray, seeds, 130.0, opt));
  }
}

}  // namespace

// Arg 0 = serial reference, 1 = OpenMP
BENCHMARK(BM_HoughVote)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RadiusHistogram)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GraphLaplacian)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NeumannLaplacian)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Dot)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_RandomWalker)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
