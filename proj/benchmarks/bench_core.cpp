#include <benchmark/benchmark.h>

#include "stride/evalkit.hpp"
#include "stride/fbp.hpp"
#include "stride/parallel.hpp"
#include "stride/pipeline.hpp"
#include "stride/projector.hpp"
#include "stride/toy_problem.hpp"
#include "stride/wavelet.hpp"

using namespace stride;

namespace {

// Image side n with the desk geometry; views and detectors scale with n.
struct Scene {
  ImageShape shape;
  FanBeamGeometry geometry;
  ImageGrid image;
  Sinogram sino;

  explicit Scene(std::size_t n)
      : shape(desk_image_shape(n)),
        geometry(desk_geometry(3 * n, 2 * n)),
        image(shepp_logan(shape)),
        sino(forward_project(image, geometry)) {}
};

void BM_ForwardProject(benchmark::State& state) {
  set_thread_count(1);
  const Scene s(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(forward_project(s.image, s.geometry));
}
BENCHMARK(BM_ForwardProject)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_AdjointProject(benchmark::State& state) {
  set_thread_count(1);
  const Scene s(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(adjoint_project(s.sino, s.geometry, s.shape));
}
BENCHMARK(BM_AdjointProject)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Fbp(benchmark::State& state) {
  set_thread_count(1);
  const Scene s(static_cast<std::size_t>(state.range(0)));
  const FilterSpec f;
  for (auto _ : state) benchmark::DoNotOptimize(fbp_reconstruct(s.sino, s.geometry, f, s.shape));
}
BENCHMARK(BM_Fbp)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_SwtRoundTrip(benchmark::State& state) {
  const Scene s(static_cast<std::size_t>(state.range(0)));
  const auto w = static_cast<WaveletFilter>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(iswt_reconstruct(swt_decompose(s.sino.values, w)));
}
BENCHMARK(BM_SwtRoundTrip)
    ->Args({64, static_cast<int>(WaveletFilter::haar)})
    ->Args({64, static_cast<int>(WaveletFilter::db2)})
    ->Args({128, static_cast<int>(WaveletFilter::db2)})
    ->Unit(benchmark::kMicrosecond);

// Whole desk pipeline with shortened schedules so one iteration stays around a second.
void BM_StrideDesk(benchmark::State& state) {
  set_thread_count(1);
  static const ToyProblem p = make_toy_problem(ToyProblemSpec{});
  PipelineConfig cfg;
  cfg.ddim_steps = static_cast<int>(state.range(0));
  cfg.corrector.n_steps = static_cast<int>(state.range(0));
  const AnalyticModels models = make_analytic_models(p, cfg);
  for (auto _ : state) {
    benchmark::DoNotOptimize(stride_reconstruct(p.observed, p.mask, models.view(), cfg, p.shape));
  }
}
BENCHMARK(BM_StrideDesk)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
