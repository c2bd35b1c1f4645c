#include <benchmark/benchmark.h>

#include <cmath>

#include "nldiff/config.hpp"
#include "nldiff/integrator.hpp"

using namespace nldiff;

namespace {

ModelConfig make_model(int modes) {
  RunConfig rc;
  rc.modes_per_axis = {modes};
  return build_model(rc);
}

SpectralField smooth_start(const ModelConfig& model) {
  RunConfig rc;
  rc.init_kind = "lowpass";
  rc.init_amp = 1.0;
  return build_initial(rc, model.spectrum);
}

}  // namespace

static void BM_GalerkinRhs(benchmark::State& state) {
  const auto model = make_model(static_cast<int>(state.range(0)));
  GalerkinSystem sys(model);
  const auto u0 = smooth_start(model);
  std::vector<double> out(u0.coeffs.size());
  for (auto _ : state) {
    sys.rhs(0.0, u0.coeffs, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_GalerkinRhs)->Arg(8)->Arg(16)->Arg(32)->Arg(64);

static void BM_Rk4Step(benchmark::State& state) {
  const auto model = make_model(static_cast<int>(state.range(0)));
  GalerkinState s{0.0, smooth_start(model)};
  for (auto _ : state) {
    auto next = step(Rk4{}, model, s, 1e-3);
    benchmark::DoNotOptimize(next.u.coeffs.data());
  }
}
BENCHMARK(BM_Rk4Step)->Arg(16)->Arg(32);

static void BM_ImexStep(benchmark::State& state) {
  const auto model = make_model(static_cast<int>(state.range(0)));
  GalerkinState s{0.0, smooth_start(model)};
  for (auto _ : state) {
    auto next = step(ImexTheta{1.0, 1.0}, model, s, 1e-3);
    benchmark::DoNotOptimize(next.u.coeffs.data());
  }
}
BENCHMARK(BM_ImexStep)->Arg(16)->Arg(32);

// Work-precision: fixed horizon, sweep dt, report the end-state error against
// a tight adaptive reference alongside the wall time per run.
static void BM_WorkPrecision(benchmark::State& state) {
  const bool rk = state.range(0) == 0;
  const double dt = 1.0 / static_cast<double>(state.range(1));
  const auto model = make_model(16);
  const auto u0 = smooth_start(model);
  const auto reference = reference_solve(model, 0.0, 1.0, u0, 1e-12);

  double err = 0.0;
  for (auto _ : state) {
    const Scheme scheme = rk ? Scheme{Rk4{}} : Scheme{ImexTheta{1.0, 1.0}};
    const auto traj = integrate(model, 0.0, 1.0, u0, dt, scheme);
    err = 0.0;
    for (int i = 0; i < u0.size(); ++i)
      err = std::max(err, std::abs(traj.back().u.coeffs[size_t(i)] -
                                   reference.back().u.coeffs[size_t(i)]));
    benchmark::DoNotOptimize(err);
  }
  state.counters["max_err"] = err;
  state.counters["steps"] = static_cast<double>(state.range(1));
}
BENCHMARK(BM_WorkPrecision)
    ->ArgsProduct({{0, 1}, {32, 128, 512, 2048}})
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
