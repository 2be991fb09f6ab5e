// Serial reference vs OpenMP path for each kernel.

#include <benchmark/benchmark.h>

#include <random>

#include "dexskin/calibration.hpp"
#include "dexskin/kernels.hpp"
#include "dexskin/simulator.hpp"

namespace {

using namespace dexskin;
using kernels::Exec;

Exec exec_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Exec::serial : Exec::parallel;
}

void BM_ApplyCoupling(benchmark::State& state) {
  const TaxelLayout layout = TaxelLayout::standard();
  const CouplingMatrix k = CouplingMatrix::neighbors(layout, 0.015);
  std::vector<double> x(layout.taxel_count()), out(layout.taxel_count());
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.3);
  for (double& v : x) v = u(rng);
  for (auto _ : state) {
    kernels::apply_coupling(k, x, out, exec_of(state));
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_ApplyCoupling)->Arg(0)->Arg(1);

std::vector<AlignedPairs> pneumatic_jobs(std::size_t n) {
  std::vector<AlignedPairs> jobs(n);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> spread(0.85, 1.15);
  for (std::size_t t = 0; t < n; ++t) {
    const TaxelPhysics p{nominal_a_kpa() * spread(rng), 2.5 * spread(rng), 0.0, 20000.0};
    jobs[t].unit = Unit::kilopascal;
    jobs[t].taxel = t;
    jobs[t].c0 = p.c0;
    for (int i = 0; i <= 100; ++i) {
      const double kpa = 18.7 * i / 100.0;
      TaxelPhysics zc = p;
      zc.d_kpa = -zc.a_kpa;
      jobs[t].pairs.push_back({zc.ideal_x(kpa), kpa});
    }
  }
  return jobs;
}

void BM_FitBatch(benchmark::State& state) {
  const auto jobs = pneumatic_jobs(120);
  for (auto _ : state) {
    auto r = kernels::fit_batch(jobs, CurveForm::pneumatic, FitOptions{}, exec_of(state));
    benchmark::DoNotOptimize(r.data());
  }
}
BENCHMARK(BM_FitBatch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_CrosstalkBatch(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 0.02);
  std::vector<std::vector<double>> frames(1435, std::vector<double>(120));
  std::vector<std::size_t> loaded(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    for (double& v : frames[i]) v = u(rng);
    loaded[i] = i % 120;
    frames[i][loaded[i]] = 1.0;
  }
  for (auto _ : state) {
    auto r = kernels::crosstalk_batch(frames, loaded, exec_of(state));
    benchmark::DoNotOptimize(r.data());
  }
}
BENCHMARK(BM_CrosstalkBatch)->Arg(0)->Arg(1);

void BM_RemapFrame(benchmark::State& state) {
  const auto jobs = pneumatic_jobs(120);
  std::vector<CalibrationCurve> src, tgt;
  for (const auto& j : jobs) src.push_back(fit_pneumatic_curve(j));
  for (std::size_t t = 0; t < jobs.size(); ++t) {
    AlignedPairs j = jobs[(t + 1) % jobs.size()];   // another taxel's physics
    j.taxel = t;
    tgt.push_back(fit_pneumatic_curve(j));
  }
  const TransferMap map = TransferMap::build(src, tgt);
  std::vector<double> counts(120, 21000.0);
  for (auto _ : state) {
    auto r = kernels::remap_frame(map, counts, exec_of(state));
    benchmark::DoNotOptimize(r.data());
  }
}
BENCHMARK(BM_RemapFrame)->Arg(0)->Arg(1);

}  // namespace

BENCHMARK_MAIN();
