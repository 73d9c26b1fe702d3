#include <benchmark/benchmark.h>

#include <map>

#include "toruslab/census.hpp"
#include "toruslab/dynamics.hpp"
#include "toruslab/newton.hpp"
#include "toruslab/spectral.hpp"

using namespace toruslab;

namespace {

struct Setup {
  TorusParams params{5.0, 1.0, 0.02, 25};
  Profile profile;
  Nonlinearity nl;
  SteadyState base;
};

// Forged pattern and its eps = 0 steady state on an n_phi x 4 n_phi grid.
const Setup& setup(int n_phi) {
  static std::map<int, Setup> cache;
  if (auto it = cache.find(n_phi); it != cache.end()) return it->second;
  const TorusParams p0 = TorusParams{5.0, 1.0, 0.0, 25};
  Profile pr = build_profile(ProfileConfig{}, p0);
  Nonlinearity nl = forge_nonlinearity(pr, p0);
  const PeriodicGrid g{n_phi, 200 * (n_phi / 32)};
  const auto col = ExtendedProfile(pr).sample(n_phi);
  ScalarField u(g);
  for (int i = 0; i < g.n_phi; ++i)
    for (int j = 0; j < g.n_theta; ++j) u(i, j) = col[i];
  SteadyState base = newton_solve(u, assemble_laplacian(p0, g), nl);
  return cache.emplace(n_phi, Setup{{5.0, 1.0, 0.02, 25}, std::move(pr), std::move(nl), std::move(base)})
      .first->second;
}

PeriodicGrid grid_for(int n_phi) { return {n_phi, 200 * (n_phi / 32)}; }

void BM_Assemble(benchmark::State& st) {
  const PeriodicGrid g = grid_for(int(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(assemble_laplacian({5.0, 1.0, 0.02, 25}, g));
  st.SetItemsProcessed(st.iterations() * g.size());
}
BENCHMARK(BM_Assemble)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_NewtonFactor(benchmark::State& st) {
  const auto& s = setup(int(st.range(0)));
  const auto op = assemble_laplacian(s.params, s.base.field.grid());
  const auto d = fprime_of(s.base.field, s.nl);
  const SparseCol K = negative_shifted(op, d);
  for (auto _ : st) {
    SymmetricSolver solver;
    solver.factor(K);
    benchmark::DoNotOptimize(solver.min_abs_pivot());
  }
}
BENCHMARK(BM_NewtonFactor)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_ImexStep(benchmark::State& st) {
  const auto& s = setup(int(st.range(0)));
  const auto op = assemble_laplacian(s.params, s.base.field.grid());
  const ImexStepper stepper(op, s.nl, 0.5 / s.nl.max_abs_fprime());
  ScalarField u = s.base.field;
  for (auto _ : st) {
    u = stepper.step(u);
    benchmark::DoNotOptimize(u.values.data());
  }
}
BENCHMARK(BM_ImexStep)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Energy(benchmark::State& st) {
  const auto& s = setup(int(st.range(0)));
  const auto op = assemble_laplacian(s.params, s.base.field.grid());
  for (auto _ : st) benchmark::DoNotOptimize(energy(s.base.field, op, s.nl));
}
BENCHMARK(BM_Energy)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Census(benchmark::State& st) {
  const auto& s = setup(int(st.range(0)));
  const auto b = continuation(s.base, 0.02, 2, s.base.field.grid(), s.nl);
  const auto& u = b.final_state();
  for (auto _ : st) benchmark::DoNotOptimize(locate_critical_points(u.field, u.params).count);
}
BENCHMARK(BM_Census)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
