// Microbenchmarks for the flow integrators, phase quadrature, and the
// sampled-wavefunction translation.

#include <benchmark/benchmark.h>

#include <cmath>

#include "ptk/dynamics.hpp"
#include "ptk/hamilton_jacobi.hpp"
#include "ptk/manifold.hpp"
#include "ptk/semiclassical.hpp"
#include "ptk/transport.hpp"

namespace {

void bench_flow_midpoint_harmonic(benchmark::State& state) {
    const ptk::Hamiltonian ham = ptk::hamiltonian_harmonic(1);
    ptk::FlowOptions opt;
    opt.steps = static_cast<int>(state.range(0));
    opt.force_midpoint = true;
    for (auto _ : state) {
        auto traj = ptk::flow(ham, ptk::PhasePoint::scalar(1.0, 0.0), 0.0, 6.28, opt);
        benchmark::DoNotOptimize(traj.back().action);
    }
    state.SetItemsProcessed(state.iterations() * opt.steps);
}
BENCHMARK(bench_flow_midpoint_harmonic)->Arg(256)->Arg(1024)->Arg(4096);

void bench_flow_verlet_quartic(benchmark::State& state) {
    const ptk::Hamiltonian ham(
        1,
        [](const ptk::PhasePoint& z, double) {
            return 0.5 * z.p.squaredNorm() + 0.25 * std::pow(z.x[0], 4);
        },
        [](const ptk::PhasePoint& z, double) {
            Eigen::VectorXd g(2);
            g << std::pow(z.x[0], 3), z.p[0];
            return g;
        },
        true, false, true);
    ptk::FlowOptions opt;
    opt.steps = static_cast<int>(state.range(0));
    for (auto _ : state) {
        auto traj = ptk::flow(ham, ptk::PhasePoint::scalar(1.0, 0.0), 0.0, 6.28, opt);
        benchmark::DoNotOptimize(traj.back().action);
    }
    state.SetItemsProcessed(state.iterations() * opt.steps);
}
BENCHMARK(bench_flow_verlet_quartic)->Arg(1024)->Arg(8192);

void bench_phase_circle(benchmark::State& state) {
    const ptk::ParamManifold m = ptk::make_circle(1.0);
    Eigen::VectorXd th(1);
    th << 2.1;
    Eigen::VectorXi w(1);
    w << static_cast<int>(state.range(0));
    const ptk::HomotopyPoint hp = ptk::make_homotopy_point(m, th, w);
    for (auto _ : state) {
        benchmark::DoNotOptimize(ptk::phase(m, hp));
    }
}
BENCHMARK(bench_phase_circle)->Arg(0)->Arg(3);

void bench_transport_closed_form(benchmark::State& state) {
    const ptk::ParamManifold m = ptk::make_circle(1.0);
    Eigen::VectorXd th(1);
    th << 0.3;
    const ptk::HomotopyPoint hp = ptk::make_homotopy_point(m, th, Eigen::VectorXi::Zero(1));
    const ptk::SymplecticMap s = ptk::SymplecticMap::rotation_j(1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(ptk::quadratic_transport_phase(s, m, hp));
    }
}
BENCHMARK(bench_transport_closed_form);

void bench_hj_solve_free(benchmark::State& state) {
    const ptk::Hamiltonian ham = ptk::hamiltonian_free(1);
    ptk::HJInitialData data;
    data.phi0 = [](double x) { return 0.5 * x * x; };
    data.dphi0 = [](double x) { return x; };
    ptk::HJGrid grid;
    grid.lo = -1.0;
    grid.hi = 1.0;
    grid.nodes = static_cast<int>(state.range(0));
    for (auto _ : state) {
        auto sol = ptk::hj_solve(ham, data, grid, 1.0, 128);
        benchmark::DoNotOptimize(sol.breakdown());
    }
}
BENCHMARK(bench_hj_solve_free)->Arg(101)->Arg(201);

void bench_weyl_translate(benchmark::State& state) {
    const auto wf = ptk::make_gaussian_wavefunction(0.0, 0.0, 1.0, -12.0, 12.0,
                                                    static_cast<int>(state.range(0)), 1.0);
    const double dx = wf.spacing();
    const ptk::PhasePoint z_a = ptk::PhasePoint::scalar(64 * dx, 0.7);
    for (auto _ : state) {
        auto out = ptk::weyl_translate(wf, z_a);
        benchmark::DoNotOptimize(out.values[0]);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bench_weyl_translate)->Arg(1024)->Arg(16384);

}  // namespace

BENCHMARK_MAIN();
