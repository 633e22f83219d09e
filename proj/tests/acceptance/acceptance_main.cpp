// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails.  Every tolerance is pinned in code next to its check.

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ptk/dynamics.hpp"
#include "ptk/hamilton_jacobi.hpp"
#include "ptk/manifold.hpp"
#include "ptk/numerics.hpp"
#include "ptk/scenario.hpp"
#include "ptk/semiclassical.hpp"
#include "ptk/symplectic.hpp"
#include "ptk/transport.hpp"

using namespace ptk;

namespace {

struct Criterion {
    bool pass = true;
    std::string detail;      // summary, set by the criterion body
    std::string failures;    // accumulated failed checks

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!failures.empty()) failures += "; ";
            failures += what;
        }
    }

    std::string report() const {
        if (pass) return detail;
        return failures + (detail.empty() ? "" : " [" + detail + "]");
    }
};

QuadratureOptions tight() {
    QuadratureOptions q;
    q.tol = 1e-12;
    return q;
}

Eigen::MatrixXd random_symmetric(int dim, std::mt19937_64& rng, double scale) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd m(dim, dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = i; j < dim; ++j) {
            m(i, j) = scale * u(rng);
            m(j, i) = m(i, j);
        }
    }
    return m;
}

PhasePoint random_point(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXd x(n), p(n);
    for (int i = 0; i < n; ++i) {
        x[i] = u(rng);
        p[i] = u(rng);
    }
    return {x, p};
}

const Hamiltonian& quartic_oscillator() {
    static const Hamiltonian ham(
        1,
        [](const PhasePoint& z, double) {
            return 0.5 * z.p.squaredNorm() + 0.25 * std::pow(z.x[0], 4);
        },
        [](const PhasePoint& z, double) {
            Eigen::VectorXd g(2);
            g << std::pow(z.x[0], 3), z.p[0];
            return g;
        },
        true, false, true);
    return ham;
}

// --- criterion 1: closed forms vs the quadrature/flow oracle -----------------

Criterion criterion_closed_forms() {
    Criterion c;
    const int cases = 50;
    const double tol = 1e-6;

    double worst_quadratic = 0.0, worst_translation = 0.0, worst_displacement = 0.0;
    std::vector<double> errs(static_cast<std::size_t>(cases) * 3, 0.0);
    parallel_for(static_cast<std::size_t>(cases), [&](std::size_t i) {
        std::mt19937_64 rng(1000 + 17 * i);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const int n = 1 + static_cast<int>(i % 2);

        // Quadratic homogeneous flows.
        {
            const Eigen::MatrixXd q = random_symmetric(2 * n, rng, 0.7);
            const double t = 0.3 + 0.9 * u(rng);
            const ParamManifold m = make_linear_plane(random_symmetric(n, rng, 0.8));
            Eigen::VectorXd th(n);
            for (int k = 0; k < n; ++k) th[k] = u(rng) - 0.5;
            const HomotopyPoint hp = make_homotopy_point(m, th);
            const SymplecticMap s_t(matrix_exponential(t * symplectic_unit(n) * q));
            const double closed = quadratic_transport_phase(s_t, m, hp, tight());
            const double numeric =
                transport_phase(hamiltonian_quadratic(q), m, hp, t, {.steps = 4096}, tight())
                    .value;
            errs[3 * i] = std::abs(closed - numeric);
        }
        // Translations.
        {
            const ParamManifold m = make_linear_plane(random_symmetric(n, rng, 0.8));
            Eigen::VectorXd th(n);
            for (int k = 0; k < n; ++k) th[k] = u(rng) - 0.5;
            const HomotopyPoint hp = make_homotopy_point(m, th);
            const PhasePoint z_a = random_point(n, rng);
            const double closed = translation_phase(z_a, m, hp, tight());
            const double numeric =
                transport_phase(hamiltonian_translation(z_a), m, hp, 1.0, {.steps = 256}, tight())
                    .value;
            errs[3 * i + 1] = std::abs(closed - numeric);
        }
        // Displacements along smooth curves (1-D manifolds).
        {
            std::uniform_real_distribution<double> amp(-0.8, 0.8);
            Eigen::VectorXd cx(5), cp(5);
            for (int k = 0; k < 5; ++k) {
                cx[k] = amp(rng);
                cp[k] = amp(rng);
            }
            CurveSpec curve;
            curve.gamma = [cx, cp](double t) {
                const double x = cx[0] + cx[1] * std::cos(t) + cx[2] * std::sin(t) +
                                 cx[3] * std::cos(2 * t) + cx[4] * std::sin(2 * t);
                const double p = cp[0] + cp[1] * std::cos(t) + cp[2] * std::sin(t) +
                                 cp[3] * std::cos(2 * t) + cp[4] * std::sin(2 * t);
                return PhasePoint::scalar(x, p);
            };
            curve.dgamma = [cx, cp](double t) {
                const double x = -cx[1] * std::sin(t) + cx[2] * std::cos(t) -
                                 2 * cx[3] * std::sin(2 * t) + 2 * cx[4] * std::cos(2 * t);
                const double p = -cp[1] * std::sin(t) + cp[2] * std::cos(t) -
                                 2 * cp[3] * std::sin(2 * t) + 2 * cp[4] * std::cos(2 * t);
                return PhasePoint::scalar(x, p);
            };
            const ParamManifold m = make_circle(0.6 + 0.8 * u(rng));
            Eigen::VectorXd th(1);
            th << two_pi * u(rng);
            const HomotopyPoint hp = make_homotopy_point(m, th);
            const double t = 0.5 + u(rng);
            const double closed = displacement_phase(curve, m, hp, t, tight());
            const double numeric = transport_phase(hamiltonian_displacement(curve, 1), m, hp, t,
                                                   {.steps = 4096}, tight())
                                       .value;
            errs[3 * i + 2] = std::abs(closed - numeric);
        }
    });
    for (int i = 0; i < cases; ++i) {
        worst_quadratic = std::max(worst_quadratic, errs[3 * i]);
        worst_translation = std::max(worst_translation, errs[3 * i + 1]);
        worst_displacement = std::max(worst_displacement, errs[3 * i + 2]);
    }
    c.require(worst_quadratic <= tol, "quadratic max " + format_g17(worst_quadratic));
    c.require(worst_translation <= tol, "translation max " + format_g17(worst_translation));
    c.require(worst_displacement <= tol, "displacement max " + format_g17(worst_displacement));
    c.detail = "max |closed - transport|: quadratic " + format_g17(worst_quadratic) +
               ", translation " + format_g17(worst_translation) + ", displacement " +
               format_g17(worst_displacement);
    return c;
}

// --- criterion 2: commutation algebra ----------------------------------------

Criterion criterion_commutation() {
    Criterion c;
    const double tol = 1e-12;
    std::mt19937_64 rng(2026);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const int n = 1 + i % 3;
        const ParamManifold m = make_linear_plane(random_symmetric(n, rng, 0.8));
        Eigen::VectorXd th(n);
        for (int k = 0; k < n; ++k) th[k] = 0.1 * (k + 1) - 0.05 * (i % 7);
        const HomotopyPoint hp = make_homotopy_point(m, th);
        const PhasePoint z_a = random_point(n, rng);
        const PhasePoint z_b = random_point(n, rng);
        const auto d = translation_commutation_defects(z_a, z_b, m, hp, tight());
        const double sig = symplectic_form(z_a, z_b);
        worst = std::max(worst, std::abs(d.half_defect + 0.5 * sig));
        worst = std::max(worst, std::abs(d.full_defect - sig));
    }
    c.require(worst <= tol, "max deviation " + format_g17(worst));
    c.detail = "max |defect - closed form| = " + format_g17(worst) + " over 100 pairs";
    return c;
}

// --- criterion 3: frame invariance of the Lagrangian phase --------------------

Criterion criterion_frame_invariance() {
    Criterion c;
    const double tol = 1e-9;
    std::mt19937_64 rng(3033);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const ParamManifold circle = make_circle(1.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const SymplecticMap r = random_symplectic(1, rng);
        Eigen::VectorXd th(1);
        th << two_pi * u(rng);
        Eigen::VectorXi w(1);
        w << (i % 3) - 1;
        const HomotopyPoint hp = make_homotopy_point(circle, th, w);

        const double lambda = lagrangian_phase(circle, hp, tight());
        const ParamManifold mapped = apply_linear(circle, r);
        const double fresh = phase(mapped, hp, tight());
        const double anchor = frame_phase_shift(r, circle.at(circle.base_point));
        const PhasePoint zr = mapped.at(hp.cover_endpoint());
        const double lambda_r = fresh + anchor - 0.5 * zr.p.dot(zr.x);
        worst = std::max(worst, std::abs(lambda_r - lambda));
    }
    c.require(worst <= tol, "max |delta lambda| " + format_g17(worst));
    c.detail = "max |delta lambda| = " + format_g17(worst) + " over 100 frames";
    return c;
}

// --- criterion 4: relative invariance of the circulation ----------------------

Criterion criterion_invariance() {
    Criterion c;
    const double tol = 1e-7;
    std::vector<PhasePoint> segment;
    const int res = 4096;  // converged curve resolution; the step error dominates
    for (int k = 0; k <= res; ++k) {
        segment.push_back(PhasePoint::scalar(static_cast<double>(k) / res, 0.0));
    }
    InvarianceOptions io;
    io.flow.steps = 1024;
    const double harmonic = std::abs(invariance_defect(hamiltonian_harmonic(1), segment, 1.0, io));
    const double quartic = std::abs(invariance_defect(quartic_oscillator(), segment, 1.0, io));
    c.require(harmonic <= tol, "harmonic defect " + format_g17(harmonic));
    c.require(quartic <= tol, "anharmonic defect " + format_g17(quartic));

    // Second-order convergence in the step size.
    InvarianceOptions c128, c256, c512;
    c128.flow.steps = 128;
    c256.flow.steps = 256;
    c512.flow.steps = 512;
    const double d128 = std::abs(invariance_defect(hamiltonian_harmonic(1), segment, 1.0, c128));
    const double d256 = std::abs(invariance_defect(hamiltonian_harmonic(1), segment, 1.0, c256));
    const double d512 = std::abs(invariance_defect(hamiltonian_harmonic(1), segment, 1.0, c512));
    const double slope1 = std::log2(d128 / d256);
    const double slope2 = std::log2(d256 / d512);
    c.require(std::abs(slope1 - 2.0) <= 0.4 && std::abs(slope2 - 2.0) <= 0.4,
              "slopes " + format_g17(slope1) + ", " + format_g17(slope2));
    c.detail = "defects: harmonic " + format_g17(harmonic) + ", anharmonic " +
               format_g17(quartic) + "; order " + format_g17(slope1) + ", " + format_g17(slope2);
    return c;
}

// --- criterion 5: circle monodromy --------------------------------------------

Criterion criterion_circle_monodromy() {
    Criterion c;
    const ParamManifold m = make_circle(1.0);
    LoopClass loop;
    loop.windings = Eigen::VectorXi::Ones(1);
    const double period = loop_period(m, loop, tight());
    const double pi = two_pi / 2.0;
    c.require(std::abs(period + pi) <= 1e-9, "period " + format_g17(period));

    Eigen::VectorXd th(1);
    th << pi / 2.0;
    const double ph = phase(m, make_homotopy_point(m, th, Eigen::VectorXi::Zero(1)), tight());
    c.require(std::abs(ph + pi / 4.0) <= 1e-9, "phase " + format_g17(ph));
    c.detail = "loop period " + format_g17(period) + ", phase(pi/2) = " + format_g17(ph);
    return c;
}

// --- criterion 6: Hamilton-Jacobi ----------------------------------------------

Criterion criterion_hamilton_jacobi() {
    Criterion c;
    HJGrid grid;
    grid.lo = -1.0;
    grid.hi = 1.0;
    grid.nodes = 201;

    HJInitialData spreading;
    spreading.phi0 = [](double x) { return 0.5 * x * x; };
    spreading.dphi0 = [](double x) { return x; };
    const HJSolution sol = hj_solve(hamiltonian_free(1), spreading, grid, 1.0, 200);
    const Eigen::VectorXd xs = grid.points();
    double worst = 0.0;
    const std::size_t last = sol.times.size() - 1;
    for (int j = 0; j < grid.nodes; ++j) {
        if (!sol.valid[last][static_cast<std::size_t>(j)]) {
            c.require(false, "invalid node in the spreading solution");
            continue;
        }
        worst = std::max(worst, std::abs(sol.phi(static_cast<Eigen::Index>(last), j) -
                                         xs[j] * xs[j] / 4.0));
    }
    c.require(worst <= 1e-6, "solution error " + format_g17(worst));

    HJInitialData focusing;
    focusing.phi0 = [](double x) { return -0.5 * x * x; };
    focusing.dphi0 = [](double x) { return -x; };
    const int steps = 400;
    const double dt = 2.0 / steps;
    const double bd = breakdown_time(hamiltonian_free(1), focusing, grid, 2.0, steps);
    c.require(std::abs(bd - 1.0) <= 2 * dt, "breakdown " + format_g17(bd));

    // Residual slope fit over three refinements.
    const auto residual = [&](int nodes, int nsteps) {
        HJGrid g;
        g.lo = -1.0;
        g.hi = 1.0;
        g.nodes = nodes;
        const HJSolution s = hj_solve(hamiltonian_free(1), spreading, g, 1.0, nsteps);
        const double dx = g.spacing();
        const double dtt = s.times[1] - s.times[0];
        double r = 0.0;
        for (std::size_t k = 1; k + 1 < s.times.size(); ++k) {
            for (int j = 1; j + 1 < g.nodes; ++j) {
                const double dphi_dt = (s.phi(static_cast<Eigen::Index>(k + 1), j) -
                                        s.phi(static_cast<Eigen::Index>(k - 1), j)) /
                                       (2 * dtt);
                const double dphi_dx = (s.phi(static_cast<Eigen::Index>(k), j + 1) -
                                        s.phi(static_cast<Eigen::Index>(k), j - 1)) /
                                       (2 * dx);
                r = std::max(r, std::abs(dphi_dt + 0.5 * dphi_dx * dphi_dx));
            }
        }
        return r;
    };
    const double r1 = residual(51, 50);
    const double r2 = residual(101, 100);
    const double r3 = residual(201, 200);
    const double slope1 = std::log2(r1 / r2);
    const double slope2 = std::log2(r2 / r3);
    c.require(std::abs(slope1 - 2.0) <= 0.4 && std::abs(slope2 - 2.0) <= 0.4,
              "residual slopes " + format_g17(slope1) + ", " + format_g17(slope2));
    c.detail = "solution error " + format_g17(worst) + ", breakdown " + format_g17(bd) +
               ", residual order " + format_g17(slope1) + "/" + format_g17(slope2);
    return c;
}

// --- criterion 7: invariant circle under the harmonic flow ---------------------

Criterion criterion_invariant_torus() {
    Criterion c;
    const double tol = 1e-7;
    const ParamManifold m = make_circle(1.0);
    const Hamiltonian ham = hamiltonian_harmonic(1);
    const double energy = 0.5;
    const double theta0 = 0.9;
    Eigen::VectorXd th(1);
    th << theta0;
    const HomotopyPoint hp = make_homotopy_point(m, th, Eigen::VectorXi::Zero(1));
    double worst = 0.0;
    for (double t : {0.1, 1.0, two_pi / 2.0}) {
        const TransportedPhase tp = transport_phase(ham, m, hp, t, {.steps = 16384}, tight());
        Eigen::VectorXd tht(1);
        tht << theta0 - t;
        const double rhs = phase(m, make_homotopy_point(m, tht), tight()) - energy * t;
        worst = std::max(worst, std::abs(tp.value - rhs));
    }
    c.require(worst <= tol, "max deviation " + format_g17(worst));
    c.detail = "max |phi(z,t) - (phi(z_t) - E t)| = " + format_g17(worst);
    return c;
}

// --- criterion 8: EBK ladder -----------------------------------------------------

Criterion criterion_ebk_ladder() {
    Criterion c;
    LoopClass loop;
    loop.windings = Eigen::VectorXi::Ones(1);
    for (int level = 0; level <= 5; ++level) {
        const double r2 = 2.0 * level + 1.0;
        const auto exact = ebk_check(make_circle(std::sqrt(r2)), 1.0, {loop});
        c.require(exact[0].maslov == 2, "maslov at level " + std::to_string(level));
        c.require(exact[0].quantized && exact[0].residue <= 1e-9,
                  "ladder level " + std::to_string(level) + " residue " +
                      format_g17(exact[0].residue));
        for (double off : {0.95, 1.05}) {
            const auto detuned = ebk_check(make_circle(std::sqrt(r2 * off)), 1.0, {loop});
            c.require(!detuned[0].quantized,
                      "detuned level " + std::to_string(level) + " still quantized");
        }
    }
    c.detail = "levels m = 0..5 quantized exactly, +-5% detunings rejected, maslov = 2";
    return c;
}

// --- criterion 9: Weyl unitarity and composition ---------------------------------

Criterion criterion_weyl() {
    Criterion c;
    const SampledWavefunction wf =
        make_gaussian_wavefunction(0.0, 0.0, 1.0, -16.0, 16.0, 1024, 1.0);
    const double dx = wf.spacing();
    std::mt19937_64 rng(909);
    std::uniform_int_distribution<int> shift(-32, 32);
    std::uniform_real_distribution<double> mom(-1.0, 1.0);
    double worst_norm = 0.0, worst_phase = 0.0;
    for (int i = 0; i < 25; ++i) {
        const PhasePoint z_a = PhasePoint::scalar(shift(rng) * dx, mom(rng));
        const PhasePoint z_b = PhasePoint::scalar(shift(rng) * dx, mom(rng));
        const SampledWavefunction moved = weyl_translate(wf, z_a);
        worst_norm = std::max(worst_norm, std::abs(moved.norm() - wf.norm()));
        const auto rep = weyl_composition_defect(wf, z_a, z_b);
        const double expected = -symplectic_form(z_a, z_b) / (2.0 * wf.hbar);
        worst_phase = std::max(worst_phase,
                               std::abs(std::remainder(rep.phase_defect - expected, two_pi)));
    }
    c.require(worst_norm <= 1e-12, "norm defect " + format_g17(worst_norm));
    c.require(worst_phase <= 1e-9, "composition phase " + format_g17(worst_phase));
    c.detail = "norm defect " + format_g17(worst_norm) + ", composition phase deviation " +
               format_g17(worst_phase);
    return c;
}

// --- criterion 10: CLI determinism and selftest -----------------------------------

Criterion criterion_cli() {
    Criterion c;
    const auto results = ptk::selftest::run({});
    for (const auto& r : results) {
        c.require(r.pass, "selftest tag " + r.tag + " failed (max err " +
                              format_g17(r.max_error) + ")");
    }

    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() / "ptk_acceptance_cli";
    fs::remove_all(base);
    const char* scenario = R"({
      "kind": "transport",
      "manifold": {"family": "circle", "radius": 1.0},
      "hamiltonian": {"type": "harmonic"},
      "point": {"theta": [0.0], "windings": [0]},
      "time": {"t1": 1.5707963267948966, "steps": 2048},
      "seed": 3
    })";
    auto run_into = [&](const std::string& sub) {
        ptk::scenario::RunOptions opt;
        opt.out_dir = (base / sub).string();
        return ptk::scenario::run_text(scenario, opt);
    };
    const auto r1 = run_into("a");
    const auto r2 = run_into("b");
    c.require(r1.exit_code == 0 && r2.exit_code == 0, "scenario run failed");
    auto slurp = [](const fs::path& p) {
        std::ifstream is(p);
        std::ostringstream os;
        os << is.rdbuf();
        return os.str();
    };
    auto strip_timestamp = [](std::string text) {
        const auto pos = text.find("\"timestamp\"");
        if (pos == std::string::npos) return text;
        const auto end = text.find('\n', pos);
        text.erase(pos, end - pos);
        return text;
    };
    c.require(slurp(base / "a" / "results.csv") == slurp(base / "b" / "results.csv"),
              "CSV outputs differ between runs");
    c.require(strip_timestamp(slurp(base / "a" / "results_manifest.json")) ==
                  strip_timestamp(slurp(base / "b" / "results_manifest.json")),
              "manifests differ beyond the timestamp");
    c.detail = "all selftest tags pass; repeated runs byte-identical modulo timestamps";
    return c;
}

}  // namespace

int main() {
    struct Entry {
        const char* name;
        std::function<Criterion()> run;
    };
    const Entry entries[] = {
        {"closed-form phase laws vs transport oracle", criterion_closed_forms},
        {"translation commutation algebra", criterion_commutation},
        {"Lagrangian phase frame invariance", criterion_frame_invariance},
        {"relative invariance of the circulation", criterion_invariance},
        {"circle monodromy and quarter phase", criterion_circle_monodromy},
        {"Hamilton-Jacobi solution, breakdown, residual order", criterion_hamilton_jacobi},
        {"invariant circle phase law", criterion_invariant_torus},
        {"EBK ladder with Maslov correction", criterion_ebk_ladder},
        {"Weyl translation unitarity and composition", criterion_weyl},
        {"selftest tags and reproducible runs", criterion_cli},
    };

    int failures = 0;
    int index = 0;
    for (const auto& entry : entries) {
        ++index;
        Criterion result;
        try {
            result = entry.run();
        } catch (const std::exception& e) {
            result.pass = false;
            result.failures = std::string("exception: ") + e.what();
        }
        std::printf("[%s] criterion %2d: %s — %s\n", result.pass ? "PASS" : "FAIL", index,
                    entry.name, result.report().c_str());
        if (!result.pass) ++failures;
    }
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
