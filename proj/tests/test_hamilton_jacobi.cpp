#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "ptk/dynamics.hpp"
#include "ptk/hamilton_jacobi.hpp"
#include "ptk/manifold.hpp"
#include "ptk/transport.hpp"
#include "support.hpp"

using namespace ptk;

namespace {

HJInitialData quadratic_datum(double coeff) {
    HJInitialData d;
    d.phi0 = [coeff](double x) { return 0.5 * coeff * x * x; };
    d.dphi0 = [coeff](double x) { return coeff * x; };
    return d;
}

HJGrid unit_grid(int nodes) {
    HJGrid g;
    g.lo = -1.0;
    g.hi = 1.0;
    g.nodes = nodes;
    return g;
}

// Max |phi - reference| over valid entries of a time slice.
double slice_error(const HJSolution& sol, std::size_t k,
                   const std::function<double(double, double)>& reference) {
    const Eigen::VectorXd xs = sol.grid.points();
    double err = 0.0;
    int counted = 0;
    for (int j = 0; j < sol.grid.nodes; ++j) {
        if (!sol.valid[k][static_cast<std::size_t>(j)]) continue;
        err = std::max(err, std::abs(sol.phi(static_cast<Eigen::Index>(k), j) -
                                     reference(xs[j], sol.times[k])));
        ++counted;
    }
    REQUIRE(counted > 0);
    return err;
}

}  // namespace

TEST_CASE("free particle with spreading quadratic datum") {
    const HJSolution sol =
        hj_solve(hamiltonian_free(1), quadratic_datum(1.0), unit_grid(201), 1.0, 200);

    // Phi(x, t) = x^2 / (2 (1 + t)); the characteristics are exact here.
    const auto reference = [](double x, double t) { return x * x / (2.0 * (1.0 + t)); };
    CHECK(slice_error(sol, sol.times.size() - 1, reference) <= 1e-6);
    CHECK(slice_error(sol, sol.times.size() / 2, reference) <= 1e-6);

    // The initial slice reproduces the datum exactly.
    const Eigen::VectorXd xs = sol.grid.points();
    for (int j = 0; j < sol.grid.nodes; ++j) {
        CHECK(sol.phi(0, j) == doctest::Approx(0.5 * xs[j] * xs[j]).epsilon(1e-12));
        CHECK(sol.valid[0][static_cast<std::size_t>(j)]);
    }

    // Spreading characteristics never reach a caustic.
    CHECK(sol.breakdown() == std::numeric_limits<double>::infinity());
}

TEST_CASE("focusing datum collapses at t = 1") {
    const HJSolution sol =
        hj_solve(hamiltonian_free(1), quadratic_datum(-1.0), unit_grid(201), 2.0, 400);
    const double dt = 2.0 / 400;
    for (double v : sol.valid_until) {
        CHECK(std::abs(v - 1.0) <= 2 * dt);
    }
    CHECK(std::abs(sol.breakdown() - 1.0) <= 2 * dt);

    // Before the focus the solution matches -x^2 / (2 (1 - t)).
    const auto reference = [](double x, double t) { return -x * x / (2.0 * (1.0 - t)); };
    CHECK(slice_error(sol, 100, reference) <= 1e-6);  // t = 0.5
}

TEST_CASE("breakdown_time summary") {
    const double dt = 2.0 / 256;
    CHECK(std::abs(breakdown_time(hamiltonian_free(1), quadratic_datum(-1.0), unit_grid(101), 2.0,
                                  256) -
                   1.0) <= 2 * dt);
    CHECK(breakdown_time(hamiltonian_free(1), quadratic_datum(1.0), unit_grid(101), 2.0, 256) ==
          std::numeric_limits<double>::infinity());

    // Flat datum under the harmonic flow: the line p = 0 turns vertical at
    // the quarter period.
    const double quarter = two_pi / 4.0;
    const double bd =
        breakdown_time(hamiltonian_harmonic(1), quadratic_datum(0.0), unit_grid(101), 2.0, 512);
    CHECK(std::abs(bd - quarter) <= 2.0 * (2.0 / 512));
}

TEST_CASE("breakdown time is stable under grid refinement") {
    const double coarse =
        breakdown_time(hamiltonian_free(1), quadratic_datum(-1.0), unit_grid(101), 2.0, 200);
    const double mid =
        breakdown_time(hamiltonian_free(1), quadratic_datum(-1.0), unit_grid(201), 2.0, 200);
    const double fine =
        breakdown_time(hamiltonian_free(1), quadratic_datum(-1.0), unit_grid(401), 2.0, 200);
    const double dt = 2.0 / 200;
    CHECK(std::abs(coarse - mid) <= dt);
    CHECK(std::abs(mid - fine) <= dt);
}

TEST_CASE("PDE residual is small and decays at second order") {
    // Residual of dPhi/dt + H(x, dPhi/dx) via central differences, measured
    // on the interior of the grid/time box.
    const auto residual = [](int nodes, int steps) {
        const HJSolution sol =
            hj_solve(hamiltonian_free(1), quadratic_datum(1.0), unit_grid(nodes), 1.0, steps);
        const Eigen::VectorXd xs = sol.grid.points();
        const double dx = sol.grid.spacing();
        const double dt = sol.times[1] - sol.times[0];
        double worst = 0.0;
        for (std::size_t k = 1; k + 1 < sol.times.size(); ++k) {
            for (int j = 1; j + 1 < sol.grid.nodes; ++j) {
                if (!sol.valid[k - 1][static_cast<std::size_t>(j)] ||
                    !sol.valid[k + 1][static_cast<std::size_t>(j)] ||
                    !sol.valid[k][static_cast<std::size_t>(j - 1)] ||
                    !sol.valid[k][static_cast<std::size_t>(j + 1)]) {
                    continue;
                }
                const double dphi_dt =
                    (sol.phi(static_cast<Eigen::Index>(k + 1), j) -
                     sol.phi(static_cast<Eigen::Index>(k - 1), j)) /
                    (2 * dt);
                const double dphi_dx =
                    (sol.phi(static_cast<Eigen::Index>(k), j + 1) -
                     sol.phi(static_cast<Eigen::Index>(k), j - 1)) /
                    (2 * dx);
                worst = std::max(worst, std::abs(dphi_dt + 0.5 * dphi_dx * dphi_dx));
                (void)xs;
            }
        }
        return worst;
    };

    const double r1 = residual(51, 50);
    const double r2 = residual(101, 100);
    const double r3 = residual(201, 200);
    CHECK(r3 <= 1e-3);
    CHECK(std::log2(r1 / r2) == doctest::Approx(2.0).epsilon(0.3));
    CHECK(std::log2(r2 / r3) == doctest::Approx(2.0).epsilon(0.3));
}

TEST_CASE("resampled momentum matches the gradient of Phi") {
    const HJSolution sol =
        hj_solve(hamiltonian_free(1), quadratic_datum(1.0), unit_grid(201), 1.0, 100);
    const double dx = sol.grid.spacing();
    const std::size_t k = sol.times.size() - 1;
    for (int j = 1; j + 1 < sol.grid.nodes; ++j) {
        if (!sol.valid[k][static_cast<std::size_t>(j - 1)] ||
            !sol.valid[k][static_cast<std::size_t>(j + 1)]) {
            continue;
        }
        const double grad = (sol.phi(static_cast<Eigen::Index>(k), j + 1) -
                             sol.phi(static_cast<Eigen::Index>(k), j - 1)) /
                            (2 * dx);
        CHECK(std::abs(grad - sol.momentum(static_cast<Eigen::Index>(k), j)) <= 1e-5);
    }
}

TEST_CASE("HJ solution agrees with the transported phase of the initial graph") {
    // Exact manifold p = x (datum x^2/2), free flow, base point x = 0.
    const HJSolution sol =
        hj_solve(hamiltonian_free(1), quadratic_datum(1.0), unit_grid(201), 1.0, 256);
    const ExactManifold em = make_exact_quadratic(Eigen::MatrixXd::Identity(1, 1));
    const ParamManifold m = exact_to_param(em);

    QuadratureOptions q;
    q.tol = 1e-12;
    FlowOptions fo;
    fo.steps = 256;
    // Seeds whose transported positions x' (1 + t) stay inside the grid.
    for (double x0 : {-0.45, -0.2, 0.3}) {
        Eigen::VectorXd th(1);
        th << x0;
        const HomotopyPoint hp = make_homotopy_point(m, th);
        const TransportedPhase tp = transport_phase(hamiltonian_free(1), m, hp, 1.0, fo, q);
        // Interpolate the grid solution at the transported position.
        const Eigen::VectorXd xs = sol.grid.points();
        const double xq = tp.endpoint.x[0];
        int j = 0;
        while (j + 2 < sol.grid.nodes && xs[j + 1] < xq) ++j;
        const double w = (xq - xs[j]) / (xs[j + 1] - xs[j]);
        const std::size_t last = sol.times.size() - 1;
        const double interp = (1.0 - w) * sol.phi(static_cast<Eigen::Index>(last), j) +
                              w * sol.phi(static_cast<Eigen::Index>(last), j + 1);
        CHECK(std::abs(interp - tp.value) <= 1e-4);  // linear interpolation limits accuracy
    }
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(
        hj_solve(hamiltonian_free(2), quadratic_datum(1.0), unit_grid(101), 1.0, 100),
        std::invalid_argument);
    CHECK_THROWS_AS(
        hj_solve(hamiltonian_free(1), quadratic_datum(1.0), unit_grid(101), -1.0, 100),
        std::invalid_argument);
    HJGrid tiny;
    tiny.nodes = 2;
    CHECK_THROWS_AS(hj_solve(hamiltonian_free(1), quadratic_datum(1.0), tiny, 1.0, 100),
                    std::invalid_argument);
}

TEST_CASE("CSV and metadata export") {
    const HJSolution sol =
        hj_solve(hamiltonian_free(1), quadratic_datum(-1.0), unit_grid(11), 2.0, 20);
    std::ostringstream os;
    sol.write_csv(os);
    const std::string csv = os.str();
    CHECK(csv.rfind("t,x,phi,valid\n", 0) == 0);
    // Header plus one row per (time, node) pair.
    const auto rows = std::count(csv.begin(), csv.end(), '\n');
    CHECK(rows == 1 + 21 * 11);
    CHECK(csv.find(",nan,") != std::string::npos);  // post-breakdown entries are flagged

    const std::string meta = sol.metadata_json();
    CHECK(meta.find("\"breakdown_time\":") != std::string::npos);
    CHECK(meta.find("\"nodes\":11") != std::string::npos);
}
