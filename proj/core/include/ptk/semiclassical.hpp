#pragma once

#include <Eigen/Core>

#include <complex>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "ptk/manifold.hpp"
#include "ptk/transport.hpp"

namespace ptk {

inline constexpr double default_ebk_tol = 1e-6;

struct MaslovOptions {
    int samples_per_loop = 4096;
    double slope_tol = 1e-4;  // transversality threshold on d(det)/dt at a crossing
};

// Signed count of transversal caustic crossings along a loop representative;
// each simple crossing contributes the traversal direction of its sweep.
// Additive over winding vectors.  Throws NonGenericCaustic when a
// non-transversal crossing survives the deterministic retry offsets.
int maslov_index(const ParamManifold& m, const LoopClass& loop, const MaslovOptions& opt = {});

struct EbkLoopReport {
    LoopClass loop;
    double action = 0.0;   // signed loop period
    int maslov = 0;
    double residue = 0.0;  // distance of |action|/(2 pi hbar) - maslov/4 to the nearest integer
    bool quantized = false;
};

// Per-loop quantization report.  The residue uses the unsigned action; the
// signed period is reported alongside.
std::vector<EbkLoopReport> ebk_check(const ParamManifold& m, double hbar,
                                     const std::vector<LoopClass>& loops,
                                     double tol = default_ebk_tol,
                                     const QuadratureOptions& qopt = {},
                                     const MaslovOptions& mopt = {});

std::string ebk_report_json(const std::vector<EbkLoopReport>& reports, double hbar);

// Wavefunction on the universal cover: exp(i phase / hbar) sqrt(rho).
struct CoverWavefunction {
    ParamManifold manifold;
    double hbar = 1.0;
    std::function<double(const HomotopyPoint&)> phase_fn;  // defaults to the manifold phase
    std::function<double(const Eigen::VectorXd&)> rho;     // defaults to 1

    std::complex<double> value(const HomotopyPoint& hp) const;
};

CoverWavefunction make_cover_wavefunction(const ParamManifold& m, double hbar);

// True iff every generator loop passes the quantization check at the
// wavefunction's hbar (single-valuedness with the Maslov-corrected phase).
bool cover_wavefunction_single_valued(const CoverWavefunction& wf,
                                      const std::vector<LoopClass>& loops,
                                      double tol = default_ebk_tol);

// Translation acting on a cover wavefunction: phase advanced by the
// translation law, amplitude carried to the translated manifold.
CoverWavefunction classical_weyl_action(const CoverWavefunction& wf, const PhasePoint& z_a);

// Configuration-space wavefunction sampled on a uniform 1-D grid.
struct SampledWavefunction {
    Eigen::VectorXd x;
    Eigen::VectorXcd values;
    double hbar = 1.0;

    double spacing() const;
    double norm() const;  // discrete L2 norm
};

SampledWavefunction make_gaussian_wavefunction(double center_x, double center_p, double sigma,
                                               double lo, double hi, int nodes, double hbar);

struct WeylOptions {
    bool interpolate = false;  // allow off-grid shifts by linear interpolation
};

// exp(i (p_a x - p_a x_a / 2) / hbar) psi(x - x_a) on the sample grid.
// The position shift must be an integer number of grid steps unless
// interpolation is enabled.
SampledWavefunction weyl_translate(const SampledWavefunction& wf, const PhasePoint& z_a,
                                   const WeylOptions& opt = {});

struct WeylCompositionReport {
    std::complex<double> ratio;  // [apply a then b] over [apply a+b], pointwise constant
    double spread = 0.0;         // max pointwise deviation from the common ratio
    double phase_defect = 0.0;   // arg(ratio); equals -sigma(z_a, z_b) / (2 hbar)
};

WeylCompositionReport weyl_composition_defect(const SampledWavefunction& wf, const PhasePoint& z_a,
                                              const PhasePoint& z_b, const WeylOptions& opt = {});

// CSV (x, Re psi, Im psi).
void write_wavefunction_csv(std::ostream& os, const SampledWavefunction& wf);
SampledWavefunction read_wavefunction_csv(std::istream& is, double hbar);

}  // namespace ptk
