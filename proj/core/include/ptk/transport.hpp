#pragma once

#include <functional>

#include "ptk/dynamics.hpp"
#include "ptk/manifold.hpp"
#include "ptk/symplectic.hpp"

namespace ptk {

// Phase of a transported cover point, reported as a function of the original
// cover point (same base anchoring as the untransported phase).
struct TransportedPhase {
    double t = 0.0;
    double value = 0.0;       // phase(hp) + action along the trajectory
    double base_phase = 0.0;  // phase(hp) at t = 0
    PhasePoint endpoint;      // flowed projection of hp
};

// Smooth phase-space curve with derivative; the derivative falls back to
// 4th-order central differences of gamma.
struct CurveSpec {
    std::function<PhasePoint(double)> gamma;
    std::function<PhasePoint(double)> dgamma;

    PhasePoint at(double t) const;
    PhasePoint derivative(double t) const;
};

// Displacement Hamiltonian sigma(z, d gamma/dt); its flow translates phase
// space rigidly along the curve.
Hamiltonian hamiltonian_displacement(const CurveSpec& curve, int n);

// phi(hp, t) = phi(hp) + integral of (p dx - H dt) along the trajectory from
// the projection of hp.
TransportedPhase transport_phase(const Hamiltonian& h, const ParamManifold& m,
                                 const HomotopyPoint& hp, double t, const FlowOptions& fopt = {},
                                 const QuadratureOptions& qopt = {});

// Closed form for flows of quadratic homogeneous Hamiltonians:
// phi(hp) + 1/2 (p_t x_t - p x) with z_t = S_t z.
double quadratic_transport_phase(const SymplecticMap& s_t, const ParamManifold& m,
                                 const HomotopyPoint& hp, const QuadratureOptions& qopt = {});

// Frame-independent phase lambda = phi - 1/2 p.x.
double lagrangian_phase(const ParamManifold& m, const HomotopyPoint& hp,
                        const QuadratureOptions& qopt = {});

// A phase value attached to the projected phase-space point it belongs to.
struct PhaseAtPoint {
    double value = 0.0;
    PhasePoint point;
};

// One application of the translation phase law: value increases by
// 1/2 p_a.x_a + p_a.x0 and the point moves by z_a.
PhaseAtPoint translate_phase(const PhaseAtPoint& in, const PhasePoint& z_a);

// Phase of the translated manifold at hp.
double translation_phase(const PhasePoint& z_a, const ParamManifold& m, const HomotopyPoint& hp,
                         const QuadratureOptions& qopt = {});

struct CommutationDefects {
    double half_defect = 0.0;  // [a then b] - [a+b]      = -1/2 sigma(z_a, z_b)
    double full_defect = 0.0;  // [b then a] - [a then b] =      sigma(z_a, z_b)
};

// Both defects evaluated through sequential applications of translate_phase;
// independent of the manifold and of hp.
CommutationDefects translation_commutation_defects(const PhasePoint& z_a, const PhasePoint& z_b,
                                                   const ParamManifold& m, const HomotopyPoint& hp,
                                                   const QuadratureOptions& qopt = {});

// Phase difference between "translate by z_a then map by S" and "map by S
// then translate by S z_a"; zero for symplectic S.
double covariance_defect(const SymplecticMap& s, const PhasePoint& z_a, const ParamManifold& m,
                         const HomotopyPoint& hp, const QuadratureOptions& qopt = {});

// Phase of the manifold displaced along the curve up to time t:
// phi(hp) + 1/2 (p_t x_t - p_0 x_0) - 1/2 integral over gamma of (p dx - x dp).
double displacement_phase(const CurveSpec& curve, const ParamManifold& m, const HomotopyPoint& hp,
                          double t, const QuadratureOptions& qopt = {});

}  // namespace ptk
