#include "ptk/transport.hpp"

#include <cmath>
#include <stdexcept>

#include "ptk/errors.hpp"

namespace ptk {

PhasePoint CurveSpec::at(double t) const {
    if (!gamma) throw std::invalid_argument("CurveSpec: gamma callable required");
    return gamma(t);
}

PhasePoint CurveSpec::derivative(double t) const {
    if (dgamma) return dgamma(t);
    const int n = at(t).dim();
    Eigen::VectorXd d(2 * n);
    for (int i = 0; i < 2 * n; ++i) {
        d[i] = fd_derivative([&](double s) { return gamma(s).stacked()[i]; }, t);
    }
    return PhasePoint::from_stacked(d);
}

Hamiltonian hamiltonian_displacement(const CurveSpec& curve, int n) {
    CurveSpec c = curve;
    return Hamiltonian(
        n,
        [c](const PhasePoint& z, double t) { return symplectic_form(z, c.derivative(t)); },
        [c, n](const PhasePoint&, double t) {
            const PhasePoint dg = c.derivative(t);
            Eigen::VectorXd g(2 * n);
            g.head(n) = -dg.p;
            g.tail(n) = dg.x;
            return g;
        },
        /*time_indep=*/false, /*quad_homog=*/false, /*separ=*/false);
}

TransportedPhase transport_phase(const Hamiltonian& h, const ParamManifold& m,
                                 const HomotopyPoint& hp, double t, const FlowOptions& fopt,
                                 const QuadratureOptions& qopt) {
    if (h.n != m.n) throw std::invalid_argument("transport_phase: dimension mismatch");
    TransportedPhase out;
    out.t = t;
    out.base_phase = phase(m, hp, qopt);
    const PhasePoint z0 = m.at(hp.cover_endpoint());
    if (t == 0.0) {
        out.value = out.base_phase;
        out.endpoint = z0;
        return out;
    }
    const PhasedTrajectory traj = flow(h, z0, 0.0, t, fopt);
    out.value = out.base_phase + traj.back().action;
    out.endpoint = traj.back().z;
    return out;
}

double quadratic_transport_phase(const SymplecticMap& s_t, const ParamManifold& m,
                                 const HomotopyPoint& hp, const QuadratureOptions& qopt) {
    if (s_t.dim() != m.n) throw std::invalid_argument("quadratic_transport_phase: dimension mismatch");
    const PhasePoint z = m.at(hp.cover_endpoint());
    return phase(m, hp, qopt) + frame_phase_shift(s_t, z);
}

double lagrangian_phase(const ParamManifold& m, const HomotopyPoint& hp,
                        const QuadratureOptions& qopt) {
    const PhasePoint z = m.at(hp.cover_endpoint());
    return phase(m, hp, qopt) - 0.5 * z.p.dot(z.x);
}

PhaseAtPoint translate_phase(const PhaseAtPoint& in, const PhasePoint& z_a) {
    if (in.point.dim() != z_a.dim()) throw std::invalid_argument("translate_phase: dimension mismatch");
    PhaseAtPoint out;
    out.value = in.value + 0.5 * z_a.p.dot(z_a.x) + z_a.p.dot(in.point.x);
    out.point = in.point + z_a;
    return out;
}

double translation_phase(const PhasePoint& z_a, const ParamManifold& m, const HomotopyPoint& hp,
                         const QuadratureOptions& qopt) {
    const PhaseAtPoint start{phase(m, hp, qopt), m.at(hp.cover_endpoint())};
    return translate_phase(start, z_a).value;
}

CommutationDefects translation_commutation_defects(const PhasePoint& z_a, const PhasePoint& z_b,
                                                   const ParamManifold& m, const HomotopyPoint& hp,
                                                   const QuadratureOptions& qopt) {
    const PhaseAtPoint start{phase(m, hp, qopt), m.at(hp.cover_endpoint())};
    const double a_then_b = translate_phase(translate_phase(start, z_a), z_b).value;
    const double b_then_a = translate_phase(translate_phase(start, z_b), z_a).value;
    const double combined = translate_phase(start, z_a + z_b).value;
    CommutationDefects out;
    out.half_defect = a_then_b - combined;
    out.full_defect = b_then_a - a_then_b;
    return out;
}

double covariance_defect(const SymplecticMap& s, const PhasePoint& z_a, const ParamManifold& m,
                         const HomotopyPoint& hp, const QuadratureOptions& qopt) {
    if (s.dim() != m.n || z_a.dim() != m.n) {
        throw std::invalid_argument("covariance_defect: dimension mismatch");
    }
    const PhaseAtPoint start{phase(m, hp, qopt), m.at(hp.cover_endpoint())};

    // Translate by z_a, then transport with the linear flow.
    const PhaseAtPoint translated = translate_phase(start, z_a);
    const double phase_a = translated.value + frame_phase_shift(s, translated.point);

    // Transport with the linear flow, then translate by S z_a.
    PhaseAtPoint mapped;
    mapped.value = start.value + frame_phase_shift(s, start.point);
    mapped.point = s.apply(start.point);
    const double phase_b = translate_phase(mapped, s.apply(z_a)).value;

    return phase_a - phase_b;
}

double displacement_phase(const CurveSpec& curve, const ParamManifold& m, const HomotopyPoint& hp,
                          double t, const QuadratureOptions& qopt) {
    const PhasePoint z0 = m.at(hp.cover_endpoint());
    if (curve.at(0.0).dim() != m.n) {
        throw std::invalid_argument("displacement_phase: curve dimension mismatch");
    }
    const PhasePoint offset = z0 - curve.at(0.0);
    const PhasePoint z_t = offset + curve.at(t);
    // integral of (p dx - x dp) along the displaced trajectory through z0,
    // i.e. the translate of the curve carrying z0; for loops this coincides
    // with the integral along the curve itself.
    const double loop_term = integrate_refined(
        [&](double s) {
            const PhasePoint z = offset + curve.at(s);
            const PhasePoint dz = curve.derivative(s);
            return z.p.dot(dz.x) - z.x.dot(dz.p);
        },
        0.0, t, qopt);
    return phase(m, hp, qopt) + 0.5 * (z_t.p.dot(z_t.x) - z0.p.dot(z0.x)) - 0.5 * loop_term;
}

}  // namespace ptk
