#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ptk/dynamics.hpp"
#include "ptk/errors.hpp"
#include "ptk/manifold.hpp"
#include "ptk/numerics.hpp"
#include "ptk/scenario.hpp"
#include "ptk/symplectic.hpp"
#include "ptk/transport.hpp"

namespace ptk::selftest {

namespace {

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

PhasePoint random_point(int n, std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Eigen::VectorXd x(n), p(n);
    for (int i = 0; i < n; ++i) {
        x[i] = u(rng);
        p[i] = u(rng);
    }
    return {x, p};
}

struct CaseManifold {
    ParamManifold m;
    HomotopyPoint hp;
};

CaseManifold random_plane_case(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CaseManifold out;
    out.m = make_linear_plane(random_symmetric(n, rng, 0.8));
    Eigen::VectorXd th(n);
    for (int i = 0; i < n; ++i) th[i] = u(rng);
    out.hp = make_homotopy_point(out.m, th);
    return out;
}

CaseManifold random_circle_case(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    CaseManifold out;
    out.m = make_circle(0.6 + 0.9 * u(rng));
    Eigen::VectorXd th(1);
    th << two_pi * u(rng);
    Eigen::VectorXi w(1);
    w << static_cast<int>(std::floor(3.0 * u(rng))) - 1;  // -1, 0, or 1
    out.hp = make_homotopy_point(out.m, th, w);
    return out;
}

// Per-case rng keeps results independent of thread scheduling.
std::mt19937_64 case_rng(unsigned long seed, const char* tag, int index) {
    std::seed_seq seq{seed, static_cast<unsigned long>(tag[0]), static_cast<unsigned long>(tag[1]),
                      static_cast<unsigned long>(index)};
    return std::mt19937_64(seq);
}

double reduce_max(const std::vector<double>& errs) {
    double m = 0.0;
    for (double e : errs) m = std::max(m, e);
    return m;
}

QuadratureOptions tight_quadrature() {
    QuadratureOptions q;
    q.tol = 1e-12;
    return q;
}

double tag_stv(const Options& opt) {
    std::vector<double> errs(static_cast<std::size_t>(opt.cases), 0.0);
    parallel_for(
        errs.size(),
        [&](std::size_t i) {
            auto rng = case_rng(opt.seed, "st", static_cast<int>(i));
            std::uniform_real_distribution<double> u(0.0, 1.0);
            const int n = 1 + static_cast<int>(i % 2);
            const Eigen::MatrixXd q = random_symmetric(2 * n, rng, 0.7);
            const double t = 0.3 + 0.9 * u(rng);
            const CaseManifold cm = random_plane_case(n, rng);
            const SymplecticMap s_t(matrix_exponential(t * symplectic_unit(n) * q));
            const double closed = quadratic_transport_phase(s_t, cm.m, cm.hp, tight_quadrature());
            FlowOptions fo;
            fo.steps = 4096;
            const double numeric =
                transport_phase(hamiltonian_quadratic(q), cm.m, cm.hp, t, fo, tight_quadrature())
                    .value;
            errs[i] = std::abs(closed - numeric);
        },
        opt.threads);
    return reduce_max(errs);
}

double tag_eg1(const Options& opt) {
    std::vector<double> errs(static_cast<std::size_t>(opt.cases), 0.0);
    parallel_for(
        errs.size(),
        [&](std::size_t i) {
            auto rng = case_rng(opt.seed, "e1", static_cast<int>(i));
            const int n = 1 + static_cast<int>(i % 2);
            const CaseManifold cm =
                (i % 4 == 1) ? random_circle_case(rng) : random_plane_case(n, rng);
            const PhasePoint z_a = random_point(cm.m.n, rng);
            double closed;
            if (opt.inject_eg1_sign_flip) {
                const PhasePoint z0 = cm.m.at(cm.hp.cover_endpoint());
                closed = phase(cm.m, cm.hp, tight_quadrature()) + 0.5 * z_a.p.dot(z_a.x) -
                         z_a.p.dot(z0.x);
            } else {
                closed = translation_phase(z_a, cm.m, cm.hp, tight_quadrature());
            }
            FlowOptions fo;
            fo.steps = 256;
            const double numeric = transport_phase(hamiltonian_translation(z_a), cm.m, cm.hp, 1.0,
                                                   fo, tight_quadrature())
                                       .value;
            errs[i] = std::abs(closed - numeric);
        },
        opt.threads);
    return reduce_max(errs);
}

double tag_commutation(const Options& opt, bool full) {
    std::vector<double> errs(static_cast<std::size_t>(opt.cases), 0.0);
    parallel_for(
        errs.size(),
        [&](std::size_t i) {
            auto rng = case_rng(opt.seed, full ? "e3" : "e2", static_cast<int>(i));
            const int n = 1 + static_cast<int>(i % 3);
            const CaseManifold cm = random_plane_case(n, rng);
            const PhasePoint z_a = random_point(n, rng);
            const PhasePoint z_b = random_point(n, rng);
            const auto defects =
                translation_commutation_defects(z_a, z_b, cm.m, cm.hp, tight_quadrature());
            const double sig = symplectic_form(z_a, z_b);
            errs[i] = full ? std::abs(defects.full_defect - sig)
                           : std::abs(defects.half_defect + 0.5 * sig);
        },
        opt.threads);
    return reduce_max(errs);
}

CurveSpec random_trig_curve(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    Eigen::VectorXd cx(5), cp(5);  // a0, a1, b1, a2, b2
    for (int i = 0; i < 5; ++i) {
        cx[i] = u(rng);
        cp[i] = u(rng);
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
    return curve;
}

double tag_phg(const Options& opt) {
    std::vector<double> errs(static_cast<std::size_t>(opt.cases), 0.0);
    parallel_for(
        errs.size(),
        [&](std::size_t i) {
            auto rng = case_rng(opt.seed, "pg", static_cast<int>(i));
            std::uniform_real_distribution<double> u(0.0, 1.0);
            const CaseManifold cm =
                (i % 2 == 0) ? random_plane_case(1, rng) : random_circle_case(rng);
            const CurveSpec curve = random_trig_curve(rng);
            const double t = 0.5 + u(rng);
            const double closed = displacement_phase(curve, cm.m, cm.hp, t, tight_quadrature());
            FlowOptions fo;
            fo.steps = 4096;
            const double numeric = transport_phase(hamiltonian_displacement(curve, 1), cm.m,
                                                   cm.hp, t, fo, tight_quadrature())
                                       .value;
            errs[i] = std::abs(closed - numeric);
        },
        opt.threads);
    return reduce_max(errs);
}

double tag_ph6(const Options& opt) {
    double max_err = 0.0;
    for (int i = 0; i < opt.cases; ++i) {
        auto rng = case_rng(opt.seed, "p6", i);
        const int n = 1 + i % 2;
        SymplecticMap s = SymplecticMap::identity(n);
        for (int attempt = 0; attempt < 64; ++attempt) {
            s = random_symplectic(n, rng);
            Eigen::FullPivLU<Eigen::MatrixXd> lu(s.block_b());
            if (lu.isInvertible() && std::abs(lu.determinant()) > 1e-3) break;
        }
        const PhasePoint z = random_point(n, rng);
        const PhasePoint zs = s.apply(z);
        const double w = free_generating_function(s, zs.x, z.x);
        max_err = std::max(max_err, std::abs(w - frame_phase_shift(s, z)));
    }
    return max_err;
}

double tag_fif(const Options& opt) {
    const int cases = std::min(opt.cases, 8);
    std::vector<double> errs(static_cast<std::size_t>(cases), 0.0);
    parallel_for(
        errs.size(),
        [&](std::size_t i) {
            auto rng = case_rng(opt.seed, "ff", static_cast<int>(i));
            std::uniform_real_distribution<double> u(0.0, 1.0);
            const CaseManifold cm = random_circle_case(rng);
            const Hamiltonian ham = hamiltonian_harmonic(1);
            const double t = 0.3 + 0.7 * u(rng);
            FlowOptions fo;
            fo.steps = 512;

            const double lhs = transport_phase(ham, cm.m, cm.hp, t, fo, tight_quadrature()).value;
            const double base_action =
                flow(ham, cm.m.at(cm.m.base_point), 0.0, t, fo).back().action;

            // Phase of the transported manifold at the transported cover
            // point: flow a dense resampling of the representative path and
            // integrate p dx along the image, Richardson-extrapolated.
            const int per_segment = 512;
            std::vector<PhasePoint> image;
            for (std::size_t s = 0; s + 1 < cm.hp.path.size(); ++s) {
                const Eigen::VectorXd a = cm.hp.path[s];
                const Eigen::VectorXd d = cm.hp.path[s + 1] - a;
                if (d.cwiseAbs().maxCoeff() == 0.0) continue;
                const int from = image.empty() ? 0 : 1;
                for (int k = from; k <= per_segment; ++k) {
                    const Eigen::VectorXd th = a + (static_cast<double>(k) / per_segment) * d;
                    image.push_back(flow(ham, cm.m.at(th), 0.0, t, fo).back().z);
                }
            }
            std::vector<PhasePoint> coarse;
            for (std::size_t k = 0; k < image.size(); k += 2) coarse.push_back(image[k]);
            if ((image.size() - 1) % 2 != 0) coarse.push_back(image.back());
            const double fine = polyline_action(image);
            const double half = polyline_action(coarse);
            const double phi_t = (4.0 * fine - half) / 3.0;

            errs[i] = std::abs(lhs - (phi_t + base_action));
        },
        opt.threads);
    return reduce_max(errs);
}

double tag_fund(const Options& opt) {
    const Hamiltonian harmonic = hamiltonian_harmonic(1);
    const Hamiltonian quartic(
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

    const int segments = 4096;
    std::vector<PhasePoint> segment;
    segment.reserve(segments + 1);
    for (int k = 0; k <= segments; ++k) {
        segment.push_back(PhasePoint::scalar(static_cast<double>(k) / segments, 0.0));
    }
    // Open half-turn of a circle; a full loop of an invariant circle would
    // cancel identically and test nothing.
    std::vector<PhasePoint> arc;
    arc.reserve(segments + 1);
    for (int k = 0; k <= segments; ++k) {
        const double th = two_pi / 2.0 * k / segments;
        arc.push_back(PhasePoint::scalar(0.7 * std::cos(th), 0.7 * std::sin(th)));
    }

    InvarianceOptions io;
    io.flow.steps = 1024;
    io.threads = opt.threads;
    double max_err = 0.0;
    max_err = std::max(max_err, std::abs(invariance_defect(harmonic, segment, 1.0, io)));
    max_err = std::max(max_err, std::abs(invariance_defect(quartic, segment, 1.0, io)));
    max_err = std::max(max_err, std::abs(invariance_defect(harmonic, arc, 1.0, io)));
    return max_err;
}

double run_eg2(const Options& o) { return tag_commutation(o, false); }
double run_eg3(const Options& o) { return tag_commutation(o, true); }

struct TagSpec {
    const char* name;
    double tolerance;
    double (*run)(const Options&);
};

const TagSpec kTags[] = {
    {"stv", 1e-6, tag_stv}, {"eg1", 1e-6, tag_eg1},  {"eg2", 1e-12, run_eg2},
    {"eg3", 1e-12, run_eg3}, {"phg", 1e-6, tag_phg}, {"ph6", 1e-9, tag_ph6},
    {"fif", 1e-5, tag_fif}, {"fund", 1e-7, tag_fund},
};

}  // namespace

const std::vector<std::string>& all_tags() {
    static const std::vector<std::string> tags = [] {
        std::vector<std::string> out;
        for (const auto& spec : kTags) out.emplace_back(spec.name);
        return out;
    }();
    return tags;
}

std::vector<TagResult> run(const Options& opt) {
    std::vector<const TagSpec*> selected;
    if (opt.tags.empty()) {
        for (const auto& spec : kTags) selected.push_back(&spec);
    } else {
        for (const auto& name : opt.tags) {
            const auto* it = std::find_if(std::begin(kTags), std::end(kTags),
                                          [&](const TagSpec& s) { return s.name == name; });
            if (it == std::end(kTags)) {
                throw ValidationError("selftest: unknown tag '" + name + "'");
            }
            selected.push_back(it);
        }
    }
    if (selected.empty()) {
        throw ValidationError("selftest: empty suite selection");
    }
    if (opt.cases < 1) {
        throw ValidationError("selftest: cases must be >= 1");
    }

    std::vector<TagResult> out;
    out.reserve(selected.size());
    for (const TagSpec* spec : selected) {
        TagResult r;
        r.tag = spec->name;
        r.cases = opt.cases;
        r.tolerance = spec->tolerance;
        r.max_error = spec->run(opt);
        r.pass = r.max_error <= r.tolerance;
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace ptk::selftest
