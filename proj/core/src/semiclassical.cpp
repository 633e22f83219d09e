#include "ptk/semiclassical.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "ptk/errors.hpp"

namespace ptk {

namespace {

double normalized_det_at(const ParamManifold& m, const Eigen::VectorXd& theta) {
    const Eigen::MatrixXd j = m.jacobian(theta);
    const Eigen::MatrixXd jx = j.topRows(m.n);
    double scale = 1.0;
    for (int i = 0; i < m.n; ++i) {
        Eigen::VectorXd pair(2 * m.n);
        pair.head(m.n) = jx.row(i).transpose();
        pair.tail(m.n) = j.row(m.n + i).transpose();
        scale *= std::max(pair.norm(), 1e-300);
    }
    return (m.n == 1 ? jx(0, 0) : jx.determinant()) / scale;
}

// Crossing count of det = 0 along one positive sweep of a single axis with
// the remaining coordinates held at theta_fix.  Returns false when a
// suspected non-transversal crossing is seen (caller retries with another
// offset).
bool scan_axis_sweep(const ParamManifold& m, int axis, const Eigen::VectorXd& theta_fix,
                     const MaslovOptions& opt, int& crossings) {
    crossings = 0;
    const int samples = std::max(opt.samples_per_loop, 64);
    const double h = two_pi / samples;
    Eigen::VectorXd th = theta_fix;
    // Half-cell offset keeps samples off grid-aligned zeros.
    std::vector<double> dets(static_cast<std::size_t>(samples));
    double max_abs = 0.0;
    for (int k = 0; k < samples; ++k) {
        th[axis] = theta_fix[axis] + (k + 0.5) * h;
        dets[static_cast<std::size_t>(k)] = normalized_det_at(m, th);
        max_abs = std::max(max_abs, std::abs(dets[static_cast<std::size_t>(k)]));
    }
    if (max_abs < 1e-12) return false;  // det vanishes along the whole sweep

    for (int k = 0; k < samples; ++k) {
        const double a = dets[static_cast<std::size_t>(k)];
        const double b = dets[static_cast<std::size_t>((k + 1) % samples)];
        if (a == 0.0 || (a < 0.0) != (b < 0.0)) {
            // Bisect the bracket and test transversality.
            double ta = theta_fix[axis] + (k + 0.5) * h;
            double tb = ta + h;
            double fa = a;
            for (int it = 0; it < 60 && tb - ta > 1e-13; ++it) {
                const double tm = 0.5 * (ta + tb);
                th[axis] = tm;
                const double fm = normalized_det_at(m, th);
                if ((fa < 0.0) != (fm < 0.0) || fm == 0.0) {
                    tb = tm;
                } else {
                    ta = tm;
                    fa = fm;
                }
            }
            const double root = 0.5 * (ta + tb);
            const double probe = h / 8.0;
            th[axis] = root + probe;
            const double fp = normalized_det_at(m, th);
            th[axis] = root - probe;
            const double fm2 = normalized_det_at(m, th);
            const double slope = std::abs(fp - fm2) / (2.0 * probe);
            if (slope < opt.slope_tol * max_abs) return false;  // non-transversal
            ++crossings;
        } else if (std::abs(a) < 1e-9 * max_abs) {
            // Near-zero without a sign change: tangential contact.
            return false;
        }
    }
    return true;
}

}  // namespace

int maslov_index(const ParamManifold& m, const LoopClass& loop, const MaslovOptions& opt) {
    if (loop.windings.size() != m.n) {
        throw std::invalid_argument("maslov_index: winding vector dimension mismatch");
    }
    for (int i = 0; i < m.n; ++i) {
        if (!m.periodic[i] && loop.windings[i] != 0) {
            throw std::invalid_argument("maslov_index: nonzero winding on non-periodic axis");
        }
    }
    if (loop.contractible()) return 0;

    // Deterministic generic offsets for the non-swept coordinates; the free
    // homotopy class of the loop does not depend on where it is based.
    static constexpr double offsets[] = {0.0, 0.5376, 1.1832, 1.9622, 2.7181, 0.3141};
    int index = 0;
    for (int axis = 0; axis < m.n; ++axis) {
        const int w = loop.windings[axis];
        if (w == 0) continue;
        int crossings = -1;
        bool ok = false;
        for (double delta : offsets) {
            Eigen::VectorXd fix = m.base_point;
            for (int i = 0; i < m.n; ++i) {
                if (i != axis && m.periodic[i]) fix[i] += delta * (1.0 + 0.17 * i);
            }
            if (scan_axis_sweep(m, axis, fix, opt, crossings)) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            throw NonGenericCaustic("maslov_index: no transversal representative found");
        }
        index += w * crossings;
    }
    return index;
}

std::vector<EbkLoopReport> ebk_check(const ParamManifold& m, double hbar,
                                     const std::vector<LoopClass>& loops, double tol,
                                     const QuadratureOptions& qopt, const MaslovOptions& mopt) {
    if (!(hbar > 0.0)) throw std::invalid_argument("ebk_check: hbar must be positive");
    std::vector<EbkLoopReport> out;
    out.reserve(loops.size());
    for (const auto& loop : loops) {
        EbkLoopReport rep;
        rep.loop = loop;
        rep.action = loop_period(m, loop, qopt);
        rep.maslov = maslov_index(m, loop, mopt);
        const double level = std::abs(rep.action) / (two_pi * hbar) - 0.25 * rep.maslov;
        rep.residue = std::abs(level - std::round(level));
        rep.quantized = rep.residue <= tol;
        out.push_back(std::move(rep));
    }
    return out;
}

std::string ebk_report_json(const std::vector<EbkLoopReport>& reports, double hbar) {
    std::ostringstream os;
    bool all = true;
    os << "{\"hbar\":" << format_g17(hbar) << ",\"loops\":[";
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        if (i) os << ',';
        os << "{\"windings\":[";
        for (Eigen::Index k = 0; k < r.loop.windings.size(); ++k) {
            if (k) os << ',';
            os << r.loop.windings[k];
        }
        os << "],\"action\":" << format_g17(r.action) << ",\"maslov\":" << r.maslov
           << ",\"residue\":" << format_g17(r.residue)
           << ",\"quantized\":" << (r.quantized ? "true" : "false") << '}';
        all = all && r.quantized;
    }
    os << "],\"all_quantized\":" << (all ? "true" : "false") << '}';
    return os.str();
}

std::complex<double> CoverWavefunction::value(const HomotopyPoint& hp) const {
    const double ph = phase_fn ? phase_fn(hp) : phase(manifold, hp);
    const double density = rho ? rho(hp.cover_endpoint()) : 1.0;
    if (density < 0.0) throw std::invalid_argument("CoverWavefunction: rho must be nonnegative");
    return std::polar(std::sqrt(density), ph / hbar);
}

CoverWavefunction make_cover_wavefunction(const ParamManifold& m, double hbar) {
    if (!(hbar > 0.0)) throw std::invalid_argument("make_cover_wavefunction: hbar must be positive");
    CoverWavefunction wf;
    wf.manifold = m;
    wf.hbar = hbar;
    const ParamManifold mc = m;
    wf.phase_fn = [mc](const HomotopyPoint& hp) { return phase(mc, hp); };
    wf.rho = [](const Eigen::VectorXd&) { return 1.0; };
    return wf;
}

bool cover_wavefunction_single_valued(const CoverWavefunction& wf,
                                      const std::vector<LoopClass>& loops, double tol) {
    const auto reports = ebk_check(wf.manifold, wf.hbar, loops, tol);
    return std::all_of(reports.begin(), reports.end(),
                       [](const EbkLoopReport& r) { return r.quantized; });
}

CoverWavefunction classical_weyl_action(const CoverWavefunction& wf, const PhasePoint& z_a) {
    if (z_a.dim() != wf.manifold.n) {
        throw std::invalid_argument("classical_weyl_action: dimension mismatch");
    }
    CoverWavefunction out = wf;
    out.manifold = translate_manifold(wf.manifold, z_a);
    const ParamManifold pre = wf.manifold;  // phase law reads x0 off the pre-translation point
    auto base_phase = wf.phase_fn;
    if (!base_phase) {
        const ParamManifold mc = wf.manifold;
        base_phase = [mc](const HomotopyPoint& hp) { return phase(mc, hp); };
    }
    out.phase_fn = [base_phase, pre, z_a](const HomotopyPoint& hp) {
        const PhaseAtPoint at{base_phase(hp), pre.at(hp.cover_endpoint())};
        return translate_phase(at, z_a).value;
    };
    return out;
}

double SampledWavefunction::spacing() const {
    if (x.size() < 2) throw std::invalid_argument("SampledWavefunction: need >= 2 samples");
    return x[1] - x[0];
}

double SampledWavefunction::norm() const {
    return std::sqrt(values.squaredNorm() * spacing());
}

SampledWavefunction make_gaussian_wavefunction(double center_x, double center_p, double sigma,
                                               double lo, double hi, int nodes, double hbar) {
    if (!(sigma > 0.0) || !(hbar > 0.0) || nodes < 2 || !(hi > lo)) {
        throw std::invalid_argument("make_gaussian_wavefunction: invalid parameters");
    }
    SampledWavefunction wf;
    wf.hbar = hbar;
    wf.x = Eigen::VectorXd::LinSpaced(nodes, lo, hi);
    wf.values.resize(nodes);
    // Unit L2 norm in the continuum limit.
    const double amp = std::pow(two_pi * sigma * sigma, -0.25);
    for (int i = 0; i < nodes; ++i) {
        const double dxs = wf.x[i] - center_x;
        wf.values[i] = std::polar(amp * std::exp(-dxs * dxs / (4.0 * sigma * sigma)),
                                  center_p * wf.x[i] / hbar);
    }
    return wf;
}

SampledWavefunction weyl_translate(const SampledWavefunction& wf, const PhasePoint& z_a,
                                   const WeylOptions& opt) {
    if (z_a.dim() != 1) throw std::invalid_argument("weyl_translate: 1-D shifts only");
    if (wf.x.size() != wf.values.size() || wf.x.size() < 2) {
        throw std::invalid_argument("weyl_translate: malformed wavefunction");
    }
    const double dx = wf.spacing();
    const double x_a = z_a.x[0];
    const double p_a = z_a.p[0];
    const double shift = x_a / dx;
    const double shift_rounded = std::round(shift);
    const bool on_grid = std::abs(shift - shift_rounded) <= 1e-9 * (1.0 + std::abs(shift));
    if (!on_grid && !opt.interpolate) {
        throw std::invalid_argument(
            "weyl_translate: shift is off-grid; enable interpolation to allow it");
    }

    SampledWavefunction out;
    out.hbar = wf.hbar;
    out.x = wf.x;
    out.values.resize(wf.values.size());
    const Eigen::Index n = wf.x.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        std::complex<double> sample(0.0, 0.0);
        if (on_grid) {
            const Eigen::Index j = i - static_cast<Eigen::Index>(shift_rounded);
            if (j >= 0 && j < n) sample = wf.values[j];
        } else {
            const double pos = static_cast<double>(i) - shift;
            const Eigen::Index j0 = static_cast<Eigen::Index>(std::floor(pos));
            const double w = pos - std::floor(pos);
            if (j0 >= 0 && j0 + 1 < n) {
                sample = (1.0 - w) * wf.values[j0] + w * wf.values[j0 + 1];
            }
        }
        const double phase_arg = (p_a * wf.x[i] - 0.5 * p_a * x_a) / wf.hbar;
        out.values[i] = std::polar(1.0, phase_arg) * sample;
    }
    return out;
}

WeylCompositionReport weyl_composition_defect(const SampledWavefunction& wf, const PhasePoint& z_a,
                                              const PhasePoint& z_b, const WeylOptions& opt) {
    const SampledWavefunction seq = weyl_translate(weyl_translate(wf, z_a, opt), z_b, opt);
    const SampledWavefunction combined = weyl_translate(wf, z_a + z_b, opt);

    // The pointwise ratio is a constant unimodular phase wherever the
    // combined result is not negligible.
    const double floor = 1e-8 * combined.values.cwiseAbs().maxCoeff();
    std::complex<double> acc(0.0, 0.0);
    Eigen::Index used = 0;
    for (Eigen::Index i = 0; i < combined.values.size(); ++i) {
        if (std::abs(combined.values[i]) > floor) {
            acc += seq.values[i] / combined.values[i];
            ++used;
        }
    }
    if (used == 0) throw Error("weyl_composition_defect: no overlapping support");
    WeylCompositionReport rep;
    rep.ratio = acc / static_cast<double>(used);
    for (Eigen::Index i = 0; i < combined.values.size(); ++i) {
        if (std::abs(combined.values[i]) > floor) {
            rep.spread = std::max(rep.spread,
                                  std::abs(seq.values[i] / combined.values[i] - rep.ratio));
        }
    }
    rep.phase_defect = std::arg(rep.ratio);
    return rep;
}

void write_wavefunction_csv(std::ostream& os, const SampledWavefunction& wf) {
    os << "x,re_psi,im_psi\n";
    for (Eigen::Index i = 0; i < wf.x.size(); ++i) {
        os << format_g17(wf.x[i]) << ',' << format_g17(wf.values[i].real()) << ','
           << format_g17(wf.values[i].imag()) << '\n';
    }
}

SampledWavefunction read_wavefunction_csv(std::istream& is, double hbar) {
    std::string line;
    std::vector<double> xs;
    std::vector<std::complex<double>> vals;
    bool first = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.find("x,") == 0 || line.find("x ,") == 0) continue;  // header
        }
        std::istringstream row(line);
        std::string cell;
        double cols[3];
        int c = 0;
        while (std::getline(row, cell, ',') && c < 3) cols[c++] = std::stod(cell);
        if (c != 3) throw Error("read_wavefunction_csv: malformed row: " + line);
        xs.push_back(cols[0]);
        vals.emplace_back(cols[1], cols[2]);
    }
    if (xs.size() < 2) throw Error("read_wavefunction_csv: need at least 2 samples");
    SampledWavefunction wf;
    wf.hbar = hbar;
    wf.x = Eigen::Map<Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
    wf.values = Eigen::Map<Eigen::VectorXcd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
    for (Eigen::Index i = 1; i < wf.x.size(); ++i) {
        if (!(wf.x[i] > wf.x[i - 1])) throw Error("read_wavefunction_csv: grid must increase");
    }
    return wf;
}

}  // namespace ptk
