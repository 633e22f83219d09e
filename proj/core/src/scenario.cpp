#include "ptk/scenario.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ptk/dynamics.hpp"
#include "ptk/errors.hpp"
#include "ptk/expression.hpp"
#include "ptk/hamilton_jacobi.hpp"
#include "ptk/manifold.hpp"
#include "ptk/numerics.hpp"
#include "ptk/semiclassical.hpp"
#include "ptk/symplectic.hpp"
#include "ptk/transport.hpp"
#include "ptk/version.hpp"

namespace ptk::scenario {

namespace {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Strict schema walking
// ---------------------------------------------------------------------------

[[noreturn]] void bail(const std::string& where, const std::string& what) {
    throw ValidationError(where + ": " + what);
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> required,
                std::initializer_list<const char*> optional) {
    if (!obj.is_object()) bail(where, "expected an object");
    for (const auto& item : obj.items()) {
        const std::string& key = item.key();
        const bool known =
            std::any_of(required.begin(), required.end(), [&](const char* k) { return key == k; }) ||
            std::any_of(optional.begin(), optional.end(), [&](const char* k) { return key == k; });
        if (!known) bail(where, "unknown key '" + key + "'");
    }
    for (const char* k : required) {
        if (!obj.contains(k)) bail(where, "missing required key '" + std::string(k) + "'");
    }
}

double as_number(const json& obj, const std::string& where, const char* key) {
    const auto& v = obj.at(key);
    if (!v.is_number()) bail(where + "." + key, "expected a number");
    return v.get<double>();
}

double as_number_or(const json& obj, const std::string& where, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    return as_number(obj, where, key);
}

int as_int(const json& obj, const std::string& where, const char* key) {
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) bail(where + "." + key, "expected an integer");
    return v.get<int>();
}

int as_int_or(const json& obj, const std::string& where, const char* key, int fallback) {
    if (!obj.contains(key)) return fallback;
    return as_int(obj, where, key);
}

std::string as_string(const json& obj, const std::string& where, const char* key) {
    const auto& v = obj.at(key);
    if (!v.is_string()) bail(where + "." + key, "expected a string");
    return v.get<std::string>();
}

Eigen::VectorXd parse_vector(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) bail(where, "expected a non-empty array of numbers");
    Eigen::VectorXd out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) bail(where, "expected numbers");
        out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
    }
    return out;
}

Eigen::VectorXi parse_int_vector(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) bail(where, "expected a non-empty array of integers");
    Eigen::VectorXi out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number_integer()) bail(where, "expected integers");
        out[static_cast<Eigen::Index>(i)] = v[i].get<int>();
    }
    return out;
}

Eigen::MatrixXd parse_matrix(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) bail(where, "expected an array of rows");
    const std::size_t rows = v.size();
    if (!v[0].is_array() || v[0].empty()) bail(where, "expected array rows");
    const std::size_t cols = v[0].size();
    Eigen::MatrixXd out(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (!v[i].is_array() || v[i].size() != cols) bail(where, "ragged matrix rows");
        for (std::size_t j = 0; j < cols; ++j) {
            if (!v[i][j].is_number()) bail(where, "expected numbers");
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                v[i][j].get<double>();
        }
    }
    return out;
}

PhasePoint parse_phase_point(const json& obj, const std::string& where) {
    check_keys(obj, where, {"x", "p"}, {});
    const Eigen::VectorXd x = parse_vector(obj.at("x"), where + ".x");
    const Eigen::VectorXd p = parse_vector(obj.at("p"), where + ".p");
    if (x.size() != p.size()) bail(where, "x and p must have equal length");
    return {x, p};
}

// Effective tolerance table; scenarios may override individual entries.
struct ToleranceSpec {
    double quadrature = 1e-9;
    double lagrangian = default_lagrangian_tol;
    double caustic = default_caustic_tol;
    double ebk = default_ebk_tol;

    QuadratureOptions quadrature_options() const {
        QuadratureOptions q;
        q.tol = quadrature;
        return q;
    }
};

ToleranceSpec parse_tolerances(const json& sc) {
    ToleranceSpec t;
    if (!sc.contains("tolerances")) return t;
    const json& jt = sc.at("tolerances");
    check_keys(jt, "scenario.tolerances", {}, {"quadrature", "lagrangian", "caustic", "ebk"});
    t.quadrature = as_number_or(jt, "scenario.tolerances", "quadrature", t.quadrature);
    t.lagrangian = as_number_or(jt, "scenario.tolerances", "lagrangian", t.lagrangian);
    t.caustic = as_number_or(jt, "scenario.tolerances", "caustic", t.caustic);
    t.ebk = as_number_or(jt, "scenario.tolerances", "ebk", t.ebk);
    for (double v : {t.quadrature, t.lagrangian, t.caustic, t.ebk}) {
        if (!(v > 0.0)) bail("scenario.tolerances", "entries must be positive");
    }
    return t;
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

ParamManifold build_manifold(const json& obj, const std::string& where) {
    if (!obj.is_object()) bail(where, "expected an object");
    if (!obj.contains("family")) bail(where, "missing required key 'family'");
    const std::string family = as_string(obj, where, "family");
    if (family == "circle") {
        check_keys(obj, where, {"family", "radius"}, {"base_angle"});
        return make_circle(as_number(obj, where, "radius"),
                           as_number_or(obj, where, "base_angle", 0.0));
    }
    if (family == "torus") {
        check_keys(obj, where, {"family", "radii"}, {});
        return make_torus(parse_vector(obj.at("radii"), where + ".radii"));
    }
    if (family == "linear-plane") {
        check_keys(obj, where, {"family", "matrix"}, {});
        return make_linear_plane(parse_matrix(obj.at("matrix"), where + ".matrix"));
    }
    if (family == "exact-quadratic") {
        check_keys(obj, where, {"family", "matrix"}, {});
        return exact_to_param(make_exact_quadratic(parse_matrix(obj.at("matrix"), where + ".matrix")));
    }
    if (family == "exact-expression") {
        check_keys(obj, where, {"family", "n", "phi"}, {"domain"});
        const int n = as_int(obj, where, "n");
        if (n < 1) bail(where + ".n", "must be >= 1");
        const Expression expr = Expression::parse(as_string(obj, where, "phi"));
        if (expr.max_p_index() > 0 || expr.uses_time()) {
            bail(where + ".phi", "may only use x_1..x_n");
        }
        if (expr.max_x_index() > n) bail(where + ".phi", "x index exceeds n");
        Box domain = Box::unbounded(n);
        if (obj.contains("domain")) {
            const json& d = obj.at("domain");
            check_keys(d, where + ".domain", {"lo", "hi"}, {});
            domain.lo = parse_vector(d.at("lo"), where + ".domain.lo");
            domain.hi = parse_vector(d.at("hi"), where + ".domain.hi");
            if (domain.lo.size() != n || domain.hi.size() != n) {
                bail(where + ".domain", "lo/hi must have length n");
            }
        }
        ExactManifold em(n, [expr](const Eigen::VectorXd& x) { return expr.eval_x(x); }, {},
                         domain);
        return exact_to_param(em);
    }
    bail(where + ".family", "unknown family '" + family + "'");
}

CurveSpec build_curve(const json& obj, const std::string& where, int n_hint) {
    if (!obj.is_object()) bail(where, "expected an object");
    if (!obj.contains("kind")) bail(where, "missing required key 'kind'");
    const std::string kind = as_string(obj, where, "kind");
    if (kind == "segment") {
        check_keys(obj, where, {"kind", "from", "to"}, {});
        const PhasePoint a = parse_phase_point(obj.at("from"), where + ".from");
        const PhasePoint b = parse_phase_point(obj.at("to"), where + ".to");
        if (a.dim() != b.dim()) bail(where, "'from' and 'to' dimensions differ");
        CurveSpec c;
        c.gamma = [a, b](double t) { return a + t * (b - a); };
        c.dgamma = [a, b](double) { return b - a; };
        return c;
    }
    if (kind == "circle") {
        check_keys(obj, where, {"kind", "radius"}, {});
        const double r = as_number(obj, where, "radius");
        if (!(r > 0.0)) bail(where + ".radius", "must be positive");
        CurveSpec c;
        c.gamma = [r](double t) { return PhasePoint::scalar(r * std::cos(t), r * std::sin(t)); };
        c.dgamma = [r](double t) { return PhasePoint::scalar(-r * std::sin(t), r * std::cos(t)); };
        return c;
    }
    if (kind == "expression") {
        check_keys(obj, where, {"kind", "x", "p"}, {});
        const json& jx = obj.at("x");
        const json& jp = obj.at("p");
        if (!jx.is_array() || !jp.is_array() || jx.size() != jp.size() || jx.empty()) {
            bail(where, "'x' and 'p' must be equal-length arrays of formulas");
        }
        std::vector<Expression> ex, ep;
        for (std::size_t i = 0; i < jx.size(); ++i) {
            if (!jx[i].is_string() || !jp[i].is_string()) bail(where, "expected formula strings");
            ex.push_back(Expression::parse(jx[i].get<std::string>()));
            ep.push_back(Expression::parse(jp[i].get<std::string>()));
            if (ex.back().max_x_index() > 0 || ex.back().max_p_index() > 0 ||
                ep.back().max_x_index() > 0 || ep.back().max_p_index() > 0) {
                bail(where, "curve formulas may only use t");
            }
        }
        const int n = static_cast<int>(ex.size());
        CurveSpec c;
        const Eigen::VectorXd dummy = Eigen::VectorXd::Zero(1);
        c.gamma = [ex, ep, n, dummy](double t) {
            Eigen::VectorXd x(n), p(n);
            for (int i = 0; i < n; ++i) {
                x[i] = ex[static_cast<std::size_t>(i)].eval(dummy, dummy, t);
                p[i] = ep[static_cast<std::size_t>(i)].eval(dummy, dummy, t);
            }
            return PhasePoint(x, p);
        };
        return c;
    }
    bail(where + ".kind", "unknown curve kind '" + kind + "'");
    (void)n_hint;
}

Hamiltonian build_hamiltonian(const json& obj, const std::string& where, int n_hint) {
    if (!obj.is_object()) bail(where, "expected an object");
    if (!obj.contains("type")) bail(where, "missing required key 'type'");
    const std::string type = as_string(obj, where, "type");
    const auto need_n = [&](int fallback) {
        const int n = fallback > 0 ? fallback : n_hint;
        if (n < 1) bail(where, "cannot infer the dimension; add an explicit 'n'");
        return n;
    };
    if (type == "free") {
        check_keys(obj, where, {"type"}, {"n"});
        return hamiltonian_free(need_n(as_int_or(obj, where, "n", 0)));
    }
    if (type == "harmonic") {
        check_keys(obj, where, {"type"}, {"n"});
        return hamiltonian_harmonic(need_n(as_int_or(obj, where, "n", 0)));
    }
    if (type == "quadratic") {
        check_keys(obj, where, {"type", "matrix"}, {});
        const Eigen::MatrixXd q = parse_matrix(obj.at("matrix"), where + ".matrix");
        if (n_hint > 0 && q.rows() != 2 * n_hint) {
            bail(where + ".matrix", "must be 2n x 2n for the scenario dimension");
        }
        return hamiltonian_quadratic(q);
    }
    if (type == "translation") {
        check_keys(obj, where, {"type", "x", "p"}, {});
        json pt;
        pt["x"] = obj.at("x");
        pt["p"] = obj.at("p");
        const PhasePoint z_a = parse_phase_point(pt, where);
        if (n_hint > 0 && z_a.dim() != n_hint) bail(where, "translation vector dimension mismatch");
        return hamiltonian_translation(z_a);
    }
    if (type == "displacement") {
        check_keys(obj, where, {"type", "curve"}, {});
        const CurveSpec curve = build_curve(obj.at("curve"), where + ".curve", n_hint);
        const int n = curve.at(0.0).dim();
        if (n_hint > 0 && n != n_hint) bail(where + ".curve", "curve dimension mismatch");
        return hamiltonian_displacement(curve, n);
    }
    if (type == "expression") {
        check_keys(obj, where, {"type", "formula"}, {"n"});
        const Expression expr = Expression::parse(as_string(obj, where, "formula"));
        int n = as_int_or(obj, where, "n", 0);
        if (n == 0) n = n_hint;
        if (n == 0) n = std::max(expr.max_x_index(), expr.max_p_index());
        if (n < 1) bail(where, "cannot infer the dimension; add an explicit 'n'");
        if (expr.max_x_index() > n || expr.max_p_index() > n) {
            bail(where + ".formula", "variable index exceeds the dimension");
        }
        const bool time_indep = !expr.uses_time();
        return Hamiltonian(
            n, [expr](const PhasePoint& z, double t) { return expr.eval(z.x, z.p, t); }, {},
            time_indep, false, false);
    }
    bail(where + ".type", "unknown type '" + type + "'");
}

HomotopyPoint build_homotopy_point(const json& obj, const std::string& where,
                                   const ParamManifold& m) {
    check_keys(obj, where, {"theta"}, {"windings"});
    const Eigen::VectorXd theta = parse_vector(obj.at("theta"), where + ".theta");
    if (theta.size() != m.n) bail(where + ".theta", "dimension mismatch with the manifold");
    if (obj.contains("windings")) {
        const Eigen::VectorXi w = parse_int_vector(obj.at("windings"), where + ".windings");
        if (w.size() != m.n) bail(where + ".windings", "dimension mismatch with the manifold");
        return make_homotopy_point(m, theta, w);
    }
    return make_homotopy_point(m, theta);
}

struct TimeSpec {
    double t0 = 0.0;
    double t1 = 0.0;
    int steps = 1024;
};

TimeSpec build_time(const json& obj, const std::string& where, std::optional<int> steps_override) {
    check_keys(obj, where, {"t1"}, {"t0", "steps"});
    TimeSpec t;
    t.t0 = as_number_or(obj, where, "t0", 0.0);
    t.t1 = as_number(obj, where, "t1");
    t.steps = as_int_or(obj, where, "steps", 1024);
    if (steps_override) t.steps = *steps_override;
    if (t.steps < 1) bail(where + ".steps", "must be >= 1");
    return t;
}

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

struct Sink {
    std::filesystem::path dir;
    std::string prefix = "results";
    std::vector<std::string> files;

    std::filesystem::path path(const std::string& suffix) const {
        return dir / (prefix + suffix);
    }

    void write(const std::string& suffix, const std::string& contents) {
        const auto p = path(suffix);
        std::ofstream os(p);
        if (!os) throw Error("scenario: cannot write " + p.string());
        os << contents;
        files.push_back(p.string());
    }
};

std::string csv_row(const std::vector<double>& values) {
    std::string row;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) row += ',';
        row += format_g17(values[i]);
    }
    row += '\n';
    return row;
}

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&tt, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

// ---------------------------------------------------------------------------
// Kind runners
// ---------------------------------------------------------------------------

void run_check(const json& sc, unsigned long seed, const ToleranceSpec& tols, Sink& sink,
               std::string& message) {
    check_keys(sc, "scenario", {"kind", "manifold"}, {"samples", "seed", "output", "tolerances"});
    const ParamManifold m = build_manifold(sc.at("manifold"), "scenario.manifold");
    const int samples = as_int_or(sc, "scenario", "samples", 100);
    const ManifoldCheck check =
        check_manifold(m, samples, tols.lagrangian, static_cast<unsigned>(seed));

    std::size_t caustic_cells = 0;
    if (m.n <= 2) {
        CausticOptions copt;
        copt.tol = tols.caustic;
        caustic_cells =
            caustic_points(m, default_scan_grid(m, m.n == 1 ? 512 : 96), copt).size();
    }
    json out;
    out["lagrangian"] = check.lagrangian;
    out["full_rank"] = check.full_rank;
    out["max_sigma_defect"] = check.max_sigma_defect;
    out["min_jacobian_sv"] = check.min_jacobian_sv;
    out["samples"] = samples;
    out["caustic_cells"] = caustic_cells;
    sink.write(".json", out.dump(2) + "\n");
    message = check.lagrangian && check.full_rank ? "manifold check passed"
                                                  : "manifold check FAILED (see results)";
}

void run_flow(const json& sc, const RunOptions& opt, Sink& sink, std::string& message) {
    check_keys(sc, "scenario", {"kind", "hamiltonian", "point", "time"},
               {"seed", "output", "tolerances"});
    const PhasePoint z0 = parse_phase_point(sc.at("point"), "scenario.point");
    const Hamiltonian ham = build_hamiltonian(sc.at("hamiltonian"), "scenario.hamiltonian", z0.dim());
    const TimeSpec time = build_time(sc.at("time"), "scenario.time", opt.steps);

    FlowOptions fo;
    fo.steps = time.steps;
    const PhasedTrajectory traj = flow(ham, z0, time.t0, time.t1, fo);

    std::string csv = "t";
    for (int i = 1; i <= ham.n; ++i) csv += ",x_" + std::to_string(i);
    for (int i = 1; i <= ham.n; ++i) csv += ",p_" + std::to_string(i);
    csv += ",action\n";
    for (const auto& s : traj.samples) {
        std::vector<double> row;
        row.push_back(s.t);
        for (int i = 0; i < ham.n; ++i) row.push_back(s.z.x[i]);
        for (int i = 0; i < ham.n; ++i) row.push_back(s.z.p[i]);
        row.push_back(s.action);
        csv += csv_row(row);
    }
    sink.write(".csv", csv);

    json out;
    out["steps"] = time.steps;
    out["action"] = traj.back().action;
    if (ham.time_independent) {
        out["energy_initial"] = ham.value(traj.front().z, time.t0);
        out["energy_final"] = ham.value(traj.back().z, traj.back().t);
    }
    sink.write(".json", out.dump(2) + "\n");
    message = "flow integrated over " + std::to_string(time.steps) + " steps";
}

void run_transport(const json& sc, const RunOptions& opt, const ToleranceSpec& tols,
                   Sink& sink, std::string& message) {
    check_keys(sc, "scenario", {"kind", "manifold", "hamiltonian", "point", "time"},
               {"seed", "output", "tolerances"});
    const ParamManifold m = build_manifold(sc.at("manifold"), "scenario.manifold");
    const Hamiltonian ham = build_hamiltonian(sc.at("hamiltonian"), "scenario.hamiltonian", m.n);
    const HomotopyPoint hp = build_homotopy_point(sc.at("point"), "scenario.point", m);
    const TimeSpec time = build_time(sc.at("time"), "scenario.time", opt.steps);
    if (time.t0 != 0.0) bail("scenario.time.t0", "transport is anchored at t0 = 0");

    FlowOptions fo;
    fo.steps = time.steps;
    const TransportedPhase tp =
        transport_phase(ham, m, hp, time.t1, fo, tols.quadrature_options());

    std::string csv = "t,phase0,delta_phi,phase_t";
    for (int i = 1; i <= m.n; ++i) csv += ",x_" + std::to_string(i);
    for (int i = 1; i <= m.n; ++i) csv += ",p_" + std::to_string(i);
    csv += '\n';
    std::vector<double> row{tp.t, tp.base_phase, tp.value - tp.base_phase, tp.value};
    for (int i = 0; i < m.n; ++i) row.push_back(tp.endpoint.x[i]);
    for (int i = 0; i < m.n; ++i) row.push_back(tp.endpoint.p[i]);
    csv += csv_row(row);
    sink.write(".csv", csv);
    message = "transported phase delta = " + format_g17(tp.value - tp.base_phase);
}

void run_hj(const json& sc, const RunOptions& opt, const ToleranceSpec& tols, Sink& sink,
            std::string& message) {
    check_keys(sc, "scenario", {"kind", "hamiltonian", "phi0", "grid", "t_max", "steps"},
               {"seed", "output", "tolerances"});
    const json& jg = sc.at("grid");
    check_keys(jg, "scenario.grid", {"lo", "hi", "nodes"}, {});
    HJGrid grid;
    grid.lo = as_number(jg, "scenario.grid", "lo");
    grid.hi = as_number(jg, "scenario.grid", "hi");
    grid.nodes = as_int(jg, "scenario.grid", "nodes");

    const json& jp = sc.at("phi0");
    check_keys(jp, "scenario.phi0", {"formula"}, {});
    const Expression expr = Expression::parse(as_string(jp, "scenario.phi0", "formula"));
    if (expr.max_p_index() > 0 || expr.uses_time() || expr.max_x_index() > 1) {
        bail("scenario.phi0.formula", "may only use x_1");
    }
    HJInitialData data;
    data.phi0 = [expr](double x) { return expr.eval_x(Eigen::VectorXd::Constant(1, x)); };

    const Hamiltonian ham = build_hamiltonian(sc.at("hamiltonian"), "scenario.hamiltonian", 1);
    const double t_max = as_number(sc, "scenario", "t_max");
    int steps = as_int(sc, "scenario", "steps");
    if (opt.steps) steps = *opt.steps;

    HJOptions hopt;
    hopt.caustic_tol = tols.caustic;
    hopt.threads = opt.threads;
    const HJSolution sol = hj_solve(ham, data, grid, t_max, steps, hopt);
    std::ostringstream csv;
    sol.write_csv(csv);
    sink.write(".csv", csv.str());
    sink.write(".json", sol.metadata_json() + "\n");
    const double bd = sol.breakdown();
    message = std::isfinite(bd) ? "first caustic near t = " + format_g17(bd)
                                : "no caustic inside the horizon";
}

void run_ebk(const json& sc, const RunOptions& opt, const ToleranceSpec& tols, Sink& sink,
             std::string& message) {
    check_keys(sc, "scenario", {"kind", "manifold", "hbar", "loops"},
               {"seed", "output", "tolerances"});
    const ParamManifold m = build_manifold(sc.at("manifold"), "scenario.manifold");
    const double hbar = as_number(sc, "scenario", "hbar");
    const json& jl = sc.at("loops");
    if (!jl.is_array() || jl.empty()) bail("scenario.loops", "expected a non-empty array");
    std::vector<LoopClass> loops;
    for (std::size_t i = 0; i < jl.size(); ++i) {
        LoopClass lc;
        lc.windings = parse_int_vector(jl[i], "scenario.loops[" + std::to_string(i) + "]");
        if (lc.windings.size() != m.n) {
            bail("scenario.loops[" + std::to_string(i) + "]", "dimension mismatch");
        }
        loops.push_back(std::move(lc));
    }
    const auto reports = ebk_check(m, hbar, loops, tols.ebk, tols.quadrature_options());
    sink.write(".json", ebk_report_json(reports, hbar) + "\n");
    const bool all = std::all_of(reports.begin(), reports.end(),
                                 [](const EbkLoopReport& r) { return r.quantized; });
    message = all ? "all loops quantized" : "quantization fails for at least one loop";
    (void)opt;
}

void run_weyl(const json& sc, const RunOptions& opt, Sink& sink, std::string& message) {
    check_keys(sc, "scenario", {"kind", "wavefunction", "hbar", "z_a"},
               {"z_b", "seed", "output", "tolerances"});
    const double hbar = as_number(sc, "scenario", "hbar");
    if (!(hbar > 0.0)) bail("scenario.hbar", "must be positive");

    const json& jw = sc.at("wavefunction");
    if (!jw.is_object() || !jw.contains("kind")) bail("scenario.wavefunction", "missing 'kind'");
    const std::string wkind = as_string(jw, "scenario.wavefunction", "kind");
    SampledWavefunction wf;
    if (wkind == "gaussian") {
        check_keys(jw, "scenario.wavefunction", {"kind", "sigma", "grid"},
                   {"center_x", "center_p"});
        const json& jg = jw.at("grid");
        check_keys(jg, "scenario.wavefunction.grid", {"lo", "hi", "nodes"}, {});
        wf = make_gaussian_wavefunction(as_number_or(jw, "scenario.wavefunction", "center_x", 0.0),
                                        as_number_or(jw, "scenario.wavefunction", "center_p", 0.0),
                                        as_number(jw, "scenario.wavefunction", "sigma"),
                                        as_number(jg, "scenario.wavefunction.grid", "lo"),
                                        as_number(jg, "scenario.wavefunction.grid", "hi"),
                                        as_int(jg, "scenario.wavefunction.grid", "nodes"), hbar);
    } else if (wkind == "csv") {
        check_keys(jw, "scenario.wavefunction", {"kind", "path"}, {});
        const std::string path = as_string(jw, "scenario.wavefunction", "path");
        std::ifstream is(path);
        if (!is) bail("scenario.wavefunction.path", "cannot open '" + path + "'");
        wf = read_wavefunction_csv(is, hbar);
    } else {
        bail("scenario.wavefunction.kind", "unknown kind '" + wkind + "'");
    }

    const PhasePoint z_a = parse_phase_point(sc.at("z_a"), "scenario.z_a");
    if (z_a.dim() != 1) bail("scenario.z_a", "sampled wavefunctions are 1-D");
    const SampledWavefunction translated = weyl_translate(wf, z_a);

    std::ostringstream csv;
    write_wavefunction_csv(csv, translated);
    sink.write(".csv", csv.str());

    json out;
    out["hbar"] = hbar;
    out["norm_in"] = wf.norm();
    out["norm_out"] = translated.norm();
    out["norm_defect"] = std::abs(translated.norm() - wf.norm());
    if (sc.contains("z_b")) {
        const PhasePoint z_b = parse_phase_point(sc.at("z_b"), "scenario.z_b");
        const auto rep = weyl_composition_defect(wf, z_a, z_b);
        json comp;
        comp["phase_defect"] = rep.phase_defect;
        comp["expected"] = -symplectic_form(z_a, z_b) / (2.0 * hbar);
        comp["ratio_spread"] = rep.spread;
        out["composition"] = comp;
    }
    sink.write(".json", out.dump(2) + "\n");
    message = "norm defect = " + format_g17(std::abs(translated.norm() - wf.norm()));
    (void)opt;
}

void run_invariance(const json& sc, const RunOptions& opt, Sink& sink, std::string& message) {
    check_keys(sc, "scenario", {"kind", "hamiltonian", "curve", "time"},
               {"resolutions", "span", "seed", "output", "tolerances"});
    const CurveSpec curve = build_curve(sc.at("curve"), "scenario.curve", 0);
    const int n = curve.at(0.0).dim();
    const Hamiltonian ham = build_hamiltonian(sc.at("hamiltonian"), "scenario.hamiltonian", n);
    const TimeSpec time = build_time(sc.at("time"), "scenario.time", opt.steps);
    const double span = as_number_or(sc, "scenario", "span", 1.0);

    std::vector<int> resolutions{256, 512, 1024};
    if (sc.contains("resolutions")) {
        const Eigen::VectorXi r = parse_int_vector(sc.at("resolutions"), "scenario.resolutions");
        resolutions.assign(r.data(), r.data() + r.size());
        for (int v : resolutions) {
            if (v < 2) bail("scenario.resolutions", "entries must be >= 2");
        }
    }

    std::string csv = "curve_samples,defect\n";
    double finest = 0.0;
    for (int res : resolutions) {
        std::vector<PhasePoint> polyline;
        polyline.reserve(static_cast<std::size_t>(res) + 1);
        for (int k = 0; k <= res; ++k) {
            polyline.push_back(curve.at(span * static_cast<double>(k) / res));
        }
        InvarianceOptions io;
        io.flow.steps = time.steps;
        io.threads = opt.threads;
        const double defect = invariance_defect(ham, polyline, time.t1, io);
        csv += csv_row({static_cast<double>(res), defect});
        finest = defect;
    }
    sink.write(".csv", csv);
    json out;
    out["defect"] = finest;
    out["steps"] = time.steps;
    sink.write(".json", out.dump(2) + "\n");
    message = "circulation defect at finest resolution = " + format_g17(finest);
}

}  // namespace

RunResult run_text(const std::string& scenario_json, const RunOptions& opt) {
    RunResult result;
    json sc;
    try {
        sc = json::parse(scenario_json);
    } catch (const json::parse_error& e) {
        result.exit_code = 2;
        result.message = std::string("scenario: JSON parse error: ") + e.what();
        return result;
    }

    try {
        if (!sc.is_object()) throw ValidationError("scenario: expected a JSON object");
        if (!sc.contains("kind")) throw ValidationError("scenario: missing required key 'kind'");
        const std::string kind = as_string(sc, "scenario", "kind");
        result.kind = kind;
        if (!opt.expected_kind.empty() && kind != opt.expected_kind) {
            throw ValidationError("scenario.kind: expected '" + opt.expected_kind + "', found '" +
                                  kind + "'");
        }

        unsigned long seed = 1;
        if (sc.contains("seed")) {
            if (!sc.at("seed").is_number_integer()) {
                throw ValidationError("scenario.seed: expected an integer");
            }
            seed = sc.at("seed").get<unsigned long>();
        }
        if (opt.seed) seed = *opt.seed;

        Sink sink;
        sink.dir = opt.out_dir.empty() ? "." : opt.out_dir;
        std::filesystem::create_directories(sink.dir);
        if (sc.contains("output")) {
            const json& jo = sc.at("output");
            check_keys(jo, "scenario.output", {}, {"prefix"});
            if (jo.contains("prefix")) sink.prefix = as_string(jo, "scenario.output", "prefix");
        }

        const ToleranceSpec tols = parse_tolerances(sc);
        if (kind == "check") {
            run_check(sc, seed, tols, sink, result.message);
        } else if (kind == "flow") {
            run_flow(sc, opt, sink, result.message);
        } else if (kind == "transport") {
            run_transport(sc, opt, tols, sink, result.message);
        } else if (kind == "hj") {
            run_hj(sc, opt, tols, sink, result.message);
        } else if (kind == "ebk") {
            run_ebk(sc, opt, tols, sink, result.message);
        } else if (kind == "weyl") {
            run_weyl(sc, opt, sink, result.message);
        } else if (kind == "invariance") {
            run_invariance(sc, opt, sink, result.message);
        } else {
            throw ValidationError("scenario.kind: unknown kind '" + kind + "'");
        }

        json manifest;
        manifest["version"] = version_string;
        manifest["kind"] = kind;
        manifest["seed"] = seed;
        manifest["steps_override"] = opt.steps ? json(*opt.steps) : json(nullptr);
        manifest["threads"] = effective_threads(opt.threads);
        json jt;
        jt["quadrature"] = tols.quadrature;
        jt["lagrangian"] = tols.lagrangian;
        jt["caustic"] = tols.caustic;
        jt["ebk"] = tols.ebk;
        manifest["tolerances"] = jt;
        manifest["scenario"] = sc;
        manifest["timestamp"] = iso_timestamp();
        sink.write("_manifest.json", manifest.dump(2) + "\n");

        result.files = sink.files;
        result.exit_code = 0;
        return result;
    } catch (const ValidationError& e) {
        result.exit_code = 2;
        result.message = e.what();
        return result;
    } catch (const std::invalid_argument& e) {
        result.exit_code = 2;
        result.message = std::string("scenario: invalid value: ") + e.what();
        return result;
    } catch (const std::domain_error& e) {
        result.exit_code = 2;
        result.message = std::string("scenario: invalid value: ") + e.what();
        return result;
    } catch (const std::exception& e) {
        result.exit_code = 1;
        result.message = std::string("scenario: numerical failure: ") + e.what();
        return result;
    }
}

RunResult run_file(const std::string& scenario_path, const RunOptions& opt) {
    std::ifstream is(scenario_path);
    if (!is) {
        RunResult r;
        r.exit_code = 2;
        r.message = "scenario: cannot open '" + scenario_path + "'";
        return r;
    }
    std::ostringstream buffer;
    buffer << is.rdbuf();
    return run_text(buffer.str(), opt);
}

}  // namespace ptk::scenario
