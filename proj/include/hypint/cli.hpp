#pragma once

// Command implementations behind the hypint CLI. Each command consumes a
// validated Config, prints its report lines to `out`, writes any CSV
// artifacts, and returns the process exit status: 0 when every reported
// residual is under its configured tolerance, 1 otherwise.

#include <cmath>
#include <fstream>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "hypint/characteristics.hpp"
#include "hypint/compat.hpp"
#include "hypint/config.hpp"
#include "hypint/expr.hpp"
#include "hypint/families.hpp"
#include "hypint/linear.hpp"
#include "hypint/oracle.hpp"

namespace hypint::cli {

namespace detail {

inline PdeSpec problem_from(const Config& cfg) {
    return {cfg.expr("problem", "a"), cfg.expr("problem", "f")};
}

inline Reduction reduction_from(const Config& cfg) {
    std::string b = cfg.get("reduction", "branch");
    int branch;
    if (b == "+1" || b == "1" || b == "plus") branch = 1;
    else if (b == "-1" || b == "minus") branch = -1;
    else throw ConfigError("reduction branch must be +1/plus or -1/minus, got '" + b + "'");
    return Reduction(branch, cfg.expr("reduction", "g"));
}

inline SampleBox sample_box_from(const Config& cfg) {
    SampleBox box;
    box.x_lo = cfg.number_or("grid", "x0", 0.1);
    box.x_hi = cfg.number_or("grid", "x1", 1.0);
    box.t_lo = cfg.number_or("grid", "t0", 0.1);
    box.t_hi = cfg.number_or("grid", "t1", 1.0);
    box.u_lo = cfg.number_or("grid", "u_lo", 0.5);
    box.u_hi = cfg.number_or("grid", "u_hi", 2.0);
    box.ux_lo = cfg.number_or("grid", "ux_lo", -1.0);
    box.ux_hi = cfg.number_or("grid", "ux_hi", 1.0);
    box.nx = cfg.integer_or("grid", "nx", 10);
    box.nt = cfg.integer_or("grid", "nt", 10);
    box.nu = cfg.integer_or("grid", "nu", 10);
    box.nux = cfg.integer_or("grid", "nux", 5);
    return box;
}

inline FamilyParams family_params_from(const Config& cfg) {
    FamilyParams prm;
    const auto& sec = cfg.section("family");
    static const std::set<std::string> fn_keys = {"a", "Phi", "q", "q1", "q2", "u0", "h"};
    for (const auto& [key, val] : sec) {
        if (key == "id") continue;
        if (fn_keys.count(key)) prm.functions.emplace(key, cfg.expr("family", key));
        else prm.constants[key] = cfg.number("family", key);
    }
    return prm;
}

inline FamilyId family_id_from(const Config& cfg) {
    std::string name = cfg.get("family", "id");
    auto id = family_from_name(name);
    if (!id) throw ConfigError("unknown family id '" + name + "'");
    return *id;
}

inline void write_file(const std::string& path, const std::function<void(std::ostream&)>& fn) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file '" + path + "'");
    fn(out);
    if (!out) throw ConfigError("write failed for '" + path + "'");
}

inline bool report(std::ostream& out, const std::string& label, double value, double tol) {
    bool ok = value <= tol;
    out << label << " = " << value << " (tol " << tol << "): " << (ok ? "PASS" : "FAIL") << "\n";
    return ok;
}

struct LinearProblem {
    LinearSpec spec;
    std::function<Evaluator(OneVar, OneVar, Box2)> general;  // closed form or numeric
};

inline LinearProblem linear_from(const Config& cfg) {
    std::string name = cfg.get_or("linear", "spec", "custom");
    if (name == "telegraph") {
        double c = cfg.number("linear", "c");
        double q1 = cfg.number("linear", "q1");
        return {telegraph_spec(c, q1), [c, q1](OneVar f1, OneVar f2, Box2 box) {
                    return telegraph_general(c, q1, std::move(f1), std::move(f2), box);
                }};
    }
    if (name == "variable-speed") {
        if (cfg.find("linear", "a")) {
            Expr a = cfg.expr("linear", "a");
            double k0 = cfg.number_or("linear", "k0", 0.0);
            Expr h0 = cfg.expr_or("linear", "h0", Expr::constant(0.0));
            VarspeedOptions opt;
            opt.x_ref = cfg.number_or("linear", "x_ref", 1.0);
            return {varspeed_spec(a, h0, k0), [=](OneVar f1, OneVar f2, Box2 box) {
                        return varspeed_general(a, k0, h0, std::move(f1), std::move(f2), box, opt);
                    }};
        }
        double c0 = cfg.number("linear", "c0");  // sol3 closed form
        return {sol3_spec(c0), [c0](OneVar f1, OneVar f2, Box2 box) {
                    return sol3_general(c0, std::move(f1), std::move(f2), box);
                }};
    }
    if (name == "epd") {
        double alpha0 = cfg.number("linear", "alpha0");
        Expr h = cfg.expr_or("linear", "h", Expr::constant(0.0));
        return {epd_spec(alpha0, h), [=](OneVar f1, OneVar f2, Box2 box) {
                    return epd_general(alpha0, h, std::move(f1), std::move(f2), box);
                }};
    }
    if (name == "kgf") {
        double c0 = cfg.number("linear", "c0");
        std::optional<double> k0;
        if (cfg.find("linear", "k0")) k0 = cfg.number("linear", "k0");
        LinearSpec s = kgf_spec(c0, k0);
        return {s, [c0](OneVar f1, OneVar f2, Box2 box) {
                    return kgf_general(c0, std::move(f1), std::move(f2), box);
                }};
    }
    if (name == "damped") {
        double c0 = cfg.number("linear", "c0");
        Expr h0 = cfg.expr_or("linear", "h0", Expr::constant(0.0));
        return {damped_spec(c0, h0), [=](OneVar f1, OneVar f2, Box2 box) {
                    return damped_general(c0, h0, std::move(f1), std::move(f2), box);
                }};
    }
    if (name == "custom") {
        LinearSpec s{cfg.expr("linear", "a"), cfg.expr_or("linear", "A", Expr::constant(0.0)),
                     cfg.expr_or("linear", "H", Expr::constant(0.0)),
                     cfg.expr_or("linear", "B", Expr::constant(0.0)),
                     cfg.expr_or("linear", "G", Expr::constant(0.0))};
        NumericOptions opt;
        opt.n_sigma = cfg.integer_or("grid", "n_sigma", 801);
        opt.h_t = cfg.number_or("grid", "h_t", 1e-3);
        opt.x_pad = cfg.number_or("grid", "x_pad", 1.0);
        return {s, [s, opt](OneVar f1, OneVar f2, Box2 box) {
                    return general_solution_numeric(s, std::move(f1), std::move(f2), box, opt);
                }};
    }
    throw ConfigError("unknown linear spec '" + name +
                      "' (expected telegraph, variable-speed, epd, kgf, damped or custom)");
}

inline void require_exactly_one(const Config& cfg, const std::string& cmd,
                                std::initializer_list<const char*> alternatives) {
    int found = 0;
    std::string names;
    for (const char* alt : alternatives) {
        if (cfg.has_section(alt)) ++found;
        names += std::string(names.empty() ? "" : ", ") + "[" + alt + "]";
    }
    if (found != 1)
        throw ConfigError("command '" + cmd + "' needs exactly one of " + names);
}

inline GridField sample_field(const Evaluator& u, double x0, double x1, double t0, double t1,
                              int nx, int nt) {
    GridField fld;
    fld.x0 = x0;
    fld.nx = nx;
    fld.dx = nx > 1 ? (x1 - x0) / (nx - 1) : 0.0;
    fld.t0 = t0;
    fld.nt = nt;
    fld.dt = nt > 1 ? (t1 - t0) / (nt - 1) : 0.0;
    fld.u.resize(static_cast<std::size_t>(nx) * nt);
    for (int j = 0; j < nt; ++j)
        for (int i = 0; i < nx; ++i) fld.at(i, j) = u(fld.x(i), fld.t(j));
    return fld;
}

}  // namespace detail

/// `check`: max con1/det residuals for a (problem, reduction) pair, or the
/// structural residuals for a linear spec. Exit 0 iff all within tolerance.
inline int cmd_check(const Config& cfg, std::ostream& out) {
    using namespace detail;
    require_exactly_one(cfg, "check", {"problem", "linear"});
    bool ok = true;
    if (cfg.has_section("linear")) {
        LinearProblem lp = linear_from(cfg);
        Grid2 grid{cfg.number_or("grid", "x0", 0.5), cfg.number_or("grid", "x1", 1.5),
                   cfg.number_or("grid", "t0", 0.0), cfg.number_or("grid", "t1", 1.0),
                   cfg.integer_or("grid", "nx", 20), cfg.integer_or("grid", "nt", 20)};
        double tol = cfg.number_or("tolerances", "structural", 1e-8);
        StructuralReport rep = structural_residual(lp.spec, grid);
        ok &= report(out, "max |structural gamma residual|", rep.gamma_max, tol);
        ok &= report(out, "max |structural eta residual|", rep.eta_max, tol);
        return ok ? 0 : 1;
    }
    if (!cfg.has_section("reduction"))
        throw ConfigError("command 'check' needs [reduction] next to [problem]");
    PdeSpec p = problem_from(cfg);
    Reduction r = reduction_from(cfg);
    SampleBox box = sample_box_from(cfg);
    double tol = cfg.number_or("tolerances", "con1", 1e-10);
    Con1Report rep = max_con1_residual(p, r, box);
    ok &= report(out, "max |con1 residual| (scaled)", rep.max_scaled, tol);

    // determinant residual of F = p - lambda q - g over the same box
    Expr F = Expr::variable("p") - r.lambda(p) * Expr::variable("q") - r.g;
    double det_tol = cfg.number_or("tolerances", "det", 1e-10);
    double worst_det = 0.0;
    for (int i = 0; i < box.nx; ++i)
        for (int j = 0; j < box.nt; ++j)
            for (int k = 0; k < box.nu; ++k) {
                double x = SampleBox::node(box.x_lo, box.x_hi, i, box.nx);
                double t = SampleBox::node(box.t_lo, box.t_hi, j, box.nt);
                double u = SampleBox::node(box.u_lo, box.u_hi, k, box.nu);
                double a = p.a.eval({{"x", x}, {"t", t}, {"u", u}});
                worst_det = std::max(
                    worst_det, std::abs(det_residual(F, a, {x, t, u, 0.37, -0.24})));
            }
    ok &= report(out, "max |det residual|", worst_det, det_tol);
    return ok ? 0 : 1;
}

/// `reduce`: integrate the reduction along characteristics, write the strip
/// CSV, report the breakdown time if any.
inline int cmd_reduce(const Config& cfg, std::ostream& out) {
    using namespace detail;
    PdeSpec p = problem_from(cfg);
    Reduction r = reduction_from(cfg);
    Expr u0 = cfg.expr("reduction", "u0");
    double t_start = cfg.number_or("reduction", "t_start", 0.0);
    InitialData init = InitialData::from_expr(u0, cfg.number("grid", "x0"),
                                              cfg.number("grid", "x1"), t_start);
    CharStrip strip =
        integrate_reduction(p, r, init, cfg.number("grid", "t_end"),
                            cfg.integer_or("grid", "n_sigma", 401),
                            cfg.number_or("grid", "h_t", 1e-3));
    std::string path = cfg.get_or("output", "strip_csv", "strip.csv");
    write_file(path, [&](std::ostream& os) { write_csv(strip, os); });
    out << "strip: " << strip.n_sigma() << " characteristics x " << strip.n_times()
        << " times -> " << path << "\n";
    if (strip.failed) {
        out << "strip truncated: " << strip.failure << "\n";
        return 1;
    }
    if (auto tb = breakdown_time(strip))
        out << "breakdown (gradient catastrophe) at t = " << *tb << "\n";
    else
        out << "no breakdown in the stored range\n";
    return 0;
}

/// `family`: sample a closed-form family on the grid and write the field CSV.
inline int cmd_family(const Config& cfg, std::ostream& out) {
    using namespace detail;
    FamilyId id = family_id_from(cfg);
    FamilyParams prm = family_params_from(cfg);
    auto violations = validate_family(id, prm);
    if (!violations.empty()) {
        for (const auto& v : violations) out << "validator: " << v << "\n";
        return 1;
    }
    GridField fld = sample_field(
        {family_evaluator(id, prm),
         {cfg.number("grid", "x0"), cfg.number("grid", "x1"), cfg.number("grid", "t0"),
          cfg.number("grid", "t1")}},
        cfg.number("grid", "x0"), cfg.number("grid", "x1"), cfg.number("grid", "t0"),
        cfg.number("grid", "t1"), cfg.integer_or("grid", "nx", 51),
        cfg.integer_or("grid", "nt", 51));
    std::string path = cfg.get_or("output", "field_csv", "field.csv");
    write_file(path, [&](std::ostream& os) { write_csv(fld, os); });
    out << "family " << family_name(id) << ": " << fld.nx << " x " << fld.nt << " samples -> "
        << path << "\n";
    return 0;
}

/// `linear-general`: build the general solution from f1, f2 and sample it.
inline int cmd_linear_general(const Config& cfg, std::ostream& out) {
    using namespace detail;
    LinearProblem lp = linear_from(cfg);
    OneVar f1 = one_var(cfg.expr_or("linear", "f1", Expr::constant(0.0)));
    OneVar f2 = one_var(cfg.expr_or("linear", "f2", Expr::constant(0.0)));
    Box2 box{cfg.number("grid", "x0"), cfg.number("grid", "x1"), cfg.number("grid", "t0"),
             cfg.number("grid", "t1")};
    Evaluator u = lp.general(f1, f2, box);
    GridField fld = sample_field(u, box.x_lo, box.x_hi, box.t_lo, box.t_hi,
                                 cfg.integer_or("grid", "nx", 51), cfg.integer_or("grid", "nt", 51));
    std::string path = cfg.get_or("output", "field_csv", "field.csv");
    write_file(path, [&](std::ostream& os) { write_csv(fld, os); });
    out << "general solution: " << fld.nx << " x " << fld.nt << " samples -> " << path << "\n";
    return 0;
}

/// `linear-ivp`: solve the initial-value problem and sample the field.
inline int cmd_linear_ivp(const Config& cfg, std::ostream& out) {
    using namespace detail;
    LinearProblem lp = linear_from(cfg);
    double x0 = cfg.number("grid", "x0"), x1 = cfg.number("grid", "x1");
    double pad = cfg.number_or("grid", "x_pad", 1.0);
    IvpData data{cfg.expr("linear", "phi"), cfg.expr("linear", "psi"), x0 - pad, x1 + pad};
    IvpOptions opt;
    opt.n_sigma = cfg.integer_or("grid", "n_sigma", 801);
    opt.h_t = cfg.number_or("grid", "h_t", 1e-3);
    opt.t_back = cfg.number_or("grid", "t_back", 0.05);
    double t1 = cfg.number("grid", "t1");
    Evaluator u = solve_ivp(lp.spec, data, t1 + opt.h_t, opt);
    GridField fld = sample_field(u, x0, x1, cfg.number_or("grid", "t0", 0.0), t1,
                                 cfg.integer_or("grid", "nx", 51), cfg.integer_or("grid", "nt", 51));
    std::string path = cfg.get_or("output", "field_csv", "field.csv");
    write_file(path, [&](std::ostream& os) { write_csv(fld, os); });
    out << "ivp solution: " << fld.nx << " x " << fld.nt << " samples -> " << path << "\n";
    return 0;
}

/// `verify`: finite-difference PDE residual of the constructed solution plus
/// a leapfrog cross-check against it. Exit 0 iff both are within tolerance.
inline int cmd_verify(const Config& cfg, std::ostream& out) {
    using namespace detail;
    require_exactly_one(cfg, "verify", {"family", "linear"});
    double x0 = cfg.number("grid", "x0"), x1 = cfg.number("grid", "x1");
    double t0 = cfg.number("grid", "t0"), t1 = cfg.number("grid", "t1");

    PdeSpec p{Expr::constant(1.0), Expr::constant(0.0)};
    Evaluator sol;
    if (cfg.has_section("family")) {
        FamilyId id = family_id_from(cfg);
        FamilyParams prm = family_params_from(cfg);
        p = family_pde(id, prm);
        double margin = 0.5 * (t1 - t0) + 0.1;
        sol = {family_evaluator(id, prm), {x0 - margin, x1 + margin, t0 - margin, t1 + margin}};
    } else {
        LinearProblem lp = linear_from(cfg);
        p = linear_pde(lp.spec);
        OneVar f1 = one_var(cfg.expr_or("linear", "f1", Expr::constant(0.0)));
        OneVar f2 = one_var(cfg.expr_or("linear", "f2", Expr::constant(0.0)));
        double margin = 0.5 * (t1 - t0) + 0.1;
        sol = lp.general(f1, f2, {x0 - margin, x1 + margin, t0 - margin, t1 + margin});
    }

    bool ok = true;
    double fd_h = cfg.number_or("grid", "fd_h", 1e-3);
    int order = cfg.integer_or("grid", "fd_order", 4);
    int n = cfg.integer_or("grid", "n_points", 10);
    std::vector<Point2> pts;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            pts.push_back({x0 + (x1 - x0) * (i + 0.5) / n, t0 + (t1 - t0) * (j + 0.5) / n});
    double res = fd_residual(p, sol, pts, fd_h, order);
    ok &= report(out, "max |fd residual|", res, cfg.number_or("tolerances", "fd", 1e-5));

    // leapfrog cross-check seeded and bounded by the candidate solution
    double dx = cfg.number_or("grid", "dx", 1e-2);
    double amax = 0.0;
    for (const Point2& pt : pts) {
        double u = sol(pt.x, pt.t);
        amax = std::max(amax, std::abs(p.a.eval({{"x", pt.x}, {"t", pt.t}, {"u", u}})));
    }
    double dt = cfg.number_or("grid", "dt", 0.85 * dx / std::max(amax, 1e-8));
    auto phi = [&](double x) { return sol(x, t0); };
    auto psi = [&](double x) { return fd_derivative([&](double t) { return sol(x, t); }, t0, fd_h, 4); };
    auto dphi = [&](double x) { return fd_derivative(phi, x, dx, 4); };
    auto ddphi = [&](double x) { return fd_second(phi, x, dx, 4); };
    GridField fld = leapfrog_solve(p, phi, psi, dphi, ddphi, {x0, x1, t0, t1}, dx, dt, sol);
    Norms norms = compare(fld, sol);
    out << "leapfrog grid: dx = " << fld.dx << ", dt = " << fld.dt << "\n";
    ok &= report(out, "leapfrog vs solution Linf", norms.linf,
                 cfg.number_or("tolerances", "compare", 1e-3));
    out << "leapfrog vs solution L2 = " << norms.l2 << "\n";
    return ok ? 0 : 1;
}

/// Dispatch a named command; returns the exit code.
inline int run_command(const std::string& cmd, const Config& cfg, std::ostream& out) {
    if (cmd == "check") return cmd_check(cfg, out);
    if (cmd == "reduce") return cmd_reduce(cfg, out);
    if (cmd == "family") return cmd_family(cfg, out);
    if (cmd == "linear-general") return cmd_linear_general(cfg, out);
    if (cmd == "linear-ivp") return cmd_linear_ivp(cfg, out);
    if (cmd == "verify") return cmd_verify(cfg, out);
    throw ConfigError("unknown command '" + cmd + "'");
}

}  // namespace hypint::cli
