#pragma once

// Structural conditions for intermediate integrals of
//
//     u_tt - a^2(x,t,u) u_xx = f(x,t,u,ux,ut)
//
// restricted by the first-order constraint u_t = lambda u_x + g with
// lambda = s*a, s in {+1,-1}. Provides the compatibility residual, the
// characteristic determinant test, and the classification of admissible
// right-hand sides by their (ux, ut) monomial pattern.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hypint/expr.hpp"

namespace hypint {

/// Hyperbolic problem: wave speed a(x,t,u) > 0 and right-hand side
/// f(x,t,u,ux,ut).
struct PdeSpec {
    Expr a;
    Expr f;
};

/// Intermediate-integral candidate u_t = lambda u_x + g, lambda = branch * a.
struct Reduction {
    int branch;  // +1 or -1
    Expr g;      // Expr in (x,t,u) only

    Reduction(int branch, Expr g) : branch(branch), g(std::move(g)) {
        if (branch != 1 && branch != -1)
            throw std::invalid_argument("Reduction: branch must be +1 or -1");
        auto vars = this->g.variables();
        if (vars.count("ux") || vars.count("ut"))
            throw std::invalid_argument("Reduction: g must not depend on ux or ut");
    }

    Expr lambda(const PdeSpec& p) const {
        return branch == 1 ? p.a : -p.a;
    }
};

/// Sampling region for "holds for all u_x" checks. The ux interval should
/// include 0 and both signs; the condition is polynomial in ux, so vanishing
/// on >= 3 distinct ux values per (x,t,u) point forces it identically.
struct SampleBox {
    double x_lo, x_hi;
    double t_lo, t_hi;
    double u_lo, u_hi;
    double ux_lo = -1.0, ux_hi = 1.0;
    int nx = 10, nt = 10, nu = 10, nux = 5;

    void check() const {
        if (!(x_lo < x_hi) || !(t_lo < t_hi) || !(u_lo < u_hi) || !(ux_lo < ux_hi))
            throw std::invalid_argument("SampleBox: intervals must be nondegenerate");
        if (nx < 2 || nt < 2 || nu < 2 || nux < 2)
            throw std::invalid_argument("SampleBox: sample counts must be >= 2");
    }
    static double node(double lo, double hi, int i, int n) {
        return lo + (hi - lo) * i / (n - 1);
    }
};

struct Point4 {
    double x, t, u, ux;
};

/// Prepared evaluator for the Theorem-1 compatibility condition. The residual
/// at a point is
///
///   (lam_t + lam lam_x + 2 lam g_u + g lam_u) ux + 2 lam lam_u ux^2
///     + g_t + lam g_x + g g_u - f|_{ut = lam ux + g}
///
/// which vanishes identically exactly when the reduction is an intermediate
/// integral of the second-order equation.
class Con1Evaluator {
public:
    Con1Evaluator(const PdeSpec& p, const Reduction& r) {
        Expr lam = r.lambda(p);
        Expr g = r.g;
        Expr ux = Expr::variable("ux");
        Expr lin = (lam.diff("t") + lam * lam.diff("x") + 2.0 * lam * g.diff("u") +
                    g * lam.diff("u")) * ux;
        Expr quad = 2.0 * lam * lam.diff("u") * ux * ux;
        Expr zero_order = g.diff("t") + lam * g.diff("x") + g * g.diff("u");
        Expr f_on_manifold = p.f.substitute("ut", lam * ux + g);
        lin_ = lin.simplified();
        quad_ = quad.simplified();
        zero_ = zero_order.simplified();
        f_ = f_on_manifold.simplified();
        residual_ = (lin_ + quad_ + zero_ - f_).simplified();
    }

    double residual(const Point4& pt) const { return residual_.eval(env(pt)); }

    /// 1 + magnitude of the largest term, for scaled tolerance checks.
    double scale(const Point4& pt) const {
        Env e = env(pt);
        double m = std::abs(lin_.eval(e));
        m = std::max(m, std::abs(quad_.eval(e)));
        m = std::max(m, std::abs(zero_.eval(e)));
        m = std::max(m, std::abs(f_.eval(e)));
        return 1.0 + m;
    }

private:
    static Env env(const Point4& pt) {
        return {{"x", pt.x}, {"t", pt.t}, {"u", pt.u}, {"ux", pt.ux}};
    }
    Expr lin_, quad_, zero_, f_, residual_;
};

/// Theorem-1 compatibility residual at one point (see Con1Evaluator).
inline double con1_residual(const PdeSpec& p, const Reduction& r, const Point4& pt) {
    return Con1Evaluator(p, r).residual(pt);
}

struct Con1Report {
    double max_abs = 0.0;       // max |residual| over the box
    double max_scaled = 0.0;    // max |residual| / (1 + largest term)
    Point4 worst{};
};

/// Max compatibility residual over every node of the box.
inline Con1Report max_con1_residual(const PdeSpec& p, const Reduction& r, const SampleBox& box) {
    box.check();
    Con1Evaluator ev(p, r);
    Con1Report rep;
    for (int ix = 0; ix < box.nx; ++ix)
        for (int it = 0; it < box.nt; ++it)
            for (int iu = 0; iu < box.nu; ++iu)
                for (int iux = 0; iux < box.nux; ++iux) {
                    Point4 pt{SampleBox::node(box.x_lo, box.x_hi, ix, box.nx),
                              SampleBox::node(box.t_lo, box.t_hi, it, box.nt),
                              SampleBox::node(box.u_lo, box.u_hi, iu, box.nu),
                              SampleBox::node(box.ux_lo, box.ux_hi, iux, box.nux)};
                    double res = std::abs(ev.residual(pt));
                    if (res > rep.max_abs) {
                        rep.max_abs = res;
                        rep.worst = pt;
                    }
                    rep.max_scaled = std::max(rep.max_scaled, res / ev.scale(pt));
                }
    return rep;
}

struct Point5 {
    double x, t, u, q, p;  // q = u_x, p = u_t
};

/// Characteristic determinant of the (z, r, s) linear system for a scalar
/// constraint F(x,t,u,q,p): expands to a^2 F_p^2 - F_q^2. Zero signals that
/// second derivatives stay underdetermined (the Theorem-1 condition).
inline double det_residual(const Expr& F, double a_val, const Point5& pt) {
    Env env = {{"x", pt.x}, {"t", pt.t}, {"u", pt.u}, {"q", pt.q}, {"p", pt.p}};
    double fp = F.diff("p").eval(env);
    double fq = F.diff("q").eval(env);
    return a_val * a_val * fp * fp - fq * fq;
}

/// Admissible right-hand-side patterns: the monomials in (ux, ut) that f may
/// carry for a reduction to exist, with coefficients in (x,t,u) only.
enum class FForm { F0, F1, F2, F3, F4, F5 };

inline std::string fform_name(FForm f) {
    switch (f) {
    case FForm::F0: return "f0";
    case FForm::F1: return "f1";
    case FForm::F2: return "f2";
    case FForm::F3: return "f3";
    case FForm::F4: return "f4";
    case FForm::F5: return "f5";
    }
    return "?";
}

struct FClassification {
    FForm form;
    /// Named coefficient expressions in (x,t,u), e.g. {"A0", ...}, {"B0", ...}.
    std::vector<std::pair<std::string, Expr>> coefficients;
};

namespace detail {

inline Expr at_origin(const Expr& e) {
    return e.substitute("ux", Expr::constant(0.0))
            .substitute("ut", Expr::constant(0.0))
            .simplified();
}

// max |e| over box samples; ut is sampled over the ux interval (the box
// carries no separate ut axis).
inline double max_abs_on_box(const Expr& e, const SampleBox& box) {
    auto vars = e.variables();
    bool need_ux = vars.count("ux"), need_ut = vars.count("ut");
    double m = 0.0;
    for (int ix = 0; ix < box.nx; ++ix)
        for (int it = 0; it < box.nt; ++it)
            for (int iu = 0; iu < box.nu; ++iu) {
                Env env = {{"x", SampleBox::node(box.x_lo, box.x_hi, ix, box.nx)},
                           {"t", SampleBox::node(box.t_lo, box.t_hi, it, box.nt)},
                           {"u", SampleBox::node(box.u_lo, box.u_hi, iu, box.nu)}};
                int nd = (need_ux || need_ut) ? box.nux : 1;
                for (int i1 = 0; i1 < nd; ++i1)
                    for (int i2 = 0; i2 < (need_ut ? nd : 1); ++i2) {
                        if (need_ux) env["ux"] = SampleBox::node(box.ux_lo, box.ux_hi, i1, box.nux);
                        if (need_ut) env["ut"] = SampleBox::node(box.ux_lo, box.ux_hi, i2, box.nux);
                        m = std::max(m, std::abs(e.eval(env)));
                    }
            }
    return m;
}

}  // namespace detail

/// Detect which admissible monomial pattern (f0)-(f5) the right-hand side
/// matches on the box. Third-order and pattern-excluded partials in (ux, ut)
/// must vanish to 1e-9 relative at every sample; returns the first matching
/// tag with its extracted coefficient expressions, or nullopt.
inline std::optional<FClassification> classify_f(const PdeSpec& p, const SampleBox& box) {
    box.check();
    const Expr& f = p.f;
    Expr fx = f.diff("ux"), ft = f.diff("ut");
    Expr fxx = fx.diff("ux"), fxt = fx.diff("ut"), ftt = ft.diff("ut");

    double f_scale = 1.0 + detail::max_abs_on_box(f, box);
    const double tol = 1e-9 * f_scale;
    auto vanishes = [&](const Expr& e) { return detail::max_abs_on_box(e, box) <= tol; };

    // cubic or higher terms in (ux, ut) rule out every admissible form
    for (const Expr& third : {fxx.diff("ux"), fxx.diff("ut"), fxt.diff("ut"), ftt.diff("ut")})
        if (!vanishes(third)) return std::nullopt;

    Expr A = detail::at_origin(f);
    Expr bx = detail::at_origin(fx);
    Expr bt = detail::at_origin(ft);
    Expr cxx = detail::at_origin(fxx * 0.5);
    Expr cxt = detail::at_origin(fxt);
    Expr ctt = detail::at_origin(ftt * 0.5);

    bool z_bx = vanishes(bx), z_bt = vanishes(bt);
    bool z_cxx = vanishes(cxx), z_cxt = vanishes(cxt), z_ctt = vanishes(ctt);

    // Most restrictive patterns first (three-coefficient forms, then the
    // four-coefficient ones), otherwise f5 would be shadowed by f3.
    if (z_bt && z_cxt && z_ctt)                       // A0 + B0 ux + C0 ux^2
        return FClassification{FForm::F0, {{"A0", A}, {"B0", bx}, {"C0", cxx}}};
    if (z_bx && z_cxt && z_ctt)                       // A1 + B1 ut + C1 ux^2
        return FClassification{FForm::F1, {{"A1", A}, {"B1", bt}, {"C1", cxx}}};
    if (z_bx && z_cxx && z_cxt)                       // A2 + B2 ut + C2 ut^2
        return FClassification{FForm::F2, {{"A2", A}, {"B2", bt}, {"C2", ctt}}};
    if (z_bt && z_cxx && z_ctt)                       // A5 + B5 ux + C5 ux ut
        return FClassification{FForm::F5, {{"A5", A}, {"B5", bx}, {"C5", cxt}}};
    if (z_cxx && z_ctt)                               // A3 + B3 ut + C3 ux ut + D3 ux
        return FClassification{FForm::F3, {{"A3", A}, {"B3", bt}, {"C3", cxt}, {"D3", bx}}};
    if (z_cxx && z_cxt)                               // A4 + B4 ux + C4 ut + D4 ut^2
        return FClassification{FForm::F4, {{"A4", A}, {"B4", bx}, {"C4", bt}, {"D4", ctt}}};
    return std::nullopt;
}

}  // namespace hypint
