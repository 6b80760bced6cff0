#pragma once

// General solutions of linear hyperbolic equations
//
//     u_tt - a^2(x,t) u_xx = A u_x + H u + B + G u_t
//
// via the pair of intermediate integrals u_t -+ a u_x = g+- with
// g+ = gamma u + alpha, g- = eta u + beta. Provides the (gamma, eta)
// construction, the structural-condition residuals, transport solvers for
// alpha/beta, closed-form general solutions for the catalogued equations
// (telegraph, variable speed, sol3, EPD, KGF, damped wave), a
// characteristics-based path for everything else, and an initial-value
// solver built on the t=0 splitting ODE.
//
// Superposition convention: u = u1 + u2. Each u_i alone already solves the
// full inhomogeneous equation, so the particular source enters each branch
// with weight 1/2 -- equivalent to averaging (u1+u2)/2 with the arbitrary
// functions rescaled.

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hypint/characteristics.hpp"
#include "hypint/compat.hpp"
#include "hypint/expr.hpp"
#include "hypint/numerics.hpp"
#include "hypint/oracle.hpp"

namespace hypint {

class LinearError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Linear problem: wave speed a(x,t) > 0 and coefficients A, H, B, G in (x,t).
struct LinearSpec {
    Expr a;
    Expr A, H, B, G;
};

using OneVar = std::function<double(double)>;

inline OneVar one_var(const Expr& e) {
    return [e](double v) { return e.eval({{"sigma", v}}); };
}
inline OneVar one_var(double c) {
    return [c](double) { return c; };
}

namespace detail {

inline void require_xt_only(const Expr& e, const char* name) {
    for (const auto& v : e.variables())
        if (v != "x" && v != "t")
            throw LinearError(std::string("linear coefficient ") + name +
                              " must depend on (x,t) only; found '" + v + "'");
}

inline void require_x_only(const Expr& e, const char* name) {
    for (const auto& v : e.variables())
        if (v != "x")
            throw LinearError(std::string(name) + " must be a function of x only; found '" + v +
                              "'");
}

inline std::function<double(double, double)> xt_fn(const Expr& e) {
    return [e](double x, double t) { return e.eval({{"x", x}, {"t", t}}); };
}

}  // namespace detail

inline void check_linear_spec(const LinearSpec& s) {
    detail::require_xt_only(s.a, "a");
    detail::require_xt_only(s.A, "A");
    detail::require_xt_only(s.H, "H");
    detail::require_xt_only(s.B, "B");
    detail::require_xt_only(s.G, "G");
}

/// Right-hand side f = A ux + H u + B + G ut as a PdeSpec.
inline PdeSpec linear_pde(const LinearSpec& s) {
    check_linear_spec(s);
    Expr f = s.A * Expr::variable("ux") + s.H * Expr::variable("u") + s.B +
             s.G * Expr::variable("ut");
    return {s.a, f.simplified()};
}

/// gamma = (A + aG - (a_t + a a_x))/(2a), eta = -(A - aG + (a_t - a a_x))/(2a).
inline std::pair<Expr, Expr> gamma_eta(const LinearSpec& s) {
    check_linear_spec(s);
    Expr at = s.a.diff("t"), ax = s.a.diff("x");
    Expr gamma = (s.A + s.a * s.G - (at + s.a * ax)) / (2.0 * s.a);
    Expr eta = Expr::constant(0.0) - (s.A - s.a * s.G + (at - s.a * ax)) / (2.0 * s.a);
    return {gamma.simplified(), eta.simplified()};
}

/// Both reductions with alpha = beta = 0 (valid when B vanishes identically).
inline std::pair<Reduction, Reduction> linear_reductions(const LinearSpec& s) {
    if (!s.B.simplified().is_constant(0.0))
        throw LinearError("linear_reductions: closed-form g needs B = 0 (alpha, beta are fields otherwise)");
    auto [gamma, eta] = gamma_eta(s);
    Expr u = Expr::variable("u");
    return {Reduction(1, (gamma * u).simplified()), Reduction(-1, (eta * u).simplified())};
}

struct Grid2 {
    double x_lo, x_hi, t_lo, t_hi;
    int nx = 20, nt = 20;
};

struct StructuralReport {
    double gamma_max = 0.0;  // max |gamma_t + a gamma_x - (H + G gamma - gamma^2)|
    double eta_max = 0.0;    // max |eta_t   - a eta_x   - (H + G eta   - eta^2)|
};

/// Max residuals of the two structural conditions over the grid.
inline StructuralReport structural_residual(const LinearSpec& s, const Grid2& grid) {
    auto [gamma, eta] = gamma_eta(s);
    Expr rg = gamma.diff("t") + s.a * gamma.diff("x") - (s.H + s.G * gamma - gamma * gamma);
    Expr re = eta.diff("t") - s.a * eta.diff("x") - (s.H + s.G * eta - eta * eta);
    auto fg = detail::xt_fn(rg.simplified());
    auto fe = detail::xt_fn(re.simplified());
    StructuralReport rep;
    for (int i = 0; i < grid.nx; ++i)
        for (int j = 0; j < grid.nt; ++j) {
            double x = grid.x_lo + (grid.x_hi - grid.x_lo) * i / (grid.nx - 1);
            double t = grid.t_lo + (grid.t_hi - grid.t_lo) * j / (grid.nt - 1);
            rep.gamma_max = std::max(rep.gamma_max, std::abs(fg(x, t)));
            rep.eta_max = std::max(rep.eta_max, std::abs(fe(x, t)));
        }
    return rep;
}

enum class TransportBranch { Plus, Minus };

/// Integrate alpha_t + a alpha_x = B + (G - gamma) alpha (Plus) or
/// beta_t - a beta_x = B + (G - eta) beta (Minus) along characteristics from
/// `profile` on t = t_start; returns the evaluable field.
inline Evaluator solve_transport(const LinearSpec& s, TransportBranch which, const Expr& source,
                                 const InitialData& profile, double t_end, int n_sigma,
                                 double h_t) {
    check_linear_spec(s);
    auto [gamma, eta] = gamma_eta(s);
    Expr rate = which == TransportBranch::Plus ? (s.G - gamma) : (s.G - eta);
    Expr g = (source + rate * Expr::variable("u")).simplified();
    // alpha_t + a alpha_x = ... reads u_t - (-a) u_x = g; the Minus branch
    // rides the +a characteristics.
    Expr lam = which == TransportBranch::Plus ? (Expr::constant(0.0) - s.a).simplified() : s.a;
    CharStrip strip = integrate_characteristics(make_field3(lam), make_field3(g), profile,
                                                t_end, n_sigma, h_t);
    auto sp = std::make_shared<CharStrip>(std::move(strip));
    Box2 box{profile.x_lo, profile.x_hi, std::min(profile.t_start, t_end),
             std::max(profile.t_start, t_end)};
    return {[sp](double x, double t) { return eval_solution(*sp, x, t); }, box};
}

// ---------------------------------------------------------------------------
// Catalogued closed forms. Arbitrary functions are passed as callables of the
// characteristic variable printed in the formula.
// ---------------------------------------------------------------------------

/// u_tt = c^2 u_xx + q1 u_t - (q1^2/4) u (q1 constant).
inline LinearSpec telegraph_spec(double c, double q1) {
    return {Expr::constant(c), Expr::constant(0.0), Expr::constant(-q1 * q1 / 4.0),
            Expr::constant(0.0), Expr::constant(q1)};
}

/// u = f1(xi) e^{-q1 sigma/(4c)} + f2(sigma) e^{q1 xi/(4c)}, sigma = x - ct,
/// xi = x + ct.
inline Evaluator telegraph_general(double c, double q1, OneVar f1, OneVar f2, Box2 box) {
    if (!(c > 0.0)) throw LinearError("telegraph: speed c must be positive");
    return {[=](double x, double t) {
                double sigma = x - c * t, xi = x + c * t;
                return f1(xi) * std::exp(-q1 * sigma / (4.0 * c)) +
                       f2(sigma) * std::exp(q1 * xi / (4.0 * c));
            },
            box};
}

/// u_tt = a(x) u_xx + a' u_x - c(x) u + h0(x) e^{-k0 t} with c from the
/// structural condition: c = -a''/4 + (a'/(4 sqrt a))^2.
inline LinearSpec varspeed_spec(const Expr& a_of_x, const Expr& h0_of_x, double k0) {
    detail::require_xt_only(a_of_x, "a(x)");
    Expr speed = Expr::unary(UnaryOp::Sqrt, a_of_x);
    Expr ap = a_of_x.diff("x");
    Expr c = Expr::constant(-0.25) * ap.diff("x") +
             Expr::pow(ap / (4.0 * speed), 2.0);
    Expr B = h0_of_x * Expr::unary(UnaryOp::Exp, Expr::constant(-k0) * Expr::variable("t"));
    return {speed.simplified(), ap.simplified(), (Expr::constant(0.0) - c).simplified(),
            B.simplified(), Expr::constant(0.0)};
}

struct VarspeedOptions {
    double x_ref = 1.0;      // lower limit of every x-quadrature
    double quad_tol = 1e-10;
    bool include_particular = true;
};

/// (s6): u = a^{-1/4} [ (h1(x)/2) e^{-k0 sigma} + f1(sigma)
///                    + (h2(x)/2) e^{-k0 xi}    + f2(xi) ],
/// sigma = t + P(x), xi = t - P(x), P = integral dx/sqrt(a). The 1/2 on the
/// particular terms is the superposition weight (see header comment).
inline Evaluator varspeed_general(const Expr& a_of_x, double k0, const Expr& h0_of_x,
                                  OneVar f1, OneVar f2, Box2 box, VarspeedOptions opt = {}) {
    auto a = detail::xt_fn(a_of_x);
    auto h0 = detail::xt_fn(h0_of_x);
    bool with_h = opt.include_particular && !h0_of_x.simplified().is_constant(0.0);
    double tol = opt.quad_tol;
    auto P = [=](double x) {
        return integrate_simpson([&](double s) { return 1.0 / std::sqrt(a(s, 0.0)); },
                                 opt.x_ref, x, 0.01 * tol);
    };
    auto inner = [=](double x, int sign) {  // integral h0 a^{-1/4} e^{-sign k0 P} dx
        return integrate_simpson(
            [&](double s) {
                return h0(s, 0.0) * std::pow(a(s, 0.0), -0.25) * std::exp(-sign * k0 * P(s));
            },
            opt.x_ref, x, 0.1 * tol);
    };
    auto h12 = [=](double x, int sign) {  // h1 for sign=+1, h2 for sign=-1
        return -integrate_simpson(
            [&](double s) {
                return std::exp(sign * 2.0 * k0 * P(s)) / std::sqrt(a(s, 0.0)) * inner(s, sign);
            },
            opt.x_ref, x, tol);
    };
    return {[=](double x, double t) {
                double Px = P(x);
                double sigma = t + Px, xi = t - Px;
                double u = f1(sigma) + f2(xi);
                if (with_h)
                    u += 0.5 * h12(x, +1) * std::exp(-k0 * sigma) +
                         0.5 * h12(x, -1) * std::exp(-k0 * xi);
                return std::pow(a(x, 0.0), -0.25) * u;
            },
            box};
}

/// a(x) = c0 x^{4/3} specialization with its printed general solution.
inline LinearSpec sol3_spec(double c0) {
    Expr a = Expr::constant(c0) * Expr::pow(Expr::variable("x"), 4.0 / 3.0);
    return varspeed_spec(a, Expr::constant(0.0), 0.0);
}

/// (sol3): u = x^{-1/3} (f1(sigma) + f2(xi)), sigma = t + 3 x^{1/3}/sqrt(c0),
/// xi = t - 3 x^{1/3}/sqrt(c0). Valid on x > 0.
inline Evaluator sol3_general(double c0, OneVar f1, OneVar f2, Box2 box) {
    if (!(c0 > 0.0)) throw LinearError("sol3: c0 must be positive");
    double r = 3.0 / std::sqrt(c0);
    return {[=](double x, double t) {
                if (!(x > 0.0)) throw LinearError("sol3: valid on x > 0");
                double cbrt = std::cbrt(x);
                return (f1(t + r * cbrt) + f2(t - r * cbrt)) / cbrt;
            },
            box};
}

/// u_tt - u_xx = (alpha0/x) u_x + h(x,t); alpha0 must be 0 or 2.
inline LinearSpec epd_spec(double alpha0, const Expr& h_xt) {
    return {Expr::constant(1.0), Expr::constant(alpha0) / Expr::variable("x"),
            Expr::constant(0.0), h_xt, Expr::constant(0.0)};
}

struct EpdOptions {
    double sigma_ref = 0.0, xi_ref = 0.0;  // lower limits of the double quadrature
    double quad_tol = 1e-10;
    bool include_particular = true;
};

/// EPD final formula with sigma = x - t, xi = x + t (so sigma + xi = 2x):
/// u = (sigma+xi)^{-alpha0/2} (f1(xi) + f2(sigma)) + particular(h/2 per branch).
inline Evaluator epd_general(double alpha0, const Expr& h_xt, OneVar f1, OneVar f2, Box2 box,
                             EpdOptions opt = {}) {
    if (alpha0 != 0.0 && alpha0 != 2.0)
        throw LinearError("epd: structural conditions require alpha0 = 0 or alpha0 = 2");
    auto h = detail::xt_fn(h_xt);
    bool with_h = opt.include_particular && !h_xt.simplified().is_constant(0.0);
    double tol = opt.quad_tol;
    double p = alpha0 / 2.0;
    auto weight = [p](double s, double xi) { return std::pow(s + xi, p); };
    auto h_cc = [=](double s, double xi) {  // h in characteristic coordinates
        return h(0.5 * (s + xi), 0.5 * (xi - s));
    };
    // alpha-side: inner over xi' at fixed sigma', outer over sigma'
    auto part1 = [=](double sigma, double xi) {
        return -0.25 * integrate_simpson(
                           [&](double sp) {
                               return integrate_simpson(
                                   [&](double xp) { return 0.5 * h_cc(sp, xp) * weight(sp, xp); },
                                   opt.xi_ref, xi, 0.1 * tol);
                           },
                           opt.sigma_ref, sigma, tol);
    };
    // beta-side: inner over sigma' at fixed xi', outer over xi'
    auto part2 = [=](double sigma, double xi) {
        return -0.25 * integrate_simpson(
                           [&](double xp) {
                               return integrate_simpson(
                                   [&](double sp) { return 0.5 * h_cc(sp, xp) * weight(sp, xp); },
                                   opt.sigma_ref, sigma, 0.1 * tol);
                           },
                           opt.xi_ref, xi, tol);
    };
    return {[=](double x, double t) {
                double sigma = x - t, xi = x + t;
                if (!(sigma + xi > 0.0)) throw LinearError("epd: valid on x > 0");
                double u = f1(xi) + f2(sigma);
                if (with_h) u += part1(sigma, xi) + part2(sigma, xi);
                return std::pow(sigma + xi, -p) * u;
            },
            box};
}

/// Klein-Gordon-Fock with central symmetry:
/// u_tt - u_xx = (c0/x) u_x - (k0/x^2) u, k0 = c0/2 - c0^2/4 enforced.
inline LinearSpec kgf_spec(double c0, std::optional<double> k0 = std::nullopt) {
    double k = c0 / 2.0 - c0 * c0 / 4.0;
    if (k0 && std::abs(*k0 - k) > 1e-12 * (1.0 + std::abs(k)))
        throw LinearError("kgf: constraint violated, k0 must equal c0/2 - c0^2/4 = " +
                          std::to_string(k));
    Expr x = Expr::variable("x");
    return {Expr::constant(1.0), Expr::constant(c0) / x,
            (Expr::constant(-k) / (x * x)).simplified(), Expr::constant(0.0),
            Expr::constant(0.0)};
}

/// u = x^{-c0/2} (f1(xi) + f2(sigma)), sigma = x - t, xi = x + t.
inline Evaluator kgf_general(double c0, OneVar f1, OneVar f2, Box2 box) {
    return {[=](double x, double t) {
                if (!(x > 0.0)) throw LinearError("kgf: valid on x > 0");
                return std::pow(x, -c0 / 2.0) * (f1(x + t) + f2(x - t));
            },
            box};
}

/// Damped wave u_tt - u_xx = -c0 u_t - (c0^2/4) u + h0(x,t).
inline LinearSpec damped_spec(double c0, const Expr& h0_xt) {
    return {Expr::constant(1.0), Expr::constant(0.0), Expr::constant(-c0 * c0 / 4.0), h0_xt,
            Expr::constant(-c0)};
}

struct DampedOptions {
    double sigma_ref = 0.0, xi_ref = 0.0;
    double quad_tol = 1e-10;
    bool include_particular = true;
};

/// Damped-wave final formula with sigma = x + t, xi = x - t:
/// u = e^{c0 xi/4} f1(sigma) + e^{-c0 sigma/4} f2(xi) + particular(h0/2 per
/// branch), the particular built from the printed alpha/beta quadratures.
inline Evaluator damped_general(double c0, const Expr& h0_xt, OneVar f1, OneVar f2, Box2 box,
                                DampedOptions opt = {}) {
    auto h0 = detail::xt_fn(h0_xt);
    bool with_h = opt.include_particular && !h0_xt.simplified().is_constant(0.0);
    double tol = opt.quad_tol;
    auto h_cc = [=](double s, double xi) {  // x = (s+xi)/2, t = (s-xi)/2
        return h0(0.5 * (s + xi), 0.5 * (s - xi));
    };
    // alpha(s, xi) = e^{-c0 s/4} integral_{sref}^{s} (h0/2)(s', xi) e^{c0 s'/4} ds' (weighted 1/2)
    auto alpha = [=](double s, double xi) {
        return std::exp(-0.25 * c0 * s) *
               integrate_simpson(
                   [&](double sp) { return 0.25 * h_cc(sp, xi) * std::exp(0.25 * c0 * sp); },
                   opt.sigma_ref, s, 0.1 * tol);
    };
    auto beta = [=](double s, double xi) {
        return std::exp(0.25 * c0 * xi) *
               -integrate_simpson(
                   [&](double xp) { return 0.25 * h_cc(s, xp) * std::exp(-0.25 * c0 * xp); },
                   opt.xi_ref, xi, 0.1 * tol);
    };
    auto u1p = [=](double s, double xi) {
        return std::exp(0.25 * c0 * xi) *
               -integrate_simpson(
                   [&](double xp) { return 0.5 * alpha(s, xp) * std::exp(-0.25 * c0 * xp); },
                   opt.xi_ref, xi, tol);
    };
    auto u2p = [=](double s, double xi) {
        return std::exp(-0.25 * c0 * s) *
               integrate_simpson(
                   [&](double sp) { return 0.5 * beta(sp, xi) * std::exp(0.25 * c0 * sp); },
                   opt.sigma_ref, s, tol);
    };
    return {[=](double x, double t) {
                double sigma = x + t, xi = x - t;
                double u = std::exp(0.25 * c0 * xi) * f1(sigma) +
                           std::exp(-0.25 * c0 * sigma) * f2(xi);
                if (with_h) u += u1p(sigma, xi) + u2p(sigma, xi);
                return u;
            },
            box};
}

// ---------------------------------------------------------------------------
// Characteristics path for non-catalogued specs and initial-value problems.
// ---------------------------------------------------------------------------

struct NumericOptions {
    int n_sigma = 801;
    double h_t = 1e-3;
    double x_pad = 0.75;   // widen the launch interval beyond the query box
    double t_back = 0.0;   // also integrate to negative t (for FD probes)
    bool include_particular = true;
};

namespace detail {

// evaluable u-component made of a forward and optional backward strip
struct TwoWayStrip {
    std::shared_ptr<CharStrip> fwd, back;
    double t0;
    double operator()(double x, double t) const {
        if (t >= t0 || !back) return eval_solution(*fwd, x, t);
        return eval_solution(*back, x, t);
    }
};

inline TwoWayStrip evolve_reduction(const Expr& lam, Field3 g, const InitialData& init,
                                    double t_end, const NumericOptions& opt) {
    TwoWayStrip out;
    out.t0 = init.t_start;
    out.fwd = std::make_shared<CharStrip>(
        integrate_characteristics(make_field3(lam), g, init, t_end, opt.n_sigma, opt.h_t));
    if (opt.t_back > 0.0)
        out.back = std::make_shared<CharStrip>(integrate_characteristics(
            make_field3(lam), g, init, init.t_start - opt.t_back, opt.n_sigma, opt.h_t));
    return out;
}

}  // namespace detail

/// Characteristics path: u1 evolves u_t - a u_x = gamma u + alpha from the
/// t=0 profile f1, u2 evolves u_t + a u_x = eta u + beta from f2; returns
/// u = u1 + u2. With B != 0 the transports alpha, beta are solved with source
/// B/2 each (superposition weight).
inline Evaluator general_solution_numeric(const LinearSpec& s, OneVar f1, OneVar f2, Box2 box,
                                          NumericOptions opt = {}) {
    check_linear_spec(s);
    auto [gamma, eta] = gamma_eta(s);
    double x_lo = box.x_lo - opt.x_pad, x_hi = box.x_hi + opt.x_pad;
    bool with_b = opt.include_particular && !s.B.simplified().is_constant(0.0);

    std::function<double(double, double)> alpha = [](double, double) { return 0.0; };
    std::function<double(double, double)> beta = alpha;
    if (with_b) {
        Expr half_b = (Expr::constant(0.5) * s.B).simplified();
        InitialData zero{[](double) { return 0.0; }, x_lo - opt.x_pad, x_hi + opt.x_pad, 0.0};
        double t_end = box.t_hi + opt.h_t;
        Evaluator af = solve_transport(s, TransportBranch::Plus, half_b, zero, t_end,
                                       opt.n_sigma, opt.h_t);
        Evaluator bf = solve_transport(s, TransportBranch::Minus, half_b, zero, t_end,
                                       opt.n_sigma, opt.h_t);
        if (opt.t_back > 0.0) {
            Evaluator ab = solve_transport(s, TransportBranch::Plus, half_b, zero,
                                           -opt.t_back - opt.h_t, opt.n_sigma, opt.h_t);
            Evaluator bb = solve_transport(s, TransportBranch::Minus, half_b, zero,
                                           -opt.t_back - opt.h_t, opt.n_sigma, opt.h_t);
            alpha = [af, ab](double x, double t) { return t >= 0.0 ? af(x, t) : ab(x, t); };
            beta = [bf, bb](double x, double t) { return t >= 0.0 ? bf(x, t) : bb(x, t); };
        } else {
            alpha = [af](double x, double t) { return af(x, t); };
            beta = [bf](double x, double t) { return bf(x, t); };
        }
    }

    auto gamma_fn = detail::xt_fn(gamma), eta_fn = detail::xt_fn(eta);
    Field3 g1 = [gamma_fn, alpha](double x, double t, double u) {
        return gamma_fn(x, t) * u + alpha(x, t);
    };
    Field3 g2 = [eta_fn, beta](double x, double t, double u) {
        return eta_fn(x, t) * u + beta(x, t);
    };
    InitialData d1{f1, x_lo, x_hi, 0.0}, d2{f2, x_lo, x_hi, 0.0};
    auto u1 = detail::evolve_reduction(s.a, g1, d1, box.t_hi, opt);
    auto u2 = detail::evolve_reduction((Expr::constant(0.0) - s.a).simplified(), g2, d2,
                                       box.t_hi, opt);
    Box2 cover{box.x_lo, box.x_hi, opt.t_back > 0.0 ? -opt.t_back : 0.0, box.t_hi};
    return {[u1, u2](double x, double t) { return u1(x, t) + u2(x, t); }, cover};
}

/// Initial data u(x,0) = phi, u_t(x,0) = psi on [x_lo, x_hi].
struct IvpData {
    Expr phi, psi;  // Exprs in x
    double x_lo, x_hi;
};

struct IvpOptions {
    int n_sigma = 801;
    double h_t = 1e-3;
    double t_back = 0.05;  // backward extension so u_t(x,0) can be probed centrally
    std::optional<double> left_anchor;  // w(x_lo); default phi(x_lo)/2
    bool include_particular = true;
};

/// Split (phi, psi) between the two reductions by the t=0 ODE
///
///   2 a w' + (gamma - eta) w = psi + a phi' - eta phi - alpha - beta,
///
/// the unique splitting with u = u1 + u2, u1(.,0) = w, u2(.,0) = phi - w (the
/// left anchor shifts content between u1 and u2 without changing u). Then
/// evolve both reductions along characteristics.
inline Evaluator solve_ivp(const LinearSpec& s, const IvpData& data, double t_end,
                           IvpOptions opt = {}) {
    check_linear_spec(s);
    detail::require_x_only(data.phi, "phi");
    detail::require_x_only(data.psi, "psi");
    auto [gamma, eta] = gamma_eta(s);
    auto a_fn = detail::xt_fn(s.a);
    auto gamma_fn = detail::xt_fn(gamma), eta_fn = detail::xt_fn(eta);
    auto phi = detail::xt_fn(data.phi), psi = detail::xt_fn(data.psi);
    auto dphi = detail::xt_fn(data.phi.diff("x"));

    std::function<double(double, double)> alpha = [](double, double) { return 0.0; };
    std::function<double(double, double)> beta = alpha;
    bool with_b = opt.include_particular && !s.B.simplified().is_constant(0.0);
    if (with_b) {
        Expr half_b = (Expr::constant(0.5) * s.B).simplified();
        double pad = 0.5 * (data.x_hi - data.x_lo);
        InitialData zero{[](double) { return 0.0; }, data.x_lo - pad, data.x_hi + pad, 0.0};
        Evaluator af = solve_transport(s, TransportBranch::Plus, half_b, zero, t_end + opt.h_t,
                                       opt.n_sigma, opt.h_t);
        Evaluator bf = solve_transport(s, TransportBranch::Minus, half_b, zero, t_end + opt.h_t,
                                       opt.n_sigma, opt.h_t);
        Evaluator ab = solve_transport(s, TransportBranch::Plus, half_b, zero,
                                       -opt.t_back - opt.h_t, opt.n_sigma, opt.h_t);
        Evaluator bb = solve_transport(s, TransportBranch::Minus, half_b, zero,
                                       -opt.t_back - opt.h_t, opt.n_sigma, opt.h_t);
        alpha = [af, ab](double x, double t) { return t >= 0.0 ? af(x, t) : ab(x, t); };
        beta = [bf, bb](double x, double t) { return t >= 0.0 ? bf(x, t) : bb(x, t); };
    }

    // RK4 march of the splitting ODE across the x-grid, dense Hermite output
    int n = opt.n_sigma;
    double dx = (data.x_hi - data.x_lo) / (n - 1);
    auto rhs = [&](double x, double w) {
        double a = a_fn(x, 0.0);
        if (!(a > 0.0)) throw LinearError("solve_ivp: a(x,0) must be positive");
        double num = psi(x, 0.0) + a * dphi(x, 0.0) - eta_fn(x, 0.0) * phi(x, 0.0) -
                     alpha(x, 0.0) - beta(x, 0.0) - (gamma_fn(x, 0.0) - eta_fn(x, 0.0)) * w;
        return num / (2.0 * a);
    };
    auto wgrid = std::make_shared<std::vector<double>>(n);
    auto wdot = std::make_shared<std::vector<double>>(n);
    (*wgrid)[0] = opt.left_anchor ? *opt.left_anchor : 0.5 * phi(data.x_lo, 0.0);
    (*wdot)[0] = rhs(data.x_lo, (*wgrid)[0]);
    for (int i = 0; i + 1 < n; ++i) {
        double x = data.x_lo + dx * i, w = (*wgrid)[i];
        double k1 = rhs(x, w);
        double k2 = rhs(x + 0.5 * dx, w + 0.5 * dx * k1);
        double k3 = rhs(x + 0.5 * dx, w + 0.5 * dx * k2);
        double k4 = rhs(x + dx, w + dx * k3);
        double next = w + dx / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        if (!std::isfinite(next))
            throw LinearError("solve_ivp: splitting ODE blew up near x = " + std::to_string(x));
        (*wgrid)[i + 1] = next;
        (*wdot)[i + 1] = rhs(x + dx, next);
    }
    double x_lo = data.x_lo;
    auto w_of_x = [wgrid, wdot, x_lo, dx, n](double x) {
        double z = (x - x_lo) / dx;
        auto i = static_cast<long>(std::floor(z));
        i = std::clamp<long>(i, 0, n - 2);
        double s = z - static_cast<double>(i);
        double y0 = (*wgrid)[i], y1 = (*wgrid)[i + 1];
        double d0 = (*wdot)[i] * dx, d1 = (*wdot)[i + 1] * dx;
        double s2 = s * s, s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * d0 +
               (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * d1;
    };

    Field3 g1 = [gamma_fn, alpha](double x, double t, double u) {
        return gamma_fn(x, t) * u + alpha(x, t);
    };
    Field3 g2 = [eta_fn, beta](double x, double t, double u) {
        return eta_fn(x, t) * u + beta(x, t);
    };
    NumericOptions evo;
    evo.n_sigma = opt.n_sigma;
    evo.h_t = opt.h_t;
    evo.t_back = opt.t_back;
    InitialData d1{w_of_x, data.x_lo, data.x_hi, 0.0};
    InitialData d2{[=](double x) { return phi(x, 0.0) - w_of_x(x); }, data.x_lo, data.x_hi, 0.0};
    auto u1 = detail::evolve_reduction(s.a, g1, d1, t_end, evo);
    auto u2 = detail::evolve_reduction((Expr::constant(0.0) - s.a).simplified(), g2, d2,
                                       t_end, evo);
    Box2 cover{data.x_lo, data.x_hi, -opt.t_back, t_end};
    return {[u1, u2](double x, double t) { return u1(x, t) + u2(x, t); }, cover};
}

}  // namespace hypint
