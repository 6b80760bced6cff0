#pragma once

// Closed-form solution catalog for the quasilinear wave equation
//
//     u_tt - a^2(u) u_xx = 2 a a'(u) ux^2 + Phi(u) ux + h(x,t) + q(u)
//
// and its named special cases: per-family parameter validators, reduction
// pairs (lambda, g), and evaluators u(x, t) that resolve the printed implicit
// relations with bracketed Newton (1e-12) and adaptive Simpson (1e-10)
// quadratures. Integration-constant conventions left open by the closed forms
// (lower quadrature limits, the constant in phi) are fixed at 0 so outputs
// are reproducible; the constants are absorbed by the arbitrary functions.

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypint/compat.hpp"
#include "hypint/expr.hpp"
#include "hypint/numerics.hpp"

namespace hypint {

class FamilyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class FamilyId {
    E1CaseI,             // g = -1/(sqrt(a) gamma0 t), alpha0 = 0 specialization
    E1CaseII,            // g = k1, Phi = k1 a'(u)
    E1CaseIII12,         // g = k0/sqrt(a), q = (k0^2/2) (1/a)'
    E1CaseIII11,         // g = G(x,t)/sqrt(a); explicit solution when alpha0=alpha2=gamma2=0
    SimpleWave,          // u = u0(xi), xi = x + a(u0(xi)) t
    E5,                  // u_tt = u^2 u_xx - u_t + (2/u) u_t^2
    E6Minus,             // u = u0(x-ct) exp(+Q(x)/(2c))
    E6Plus,              // u = u0(x+ct) exp(-Q(x)/(2c))
    ConstantAstigmatism  // reduction only: lambda = 1/u, g = 2 sqrt(u)
};

inline const std::vector<std::pair<FamilyId, std::string>>& family_names() {
    static const std::vector<std::pair<FamilyId, std::string>> names = {
        {FamilyId::E1CaseI, "e1-case-i"},
        {FamilyId::E1CaseII, "e1-case-ii"},
        {FamilyId::E1CaseIII12, "e1-case-iii-12"},
        {FamilyId::E1CaseIII11, "e1-case-iii-11"},
        {FamilyId::SimpleWave, "simple-wave"},
        {FamilyId::E5, "e5"},
        {FamilyId::E6Minus, "e6-minus"},
        {FamilyId::E6Plus, "e6-plus"},
        {FamilyId::ConstantAstigmatism, "constant-astigmatism"},
    };
    return names;
}

inline std::string family_name(FamilyId id) {
    for (auto& [fid, name] : family_names())
        if (fid == id) return name;
    throw FamilyError("unknown family id");
}

inline std::optional<FamilyId> family_from_name(const std::string& name) {
    for (auto& [fid, fname] : family_names())
        if (fname == name) return fid;
    return std::nullopt;
}

/// Named real constants plus named expressions, exactly the ones the family
/// demands. Constant names: alpha0..2, beta0..2, gamma0..2, c, c0..2, k0, k1,
/// t0, h0. Function names: a(u), Phi(u), q(u), q1(x), q2(x), u0(sigma).
struct FamilyParams {
    std::map<std::string, double> constants;
    std::map<std::string, Expr> functions;

    double constant(const std::string& name) const {
        auto it = constants.find(name);
        if (it == constants.end())
            throw FamilyError("missing required constant '" + name + "'");
        return it->second;
    }
    const Expr& function(const std::string& name) const {
        auto it = functions.find(name);
        if (it == functions.end())
            throw FamilyError("missing required function '" + name + "'");
        return it->second;
    }
    bool has(const std::string& name) const {
        return constants.count(name) || functions.count(name);
    }
};

struct FamilyInfo {
    FamilyId id;
    std::string name;
    std::vector<std::string> required_constants;
    std::vector<std::string> required_functions;
    std::string pde;  // governing equation, human-readable
};

inline std::vector<FamilyInfo> list_families() {
    return {
        {FamilyId::E1CaseI, "e1-case-i", {"beta0", "gamma0", "t0"}, {"a", "u0"},
         "u_tt = a^2(u) u_xx + 2 a a' ux^2 + beta0/(gamma0 t)^2"},
        {FamilyId::E1CaseII, "e1-case-ii", {"k1"}, {"a", "Phi", "u0"},
         "u_tt = a^2(u) u_xx + 2 a a' ux^2 + Phi(u) ux,  Phi = k1 a'"},
        {FamilyId::E1CaseIII12, "e1-case-iii-12", {"k0"}, {"a", "q", "u0"},
         "u_tt = a^2(u) u_xx + 2 a a' ux^2 + q(u),  q = (k0^2/2) d(1/a)/du"},
        {FamilyId::E1CaseIII11, "e1-case-iii-11",
         {"alpha0", "alpha1", "alpha2", "gamma0", "gamma1", "gamma2", "c1"}, {"u0"},
         "u_tt = a^2(u) u_xx + 2 a a' ux^2 + q(u) with a, q from the Riccati branch"},
        {FamilyId::SimpleWave, "simple-wave", {}, {"a", "u0"},
         "u_tt = d/dx(a^2(u) ux)"},
        {FamilyId::E5, "e5", {}, {"u0"},
         "u_tt = u^2 u_xx - u_t + (2/u) u_t^2"},
        {FamilyId::E6Minus, "e6-minus", {"c"}, {"q1", "u0"},
         "u_tt = c^2 u_xx + q1(x) u_t + q2(x) u,  q2 = -c q1'/2 - q1^2/4"},
        {FamilyId::E6Plus, "e6-plus", {"c"}, {"q1", "u0"},
         "u_tt = c^2 u_xx + q1(x) u_t + q2(x) u,  q2 = +c q1'/2 - q1^2/4"},
        {FamilyId::ConstantAstigmatism, "constant-astigmatism", {}, {},
         "u_tt = (1/u^2) u_xx - (2/u^3) ux^2 + 2"},
    };
}

namespace detail {

inline Expr var_u() { return Expr::variable("u"); }
inline Expr var_x() { return Expr::variable("x"); }
inline Expr var_t() { return Expr::variable("t"); }
inline Expr var_ux() { return Expr::variable("ux"); }
inline Expr var_ut() { return Expr::variable("ut"); }

// quasilinear right-hand side 2 a a'(u) ux^2 + extra
inline Expr quasilinear_f(const Expr& a_of_u, const Expr& extra) {
    return (2.0 * a_of_u * a_of_u.diff("u")) * var_ux() * var_ux() + extra;
}

inline std::function<double(double)> make_fn1(const Expr& e, const std::string& var) {
    return [e, var](double v) { return e.eval({{var, v}}); };
}

// E6 source coefficient q2(x) = s*c*q1'/2 - q1^2/4
inline Expr e6_q2(const Expr& q1, double c, int s) {
    return Expr::constant(s * c * 0.5) * q1.diff("x") - q1 * q1 * 0.25;
}

}  // namespace detail

/// Governing PdeSpec of a family with its parameters bound.
inline PdeSpec family_pde(FamilyId id, const FamilyParams& prm) {
    using namespace detail;
    switch (id) {
    case FamilyId::E1CaseI: {
        Expr a = prm.function("a");
        double b0 = prm.constant("beta0"), g0 = prm.constant("gamma0");
        Expr h = Expr::constant(b0) / Expr::pow(Expr::constant(g0) * var_t(), 2.0);
        return {a, quasilinear_f(a, h)};
    }
    case FamilyId::E1CaseII: {
        Expr a = prm.function("a");
        return {a, quasilinear_f(a, prm.function("Phi") * var_ux())};
    }
    case FamilyId::E1CaseIII12: {
        Expr a = prm.function("a");
        return {a, quasilinear_f(a, prm.function("q"))};
    }
    case FamilyId::E1CaseIII11: {
        double g0 = prm.constant("gamma0");
        if (g0 == 0.0) throw FamilyError("e1-case-iii-11: gamma0 must be nonzero");
        Expr a = 1.0 / (Expr::constant(g0 * g0) * var_u() * var_u());
        return {a, quasilinear_f(a, Expr::constant(0.0))};
    }
    case FamilyId::SimpleWave: {
        Expr a = prm.function("a");
        return {a, quasilinear_f(a, Expr::constant(0.0))};
    }
    case FamilyId::E5:
        return {var_u(), Expr::constant(0.0) - var_ut() + (2.0 / var_u()) * var_ut() * var_ut()};
    case FamilyId::E6Minus:
    case FamilyId::E6Plus: {
        double c = prm.constant("c");
        Expr q1 = prm.function("q1");
        Expr q2 = prm.has("q2") ? prm.function("q2")
                                : detail::e6_q2(q1, c, id == FamilyId::E6Plus ? 1 : -1);
        return {Expr::constant(c), q1 * var_ut() + q2 * var_u()};
    }
    case FamilyId::ConstantAstigmatism: {
        Expr a = 1.0 / var_u();
        return {a, quasilinear_f(a, Expr::constant(2.0))};
    }
    }
    throw FamilyError("unknown family id");
}

/// Catalog reduction (branch, g) of a family, when g has a closed form. For
/// E1CaseIII11 this is the explicit alpha0=alpha2=gamma2=0 member; for
/// general Riccati constants build g via riccati_G and the characteristics
/// module instead.
inline std::optional<Reduction> family_reduction(FamilyId id, const FamilyParams& prm) {
    using namespace detail;
    switch (id) {
    case FamilyId::E1CaseI: {
        Expr a = prm.function("a");
        double g0 = prm.constant("gamma0");
        return Reduction(1, Expr::constant(-1.0) /
                                (Expr::unary(UnaryOp::Sqrt, a) * Expr::constant(g0) * var_t()));
    }
    case FamilyId::E1CaseII:
        return Reduction(1, Expr::constant(prm.constant("k1")));
    case FamilyId::E1CaseIII12:
        return Reduction(1, Expr::constant(prm.constant("k0")) *
                                Expr::pow(prm.function("a"), -0.5));
    case FamilyId::E1CaseIII11: {
        double a0 = prm.constant("alpha0"), a2 = prm.constant("alpha2");
        double g2 = prm.constant("gamma2"), g0 = prm.constant("gamma0");
        double c1 = prm.constant("c1");
        if (a0 != 0.0 || a2 != 0.0 || g2 != 0.0) return std::nullopt;
        // g = G/sqrt(a) with 1/sqrt(a) = -gamma0 u (the speed-law branch):
        // g = +gamma0 u / (gamma0 t + c1). The sign matters; the opposite one
        // fails the compatibility condition.
        return Reduction(1, Expr::constant(g0) * var_u() /
                                (Expr::constant(g0) * var_t() + Expr::constant(c1)));
    }
    case FamilyId::SimpleWave:
        return Reduction(1, Expr::constant(0.0));
    case FamilyId::E5:
        return Reduction(1, var_u());
    case FamilyId::E6Minus:
        return Reduction(-1, prm.function("q1") * var_u() * 0.5);
    case FamilyId::E6Plus:
        return Reduction(1, prm.function("q1") * var_u() * 0.5);
    case FamilyId::ConstantAstigmatism:
        return Reduction(1, 2.0 * Expr::unary(UnaryOp::Sqrt, var_u()));
    }
    throw FamilyError("unknown family id");
}

struct ValidateGrid {
    double u_lo = 0.5, u_hi = 2.0;
    double x_lo = 0.5, x_hi = 1.5;
    int n = 25;
    double tol = 1e-8;
};

/// Evaluate the family's structural identities as residuals on a sample grid;
/// returns the list of violations (empty means pass).
inline std::vector<std::string> validate_family(FamilyId id, const FamilyParams& prm,
                                                const ValidateGrid& grid = {}) {
    std::vector<std::string> out;
    auto check_on = [&](const Expr& residual, const std::string& var, double lo, double hi,
                        const std::string& label) {
        auto fn = detail::make_fn1(residual, var);
        double worst = 0.0, at = lo;
        for (int i = 0; i < grid.n; ++i) {
            double v = lo + (hi - lo) * i / (grid.n - 1);
            double r = std::abs(fn(v));
            if (r > worst) { worst = r; at = v; }
        }
        if (worst > grid.tol)
            out.push_back(label + ": residual " + std::to_string(worst) + " at " + var + " = " +
                          std::to_string(at));
    };
    try {
        switch (id) {
        case FamilyId::E1CaseI: {
            Expr a = prm.function("a");
            double b0 = prm.constant("beta0"), g0 = prm.constant("gamma0");
            if (prm.constant("t0") == 0.0) out.push_back("t0 must be nonzero");
            Expr lhs = Expr::pow(a, -0.5).diff("u");
            Expr rhs = Expr::constant(b0) * Expr::unary(UnaryOp::Sqrt, a) - Expr::constant(g0);
            check_on(lhs - rhs, "u", grid.u_lo, grid.u_hi, "speed law d(1/sqrt(a))/du = beta0 sqrt(a) - gamma0");
            break;
        }
        case FamilyId::E1CaseII: {
            Expr a = prm.function("a");
            Expr residual = prm.function("Phi") - Expr::constant(prm.constant("k1")) * a.diff("u");
            check_on(residual, "u", grid.u_lo, grid.u_hi, "Phi = k1 a'(u)");
            break;
        }
        case FamilyId::E1CaseIII12: {
            Expr a = prm.function("a");
            Expr residual = prm.function("q") -
                            Expr::constant(0.5 * prm.constant("k0") * prm.constant("k0")) *
                                Expr::pow(a, -1.0).diff("u");
            check_on(residual, "u", grid.u_lo, grid.u_hi, "q = (k0^2/2) d(1/a)/du");
            break;
        }
        case FamilyId::E1CaseIII11: {
            double a0 = prm.constant("alpha0"), a1 = prm.constant("alpha1"),
                   a2 = prm.constant("alpha2");
            double g0 = prm.constant("gamma0"), g1 = prm.constant("gamma1"),
                   g2 = prm.constant("gamma2");
            auto comp = [&](double l, double r, const std::string& label) {
                if (std::abs(l - r) > grid.tol * (1.0 + std::abs(l) + std::abs(r)))
                    out.push_back("compatibility " + label + " violated");
            };
            comp(a0 * g1, a1 * g0, "alpha0 gamma1 = alpha1 gamma0");
            comp(a0 * g2, a2 * g0, "alpha0 gamma2 = alpha2 gamma0");
            comp(a1 * g2, a2 * g1, "alpha1 gamma2 = alpha2 gamma1");
            break;
        }
        case FamilyId::SimpleWave: {
            Expr a = prm.function("a");
            auto fn = detail::make_fn1(a, "u");
            for (int i = 0; i < grid.n; ++i) {
                double v = grid.u_lo + (grid.u_hi - grid.u_lo) * i / (grid.n - 1);
                if (!(fn(v) > 0.0)) {
                    out.push_back("wave speed a(u) not positive at u = " + std::to_string(v));
                    break;
                }
            }
            break;
        }
        case FamilyId::E5:
        case FamilyId::ConstantAstigmatism:
            break;
        case FamilyId::E6Minus:
        case FamilyId::E6Plus: {
            double c = prm.constant("c");
            if (!(c > 0.0)) out.push_back("speed c must be positive");
            if (prm.has("q2")) {
                int s = (id == FamilyId::E6Plus) ? 1 : -1;
                Expr residual = prm.function("q2") - detail::e6_q2(prm.function("q1"), c, s);
                check_on(residual, "x", grid.x_lo, grid.x_hi,
                         "q2 = lambda q1'/2 - q1^2/4");
            }
            break;
        }
        }
    } catch (const FamilyError& e) {
        out.push_back(e.what());
    }
    return out;
}

namespace detail {

// u with integral_{u_base}^{u} sqrt(a) ds = rhs, by bracketed Newton
// (monotone since sqrt(a) > 0).
inline double solve_speed_integral(const std::function<double(double)>& a_of_u, double u_base,
                                   double rhs) {
    auto sqrt_a = [&](double s) {
        double av = a_of_u(s);
        if (!(av > 0.0)) throw FamilyError("speed a(u) not positive at u = " + std::to_string(s));
        return std::sqrt(av);
    };
    auto W = [&](double uv) { return integrate_simpson(sqrt_a, u_base, uv, 1e-10); };
    auto F = [&](double uv) { return W(uv) - rhs; };
    if (rhs == 0.0) return u_base;
    double lo = u_base, hi = u_base;
    double step = 0.1 * (1.0 + std::abs(u_base));
    for (int i = 0; i < 80; ++i) {
        if (rhs > 0.0) hi += step; else lo -= step;
        step *= 1.6;
        double flo = F(lo), fhi = F(hi);
        if ((flo <= 0.0) && (fhi >= 0.0)) {
            RootOptions opt;
            opt.f_tol = 1e-12 * (1.0 + std::abs(rhs));
            return solve_newton_bracketed(F, [&](double uv) { return sqrt_a(uv); }, lo, hi, opt);
        }
    }
    throw FamilyError("implicit speed integral: no bracket for rhs = " + std::to_string(rhs));
}

// sigma with x(sigma) = x_query, Newton on a secant-bracketed interval
inline double solve_for_sigma(const std::function<double(double)>& x_of_sigma, double x_query) {
    double lo = x_query - 0.5 * (1.0 + std::abs(x_query));
    double hi = x_query + 0.5 * (1.0 + std::abs(x_query));
    auto F = [&](double s) { return x_of_sigma(s) - x_query; };
    if (!expand_bracket(F, lo, hi, 40))
        throw FamilyError("implicit solve failure: no sigma bracket for x = " +
                          std::to_string(x_query) + " (multi-valued or out of range)");
    RootOptions opt;
    opt.f_tol = 1e-12 * (1.0 + std::abs(x_query));
    return solve_bracketed(F, lo, hi, opt);
}

}  // namespace detail

/// Riccati coefficients of G_x = a0 G^2 + a1 G + a2, G_t = g0 G^2 + g1 G + g2
/// with integration constant c1 (initial value G(0) for the numeric branch).
struct RiccatiCoeffs {
    double a0 = 0, a1 = 0, a2 = 0;
    double g0 = 0, g1 = 0, g2 = 0;
    double c1 = 0;
};

/// G(sigma) with sigma = a0 x + g0 t: tan branch for a2/a0 = c0^2 > 0,
/// exponential branch for a2/a0 = -c0^2, reciprocal branch for a2 = g2 = 0;
/// otherwise (a1 != 0) RK4 along sigma with step 1e-3 from G(0) = c1.
inline double riccati_G(const RiccatiCoeffs& rc, double x, double t) {
    auto comp_ok = [&](double l, double r) {
        return std::abs(l - r) <= 1e-12 * (1.0 + std::abs(l) + std::abs(r));
    };
    if (!comp_ok(rc.a0 * rc.g1, rc.a1 * rc.g0) || !comp_ok(rc.a0 * rc.g2, rc.a2 * rc.g0) ||
        !comp_ok(rc.a1 * rc.g2, rc.a2 * rc.g1))
        throw FamilyError("riccati_G: compatibility conditions alpha_i gamma_j = alpha_j gamma_i violated");
    if (rc.a0 == 0.0 && rc.g0 == 0.0)
        throw FamilyError("riccati_G: alpha0 = gamma0 = 0 is outside the catalog (a const)");

    double sigma = rc.a0 * x + rc.g0 * t;
    double r1 = rc.a0 != 0.0 ? rc.a1 / rc.a0 : rc.g1 / rc.g0;
    double r2 = rc.a0 != 0.0 ? rc.a2 / rc.a0 : rc.g2 / rc.g0;

    const double pole_tol = 1e-6;
    if (r1 == 0.0) {
        if (rc.a2 == 0.0 && rc.g2 == 0.0) {
            if (std::abs(sigma + rc.c1) <= pole_tol)
                throw FamilyError("riccati_G: query within 1e-6 of the pole sigma = -c1");
            return -1.0 / (sigma + rc.c1);
        }
        if (r2 > 0.0) {
            double c0 = std::sqrt(r2);
            double theta = c0 * sigma + rc.c1;
            double k = std::round((theta - M_PI_2) / M_PI);
            double nearest = M_PI_2 + k * M_PI;
            if (std::abs(theta - nearest) / c0 <= pole_tol)
                throw FamilyError("riccati_G: query within 1e-6 of a tan pole");
            return c0 * std::tan(theta);
        }
        double c0 = std::sqrt(-r2);
        if (std::abs(sigma + rc.c1 / (2.0 * c0)) <= pole_tol)
            throw FamilyError("riccati_G: query within 1e-6 of the exponential-branch pole");
        double E = std::exp(2.0 * c0 * sigma + rc.c1);
        return c0 * (1.0 + E) / (1.0 - E);
    }

    // numeric branch: G' = G^2 + r1 G + r2 along sigma, G(0) = c1
    double G = rc.c1;
    double remaining = sigma;
    double h = sigma >= 0.0 ? 1e-3 : -1e-3;
    auto rhs = [&](double g) { return g * g + r1 * g + r2; };
    while (std::abs(remaining) > 1e-15) {
        double step = std::abs(remaining) < std::abs(h) ? remaining : h;
        double k1 = rhs(G);
        double k2 = rhs(G + 0.5 * step * k1);
        double k3 = rhs(G + 0.5 * step * k2);
        double k4 = rhs(G + step * k3);
        G += step / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        if (!std::isfinite(G) || std::abs(G) > 1e8)
            throw FamilyError("riccati_G: numeric branch blew up (pole) before sigma = " +
                              std::to_string(sigma));
        remaining -= step;
    }
    return G;
}

enum class SpeedProfile { A1, A2, A3, A4 };

struct SpeedConstants {
    double gamma0 = 0.0;
    double alpha0 = 0.0;
    double c2 = 0.0;
};

/// Wave-speed profiles of the h = Phi = 0 branch: explicit laws A3, A4 and
/// the implicit arctan/log laws A1, A2 solved for a by bracketed Newton.
inline double speed_profile_a(SpeedProfile which, const SpeedConstants& sc, double u) {
    switch (which) {
    case SpeedProfile::A3: {
        if (sc.gamma0 == 0.0 || u == 0.0)
            throw FamilyError("A3 requires gamma0 != 0 and u != 0");
        return 1.0 / (sc.gamma0 * sc.gamma0 * u * u);
    }
    case SpeedProfile::A4: {
        double arg = -3.0 * sc.alpha0 * u;
        if (!(arg > 0.0)) throw FamilyError("A4 requires -3 alpha0 u > 0");
        return std::pow(arg, -2.0 / 3.0);
    }
    case SpeedProfile::A1: {
        // y - c2 arctan(y/c2) = -gamma0 u for y = 1/sqrt(a): monotone
        // increasing, F(0) = gamma0 u must be negative.
        if (sc.gamma0 == 0.0 || sc.c2 == 0.0)
            throw FamilyError("A1 requires gamma0 != 0 and c2 != 0");
        double c2 = std::abs(sc.c2);
        double target = -sc.gamma0 * u;
        if (!(target > 0.0))
            throw FamilyError("A1 domain violation: gamma0 u must be negative");
        auto F = [&](double y) { return y - c2 * std::atan(y / c2) - target; };
        double hi = target + c2 * M_PI_2 + 1.0;
        RootOptions opt;
        opt.f_tol = 1e-12 * (1.0 + target);
        double y = solve_newton_bracketed(
            F, [&](double y_) { return (y_ * y_) / (c2 * c2 + y_ * y_); }, 0.0, hi, opt);
        if (!(y > 0.0)) throw FamilyError("A1: no positive root");
        return 1.0 / (y * y);
    }
    case SpeedProfile::A2: {
        // 1/w - (c2/2) ln((1+c2 w)/(1-c2 w)) = -gamma0 u for w = sqrt(a) in
        // (0, 1/c2): monotone decreasing with full range.
        if (sc.gamma0 == 0.0 || sc.c2 == 0.0)
            throw FamilyError("A2 requires gamma0 != 0 and c2 != 0");
        double c2 = std::abs(sc.c2);
        double target = -sc.gamma0 * u;
        auto F = [&](double w) {
            return 1.0 / w - 0.5 * c2 * std::log((1.0 + c2 * w) / (1.0 - c2 * w)) - target;
        };
        double lo = 1e-8 / c2, hi = (1.0 - 1e-12) / c2;
        for (int i = 0; i < 40 && !(F(lo) > 0.0); ++i) lo *= 0.5;
        for (int i = 0; i < 40 && !(F(hi) < 0.0); ++i) hi = (hi + 1.0 / c2) * 0.5;
        if (!(F(lo) > 0.0) || !(F(hi) < 0.0))
            throw FamilyError("A2: no bracket in (0, 1/c2)");
        RootOptions opt;
        opt.f_tol = 1e-12 * (1.0 + std::abs(target));
        double w = solve_bracketed(F, lo, hi, opt);
        return w * w;
    }
    }
    throw FamilyError("unknown speed profile");
}

namespace detail {

/// Evaluation body shared by eval_family and family_evaluator; assumes the
/// parameters have already been validated.
inline double eval_family_unchecked(FamilyId id, const FamilyParams& prm, double x, double t) {
    using namespace detail;
    switch (id) {
    case FamilyId::E1CaseI: {
        auto a = make_fn1(prm.function("a"), "u");
        auto u0 = make_fn1(prm.function("u0"), "sigma");
        double g0 = prm.constant("gamma0"), t0 = prm.constant("t0");
        if (!(t * t0 > 0.0))
            throw FamilyError("e1-case-i is restricted to t/t0 > 0");
        double rhs = -std::log(t / t0) / g0;
        auto u_at = [&](double s, double tau) {
            return solve_speed_integral(a, u0(s), -std::log(tau / t0) / g0);
        };
        auto x_of_sigma = [&](double s) {
            return s - integrate_simpson([&](double tau) { return a(u_at(s, tau)); }, t0, t, 1e-10);
        };
        double s = solve_for_sigma(x_of_sigma, x);
        return solve_speed_integral(a, u0(s), rhs);
    }
    case FamilyId::E1CaseII: {
        auto a = make_fn1(prm.function("a"), "u");
        auto u0 = make_fn1(prm.function("u0"), "sigma");
        double k1 = prm.constant("k1");
        auto x_of_sigma = [&](double s) {
            return s - integrate_simpson([&](double tau) { return a(k1 * tau + u0(s)); }, 0.0, t,
                                         1e-10);
        };
        double s = solve_for_sigma(x_of_sigma, x);
        return k1 * t + u0(s);
    }
    case FamilyId::E1CaseIII12: {
        auto a = make_fn1(prm.function("a"), "u");
        auto u0 = make_fn1(prm.function("u0"), "sigma");
        double k0 = prm.constant("k0");
        auto u_at = [&](double s, double tau) {
            return solve_speed_integral(a, u0(s), k0 * tau);
        };
        auto x_of_sigma = [&](double s) {
            return s - integrate_simpson([&](double tau) { return a(u_at(s, tau)); }, 0.0, t, 1e-10);
        };
        double s = solve_for_sigma(x_of_sigma, x);
        return u_at(s, t);
    }
    case FamilyId::E1CaseIII11: {
        double a0 = prm.constant("alpha0"), a2 = prm.constant("alpha2");
        double g0 = prm.constant("gamma0"), g2 = prm.constant("gamma2");
        double c1 = prm.constant("c1");
        if (a0 != 0.0 || a2 != 0.0 || g2 != 0.0)
            throw FamilyError(
                "e1-case-iii-11 closed form requires alpha0 = alpha2 = gamma2 = 0; "
                "build the reduction via riccati_G and integrate it instead");
        if (g0 == 0.0) throw FamilyError("e1-case-iii-11: gamma0 must be nonzero");
        if (c1 == 0.0) throw FamilyError("e1-case-iii-11 closed form needs c1 != 0 (t0 = c1/gamma0)");
        // u = u0(z) (t + t0)/t0 along x = z - t0 t / (gamma0^2 u0(z)^2 (t + t0)),
        // so that u(x, 0) = u0(x). Solves du/dt = g, dx/dt = -a.
        auto u0 = make_fn1(prm.function("u0"), "sigma");
        double t0 = c1 / g0;
        if (t + t0 == 0.0) throw FamilyError("e1-case-iii-11: t = -t0 is the singular time");
        auto x_of_z = [&](double z) {
            double w = u0(z);
            if (w == 0.0) throw FamilyError("e1-case-iii-11: u0(z) = 0 on the solve path");
            return z - t0 * t / (g0 * g0 * w * w * (t + t0));
        };
        double z = solve_for_sigma(x_of_z, x);
        return u0(z) * (t + t0) / t0;
    }
    case FamilyId::SimpleWave: {
        auto a = make_fn1(prm.function("a"), "u");
        auto u0 = make_fn1(prm.function("u0"), "sigma");
        if (t == 0.0) return u0(x);
        auto xi_eq = [&](double xi) { return xi - a(u0(xi)) * t; };
        double xi = solve_for_sigma(xi_eq, x);
        return u0(xi);
    }
    case FamilyId::E5: {
        auto u0 = make_fn1(prm.function("u0"), "sigma");
        double E = std::exp(t);
        auto x_of_sigma = [&](double s) { return s - u0(s) * (E - 1.0); };
        double s = solve_for_sigma(x_of_sigma, x);
        return u0(s) * E;
    }
    case FamilyId::E6Minus:
    case FamilyId::E6Plus: {
        double c = prm.constant("c");
        auto q1 = make_fn1(prm.function("q1"), "x");
        auto u0 = make_fn1(prm.function("u0"), "sigma");
        double Q = integrate_simpson(q1, 0.0, x, 1e-10);
        if (id == FamilyId::E6Minus) return u0(x - c * t) * std::exp(Q / (2.0 * c));
        return u0(x + c * t) * std::exp(-Q / (2.0 * c));
    }
    case FamilyId::ConstantAstigmatism:
        throw FamilyError(
            "constant-astigmatism ships no closed form; integrate its reduction "
            "(lambda = 1/u, g = 2 sqrt(u)) with the characteristics module");
    }
    throw FamilyError("unknown family id");
}

inline void require_valid(FamilyId id, const FamilyParams& prm) {
    auto violations = validate_family(id, prm);
    if (!violations.empty())
        throw FamilyError("validator failure for " + family_name(id) + ": " + violations.front());
}

}  // namespace detail

/// Closed-form evaluation of a family solution at (x, t). Implicit relations
/// are resolved by bracketed Newton; quadratures by adaptive Simpson.
inline double eval_family(FamilyId id, const FamilyParams& prm, double x, double t) {
    detail::require_valid(id, prm);
    return detail::eval_family_unchecked(id, prm, x, t);
}

/// Validate once, then return a reusable (x, t) -> u closure for sampling.
inline std::function<double(double, double)> family_evaluator(FamilyId id,
                                                              const FamilyParams& prm) {
    detail::require_valid(id, prm);
    return [id, prm](double x, double t) {
        return detail::eval_family_unchecked(id, prm, x, t);
    };
}

}  // namespace hypint
