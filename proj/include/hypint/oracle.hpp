#pragma once

// Independent verification tools: high-order finite-difference residuals of
// the governing PDE on candidate solutions, an explicit leapfrog solver for
// cross-checking, comparison norms, and convergence-order estimation. Nothing
// here shares code with the solution constructors it checks.

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypint/compat.hpp"
#include "hypint/expr.hpp"
#include "hypint/numerics.hpp"

namespace hypint {

class OracleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CflError : public OracleError {
public:
    using OracleError::OracleError;
};

struct Box2 {
    double x_lo, x_hi, t_lo, t_hi;
    bool contains(double x, double t) const {
        double px = 1e-12 * (1.0 + std::abs(x_hi)), pt = 1e-12 * (1.0 + std::abs(t_hi));
        return x >= x_lo - px && x <= x_hi + px && t >= t_lo - pt && t <= t_hi + pt;
    }
};

struct Point2 {
    double x, t;
};

/// Deterministic candidate solution (x,t) -> u with its declared valid box.
struct Evaluator {
    std::function<double(double, double)> fn;
    Box2 box;
    double operator()(double x, double t) const { return fn(x, t); }
};

/// Max over `points` of |u_tt - a^2 u_xx - f| with every derivative taken
/// from central-difference stencils of the given order (2 or 4) applied to
/// `sol`; a and f are evaluated at the stenciled point values.
inline double fd_residual(const PdeSpec& p, const Evaluator& sol,
                          std::span<const Point2> points, double h, int order = 4) {
    if (!(h > 0.0)) throw std::invalid_argument("fd_residual: h must be positive");
    if (order != 2 && order != 4) throw std::invalid_argument("fd_residual: order must be 2 or 4");
    double reach = (order == 4 ? 2.0 : 1.0) * h;
    double worst = 0.0;
    for (const Point2& pt : points) {
        if (!sol.box.contains(pt.x - reach, pt.t - reach) ||
            !sol.box.contains(pt.x + reach, pt.t + reach))
            throw OracleError("fd_residual: stencil at (" + std::to_string(pt.x) + ", " +
                              std::to_string(pt.t) + ") leaves the evaluator box");
        auto ux_line = [&](double x) { return sol(x, pt.t); };
        auto ut_line = [&](double t) { return sol(pt.x, t); };
        double u = sol(pt.x, pt.t);
        double ux = fd_derivative(ux_line, pt.x, h, order);
        double uxx = fd_second(ux_line, pt.x, h, order);
        double ut = fd_derivative(ut_line, pt.t, h, order);
        double utt = fd_second(ut_line, pt.t, h, order);
        Env env = {{"x", pt.x}, {"t", pt.t}, {"u", u}, {"ux", ux}, {"ut", ut}};
        double a = p.a.eval(env);
        double f = p.f.eval(env);
        worst = std::max(worst, std::abs(utt - a * a * uxx - f));
    }
    return worst;
}

/// Uniform space-time grid of samples; u is stored row-major in t then x.
struct GridField {
    double x0 = 0.0, dx = 0.0;
    int nx = 0;
    double t0 = 0.0, dt = 0.0;
    int nt = 0;
    std::vector<double> u;

    double& at(int i, int j) { return u[static_cast<std::size_t>(j) * nx + i]; }
    double at(int i, int j) const { return u[static_cast<std::size_t>(j) * nx + i]; }
    double x(int i) const { return x0 + dx * i; }
    double t(int j) const { return t0 + dt * j; }
};

/// Explicit second-order leapfrog for u_tt - a^2 u_xx = f on `domain`.
/// The first step is seeded by a Taylor expansion using phi, psi and the PDE;
/// f's ux argument is central at the current level and its ut argument is the
/// backward difference (lagged, keeps the scheme explicit). Boundary columns
/// come from `boundary`. CFL dt*max|a| <= 0.9 dx is enforced initially and at
/// every step with the current field.
inline GridField leapfrog_solve(const PdeSpec& p, const std::function<double(double)>& phi,
                                const std::function<double(double)>& psi,
                                const std::function<double(double)>& dphi,
                                const std::function<double(double)>& ddphi, const Box2& domain,
                                double dx, double dt, const Evaluator& boundary);

inline GridField leapfrog_solve(const PdeSpec& p, const Expr& phi, const Expr& psi,
                                const Box2& domain, double dx, double dt,
                                const Evaluator& boundary) {
    Expr dphi = phi.diff("x");
    Expr ddphi = dphi.diff("x");
    auto f1 = [phi](double x) { return phi.eval({{"x", x}}); };
    auto f2 = [psi](double x) { return psi.eval({{"x", x}}); };
    auto f3 = [dphi](double x) { return dphi.eval({{"x", x}}); };
    auto f4 = [ddphi](double x) { return ddphi.eval({{"x", x}}); };
    return leapfrog_solve(p, f1, f2, f3, f4, domain, dx, dt, boundary);
}

inline GridField leapfrog_solve(const PdeSpec& p, const std::function<double(double)>& phi,
                                const std::function<double(double)>& psi,
                                const std::function<double(double)>& dphi,
                                const std::function<double(double)>& ddphi, const Box2& domain,
                                double dx, double dt, const Evaluator& boundary) {
    if (!(dx > 0.0) || !(dt > 0.0)) throw std::invalid_argument("leapfrog: dx, dt must be positive");
    GridField fld;
    // effective steps shrink to the nearest uniform divisors of the spans
    fld.nx = static_cast<int>(std::ceil((domain.x_hi - domain.x_lo) / dx - 1e-9)) + 1;
    fld.nt = static_cast<int>(std::ceil((domain.t_hi - domain.t_lo) / dt - 1e-9)) + 1;
    if (fld.nx < 3 || fld.nt < 2) throw std::invalid_argument("leapfrog: grid too small");
    fld.x0 = domain.x_lo;
    fld.t0 = domain.t_lo;
    fld.dx = (domain.x_hi - domain.x_lo) / (fld.nx - 1);
    fld.dt = (domain.t_hi - domain.t_lo) / (fld.nt - 1);
    fld.u.assign(static_cast<std::size_t>(fld.nx) * fld.nt, 0.0);

    auto cfl_check = [&](int j) {
        double amax = 0.0;
        for (int i = 0; i < fld.nx; ++i) {
            Env env = {{"x", fld.x(i)}, {"t", fld.t(j)}, {"u", fld.at(i, j)}};
            amax = std::max(amax, std::abs(p.a.eval(env)));
        }
        if (fld.dt * amax > 0.9 * fld.dx * (1.0 + 1e-12))
            throw CflError("CFL violation at step " + std::to_string(j) + ": dt*max|a| = " +
                           std::to_string(fld.dt * amax) + " > 0.9*dx = " +
                           std::to_string(0.9 * fld.dx));
        return amax;
    };

    for (int i = 0; i < fld.nx; ++i)
        fld.at(i, 0) = phi(fld.x(i));
    cfl_check(0);

    // Taylor seed: u(x, dt) = phi + dt psi + dt^2/2 (a^2 phi'' + f)
    for (int i = 1; i + 1 < fld.nx; ++i) {
        double xv = fld.x(i);
        double phv = fld.at(i, 0);
        double psv = psi(xv);
        Env env = {{"x", xv}, {"t", fld.t0}, {"u", phv}, {"ux", dphi(xv)}, {"ut", psv}};
        double a = p.a.eval(env);
        double f = p.f.eval(env);
        fld.at(i, 1) = phv + fld.dt * psv + 0.5 * fld.dt * fld.dt * (a * a * ddphi(xv) + f);
    }
    fld.at(0, 1) = boundary(fld.x0, fld.t(1));
    fld.at(fld.nx - 1, 1) = boundary(fld.x(fld.nx - 1), fld.t(1));

    const double r2 = fld.dt * fld.dt;
    for (int j = 1; j + 1 < fld.nt; ++j) {
        cfl_check(j);
        for (int i = 1; i + 1 < fld.nx; ++i) {
            double uij = fld.at(i, j);
            double uxx = (fld.at(i + 1, j) - 2.0 * uij + fld.at(i - 1, j)) / (fld.dx * fld.dx);
            double ux = (fld.at(i + 1, j) - fld.at(i - 1, j)) / (2.0 * fld.dx);
            // lagged ut: second-order backward difference once two previous
            // levels exist, first-order on the very first step
            double ut = j >= 2 ? (3.0 * uij - 4.0 * fld.at(i, j - 1) + fld.at(i, j - 2)) /
                                     (2.0 * fld.dt)
                               : (uij - fld.at(i, j - 1)) / fld.dt;
            Env env = {{"x", fld.x(i)}, {"t", fld.t(j)}, {"u", uij}, {"ux", ux}, {"ut", ut}};
            double a = p.a.eval(env);
            double f = p.f.eval(env);
            double next = 2.0 * uij - fld.at(i, j - 1) + r2 * (a * a * uxx + f);
            if (!std::isfinite(next))
                throw OracleError("leapfrog: non-finite value at cell i=" + std::to_string(i) +
                                  ", step " + std::to_string(j + 1));
            fld.at(i, j + 1) = next;
        }
        fld.at(0, j + 1) = boundary(fld.x0, fld.t(j + 1));
        fld.at(fld.nx - 1, j + 1) = boundary(fld.x(fld.nx - 1), fld.t(j + 1));
    }
    return fld;
}

struct Norms {
    double linf = 0.0;
    double l2 = 0.0;  // root-mean-square over the compared nodes
};

/// Error norms of the field against a reference over all spatially interior
/// nodes, every stored time level.
inline Norms compare(const GridField& fld, const Evaluator& ref) {
    Norms n;
    double sum = 0.0;
    std::size_t count = 0;
    for (int j = 0; j < fld.nt; ++j)
        for (int i = 1; i + 1 < fld.nx; ++i) {
            double d = std::abs(fld.at(i, j) - ref(fld.x(i), fld.t(j)));
            n.linf = std::max(n.linf, d);
            sum += d * d;
            ++count;
        }
    n.l2 = count ? std::sqrt(sum / static_cast<double>(count)) : 0.0;
    return n;
}

struct OrderEstimate {
    double order = 0.0;
    bool conclusive = false;
    std::vector<double> errors;
};

/// Least-squares slope of log(Linf error) vs log(dx) for leapfrog runs at the
/// given resolutions (each should halve dx; dt = courant * dx). Non-monotone
/// or roundoff-floor errors are flagged inconclusive.
inline OrderEstimate convergence_order(const PdeSpec& p, const Expr& phi, const Expr& psi,
                                       const Evaluator& ref, const Box2& domain,
                                       std::span<const double> dxs, double courant = 0.9) {
    if (dxs.size() < 3)
        throw std::invalid_argument("convergence_order: need at least 3 resolutions");
    OrderEstimate est;
    for (double dx : dxs) {
        GridField fld = leapfrog_solve(p, phi, psi, domain, dx, courant * dx, ref);
        est.errors.push_back(compare(fld, ref).linf);
    }
    bool monotone = true, above_roundoff = true;
    for (std::size_t k = 0; k + 1 < est.errors.size(); ++k)
        if (!(est.errors[k] > est.errors[k + 1])) monotone = false;
    for (double e : est.errors)
        if (e < 1e-12) above_roundoff = false;

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    auto n = static_cast<double>(dxs.size());
    for (std::size_t k = 0; k < dxs.size(); ++k) {
        double lx = std::log(dxs[k]), ly = std::log(std::max(est.errors[k], 1e-300));
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    }
    est.order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    est.conclusive = monotone && above_roundoff;
    return est;
}

/// CSV serialization: header x,t,u; row-major in t then x; 17 significant
/// digits, LF newlines.
inline void write_csv(const GridField& fld, std::ostream& os) {
    os << "x,t,u\n";
    char buf[120];
    for (int j = 0; j < fld.nt; ++j)
        for (int i = 0; i < fld.nx; ++i) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", fld.x(i), fld.t(j), fld.at(i, j));
            os << buf;
        }
}

}  // namespace hypint
