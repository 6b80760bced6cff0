#pragma once

// Shared numerical kernels: adaptive Simpson quadrature, safeguarded
// Newton/bisection root solving on a bracket, and central-difference
// stencils of order 2 and 4.

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace hypint {

class SolveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

template <typename F>
double simpson_rec(F& f, double a, double m, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double err = (left + right - whole) / 15.0;
    if (std::abs(err) <= tol || depth >= 48)
        return left + right + err;
    return simpson_rec(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
           simpson_rec(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

}  // namespace detail

/// Adaptive Simpson integral of f over [a, b] (a > b allowed) to absolute
/// tolerance `tol`.
template <typename F>
double integrate_simpson(F&& f, double a, double b, double tol = 1e-10) {
    if (a == b) return 0.0;
    double m = 0.5 * (a + b);
    double fa = f(a), fm = f(m), fb = f(b);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_rec(f, a, m, b, fa, fm, fb, whole, tol, 0);
}

/// Expand [lo, hi] geometrically about its midpoint until f changes sign.
/// Returns false if no sign change was found within `max_expand` doublings.
template <typename F>
bool expand_bracket(F&& f, double& lo, double& hi, int max_expand = 60) {
    if (lo > hi) std::swap(lo, hi);
    double flo = f(lo), fhi = f(hi);
    for (int i = 0; i < max_expand; ++i) {
        if (flo == 0.0) { hi = lo; return true; }
        if (fhi == 0.0) { lo = hi; return true; }
        if ((flo < 0.0) != (fhi < 0.0)) return true;
        double mid = 0.5 * (lo + hi);
        double half = std::max(hi - lo, 1e-12);
        lo = mid - half;
        hi = mid + half;
        flo = f(lo);
        fhi = f(hi);
    }
    return false;
}

struct RootOptions {
    double f_tol = 1e-12;    // stop when |f(x)| <= f_tol
    double x_tol = 0.0;      // additionally stop when bracket width <= x_tol
    int max_iter = 200;
};

/// Root of f in [lo, hi] (f(lo), f(hi) of opposite sign or zero). Newton
/// steps use `df`; a step that leaves the bracket, or three consecutive
/// non-contracting iterations, falls back to bisection.
template <typename F, typename DF>
double solve_newton_bracketed(F&& f, DF&& df, double lo, double hi, RootOptions opt = {}) {
    double flo = f(lo), fhi = f(hi);
    if (std::abs(flo) <= opt.f_tol) return lo;
    if (std::abs(fhi) <= opt.f_tol) return hi;
    if ((flo < 0.0) == (fhi < 0.0))
        throw SolveError("solve_newton_bracketed: endpoints do not bracket a root");

    double x = 0.5 * (lo + hi);
    double fx = f(x);
    double prev_abs = std::abs(fx);
    int stall = 0;
    for (int it = 0; it < opt.max_iter; ++it) {
        if (std::abs(fx) <= opt.f_tol) return x;
        // shrink bracket
        if ((fx < 0.0) == (flo < 0.0)) { lo = x; flo = fx; }
        else { hi = x; fhi = fx; }
        if (hi - lo <= opt.x_tol) return 0.5 * (lo + hi);

        double d = df(x);
        double xn = (d != 0.0) ? x - fx / d : std::numeric_limits<double>::quiet_NaN();
        bool use_newton = std::isfinite(xn) && xn > lo && xn < hi && stall < 3;
        x = use_newton ? xn : 0.5 * (lo + hi);
        fx = f(x);
        if (std::abs(fx) >= prev_abs) ++stall; else stall = 0;
        prev_abs = std::abs(fx);
    }
    if (std::abs(fx) <= opt.f_tol * 16.0) return x;
    throw SolveError("solve_newton_bracketed: no convergence after " +
                     std::to_string(opt.max_iter) + " iterations");
}

/// As above with a central-difference derivative.
template <typename F>
double solve_bracketed(F&& f, double lo, double hi, RootOptions opt = {}) {
    auto df = [&](double x) {
        double h = 1e-6 * (1.0 + std::abs(x));
        return (f(x + h) - f(x - h)) / (2.0 * h);
    };
    return solve_newton_bracketed(f, df, lo, hi, opt);
}

/// First derivative of f at x by central differences.
template <typename F>
double fd_derivative(F&& f, double x, double h, int order = 2) {
    if (order == 4)
        return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
    return (f(x + h) - f(x - h)) / (2 * h);
}

/// Second derivative of f at x by central differences.
template <typename F>
double fd_second(F&& f, double x, double h, int order = 2) {
    if (order == 4)
        return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) /
               (12 * h * h);
    return (f(x + h) - 2 * f(x) + f(x - h)) / (h * h);
}

}  // namespace hypint
