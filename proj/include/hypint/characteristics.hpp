#pragma once

// Characteristic integration of first-order reductions
//
//     u_t - lambda(x,t,u) u_x = g(x,t,u)
//
// written as the ODE system dx/dt = -lambda, du/dt = g along curves launched
// from a sigma-grid on the initial line t = t_start. The stored strip is a
// parametric solution (sigma, t) -> (x, u); eval_solution inverts the
// characteristic map at a query point and breakdown_time locates the gradient
// catastrophe where the map stops being injective.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypint/compat.hpp"
#include "hypint/expr.hpp"
#include "hypint/numerics.hpp"

namespace hypint {

class CharacteristicsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// sigma -> x(sigma, t) lost strict monotonicity at the query time: the
/// classical solution is multi-valued there.
class CrossedCharacteristicsError : public CharacteristicsError {
public:
    using CharacteristicsError::CharacteristicsError;
};

/// Query point outside the strip's stored (x, t) coverage.
class StripRangeError : public CharacteristicsError {
public:
    using CharacteristicsError::CharacteristicsError;
};

/// Scalar field of (x, t, u), the right-hand-side currency of this module.
using Field3 = std::function<double(double, double, double)>;

inline Field3 make_field3(const Expr& e) {
    return [e](double x, double t, double u) {
        return e.eval({{"x", x}, {"t", t}, {"u", u}});
    };
}

/// Data u = u0(x) on the line t = t_start, x in [x_lo, x_hi].
struct InitialData {
    std::function<double(double)> u0;
    double x_lo, x_hi;
    double t_start = 0.0;

    static InitialData from_expr(const Expr& e, double x_lo, double x_hi, double t_start = 0.0) {
        return {[e](double s) { return e.eval({{"sigma", s}}); }, x_lo, x_hi, t_start};
    }
};

class CharStrip {
public:
    std::vector<double> sigma;                 // n_sigma launch abscissae
    std::vector<double> times;                 // stored column times (uniform step)
    std::vector<std::vector<double>> x, u;     // [time][sigma]
    std::vector<std::vector<double>> xdot, udot;  // ODE right-hand sides at columns
    std::vector<char> monotone;                // per time: sigma -> x strictly monotone
    double h_t = 0.0;                          // signed effective step
    bool failed = false;                       // blow-up truncated the strip
    std::string failure;                       // sigma/t of the blow-up

    std::size_t n_sigma() const { return sigma.size(); }
    std::size_t n_times() const { return times.size(); }
    double t_start() const { return times.front(); }
    double t_last() const { return times.back(); }

    /// Column values at arbitrary t inside the stored range (cubic Hermite
    /// along each characteristic).
    void column_at(double t, std::vector<double>& xc, std::vector<double>& uc) const {
        std::size_t j = locate(t);
        if (near(t, times[j])) { xc = x[j]; uc = u[j]; return; }
        if (near(t, times[j + 1])) { xc = x[j + 1]; uc = u[j + 1]; return; }
        double dt = times[j + 1] - times[j];
        double w = (t - times[j]) / dt;
        xc.resize(n_sigma());
        uc.resize(n_sigma());
        for (std::size_t i = 0; i < n_sigma(); ++i) {
            xc[i] = hermite(w, dt, x[j][i], xdot[j][i], x[j + 1][i], xdot[j + 1][i]);
            uc[i] = hermite(w, dt, u[j][i], udot[j][i], u[j + 1][i], udot[j + 1][i]);
        }
    }

    bool contains_time(double t) const {
        double lo = std::min(t_start(), t_last()), hi = std::max(t_start(), t_last());
        double pad = 1e-12 * (1.0 + std::abs(hi));
        return t >= lo - pad && t <= hi + pad;
    }

private:
    friend CharStrip integrate_characteristics(const Field3&, const Field3&,
                                               const InitialData&, double, int, double);

    static double hermite(double w, double dt, double y0, double d0, double y1, double d1) {
        double w2 = w * w, w3 = w2 * w;
        return (2 * w3 - 3 * w2 + 1) * y0 + (w3 - 2 * w2 + w) * dt * d0 +
               (-2 * w3 + 3 * w2) * y1 + (w3 - w2) * dt * d1;
    }

    static bool near(double a, double b) {
        return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(b));
    }

    // Index j with t between times[j] and times[j+1] (times are uniform,
    // increasing or decreasing).
    std::size_t locate(double t) const {
        if (!contains_time(t))
            throw StripRangeError("time " + std::to_string(t) + " outside strip range [" +
                                  std::to_string(t_start()) + ", " + std::to_string(t_last()) + "]");
        double w = (t - times.front()) / h_t;
        auto j = static_cast<long>(std::floor(w));
        j = std::clamp<long>(j, 0, static_cast<long>(n_times()) - 2);
        return static_cast<std::size_t>(j);
    }
};

/// Integrate the characteristic system dx/dt = -lambda, du/dt = g by classical
/// RK4 from an n_sigma-node grid on the initial line until t_end. The
/// requested step h_t is shrunk to the nearest uniform divisor of the span. A
/// non-finite state truncates the strip at the last complete column and marks
/// it failed.
inline CharStrip integrate_characteristics(const Field3& lambda, const Field3& g,
                                           const InitialData& init, double t_end,
                                           int n_sigma, double h_t) {
    if (!(h_t > 0.0)) throw std::invalid_argument("integrate: h_t must be positive");
    if (t_end == init.t_start) throw std::invalid_argument("integrate: t_end equals t_start");
    if (n_sigma < 2) throw std::invalid_argument("integrate: need at least 2 characteristics");
    if (!(init.x_lo < init.x_hi)) throw std::invalid_argument("integrate: empty initial interval");

    double span = t_end - init.t_start;
    auto n_steps = static_cast<std::size_t>(std::ceil(std::abs(span) / h_t - 1e-9));
    n_steps = std::max<std::size_t>(n_steps, 1);
    double step = span / static_cast<double>(n_steps);

    CharStrip strip;
    strip.h_t = step;
    strip.sigma.resize(n_sigma);
    auto n = static_cast<std::size_t>(n_sigma);

    std::vector<double> xs(n), us(n), xd(n), ud(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = init.x_lo + (init.x_hi - init.x_lo) * static_cast<double>(i) / (n_sigma - 1);
        strip.sigma[i] = s;
        xs[i] = s;
        us[i] = init.u0(s);
    }

    auto rhs = [&](double t, double xv, double uv, double& dx, double& du) {
        dx = -lambda(xv, t, uv);
        du = g(xv, t, uv);
    };

    auto push_column = [&](double t) {
        for (std::size_t i = 0; i < n; ++i) rhs(t, xs[i], us[i], xd[i], ud[i]);
        // The initial column has x = sigma (increasing); the map must keep
        // that orientation. A reversed column means characteristics crossed.
        bool mono = true;
        for (std::size_t i = 0; i + 1 < n; ++i)
            if (!(xs[i + 1] > xs[i])) { mono = false; break; }
        strip.times.push_back(t);
        strip.x.push_back(xs);
        strip.u.push_back(us);
        strip.xdot.push_back(xd);
        strip.udot.push_back(ud);
        strip.monotone.push_back(mono);
    };

    push_column(init.t_start);

    std::vector<double> xn(n), un(n);
    for (std::size_t k = 0; k < n_steps; ++k) {
        double t = init.t_start + step * static_cast<double>(k);
        bool finite = true;
        for (std::size_t i = 0; i < n; ++i) {
            try {
                double k1x, k1u, k2x, k2u, k3x, k3u, k4x, k4u;
                rhs(t, xs[i], us[i], k1x, k1u);
                rhs(t + 0.5 * step, xs[i] + 0.5 * step * k1x, us[i] + 0.5 * step * k1u, k2x, k2u);
                rhs(t + 0.5 * step, xs[i] + 0.5 * step * k2x, us[i] + 0.5 * step * k2u, k3x, k3u);
                rhs(t + step, xs[i] + step * k3x, us[i] + step * k3u, k4x, k4u);
                xn[i] = xs[i] + step / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x);
                un[i] = us[i] + step / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
            } catch (const std::exception& e) {
                throw CharacteristicsError("trajectory sigma=" + std::to_string(strip.sigma[i]) +
                                           " failed near t=" + std::to_string(t) + ": " +
                                           e.what());
            }
            if (!std::isfinite(xn[i]) || !std::isfinite(un[i])) {
                strip.failed = true;
                strip.failure = "non-finite state on characteristic sigma=" +
                                std::to_string(strip.sigma[i]) + " near t=" +
                                std::to_string(t + step);
                finite = false;
                break;
            }
        }
        if (!finite) break;
        xs.swap(xn);
        us.swap(un);
        push_column(init.t_start + step * static_cast<double>(k + 1));
    }
    return strip;
}

/// Reduction-specific front end: lambda = branch * a, du/dt = g, with a
/// hyperbolicity guard (a > 0) along the trajectories.
inline CharStrip integrate_reduction(const PdeSpec& p, const Reduction& r,
                                     const InitialData& init, double t_end,
                                     int n_sigma, double h_t) {
    Expr a = p.a;
    Field3 lambda = [a, branch = r.branch](double x, double t, double u) {
        double av = a.eval({{"x", x}, {"t", t}, {"u", u}});
        if (!(av > 0.0))
            throw CharacteristicsError("hyperbolicity lost: a = " + std::to_string(av) +
                                       " at x=" + std::to_string(x) + ", t=" + std::to_string(t));
        return branch * av;
    };
    return integrate_characteristics(lambda, make_field3(r.g), init, t_end, n_sigma, h_t);
}

namespace detail {

// Cubic Lagrange interpolation through four consecutive column nodes,
// expressed as monomial coefficients in the local offset z in [0, 3].
struct Cubic {
    double c0, c1, c2, c3;
    double eval(double z) const { return ((c3 * z + c2) * z + c1) * z + c0; }
    double deriv(double z) const { return (3 * c3 * z + 2 * c2) * z + c1; }
    static Cubic through(const double* y) {
        return {y[0],
                -11.0 / 6.0 * y[0] + 3.0 * y[1] - 1.5 * y[2] + y[3] / 3.0,
                y[0] - 2.5 * y[1] + 2.0 * y[2] - 0.5 * y[3],
                -y[0] / 6.0 + 0.5 * y[1] - 0.5 * y[2] + y[3] / 6.0};
    }
};

}  // namespace detail

/// Invert the characteristic map at (x, t): locate sigma* with x(sigma*, t)=x
/// by bracketing on the stored column and Newton refinement on a local cubic
/// (|X(s) - x| <= 1e-12), then return u along the sigma* characteristic.
inline double eval_solution(const CharStrip& strip, double x, double t) {
    if (strip.n_times() < 2)
        throw StripRangeError("strip has fewer than two stored columns");
    std::vector<double> xc, uc;
    strip.column_at(t, xc, uc);

    std::size_t n = xc.size();
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (!(xc[i + 1] > xc[i]))
            throw CrossedCharacteristicsError(
                "characteristics crossed at t = " + std::to_string(t) +
                ": sigma -> x is not monotone");

    double lo = xc.front();
    double hi = xc.back();
    if (x < lo || x > hi)
        throw StripRangeError("x = " + std::to_string(x) + " outside strip x-range [" +
                              std::to_string(lo) + ", " + std::to_string(hi) + "] at t = " +
                              std::to_string(t));

    // bracket [i, i+1] containing x
    std::size_t ilo = 0, ihi = n - 1;
    while (ihi - ilo > 1) {
        std::size_t mid = (ilo + ihi) / 2;
        if (xc[mid] <= x) ilo = mid;
        else ihi = mid;
    }
    if (xc[ilo] == x) return uc[ilo];
    if (xc[ihi] == x) return uc[ihi];

    if (n < 4) {  // linear fallback for tiny strips
        double w = (x - xc[ilo]) / (xc[ihi] - xc[ilo]);
        return uc[ilo] + w * (uc[ihi] - uc[ilo]);
    }

    std::size_t j0 = std::min(std::max<long>(static_cast<long>(ilo) - 1, 0),
                              static_cast<long>(n) - 4);
    auto X = detail::Cubic::through(&xc[j0]);
    auto U = detail::Cubic::through(&uc[j0]);

    double zlo = static_cast<double>(ilo - j0), zhi = static_cast<double>(ihi - j0);
    RootOptions opt;
    opt.f_tol = 1e-12 * (1.0 + std::abs(x));
    double z = solve_newton_bracketed([&](double s) { return X.eval(s) - x; },
                                      [&](double s) { return X.deriv(s); }, zlo, zhi, opt);
    return U.eval(z);
}

/// Earliest time at which sigma -> x(sigma, t) loses strict monotonicity,
/// refined by bisection between adjacent stored columns; nullopt if the map
/// stays injective over the whole strip.
inline std::optional<double> breakdown_time(const CharStrip& strip) {
    if (strip.n_times() < 2)
        throw StripRangeError("strip has fewer than two stored columns");
    std::size_t bad = strip.n_times();
    for (std::size_t j = 0; j < strip.n_times(); ++j)
        if (!strip.monotone[j]) { bad = j; break; }
    if (bad == strip.n_times()) return std::nullopt;
    if (bad == 0) return strip.times.front();

    // min adjacent gap of the column at time tau (sign flips at breakdown)
    std::vector<double> xc, uc;
    auto min_gap = [&](double tau) {
        strip.column_at(tau, xc, uc);
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < xc.size(); ++i)
            m = std::min(m, xc[i + 1] - xc[i]);
        return m;
    };

    double ta = strip.times[bad - 1], tb = strip.times[bad];
    for (int it = 0; it < 8; ++it) {
        double tm = 0.5 * (ta + tb);
        if (min_gap(tm) > 0.0) ta = tm;
        else tb = tm;
    }
    return 0.5 * (ta + tb);
}

/// CSV serialization: header sigma,t,x,u; one row per (time, characteristic),
/// time-major; 17 significant digits, LF newlines.
inline void write_csv(const CharStrip& strip, std::ostream& os) {
    os << "sigma,t,x,u\n";
    char buf[160];
    for (std::size_t j = 0; j < strip.n_times(); ++j)
        for (std::size_t i = 0; i < strip.n_sigma(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", strip.sigma[i],
                          strip.times[j], strip.x[j][i], strip.u[j][i]);
            os << buf;
        }
}

}  // namespace hypint
