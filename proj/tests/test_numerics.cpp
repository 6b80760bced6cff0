#include <doctest.h>

#include <cmath>

#include "hypint/numerics.hpp"

using namespace hypint;

TEST_CASE("adaptive Simpson hits tight tolerances") {
    double v = integrate_simpson([](double x) { return std::sin(x); }, 0.0, M_PI, 1e-12);
    CHECK(std::abs(v - 2.0) < 1e-11);

    // reversed limits flip the sign
    double w = integrate_simpson([](double x) { return x * x; }, 2.0, 0.0, 1e-12);
    CHECK(w == doctest::Approx(-8.0 / 3.0).epsilon(1e-12));

    // mildly singular derivative at the endpoint still converges
    double s = integrate_simpson([](double x) { return std::sqrt(x); }, 0.0, 1.0, 1e-10);
    CHECK(std::abs(s - 2.0 / 3.0) < 1e-8);
}

TEST_CASE("bracketed Newton with bisection fallback") {
    auto f = [](double x) { return x * x * x - 2.0; };
    auto df = [](double x) { return 3.0 * x * x; };
    double r = solve_newton_bracketed(f, df, 0.0, 4.0);
    CHECK(r == doctest::Approx(std::cbrt(2.0)).epsilon(1e-13));

    // numeric-derivative variant
    double r2 = solve_bracketed([](double x) { return std::cos(x) - x; }, 0.0, 1.5);
    CHECK(std::abs(std::cos(r2) - r2) < 1e-11);

    CHECK_THROWS_AS(solve_bracketed([](double x) { return 1.0 + x * x; }, -1.0, 1.0), SolveError);
}

TEST_CASE("bracket expansion") {
    double lo = 1.0, hi = 2.0;
    bool ok = expand_bracket([](double x) { return x - 40.0; }, lo, hi);
    CHECK(ok);
    CHECK(lo <= 40.0);
    CHECK(hi >= 40.0);

    lo = -1.0; hi = 1.0;
    CHECK(!expand_bracket([](double x) { return 1.0 + x * x; }, lo, hi, 10));
}

TEST_CASE("finite-difference stencils achieve their order") {
    auto f = [](double x) { return std::exp(std::sin(x)); };
    double x = 0.7;
    double exact1 = std::cos(x) * std::exp(std::sin(x));
    double exact2 = (std::cos(x) * std::cos(x) - std::sin(x)) * std::exp(std::sin(x));

    double e2 = std::abs(fd_derivative(f, x, 1e-3, 2) - exact1);
    double e2h = std::abs(fd_derivative(f, x, 5e-4, 2) - exact1);
    CHECK(e2 / e2h > 3.0);  // ~4x for order 2

    double e4 = std::abs(fd_derivative(f, x, 1e-2, 4) - exact1);
    double e4h = std::abs(fd_derivative(f, x, 5e-3, 4) - exact1);
    CHECK(e4 / e4h > 12.0);  // ~16x for order 4

    CHECK(std::abs(fd_second(f, x, 1e-3, 4) - exact2) < 1e-9);
}
