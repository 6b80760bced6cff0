#include <doctest.h>

#include <cmath>
#include <random>

#include "hypint/compat.hpp"

using namespace hypint;

namespace {

SampleBox small_box() {
    SampleBox b;
    b.x_lo = 0.1; b.x_hi = 1.0;
    b.t_lo = 0.1; b.t_hi = 1.0;
    b.u_lo = 0.5; b.u_hi = 2.0;
    b.ux_lo = -1.0; b.ux_hi = 1.0;
    b.nx = b.nt = b.nu = 4; b.nux = 5;
    return b;
}

}  // namespace

TEST_CASE("reduction rejects g depending on gradients") {
    CHECK_THROWS(Reduction(1, parse_expr("ux + u")));
    CHECK_THROWS(Reduction(2, parse_expr("u")));
    CHECK_NOTHROW(Reduction(-1, parse_expr("2*sqrt(u)")));
}

TEST_CASE("con1 residual vanishes for u_tt = u^2 u_xx - u_t + (2/u) u_t^2 with g = u") {
    PdeSpec p{parse_expr("u"), parse_expr("-ut + (2/u)*ut^2")};
    Reduction r(1, parse_expr("u"));
    CHECK(std::abs(con1_residual(p, r, {0.3, 0.7, 1.2, -0.5})) <= 1e-10);

    // and over a whole box
    SampleBox b = small_box();
    CHECK(max_con1_residual(p, r, b).max_abs <= 1e-10);
}

TEST_CASE("con1 residual vanishes trivially for the plain wave equation") {
    PdeSpec p{parse_expr("1"), parse_expr("0")};
    Reduction r(1, parse_expr("0"));
    CHECK(con1_residual(p, r, {0.0, 0.0, 1.0, 2.0}) == 0.0);
    CHECK(con1_residual(p, r, {-3.0, 5.0, -2.0, 0.1}) == 0.0);
}

TEST_CASE("con1 residual vanishes for the constant astigmatism reduction g = 2 sqrt(u)") {
    PdeSpec p{parse_expr("1/u"), parse_expr("-2*ux^2/u^3 + 2")};
    Reduction r(1, parse_expr("2*sqrt(u)"));
    CHECK(std::abs(con1_residual(p, r, {0.5, 0.2, 4.0, 1.0})) <= 1e-10);

    SampleBox b = small_box();
    b.u_lo = 1.0; b.u_hi = 4.0;
    CHECK(max_con1_residual(p, r, b).max_abs <= 1e-10);
}

TEST_CASE("con1 residual detects a perturbed g") {
    PdeSpec p{parse_expr("u"), parse_expr("-ut + (2/u)*ut^2")};
    Reduction bad(1, parse_expr("1.1*u"));
    SampleBox b = small_box();
    CHECK(max_con1_residual(p, bad, b).max_abs >= 1e-3);
}

TEST_CASE("determinant residual expands to a^2 Fp^2 - Fq^2") {
    Point5 pt{0.4, 0.8, 1.5, 0.3, -0.2};

    Expr F1 = parse_expr("p - 2*q");
    CHECK(det_residual(F1, 1.0, pt) == doctest::Approx(-3.0));

    Expr F2 = parse_expr("p");
    CHECK(det_residual(F2, 3.0, pt) == doctest::Approx(9.0));
}

TEST_CASE("property: determinant residual vanishes on F = p - s*a*q - g for all s, a, g") {
    std::mt19937 rng(4242);
    std::uniform_real_distribution<double> av(0.2, 5.0), pv(-2.0, 2.0);
    const char* gs[] = {"u", "2*sqrt(u)", "sin(x)*t", "u/x", "exp(t)*u^2"};
    for (int trial = 0; trial < 200; ++trial) {
        double a_val = av(rng);
        int s = (rng() % 2) ? 1 : -1;
        Expr g = parse_expr(gs[rng() % 5]);
        Expr F = Expr::variable("p") - Expr::constant(s * a_val) * Expr::variable("q") - g;
        Point5 pt{pv(rng) + 3.0, pv(rng) + 3.0, pv(rng) + 3.0, pv(rng), pv(rng)};
        CHECK(std::abs(det_residual(F, a_val, pt)) <= 1e-12 * (1.0 + a_val * a_val));
    }
}

TEST_CASE("classify_f recognizes the quasilinear catalog form (f0)") {
    // f = 2 a a_u ux^2 + Phi(u) ux + h(x,t) + q(u) with a = u, Phi = u^2,
    // h = x + t, q = u^3
    PdeSpec p{parse_expr("u"), parse_expr("2*u*ux^2 + u^2*ux + x + t + u^3")};
    auto c = classify_f(p, small_box());
    REQUIRE(c.has_value());
    CHECK(c->form == FForm::F0);
    REQUIRE(c->coefficients.size() == 3);
    Env e{{"x", 0.3}, {"t", 0.4}, {"u", 1.5}};
    CHECK(c->coefficients[0].first == "A0");
    CHECK(c->coefficients[0].second.eval(e) == doctest::Approx(0.3 + 0.4 + std::pow(1.5, 3)));
    CHECK(c->coefficients[1].second.eval(e) == doctest::Approx(1.5 * 1.5));
    CHECK(c->coefficients[2].second.eval(e) == doctest::Approx(2.0 * 1.5));
}

TEST_CASE("classify_f rejects a cubic gradient term") {
    PdeSpec p{parse_expr("1"), parse_expr("ux^3")};
    CHECK(!classify_f(p, small_box()).has_value());
}

TEST_CASE("classify_f maps f = 0 to the degenerate (f0)") {
    PdeSpec p{parse_expr("1"), parse_expr("0")};
    auto c = classify_f(p, small_box());
    REQUIRE(c.has_value());
    CHECK(c->form == FForm::F0);
    for (auto& [name, coeff] : c->coefficients)
        CHECK(coeff.simplified().constant_value() == 0.0);
}

TEST_CASE("classify_f maps the u_t-quadratic right-hand side to (f2)") {
    PdeSpec p{parse_expr("u"), parse_expr("-ut + (2/u)*ut^2")};
    auto c = classify_f(p, small_box());
    REQUIRE(c.has_value());
    CHECK(c->form == FForm::F2);
    Env e{{"x", 0.0}, {"t", 0.0}, {"u", 2.0}};
    CHECK(c->coefficients[1].second.eval(e) == doctest::Approx(-1.0));  // B2
    CHECK(c->coefficients[2].second.eval(e) == doctest::Approx(1.0));   // C2 = 2/u
}

TEST_CASE("classify_f recognizes mixed forms and non-polynomial rejection") {
    CHECK(classify_f({parse_expr("1"), parse_expr("ux*ut + ut + x")}, small_box())->form == FForm::F3);
    CHECK(classify_f({parse_expr("1"), parse_expr("ut^2 + ux + u")}, small_box())->form == FForm::F4);
    CHECK(classify_f({parse_expr("1"), parse_expr("ux*ut + ux")}, small_box())->form == FForm::F5);
    CHECK(!classify_f({parse_expr("1"), parse_expr("sin(ux)")}, small_box()).has_value());
    CHECK(!classify_f({parse_expr("1"), parse_expr("ux^2*ut")}, small_box()).has_value());
}

TEST_CASE("property: classification is stable under box refinement") {
    const char* rhss[] = {
        "2*u*ux^2 + u^2*ux + x + t", "-ut + (2/u)*ut^2", "0",
        "ux*ut + ut + x", "ut^2 + ux + u", "x*ut + t*ux",
    };
    for (const char* text : rhss) {
        PdeSpec p{parse_expr("u"), parse_expr(text)};
        SampleBox b = small_box();
        SampleBox fine = b;
        fine.nx *= 2; fine.nt *= 2; fine.nu *= 2; fine.nux *= 2;
        auto c1 = classify_f(p, b);
        auto c2 = classify_f(p, fine);
        REQUIRE(c1.has_value() == c2.has_value());
        if (c1) CHECK(c1->form == c2->form);
    }
}
