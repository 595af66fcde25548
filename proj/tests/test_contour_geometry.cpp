#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <qtm/contours.hpp>

#include <cmath>
#include <sstream>

using namespace qtm;

static ModelParams make(double zeta, double h, double T, int N = 0) {
    ModelParams p;
    p.zeta = zeta; p.h = h; p.T = T; p.J = 1.0; p.trotter_N = N;
    fill_derived(p);
    return p;
}

TEST_CASE("field inverse solves u(z) = s from a nearby seed") {
    ModelParams p = make(1.3, 1.0, 0.1);
    DressedSuite S = dressed_suite(p);
    UField u = eps_field(S);
    cplx target(0.2, -0.05);
    cplx z = field_inverse(u, target, cplx(1.0, 0.0));
    CHECK(std::abs(u.val(z) - target) < 1e-11);
    // round-trip through the dedicated Fermi-zone inverse
    cplx zr = eps_inverse(S, target, +1);
    CHECK(std::abs(S.eps_at(zr) - target) < 1e-11);
    cplx zl = eps_inverse(S, target, -1);
    CHECK(std::abs(S.eps_at(zl) - target) < 1e-11);
    CHECK(zr.real() > 0.0);
    CHECK(zl.real() < 0.0);
}

TEST_CASE("level-curve tracer stays on the level set") {
    ModelParams p = make(1.3, 1.0, 0.1);
    DressedSuite S = dressed_suite(p);
    UField u = eps_field(S);
    cplx center(0.0, -p.zeta / 2);
    auto pts = trace_fermi_curve(u, cplx(S.q, 0.0), cplx(0.0, -1.0), center,
                                 p.c_d * p.T, 0.02, 200);
    REQUIRE(pts.size() > 10u);
    for (size_t i = 0; i < pts.size(); i += 5)
        CHECK(std::abs(u.val(pts[i]).real()) < 1e-8);
}

TEST_CASE("reference contour winds once around the lower pole") {
    ModelParams p = make(1.3, 1.0, 0.1);
    DressedSuite S = dressed_suite(p);
    Contour C = build_ref_contour(S);
    CHECK(winding_number(C, C.center) == 1);
    CHECK(winding_number(C, C.center + cplx(0.0, -1.2)) == 0);
    CHECK(winding_number(C, cplx(6.0, -0.3)) == 0);
    // Cauchy integral reproduces residue-style values through the grid
    cplx s = C.grid.integrate([&](cplx z) { return 1.0 / (z - C.center); });
    CHECK(std::abs(s - 2.0 * PI * I_UNIT) < 1e-8);
}

TEST_CASE("contour endpoints are zeros of the field") {
    ModelParams p = make(1.3, 1.0, 0.1);
    DressedSuite S = dressed_suite(p);
    UField u = eps_field(S);
    Contour C = build_ref_contour(S);
    CHECK(std::abs(u.val(C.qR)) < 1e-10);
    CHECK(std::abs(u.val(C.qL)) < 1e-10);
    CHECK(std::abs(C.qR.real() - S.q) < 0.2);
    CHECK(std::abs(C.qL.real() + S.q) < 0.2);
    CHECK(C.delta > 0.0);
    CHECK(C.radius == doctest::Approx(p.c_d * p.T));
}

TEST_CASE("contour fits inside the strip and below the real axis near the pole") {
    ModelParams p = make(1.3, 1.0, 0.1);
    DressedSuite S = dressed_suite(p);
    Contour C = build_ref_contour(S);
    for (cplx z : C.grid.nodes) {
        CHECK(std::abs(z.imag()) < PI / 2);
        CHECK(std::abs(z - C.center) > 0.9 * C.radius);
    }
}

TEST_CASE("window shrinks as temperature decreases") {
    double d1, d2;
    {
        DressedSuite S = dressed_suite(make(1.3, 1.0, 0.1));
        d1 = build_ref_contour(S).delta;
    }
    {
        DressedSuite S = dressed_suite(make(1.3, 1.0, 0.05));
        d2 = build_ref_contour(S).delta;
    }
    CHECK(d2 < d1);
    // -M T ln T scaling
    CHECK(d1 == doctest::Approx(-3.0 * 0.1 * std::log(0.1)).epsilon(1e-6));
}

TEST_CASE("CSV export follows the fixed schema") {
    ModelParams p = make(1.3, 1.0, 0.1);
    DressedSuite S = dressed_suite(p);
    Contour C = build_ref_contour(S);
    std::ostringstream os;
    write_contour_csv(C, os);
    std::istringstream is(os.str());
    std::string line;
    REQUIRE(std::getline(is, line));
    CHECK(line == "curve_id,idx,re,im");
    int rows = 0, commas_ok = 1;
    while (std::getline(is, line)) {
        ++rows;
        int commas = 0;
        for (char c : line) commas += (c == ',');
        if (commas != 3) commas_ok = 0;
    }
    CHECK(rows == C.grid.size());
    CHECK(commas_ok == 1);
}

TEST_CASE("finite-Trotter field supports the same construction") {
    ModelParams p = make(1.3, 1.0, 0.2, 128);
    DressedSuite S = dressed_suite(p);
    CurvedSuite C = curved_suite(S, build_ref_contour(S).grid);
    UField u = wn_field(C);
    Contour K = adapt_contour(u, p, build_ref_contour(S));
    CHECK(winding_number(K, K.center) == 1);
    CHECK(std::abs(u.val(K.qR)) < 1e-9);
}
