#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <qtm/dressed.hpp>

#include <cmath>

using namespace qtm;

static ModelParams make(double zeta, double h, double T, double J = 1.0) {
    ModelParams p;
    p.zeta = zeta; p.h = h; p.T = T; p.J = J;
    fill_derived(p);
    return p;
}

TEST_CASE("free-fermion point: closed-form Fermi data") {
    ModelParams p = make(PI / 2, 2.0, 0.1);
    DressedSuite S = dressed_suite(p);
    double q_exact = 0.5 * std::acosh(2.0);
    CHECK(std::abs(S.q - q_exact) < 1e-8);
    CHECK(std::abs(S.vF - 2.0 * std::sqrt(3.0)) < 1e-8);
    CHECK(std::abs(S.mom_at(S.q).real() - PI / 3) < 1e-8);
    // dressing is trivial: Z = 1, phase shift vanishes
    for (double l : {-0.5, 0.0, 0.3, q_exact}) {
        CHECK(std::abs(S.Z_at(l) - 1.0) < 1e-8);
        CHECK(std::abs(S.phi_at(l, 0.2)) < 1e-8);
        CHECK(std::abs(S.eps_at(l) - bare_energy(cplx(l, 0), p)) < 1e-8);
    }
}

TEST_CASE("interacting anchor values stay frozen") {
    ModelParams p = make(1.3, 1.0, 0.1);
    DressedSuite S = dressed_suite(p);
    CHECK(S.q == doctest::Approx(0.96358776832982973).epsilon(1e-10));
    CHECK(S.vF == doctest::Approx(4.5613231353976316).epsilon(1e-9));
    CHECK(std::abs(S.tau - cplx(0.85659319355281172, 0.0)) < 1e-9);
    CHECK(S.Z_at(S.q).real() == doctest::Approx(0.92553889623872776).epsilon(1e-9));
    CHECK(S.mom_at(S.q).real() == doctest::Approx(1.3861026451903822).epsilon(1e-9));
    CHECK(fredholm_det_segment(p, S.q) ==
          doctest::Approx(1.1773148974552221).epsilon(1e-9));
}

TEST_CASE("dressed energy vanishes at the Fermi point and is even") {
    ModelParams p = make(1.3, 1.0, 0.1);
    DressedSuite S = dressed_suite(p);
    CHECK(std::abs(S.eps_at(S.q)) < 1e-9);
    CHECK(std::abs(S.eps_at(-S.q)) < 1e-9);
    for (double l : {0.2, 0.7, 1.4}) {
        CHECK(std::abs(S.eps_at(l) - S.eps_at(-l)) < 1e-10);
        CHECK(std::abs(S.Z_at(l) - S.Z_at(-l)) < 1e-10);
        CHECK(std::abs(S.mom_at(l) + S.mom_at(-l)) < 1e-10);
    }
    // inside the Fermi zone the dressed energy is negative, outside positive
    CHECK(S.eps_at(0.0).real() < 0.0);
    CHECK(S.eps_at(S.q + 0.5).real() > 0.0);
}

TEST_CASE("Fermi velocity equals energy slope over momentum slope") {
    for (auto [zeta, h] : {std::pair{1.3, 1.0}, std::pair{0.9, 0.5}}) {
        ModelParams p = make(zeta, h, 0.1);
        DressedSuite S = dressed_suite(p);
        double vF = (S.eps_prime_at(S.q) / S.pprime_at(S.q)).real();
        CHECK(S.vF == doctest::Approx(vF).epsilon(1e-10));
        CHECK(S.vF > 0.0);
    }
}

TEST_CASE("derivatives agree with finite differences") {
    ModelParams p = make(1.3, 1.0, 0.1);
    DressedSuite S = dressed_suite(p);
    double hh = 1e-6;
    for (cplx l : {cplx(0.3, 0.0), cplx(0.6, -0.2)}) {
        cplx fd = (S.eps_at(l + hh) - S.eps_at(l - hh)) / (2 * hh);
        CHECK(std::abs(S.eps_prime_at(l) - fd) < 1e-7);
        cplx fdZ = (S.Z_at(l + hh) - S.Z_at(l - hh)) / (2 * hh);
        CHECK(std::abs(S.Z_prime_at(l) - fdZ) < 1e-7);
        cplx fdphi = (S.phi_at(l + hh, 0.4) - S.phi_at(l - hh, 0.4)) / (2 * hh);
        CHECK(std::abs(S.phi_dlam_at(l, 0.4) - fdphi) < 1e-7);
    }
}

TEST_CASE("phase-shift symmetries at the Fermi edge") {
    ModelParams p = make(1.3, 1.0, 0.1);
    DressedSuite S = dressed_suite(p);
    cplx Z = S.Z_at(S.q);
    cplx lhs1 = 1.0 + S.phi_at(S.q, S.q) - 1.0 / (2.0 * Z) - Z / 2.0;
    cplx lhs2 = S.phi_at(S.q, -S.q) - 1.0 / (2.0 * Z) + Z / 2.0;
    CHECK(std::abs(lhs1) < 1e-8);
    CHECK(std::abs(lhs2) < 1e-8);
}

TEST_CASE("exterior representation reproduces the dressed energy") {
    ModelParams p = make(1.3, 1.0, 0.1);
    DressedSuite S = dressed_suite(p);
    CHECK(dual_representation_check(S) < 1e-6);
}

TEST_CASE("continued energy agrees with the plain one on the segment strip") {
    ModelParams p = make(1.3, 1.0, 0.1);
    DressedSuite S = dressed_suite(p);
    for (cplx l : {cplx(0.3, 0.2), cplx(-0.8, -0.3), cplx(1.5, 0.0)}) {
        CHECK(std::abs(eps_first_sheet(l, S) - S.eps_at(l)) < 1e-12);
    }
    // outside the Fermi zone on the real line there is no extra term
    CHECK(std::abs(eps_c_continued(cplx(2.0, 0.0), S) - S.eps_at(2.0)) < 1e-10);
}

TEST_CASE("domain membership tracks the sign of the real part") {
    ModelParams p = make(1.3, 1.0, 0.1);
    DressedSuite S = dressed_suite(p);
    CHECK(in_D_eps_ipi(cplx(0.0, -0.1), S).inside);       // well inside
    CHECK_FALSE(in_D_eps_ipi(cplx(2.0, 0.0), S).inside);  // eps > 0
    CHECK_FALSE(in_D_eps_ipi(cplx(0.0, -1.0), S).inside); // below the strip
    CHECK_FALSE(in_D_eps_ipi_lower(cplx(0.0, 0.1), S).inside);  // upper half
    CHECK(in_D_eps_ipi_lower(cplx(0.0, -0.1), S).inside);
}

TEST_CASE("Fermi point moves with the field") {
    ModelParams p1 = make(1.3, 0.5, 0.1);
    ModelParams p2 = make(1.3, 2.0, 0.1);
    double q1 = fermi_point(p1), q2 = fermi_point(p2);
    CHECK(q1 > q2);  // larger field shrinks the Fermi zone
    CHECK(q2 > 0.0);
}
