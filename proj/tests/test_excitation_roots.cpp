#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <qtm/excitations.hpp>

#include <cmath>

using namespace qtm;

static ModelParams make(double zeta, double h, double T, int N = 0) {
    ModelParams p;
    p.zeta = zeta; p.h = h; p.T = T; p.J = 1.0; p.trotter_N = N;
    fill_derived(p);
    return p;
}

TEST_CASE("quantisation targets follow the half-odd ladder") {
    double T = 0.1;
    RootSpec pR{+1, true, 0};
    CHECK(std::abs(root_target(pR, T) - 2.0 * PI * I_UNIT * T * 0.5) < 1e-15);
    RootSpec hR{+1, false, 1};
    CHECK(std::abs(root_target(hR, T) + 2.0 * PI * I_UNIT * T * 1.5) < 1e-15);
    RootSpec pL{-1, true, 0};
    CHECK(std::abs(root_target(pL, T) + 2.0 * PI * I_UNIT * T * 0.5) < 1e-15);
}

TEST_CASE("particle-hole pair on the right branch lands on frozen positions") {
    ModelParams p = make(1.3, 1.0, 0.05);
    DressedSuite S = dressed_suite(p);
    std::vector<RootSpec> spec = {RootSpec{+1, true, 0}, RootSpec{+1, false, 0}};
    QuantisationResult R = solve_quantisation(S, 0, spec, {});
    REQUIRE(R.roots.size() == 2u);
    CHECK(R.root_residual < 1e-10);
    // particle above the axis, complex-conjugate hole below
    CHECK(std::abs(R.roots[0] - cplx(0.959619, 0.0713505)) < 1e-4);
    CHECK(std::abs(R.roots[1] - cplx(0.959619, -0.0713505)) < 1e-4);
    // the quantisation condition holds through the solved field
    for (size_t a = 0; a < spec.size(); ++a)
        CHECK(std::abs(R.sol.u_at(R.roots[a]) - root_target(spec[a], p.T)) <
              1e-9);
    RootClassification c = classify_roots(R);
    CHECK(c.n_particles == 1);
    CHECK(c.n_holes == 1);
    CHECK(c.particles_upper);
    CHECK(c.holes_enclosed);
    CHECK(c.n_strings == 0);
    CHECK(c.n_singular == 0);
    CHECK(c.admissible);
}

TEST_CASE("lone-particle sector solves with shifted spin") {
    ModelParams p = make(1.3, 1.0, 0.05);
    DressedSuite S = dressed_suite(p);
    std::vector<RootSpec> spec = {RootSpec{+1, true, 0}};
    QuantisationResult R = solve_quantisation(S, -1, spec, {});
    CHECK(R.root_residual < 1e-10);
    CHECK(R.roots[0].imag() > 0.0);
    CHECK(R.sol.converged);
}

TEST_CASE("low-temperature expansion orders converge at the expected rates") {
    std::vector<RootSpec> spec = {RootSpec{+1, true, 0}, RootSpec{+1, false, 0}};
    std::vector<double> e1, e2;
    for (double T : {0.05, 0.025}) {
        ModelParams p = make(1.3, 1.0, T);
        DressedSuite S = dressed_suite(p);
        QuantisationResult R = solve_quantisation(S, 0, spec, {});
        RootExpansion E = root_lowT_expansion(S, 0, spec);
        double d1 = 0.0, d2 = 0.0;
        for (size_t a = 0; a < spec.size(); ++a) {
            d1 = std::max(d1, std::abs(R.roots[a] - E.order1[a]));
            d2 = std::max(d2, std::abs(R.roots[a] - E.order2[a]));
        }
        e1.push_back(d1);
        e2.push_back(d2);
    }
    double r1 = e1[0] / e1[1], r2 = e2[0] / e2[1];
    CHECK(r1 > 2.5);   // order 1 residual ~ T^2: ratio about 4
    CHECK(r1 < 5.5);
    CHECK(r2 > 4.0);   // order 2 residual ~ T^3: ratio about 8
    CHECK(r2 < 12.0);
}

TEST_CASE("expansion seeds agree with the solved roots to leading order") {
    ModelParams p = make(1.3, 1.0, 0.05);
    DressedSuite S = dressed_suite(p);
    std::vector<RootSpec> spec = {RootSpec{+1, true, 0}};
    QuantisationResult R = solve_quantisation(S, -1, spec, {});
    RootExpansion E = root_lowT_expansion(S, -1, spec);
    CHECK(std::abs(R.roots[0] - E.order0[0]) < 0.1);
    CHECK(std::abs(R.roots[0] - E.order1[0]) <
          std::abs(R.roots[0] - E.order0[0]));
}

TEST_CASE("finite-Trotter roots converge toward the infinite-Trotter limit") {
    ModelParams base = make(1.3, 1.0, 0.2);
    std::vector<RootSpec> spec = {RootSpec{+1, true, 0}, RootSpec{+1, false, 0}};
    TrotterRootStudy st =
        trotter_root_convergence(base, 0, spec, {64, 128, 256});
    REQUIRE(st.errors.size() == 3u);
    CHECK(st.errors[1] < st.errors[0]);
    CHECK(st.errors[2] < st.errors[1]);
    CHECK(st.slope < -1.0 + 0.3);
    CHECK(st.u_errors[2] < st.u_errors[0]);
    CHECK(st.u_slope < -1.0 + 0.3);
}
