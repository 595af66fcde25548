#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <qtm/bethe.hpp>
#include <qtm/observables.hpp>

#include <cmath>

using namespace qtm;

static ModelParams make(double zeta, double h, double T, int N = 0) {
    ModelParams p;
    p.zeta = zeta; p.h = h; p.T = T; p.J = 1.0; p.trotter_N = N;
    fill_derived(p);
    return p;
}

static NlieSolution& solved_n16() {
    static DressedSuite S = dressed_suite(make(1.3, 1.0, 0.5, 16));
    static NlieSolution sol = fixed_point_solve(S, ExcitationSet{});
    return sol;
}

TEST_CASE("root extraction finds one root per quantisation level") {
    BetheRoots br = extract_bethe_roots(solved_n16(), {});
    CHECK(br.n_expected == 16);
    CHECK(int(br.roots.size()) == 16);
    CHECK(br.n_right == 8);
    CHECK(br.n_left == 8);
    CHECK(br.n_inadmissible == 0);
    CHECK(br.n_string_like == 0);
    // roots come in mirror pairs l -> -conj(l) and lie below the axis
    for (int a = 0; a < 8; ++a) {
        CHECK(br.roots[a].imag() < 0.0);
        CHECK(std::abs(br.roots[8 + a] + std::conj(br.roots[a])) < 1e-7);
    }
    // every root satisfies 1 + e^{-u/T} = 0 through the solved field
    const NlieSolution& sol = solved_n16();
    for (cplx r : br.roots) {
        cplx u = sol.u_at(r);
        double level = std::abs(std::cos(0.5 * u.imag() / sol.p.T)) +
                       std::abs(u.real());
        CHECK(level < 1e-6);
    }
}

TEST_CASE("polishing drives the exact equations to machine precision") {
    BetheRoots br = extract_bethe_roots(solved_n16(), {});
    const ModelParams& p = solved_n16().p;
    auto raw = bae_residuals(br.roots, p);
    std::vector<cplx> pol = polish_bethe_roots(br.roots, p);
    auto fin = bae_residuals(pol, p);
    double raw_max = *std::max_element(raw.begin(), raw.end());
    double fin_max = *std::max_element(fin.begin(), fin.end());
    CHECK(fin_max < 1e-10);
    CHECK(fin_max < raw_max);
    // polishing moves the roots only slightly
    for (size_t a = 0; a < pol.size(); ++a)
        CHECK(std::abs(pol[a] - br.roots[a]) < 1e-3);
}

TEST_CASE("perturbing a root breaks the equations") {
    BetheRoots br = extract_bethe_roots(solved_n16(), {});
    const ModelParams& p = solved_n16().p;
    std::vector<cplx> pol = polish_bethe_roots(br.roots, p);
    auto base = bae_residuals(pol, p);
    std::vector<cplx> bad = pol;
    bad[3] += cplx(1e-4, -5e-5);
    auto pert = bae_residuals(bad, p);
    CHECK(pert[3] > 50.0 * (base[3] + 1e-14));
}

TEST_CASE("coinciding-shifted pairs are rejected as inadmissible") {
    ModelParams p = make(1.3, 1.0, 0.5, 16);
    std::vector<cplx> bad = {cplx(0.1, -0.2), cplx(0.1, -0.2) + cplx(0, p.zeta)};
    CHECK_THROWS_AS(bae_residuals(bad, p), QtmError);
}

TEST_CASE("eigenvalue product matches the integral representation") {
    BetheClosure bc = bethe_closure(solved_n16(), {});
    CHECK(bc.max_bae_residual < 1e-6);
    CHECK(bc.eigenvalue_rel_dev < 1e-3);
    CHECK(std::abs(bc.log_lambda_product.imag() -
                   bc.log_lambda_integral.imag()) < 1e-3);
}

TEST_CASE("product evaluation rejects spectral-parameter collisions") {
    const ModelParams& p = solved_n16().p;
    BetheRoots br = extract_bethe_roots(solved_n16(), {});
    cplx bad_xi = br.roots[0] + cplx(0.0, p.zeta / 2.0);
    CHECK_THROWS_AS(log_eigenvalue_product(br.roots, p, bad_xi), QtmError);
    CHECK_THROWS_AS(log_eigenvalue_product(br.roots, make(1.3, 1.0, 0.5, 0)),
                    QtmError);
}

TEST_CASE("norm determinant factorises into contour times finite block") {
    BetheRoots br = extract_bethe_roots(solved_n16(), {});
    GaudinFactorisation g = gaudin_factorisation(solved_n16(), br);
    CHECK(g.residual < 1e-3);
    CHECK(std::abs(g.discrete) > 0.1);
    CHECK(std::abs(g.fredholm) > 0.1);
    // the dominant state has no particle/hole roots: the block is trivial
    CHECK(std::abs(g.finite_block - 1.0) < 1e-12);
}

TEST_CASE("refined quadrature tightens the product-integral agreement") {
    DressedSuite S = dressed_suite(make(1.3, 1.0, 0.5, 16));
    NlieOptions fine;
    fine.tol = 1e-12;
    fine.copt.win_order = 40;
    fine.copt.rail_order = 24;
    fine.copt.rail_panels = 12;
    fine.copt.arc_order = 24;
    fine.copt.arc_panels = 10;
    NlieSolution sol = fixed_point_solve(S, ExcitationSet{}, fine);
    BetheClosure bc = bethe_closure(sol, {});
    CHECK(bc.eigenvalue_rel_dev < 1e-5);
    CHECK(bc.max_root_shift < 1e-5);
    CHECK(bc.gaudin.residual < 1e-4);
}
