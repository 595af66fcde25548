#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <qtm/observables.hpp>

#include <cmath>

using namespace qtm;

static ModelParams make(double zeta, double h, double T, int N = 0) {
    ModelParams p;
    p.zeta = zeta; p.h = h; p.T = T; p.J = 1.0; p.trotter_N = N;
    fill_derived(p);
    return p;
}

TEST_CASE("dressed momentum density matches the Fermi-edge value") {
    ModelParams p = make(1.3, 1.0, 0.1);
    DressedSuite S = dressed_suite(p);
    DressedQuantity D = dress_quantity(S, momentum_quantity(p));
    CHECK(std::abs(D.gamma_at(S.q) - S.mom_at(S.q)) < 1e-9);
    CHECK(std::abs(D.gamma_prime_at(0.4) - S.pprime_at(0.4)) < 1e-10);
    // energy density dresses to the solved dressed energy
    DressedQuantity De = dress_quantity(S, energy_quantity(p));
    CHECK(std::abs(De.gamma_prime_at(0.4) - S.eps_prime_at(0.4)) < 1e-9);
}

TEST_CASE("dominant-state momentum expansion reproduces the conformal tail") {
    ModelParams p = make(1.3, 1.0, 0.05);
    DressedSuite S = dressed_suite(p);
    DressedQuantity D = dress_quantity(S, momentum_quantity(p));
    ExpansionTerms E = observable_expansion(D, 0, {});
    // the order-T coefficient of the momentum functional is -i pi/(6 vF)
    CHECK(std::abs(E.g_1 - cplx(0.0, -PI / (6.0 * S.vF))) < 1e-7);
    // direct evaluation agrees with the expansion up to O(T^2)
    NlieSolution sol = fixed_point_solve(S, ExcitationSet{});
    cplx direct = momentum_P(sol);
    CHECK(std::abs(direct - E.total) < 20.0 * p.T * p.T);
}

TEST_CASE("expansion error shrinks quadratically in T") {
    std::vector<double> devs;
    for (double T : {0.1, 0.05}) {
        ModelParams p = make(1.3, 1.0, T);
        DressedSuite S = dressed_suite(p);
        DressedQuantity D = dress_quantity(S, momentum_quantity(p));
        ExpansionTerms E = observable_expansion(D, 0, {});
        NlieSolution sol = fixed_point_solve(S, ExcitationSet{});
        devs.push_back(std::abs(momentum_P(sol) - E.total));
    }
    CHECK(devs[1] < 0.5 * devs[0]);
}

TEST_CASE("dominant eigenvalue is real and the largest in modulus") {
    ModelParams p = make(1.3, 1.0, 0.1);
    DressedSuite S = dressed_suite(p);
    NlieSolution dom = fixed_point_solve(S, ExcitationSet{});
    cplx lnL = log_eigenvalue(dom);
    CHECK(std::abs(lnL.imag()) < 1e-8);
    // a lone-hole excitation decays relative to the dominant state
    QuantisationResult exc =
        solve_quantisation(S, +1, {RootSpec{+1, false, 0}}, {});
    double xi = correlation_length(momentum_P(exc.sol), momentum_P(dom));
    CHECK(xi > 0.0);
    CHECK(log_eigenvalue(exc.sol).real() < lnL.real());
    // dominance means the reversed ratio must be rejected
    CHECK_THROWS_AS(correlation_length(momentum_P(dom), momentum_P(exc.sol)),
                    QtmError);
}

TEST_CASE("conformal prediction arithmetic") {
    ModelParams p = make(1.3, 1.0, 0.05);
    DressedSuite S = dressed_suite(p);
    std::vector<RootSpec> pair = {RootSpec{+1, true, 0}, RootSpec{+1, false, 0}};
    CHECK(cft_log_ratio(S, pair) ==
          doctest::Approx(-2.0 * PI * p.T / S.vF).epsilon(1e-12));
    std::vector<RootSpec> excited = {RootSpec{+1, true, 2}};
    CHECK(cft_log_ratio(S, excited) ==
          doctest::Approx(-2.0 * PI * p.T / S.vF * 2.5).epsilon(1e-12));
}

TEST_CASE("measured log-ratio approaches the conformal value like T^2") {
    ModelParams base = make(1.3, 1.0, 0.05);
    std::vector<RootSpec> pair = {RootSpec{+1, true, 0}, RootSpec{+1, false, 0}};
    auto rows = cft_spectrum_check(base, 0, pair, {0.05, 0.025});
    REQUIRE(rows.size() == 2u);
    CHECK(rows[0].deviation < 0.2 * std::abs(rows[0].predicted));
    double c0 = rows[0].deviation / (rows[0].T * rows[0].T);
    double c1 = rows[1].deviation / (rows[1].T * rows[1].T);
    CHECK(c1 < 3.0 * c0 + 1e-6);
}

TEST_CASE("spectrum enumeration ranks the dominant state first") {
    ModelParams p = make(1.3, 1.0, 0.05);
    DressedSuite S = dressed_suite(p);
    auto entries = eigenvalue_and_lengths(S, 2, 0);
    REQUIRE(entries.size() >= 3u);
    // the dominant entry has the largest |Lambda| and an empty configuration
    const SpectrumEntry* dom = nullptr;
    for (const auto& e : entries)
        if (e.s == 0 && e.spec.empty()) dom = &e;
    REQUIRE(dom != nullptr);
    for (const auto& e : entries) {
        if (&e == dom) continue;
        CHECK(e.logL.real() < dom->logL.real());
        CHECK(e.xi > 0.0);
    }
}

TEST_CASE("Fermi-edge scattering identities hold away from free fermions") {
    ModelParams p = make(1.3, 1.0, 0.1);
    DressedSuite S = dressed_suite(p);
    auto [d1, d2] = slavnov_check(S);
    CHECK(d1 < 1e-8);
    CHECK(d2 < 1e-8);
}
