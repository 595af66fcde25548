#pragma once

// Finite-Trotter Bethe-ansatz closure: extraction of the Bethe roots of a
// solved finite-N state from the auxiliary function, residuals of the Bethe
// equations, the two-term product representation of the eigenvalue, and the
// factorisation of the discrete Gaudin determinant into a Fredholm determinant
// times a finite block.

#include "qtm/excitations.hpp"
#include "qtm/observables.hpp"

namespace qtm {

struct BetheRoots {
    std::vector<cplx> roots;   // right-branch roots first, then left-branch
    int n_right = 0;
    int n_left = 0;
    int n_expected = 0;
    int n_inadmissible = 0;    // pairs at mutual distance i*zeta mod i*pi
    int n_string_like = 0;     // roots deeper than zeta_m/2 below the axis
};

struct BetheOptions {
    int max_per_branch = 0;      // 0: use n_expected + 2
    double newton_tol = 1e-12;
    int newton_iter = 60;
    double step_cap = 0.15;      // trust-region cap for the root continuation
    double dedupe_tol = 1e-8;
};

// Roots of 1 + e^{-u/T} along the level curve Re u = 0: descending from the
// right exact Fermi point they sit at u = -2*pi*i*T*(j - 1/2), descending from
// the left one at u = +2*pi*i*T*(j - 1/2).  Each branch is followed by Newton
// continuation in the target value until it stalls or wraps onto the other
// branch; the total count must come out as N/2 - s.
inline BetheRoots extract_bethe_roots(const NlieSolution& sol,
                                      const BetheOptions& opt = {}) {
    const ModelParams& p = sol.p;
    if (!p.finite_trotter())
        throw err("TrotterRequired", "bethe extraction needs finite trotter number");
    BetheRoots out;
    out.n_expected = p.trotter_N - sol.ex.s;
    int cap = opt.max_per_branch > 0 ? opt.max_per_branch : out.n_expected + 2;

    UField f = sol.field();
    const cplx center = sol.C.center;
    const double ext = p.cut_half_extent();

    // distance to the vertical branch cut of the Trotter driving term
    auto cut_dist = [&](cplx z) {
        double dx = std::real(z - center);
        double dy = std::imag(z - center);
        if (std::abs(dy) <= ext) return std::abs(dx);
        return std::hypot(dx, std::abs(dy) - ext);
    };

    auto run_branch = [&](int side) {
        std::vector<cplx> br;
        cplx z = side > 0 ? sol.C.qR : sol.C.qL;
        for (int j = 1; j <= cap; ++j) {
            double goal = -double(side) * 2.0 * PI * p.T * (j - 0.5);
            cplx target(0.0, goal);
            // walk the level curve Re u = 0 in the direction that moves Im u
            // toward the target, then polish with Newton on the full value
            bool reached = false;
            for (int it = 0; it < 5000; ++it) {
                cplx u = f.val(z), up = f.der(z);
                if (side > 0 ? std::imag(u) <= goal : std::imag(u) >= goal) {
                    reached = true;
                    break;
                }
                cplx t = I_UNIT * std::conj(up) / std::abs(up);
                if (double(side) * std::imag(up * t) > 0.0) t = -t;
                double dc = cut_dist(z);
                if (dc < 2e-3) break;  // curve terminates on the cut
                double hstep = std::min(0.04, 0.3 * dc);
                z += hstep * t;
                // project back onto Re u = 0
                for (int k = 0; k < 2; ++k) {
                    cplx uz = f.val(z);
                    z -= std::real(uz) / f.der(z);
                }
            }
            if (!reached) break;
            cplx r;
            try {
                r = field_inverse(f, target, z, opt.newton_tol,
                                  opt.newton_iter, opt.step_cap);
            } catch (const QtmError&) {
                break;
            }
            if (std::abs(std::imag(r)) > PI / 2) break;
            bool dup = false;
            for (const cplx& w : out.roots)
                if (dist_ipi(r, w) < opt.dedupe_tol) dup = true;
            for (const cplx& w : br)
                if (dist_ipi(r, w) < opt.dedupe_tol) dup = true;
            if (dup) break;
            br.push_back(r);
            z = r;
        }
        return br;
    };

    std::vector<cplx> right = run_branch(+1);
    out.n_right = int(right.size());
    out.roots = right;
    std::vector<cplx> left = run_branch(-1);
    out.n_left = int(left.size());
    out.roots.insert(out.roots.end(), left.begin(), left.end());

    // callers check n_expected; extra zeros of 1+e^{-u/T} that are not Bethe
    // roots of the state are filtered out by the caller via the residuals

    int n = int(out.roots.size());
    for (int a = 0; a < n; ++a) {
        if (std::abs(std::imag(out.roots[a]) + p.zeta / 2.0) > p.zeta_m / 2.0 + p.zeta / 2.0)
            ++out.n_string_like;
        for (int b = 0; b < n; ++b) {
            if (a == b) continue;
            if (dist_ipi(out.roots[a] - out.roots[b], cplx(0.0, p.zeta)) < 1e-10)
                ++out.n_inadmissible;
        }
    }
    return out;
}

// Residuals |LHS + 1| of the reduced Bethe equations, evaluated in the log
// domain and re-exponentiated so that the magnitude is meaningful even for
// products of many O(1) factors.
inline std::vector<double> bae_residuals(const std::vector<cplx>& roots,
                                         const ModelParams& p) {
    if (!p.finite_trotter())
        throw err("TrotterRequired", "bethe equations need finite trotter number");
    int N = p.trotter_N;
    int Np = int(roots.size());
    const cplx iz(0.0, p.zeta), izh(0.0, p.zeta / 2.0), iz3h(0.0, 1.5 * p.zeta);
    const cplx aN = p.aleph / double(N);
    std::vector<double> res(Np);
    for (int a = 0; a < Np; ++a)
        for (int b = 0; b < Np; ++b) {
            if (a == b) continue;
            if (dist_ipi(roots[a] - roots[b], cplx(0.0, p.zeta)) < 1e-10 ||
                dist_ipi(roots[a] - roots[b], cplx(0.0, -p.zeta)) < 1e-10)
                throw err("NonAdmissible", "root pair at mutual distance i*zeta");
        }
    for (int a = 0; a < Np; ++a) {
        cplx la = roots[a];
        cplx S = -p.h / p.T + I_UNIT * PI * double((N - Np) % 2);
        for (int k = 0; k < Np; ++k) {
            if (k == a) continue;
            S += std::log(std::sinh(iz - la + roots[k]) / std::sinh(iz + la - roots[k]));
        }
        S += double(N) * std::log(std::sinh(la - aN + izh) * std::sinh(iz3h + la + aN) /
                                  (std::sinh(la + aN + izh) * std::sinh(izh - la + aN)));
        res[a] = std::abs(std::exp(S) + 1.0);
    }
    return res;
}

// Multivariate Newton on the reduced Bethe equations, seeded with the roots
// extracted from the auxiliary function.  Works on G_a = e^{S_a} + 1 with S_a
// the log of the left-hand side, so the Jacobian is analytic.
inline std::vector<cplx> polish_bethe_roots(std::vector<cplx> roots,
                                            const ModelParams& p,
                                            double tol = 1e-13, int iters = 30) {
    int N = p.trotter_N;
    int Np = int(roots.size());
    const cplx iz(0.0, p.zeta), izh(0.0, p.zeta / 2.0), iz3h(0.0, 1.5 * p.zeta);
    const cplx aN = p.aleph / double(N);
    for (int it = 0; it < iters; ++it) {
        Vec G(Np);
        Mat Jm = Mat::Zero(Np, Np);
        double mx = 0.0;
        for (int a = 0; a < Np; ++a) {
            cplx la = roots[a];
            cplx S = -p.h / p.T + I_UNIT * PI * double((N - Np) % 2);
            cplx dSa = 0.0;
            for (int k = 0; k < Np; ++k) {
                if (k == a) continue;
                cplx d = la - roots[k];
                S += std::log(std::sinh(iz - d) / std::sinh(iz + d));
                cplx cp = coth(iz - d), cm = coth(iz + d);
                dSa += -cp - cm;
                Jm(a, k) = cp + cm;
            }
            S += double(N) * std::log(std::sinh(la - aN + izh) * std::sinh(iz3h + la + aN) /
                                      (std::sinh(la + aN + izh) * std::sinh(izh - la + aN)));
            dSa += double(N) * (coth(la - aN + izh) + coth(iz3h + la + aN) -
                                coth(la + aN + izh) + coth(izh - la + aN));
            cplx E = std::exp(S);
            G(a) = E + 1.0;
            mx = std::max(mx, std::abs(G(a)));
            Jm(a, a) = dSa;
            for (int k = 0; k < Np; ++k) Jm(a, k) *= E;
        }
        if (mx < tol) return roots;
        Vec d = Jm.partialPivLu().solve(G);
        for (int a = 0; a < Np; ++a) roots[a] -= d(a);
    }
    throw err("NewtonStall", "bethe-root polishing did not converge");
}

// log of the two-term product representation of the transfer-matrix
// eigenvalue at spectral parameter xi, combined by log-sum-exp.
inline cplx log_eigenvalue_product(const std::vector<cplx>& roots,
                                   const ModelParams& p, cplx xi = 0.0) {
    if (!p.finite_trotter())
        throw err("TrotterRequired", "product eigenvalue needs finite trotter number");
    int N = p.trotter_N;
    const cplx izh(0.0, p.zeta / 2.0), iz(0.0, p.zeta), iz3h(0.0, 1.5 * p.zeta);
    const cplx aN = p.aleph / double(N);
    const cplx sgn = I_UNIT * PI * double(N % 2);

    for (const cplx& lk : roots)
        if (dist_ipi(xi, lk + izh) < 1e-10 || dist_ipi(xi, lk - izh) < 1e-10 ||
            dist_ipi(xi, lk + iz3h) < 1e-10)
            throw err("PoleHit", "spectral parameter at a shifted-root pole");

    cplx l1 = sgn + p.h / (2.0 * p.T) +
              double(N) * std::log(std::sinh(xi + aN) * std::sinh(xi - aN - iz) /
                                   std::pow(std::sinh(-iz), 2));
    cplx l2 = sgn - p.h / (2.0 * p.T) +
              double(N) * std::log(std::sinh(xi + aN + iz) * std::sinh(xi - aN) /
                                   std::pow(std::sinh(-iz), 2));
    for (const cplx& lk : roots) {
        l1 += std::log(std::sinh(xi - lk + izh) / std::sinh(xi - lk - izh));
        l2 += std::log(std::sinh(xi - lk - iz3h) / std::sinh(xi - lk - izh));
    }
    if (std::real(l1) >= std::real(l2))
        return l1 + std::log(1.0 + std::exp(l2 - l1));
    return l2 + std::log(1.0 + std::exp(l1 - l2));
}

struct GaudinFactorisation {
    cplx discrete;      // det_{N'} [ delta_ab + 2*pi*i*T K(la-lb)/u'(lb) ]
    cplx fredholm;      // det on the contour of id + Kfrac
    cplx finite_block;  // det of the particle/hole block built from the resolvent
    double residual;    // |discrete - fredholm*finite_block| / |discrete|
};

// The discrete Gaudin determinant over the Bethe roots factorises into the
// Fredholm determinant of id + Kfrac on the closed contour, with
// Kfrac(l,m) = -K(l-m)/(1+e^{u(m)/T}), times a finite block over the
// particle/hole roots assembled from the resolvent of id + Kfrac.
inline GaudinFactorisation gaudin_factorisation(const NlieSolution& sol,
                                                const BetheRoots& br) {
    const ModelParams& p = sol.p;
    const double T = p.T;
    int n = int(br.roots.size());

    Mat G = Mat::Identity(n, n);
    std::vector<cplx> up(n);
    for (int b = 0; b < n; ++b) up[b] = sol.u_prime_at(br.roots[b]);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            G(a, b) += 2.0 * PI * I_UNIT * T *
                       kernel_K(br.roots[a] - br.roots[b], p) / up[b];
    cplx discrete = G.fullPivLu().determinant();
    if (std::abs(discrete) < 1e-12)
        throw err("SingularNorm", "norm determinant vanishes: not an eigenvector");

    // occupation fraction 1/(1+e^{u/T}), overflow-safe
    auto frac = [&](cplx u) -> cplx {
        cplx w = u / T;
        if (std::real(w) > 0.0) {
            cplx e = std::exp(-w);
            return e / (1.0 + e);
        }
        return 1.0 / (1.0 + std::exp(w));
    };

    const auto& g = sol.C.grid;
    int m = int(g.nodes.size());
    std::vector<cplx> fr(m);
    for (int j = 0; j < m; ++j) fr[j] = frac(sol.u_nodes[j]);

    Mat Kf(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            Kf(i, j) = -kernel_K(g.nodes[i] - g.nodes[j], p) * fr[j];
    Mat A = Mat::Identity(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            A(i, j) += Kf(i, j) * g.weights[j];
    Eigen::PartialPivLU<Mat> lu(A);
    cplx fredholm = lu.determinant();

    // finite block over the excitation roots via the resolvent of id + Kfrac
    std::vector<cplx> ys = sol.ex.particles, xs = sol.ex.holes;
    int np = int(ys.size()), nh = int(xs.size());
    cplx fblock = 1.0;
    if (np + nh > 0) {
        std::vector<cplx> pts = ys;
        pts.insert(pts.end(), xs.begin(), xs.end());
        int q = np + nh;
        auto kf_at = [&](cplx l, cplx mu, cplx umu) {
            return -kernel_K(l - mu, p) * frac(umu);
        };
        // resolvent columns at the excitation roots, then off-grid extension
        Mat R(q, q);
        std::vector<Vec> cols(q, Vec(m));
        std::vector<cplx> upts(q);
        for (int b = 0; b < q; ++b) {
            upts[b] = sol.u_at(pts[b]);
            Vec rhs(m);
            for (int i = 0; i < m; ++i)
                rhs(i) = kf_at(g.nodes[i], pts[b], upts[b]);
            cols[b] = lu.solve(rhs);
        }
        for (int a = 0; a < q; ++a)
            for (int b = 0; b < q; ++b) {
                cplx v = kf_at(pts[a], pts[b], upts[b]);
                for (int i = 0; i < m; ++i)
                    v -= g.weights[i] * kf_at(pts[a], g.nodes[i], sol.u_nodes[i]) * cols[b](i);
                R(a, b) = v;
            }
        Mat M = Mat::Identity(q, q);
        for (int a = 0; a < q; ++a)
            for (int b = 0; b < q; ++b) {
                double sb = (b < np) ? 1.0 : -1.0;
                M(a, b) += sb * 2.0 * PI * I_UNIT * T * R(a, b) /
                           sol.u_prime_at(pts[b]);
            }
        fblock = M.fullPivLu().determinant();
    }

    GaudinFactorisation out;
    out.discrete = discrete;
    out.fredholm = fredholm;
    out.finite_block = fblock;
    out.residual = std::abs(discrete - fredholm * fblock) / std::abs(discrete);
    return out;
}

struct BetheClosure {
    BetheRoots roots;            // as extracted from the auxiliary function
    std::vector<cplx> polished;  // after Newton on the exact Bethe equations
    double max_root_shift;       // extraction vs polished
    double max_bae_residual;
    cplx log_lambda_product;
    cplx log_lambda_integral;
    double eigenvalue_rel_dev;   // |exp(log_prod - log_int) - 1|
    GaudinFactorisation gaudin;
};

inline BetheClosure bethe_closure(const NlieSolution& sol,
                                  const BetheOptions& opt = {}) {
    BetheClosure out;
    out.roots = extract_bethe_roots(sol, opt);
    if (int(out.roots.roots.size()) != out.roots.n_expected)
        throw err("RootCountMismatch",
                  "extracted " + std::to_string(out.roots.roots.size()) +
                  " bethe roots, expected " + std::to_string(out.roots.n_expected));
    out.polished = polish_bethe_roots(out.roots.roots, sol.p);
    out.max_root_shift = 0.0;
    for (size_t a = 0; a < out.polished.size(); ++a)
        out.max_root_shift = std::max(out.max_root_shift,
                                      std::abs(out.polished[a] - out.roots.roots[a]));
    auto res = bae_residuals(out.polished, sol.p);
    out.max_bae_residual = *std::max_element(res.begin(), res.end());
    out.log_lambda_product = log_eigenvalue_product(out.polished, sol.p);
    out.log_lambda_integral = log_eigenvalue(sol);
    out.eigenvalue_rel_dev =
        std::abs(std::exp(out.log_lambda_product - out.log_lambda_integral) - 1.0);
    out.gaudin = gaudin_factorisation(sol, out.roots);
    return out;
}

} // namespace qtm
