#pragma once
// The nonlinear integral equation for the dominant-state/excited-state
// auxiliary function u at low temperature, in subtracted form:
//   u = (dressed driving) + T u1 + f,
// where u1 carries the winding index and particle-hole phase shifts and f
// solves the fixed point f = L1[u] + L2[u] built from the window overhangs
// and the exponentially small remainder along the adapted contour.

#include "qtm/contours.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qtm {

// particle-hole content of a configuration (zero total monodromy requires
// s + #particles + #singular = #holes)
struct ExcitationSet {
  int s = 0;                           // winding index
  std::vector<cplx> particles;         // slightly above the real axis
  std::vector<cplx> holes;             // on the Fermi curve, inside the contour
  std::vector<cplx> singular;          // close two-string partners, if any
};

// ln(1 + e^{-u/T}) minus its linear growth: always the exponentially small
// branch, continuous along the contour because sign changes of Re u happen
// only where u is real
inline cplx ln_small_branch(cplx u, double T) {
  if (u.real() >= 0.0) return std::log(1.0 + std::exp(-u / T));
  return std::log(1.0 + std::exp(u / T));
}

// the full logarithm ln(1 + e^{-u/T}) on the branch continuous along the
// contour (linear part restored where Re u < 0)
inline cplx ln_full_branch(cplx u, double T) {
  cplx v = ln_small_branch(u, T);
  if (u.real() < 0.0) v -= u / T;
  return v;
}

// u1 = -i pi s Z - 2 pi i [ sum_y phi(.,y) + sum_ysg phi(.,ysg)
//                           - sum_x phi(.,x) ]
inline cplx u1_eval(const DressedSuite& S, const ExcitationSet& ex, cplx l) {
  cplx v = -I_UNIT * PI * double(ex.s) * S.Z_at(l);
  for (cplx y : ex.particles) v -= 2.0 * PI * I_UNIT * S.phi_at(l, y);
  for (cplx y : ex.singular) v -= 2.0 * PI * I_UNIT * S.phi_at(l, y);
  for (cplx x : ex.holes) v += 2.0 * PI * I_UNIT * S.phi_at(l, x);
  return v;
}

inline cplx u1_prime_eval(const DressedSuite& S, const ExcitationSet& ex,
                          cplx l) {
  cplx v = -I_UNIT * PI * double(ex.s) * S.Z_prime_at(l);
  for (cplx y : ex.particles) v -= 2.0 * PI * I_UNIT * S.phi_dlam_at(l, y);
  for (cplx y : ex.singular) v -= 2.0 * PI * I_UNIT * S.phi_dlam_at(l, y);
  for (cplx x : ex.holes) v += 2.0 * PI * I_UNIT * S.phi_dlam_at(l, x);
  return v;
}

// second subleading coefficient of the low-T expansion of u at the probe l
inline cplx u2_eval(const DressedSuite& S, const ExcitationSet& ex, cplx l) {
  cplx v = 0.0;
  for (int sg : {+1, -1}) {
    cplx fq(sg * S.q, 0.0);
    cplx num = u1_eval(S, ex, fq);
    v += double(sg) * S.R_at(l, fq) / (2.0 * S.eps_prime_at(fq)) *
         (num * num + PI * PI / 3.0);
  }
  return v;
}

struct NlieOptions {
  double tol = 1e-11;
  int max_iter = 60;
  int leg_order = 16;       // order of the window-overhang panels
  double src_drop = 1e-17;  // drop f-sources with strengths below this
  ContourOptions copt;
};

struct NlieSolution {
  const DressedSuite* S = nullptr;
  ModelParams p;
  ExcitationSet ex;
  bool trotter = false;
  Vec drive_v;  // segment-dressed finite-Trotter driving (unused otherwise)
  // correction f(l) = sum_j c_j K(l - mu_j) - sum_k w_k K(l - nu_k) b_k
  std::vector<cplx> src_mu, src_c;
  Vec bvec;
  Contour C;
  Vec u_nodes, ln_nodes;  // u and the continuous logarithm at contour nodes
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;  // sup-norm of the update per sweep

  cplx drive_at(cplx l) const {
    l = strip_reduce(l);
    if (!trotter) return S->eps_at(l);
    return S->op.extend(l, drive_v,
                        [&](cplx z) { return trotter_driving(z, p); });
  }
  cplx drive_prime_at(cplx l) const {
    l = strip_reduce(l);
    if (!trotter) return S->eps_prime_at(l);
    return S->op.extend_prime(
        l, drive_v, [&](cplx z) { return trotter_driving_prime(z, p); },
        [&](cplx d) { return kernel_K_prime(d, p); });
  }
  cplx u1_at(cplx l) const { return u1_eval(*S, ex, strip_reduce(l)); }
  cplx f_at(cplx l) const {
    cplx v = 0.0;
    for (size_t j = 0; j < src_mu.size(); ++j)
      v += src_c[j] * kernel_K(l - src_mu[j], p);
    const QuadratureGrid& seg = S->seg;
    for (int k = 0; k < seg.size(); ++k)
      v -= seg.weights[k] * kernel_K(l - seg.nodes[k], p) * bvec(k);
    return v;
  }
  cplx f_prime_at(cplx l) const {
    cplx v = 0.0;
    for (size_t j = 0; j < src_mu.size(); ++j)
      v += src_c[j] * kernel_K_prime(l - src_mu[j], p);
    const QuadratureGrid& seg = S->seg;
    for (int k = 0; k < seg.size(); ++k)
      v -= seg.weights[k] * kernel_K_prime(l - seg.nodes[k], p) * bvec(k);
    return v;
  }
  cplx u_at(cplx l) const { return drive_at(l) + p.T * u1_at(l) + f_at(l); }
  cplx u_prime_at(cplx l) const {
    return drive_prime_at(l) + p.T * u1_prime_eval(*S, ex, strip_reduce(l)) +
           f_prime_at(l);
  }
  UField field() const {
    return {[this](cplx l) { return u_at(l); },
            [this](cplx l) { return u_prime_at(l); }};
  }
  void refresh_nodes() {
    int n = C.grid.size();
    u_nodes.resize(n);
    ln_nodes.resize(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < n; ++i) u_nodes(i) = u_at(C.grid.nodes[i]);
    for (int i = 0; i < n; ++i)
      ln_nodes(i) = ln_full_branch(u_nodes(i), p.T);
  }
};

// one application of the fixed-point map: relocate the field zeros, evaluate
// the current u along the contour and the window overhangs, and rebuild the
// source representation of f; returns the sup change of f over the probes
inline double nlie_sweep(NlieSolution& sol, const NlieOptions& opt,
                         const std::vector<cplx>& probes,
                         std::vector<cplx>& fold) {
  const DressedSuite& S = *sol.S;
  const double T = sol.p.T;
  sol.C.qR = field_inverse(sol.field(), 0.0, sol.C.qR);
  sol.C.qL = field_inverse(sol.field(), 0.0, sol.C.qL);
  std::vector<cplx> mu_new, c_new;
  const QuadratureGrid& g = sol.C.grid;
  mu_new.reserve(g.size() + 2 * opt.leg_order);
  c_new.reserve(g.size() + 2 * opt.leg_order);
  sol.u_nodes.resize(g.size());
  sol.ln_nodes.resize(g.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int i = 0; i < g.size(); ++i) sol.u_nodes(i) = sol.u_at(g.nodes[i]);
  for (int i = 0; i < g.size(); ++i) {
    cplx u = sol.u_nodes(i);
    sol.ln_nodes(i) = ln_full_branch(u, T);
    cplx c = -T * g.weights[i] * ln_small_branch(u, T);
    if (std::abs(c) < opt.src_drop) continue;
    mu_new.push_back(g.nodes[i]);
    c_new.push_back(c);
  }
  Panel ovR = make_panel(cplx(S.q, 0), sol.C.qR, opt.leg_order, "ovR");
  Panel ovL = make_panel(sol.C.qL, cplx(-S.q, 0), opt.leg_order, "ovL");
  for (const Panel* P : {&ovR, &ovL})
    for (size_t i = 0; i < P->nodes.size(); ++i) {
      mu_new.push_back(P->nodes[i]);
      c_new.push_back(-P->weights[i] * sol.u_at(P->nodes[i]));
    }
  Vec v = Vec::Zero(S.seg.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int i = 0; i < S.seg.size(); ++i)
    for (size_t j = 0; j < mu_new.size(); ++j)
      v(i) += c_new[j] * kernel_K(S.seg.nodes[i] - mu_new[j], S.p);
  sol.src_mu = std::move(mu_new);
  sol.src_c = std::move(c_new);
  sol.bvec = S.op.solve(v);
  double res = 0.0;
  for (size_t i = 0; i < probes.size(); ++i) {
    cplx fn = sol.f_at(probes[i]);
    res = std::max(res, std::abs(fn - fold[i]));
    fold[i] = fn;
  }
  return res;
}

inline NlieSolution fixed_point_solve(const DressedSuite& S,
                                      const ExcitationSet& ex,
                                      const NlieOptions& opt = NlieOptions{},
                                      const NlieSolution* warm = nullptr) {
  NlieSolution sol;
  sol.S = &S;
  sol.p = S.p;
  sol.ex = ex;
  sol.trotter = S.p.finite_trotter();
  if (sol.trotter)
    sol.drive_v = S.op.solve(
        S.seg.sample([&](cplx l) { return trotter_driving(l, S.p); }));
  sol.bvec = Vec::Zero(S.seg.size());

  // The geometry is shaped by the zero-correction field; the O(T^2)
  // correction shifts the branch split points at second order only, so the
  // contour is built once and frozen.  The actual zeros of the full field
  // are re-located every sweep for the overhang integrals.
  NlieOptions o = opt;
  if (warm && warm->S == &S) {
    sol.C = warm->C;
    sol.src_mu = warm->src_mu;
    sol.src_c = warm->src_c;
    sol.bvec = warm->bvec;
  } else {
    if (o.copt.delta <= 0.0) {
      // keep the windows clear of the band minimum and the asymptotic level
      double scale = std::abs(sol.u_at(cplx(0, 0)).real());
      o.copt.delta =
          std::min(S.p.delta_T, 0.45 * std::min(scale, std::abs(S.p.h)));
    }
    sol.C = build_contour(sol.field(), S.p, cplx(S.q, 0), cplx(-S.q, 0),
                          o.copt);
  }
  std::vector<cplx> probes = {cplx(S.q, 0), cplx(-S.q, 0), cplx(0, 0),
                              sol.C.center + sol.C.radius * 1.3,
                              cplx(0.4 * S.q, -0.2 * S.p.zeta)};
  std::vector<cplx> fold(probes.size(), 0.0);
  for (int it = 0; it < o.max_iter; ++it) {
    double res = nlie_sweep(sol, o, probes, fold);
    sol.iterations = it + 1;
    sol.history.push_back(res);
    if (res < o.tol) {
      sol.converged = true;
      break;
    }
  }
  if (!sol.converged)
    throw err("NoConvergence", "fixed point did not reach tolerance");
  sol.refresh_nodes();
  return sol;
}

// the defining integral representation of u, usable off the solving contour
// (continues u analytically as long as xi stays clear of C +- i zeta)
inline cplx analytic_continuation(const NlieSolution& sol, cplx xi) {
  const ModelParams& p = sol.p;
  cplx v = (sol.trotter ? trotter_driving(xi, p) : bare_energy(xi, p)) -
           I_UNIT * PI * p.T * double(sol.ex.s);
  for (cplx y : sol.ex.particles)
    v -= I_UNIT * p.T * theta_plus(xi - y, p);
  for (cplx y : sol.ex.singular) v -= I_UNIT * p.T * theta_plus(xi - y, p);
  for (cplx x : sol.ex.holes) v += I_UNIT * p.T * theta_plus(xi - x, p);
  const QuadratureGrid& g = sol.C.grid;
  for (int i = 0; i < g.size(); ++i)
    v -= p.T * g.weights[i] * kernel_K(xi - g.nodes[i], p) * sol.ln_nodes(i);
  return v;
}

// index -oint u'/(2 pi i T (1 + e^{u/T})), evaluated on the small branch
inline int monodromy_index(const NlieSolution& sol) {
  const QuadratureGrid& g = sol.C.grid;
  cplx acc = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    cplx u = sol.u_nodes(i);
    cplx frac;  // 1/(1+e^{u/T}) without overflow
    if (u.real() >= 0.0) {
      cplx e = std::exp(-u / sol.p.T);
      frac = e / (1.0 + e);
    } else {
      frac = 1.0 / (1.0 + std::exp(u / sol.p.T));
    }
    acc += g.weights[i] * sol.u_prime_at(g.nodes[i]) * frac;
  }
  acc /= -2.0 * PI * I_UNIT * sol.p.T;
  return int(std::lround(acc.real()));
}

// self-consistency: compare the subtracted solution against its defining
// integral representation at off-contour probe points
inline double nlie_residual(const NlieSolution& sol,
                            const std::vector<cplx>& pts) {
  double r = 0.0;
  for (cplx xi : pts)
    r = std::max(r, std::abs(sol.u_at(xi) - analytic_continuation(sol, xi)));
  return r;
}

}  // namespace qtm
