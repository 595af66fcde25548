#pragma once
// Particle-hole quantisation on top of the nonlinear integral equation:
// positions solve u(r) = target with targets +-2 pi i T (n + 1/2), coupled
// back into u through the phase-shift terms.  Includes the low-temperature
// expansion of root positions and configuration sanity classification.

#include "qtm/nlie.hpp"

namespace qtm {

// one requested root: side +1 (right Fermi point) or -1 (left), particle or
// hole, non-negative quantum number n
struct RootSpec {
  int side = +1;
  bool particle = true;
  int n = 0;
};

// target value of u at the root: particles carry + side * 2 pi i T (n+1/2),
// holes the opposite sign
inline cplx root_target(const RootSpec& r, double T) {
  double sgn = (r.particle ? 1.0 : -1.0) * double(r.side);
  return sgn * 2.0 * PI * I_UNIT * T * (r.n + 0.5);
}

// order-0 seed: invert the dressed energy toward the target (particles live
// on the mirror curve above the axis, eps(conj l) = conj eps(l))
inline cplx root_seed(const DressedSuite& S, const RootSpec& r) {
  cplx t = root_target(r, S.p.T);
  if (t.imag() > 0.0) return std::conj(eps_inverse(S, std::conj(t), r.side));
  return eps_inverse(S, t, r.side);
}

inline ExcitationSet make_excitation_set(int s,
                                         const std::vector<RootSpec>& spec,
                                         const std::vector<cplx>& pos) {
  ExcitationSet ex;
  ex.s = s;
  for (size_t a = 0; a < spec.size(); ++a)
    (spec[a].particle ? ex.particles : ex.holes).push_back(pos[a]);
  return ex;
}

struct QuantisationResult {
  std::vector<RootSpec> spec;
  std::vector<cplx> roots;
  NlieSolution sol;  // converged solution at the final positions
  int outer_iterations = 0;
  double root_residual = 0.0;  // max |u(r) - target|
};

struct QuantisationOptions {
  double rtol = 1e-11;
  int max_outer = 12;
  int max_newton = 8;
  NlieOptions nopt;
};

// Alternate: solve the integral equation at fixed positions, then Newton on
// the quantisation conditions with the analytic position-derivatives
// d u(l)/d y_b = 2 pi i T m_b R(l, y_b) (m = +1 particles, -1 holes).
inline QuantisationResult solve_quantisation(
    const DressedSuite& S, int s, const std::vector<RootSpec>& spec,
    const QuantisationOptions& opt = QuantisationOptions{}) {
  const double T = S.p.T;
  int n = int(spec.size());
  QuantisationResult R;
  R.spec = spec;
  R.roots.resize(n);
  std::vector<cplx> targets(n);
  for (int a = 0; a < n; ++a) {
    targets[a] = root_target(spec[a], T);
    R.roots[a] = root_seed(S, spec[a]);
  }
  NlieSolution* warm = nullptr;
  for (int outer = 0; outer < opt.max_outer; ++outer) {
    R.outer_iterations = outer + 1;
    R.sol = fixed_point_solve(S, make_excitation_set(s, spec, R.roots),
                              opt.nopt, warm);
    warm = &R.sol;
    if (n == 0) {
      R.root_residual = 0.0;
      return R;
    }
    double moved = 0.0;
    for (int nit = 0; nit < opt.max_newton; ++nit) {
      Mat J(n, n);
      Vec g(n);
      for (int a = 0; a < n; ++a) {
        g(a) = R.sol.u_at(R.roots[a]) - targets[a];
        for (int b = 0; b < n; ++b) {
          double mb = spec[b].particle ? 1.0 : -1.0;
          J(a, b) = 2.0 * PI * I_UNIT * T * mb * S.R_at(R.roots[a], R.roots[b]);
          if (a == b) J(a, b) += R.sol.u_prime_at(R.roots[a]);
        }
      }
      Vec d = J.partialPivLu().solve(g);
      double step = d.cwiseAbs().maxCoeff();
      for (int a = 0; a < n; ++a) R.roots[a] -= d(a);
      moved = std::max(moved, step);
      if (step < 0.1 * opt.rtol) break;
    }
    // re-solve with moved positions; stop once they no longer shift and the
    // conditions hold against the refreshed solution
    R.sol = fixed_point_solve(S, make_excitation_set(s, spec, R.roots),
                              opt.nopt, warm);
    R.root_residual = 0.0;
    for (int a = 0; a < n; ++a)
      R.root_residual =
          std::max(R.root_residual,
                   std::abs(R.sol.u_at(R.roots[a]) - targets[a]));
    if (R.root_residual < opt.rtol * (1.0 + 2.0 * PI * T)) return R;
    (void)moved;
  }
  throw err("NoConvergence", "quantisation conditions did not converge");
}

// ---- low-temperature expansion of the root positions --------------------
// y = y0 + T y1 + T^2 y2 with y0 the Fermi point of the root's side,
//   y1 = [2 pi i m sigma (n+1/2) - u1(y0)] / eps'(y0)
//   y2 = -eps''/(2 eps') y1^2 - u1'/eps' y1 - u2(y0)/eps'
//        - (1/eps') sum_b 2 pi i m_b R(y0, y0_b) y1_b
struct RootExpansion {
  std::vector<cplx> y0, y1, y2;
  std::vector<cplx> order0, order1, order2;  // truncated positions
};

inline RootExpansion root_lowT_expansion(const DressedSuite& S, int s,
                                         const std::vector<RootSpec>& spec) {
  const double T = S.p.T;
  int n = int(spec.size());
  RootExpansion E;
  E.y0.resize(n);
  E.y1.resize(n);
  E.y2.resize(n);
  for (int a = 0; a < n; ++a) E.y0[a] = cplx(spec[a].side * S.q, 0.0);
  ExcitationSet ex0 = make_excitation_set(s, spec, E.y0);
  for (int a = 0; a < n; ++a) {
    double ma = spec[a].particle ? 1.0 : -1.0;
    cplx dq = S.eps_prime_at(E.y0[a]);
    cplx tgt1 = 2.0 * PI * I_UNIT * ma * double(spec[a].side) *
                (spec[a].n + 0.5);
    E.y1[a] = (tgt1 - u1_eval(S, ex0, E.y0[a])) / dq;
  }
  for (int a = 0; a < n; ++a) {
    cplx dq = S.eps_prime_at(E.y0[a]);
    cplx ddq = S.eps_second_at(E.y0[a]);
    cplx v = -ddq / (2.0 * dq) * E.y1[a] * E.y1[a] -
             u1_prime_eval(S, ex0, E.y0[a]) / dq * E.y1[a] -
             u2_eval(S, ex0, E.y0[a]) / dq;
    for (int b = 0; b < n; ++b) {
      double mb = spec[b].particle ? 1.0 : -1.0;
      v -= 2.0 * PI * I_UNIT * mb * S.R_at(E.y0[a], E.y0[b]) * E.y1[b] / dq;
    }
    E.y2[a] = v;
  }
  for (int a = 0; a < n; ++a) {
    E.order0.push_back(E.y0[a]);
    E.order1.push_back(E.y0[a] + T * E.y1[a]);
    E.order2.push_back(E.y0[a] + T * E.y1[a] + T * T * E.y2[a]);
  }
  return E;
}

// ---- configuration sanity ------------------------------------------------
struct RootClassification {
  int n_particles = 0, n_holes = 0;
  int n_singular = 0;        // close-pair two-string partners detected
  int n_strings = 0;         // roots far from the axis (|Im| beyond zeta_m/2)
  bool particles_upper = true;   // all particles above the real axis
  bool holes_enclosed = true;    // all holes inside the contour
  bool admissible = true;        // pairwise separations clear of i zeta
  double min_separation = 1e300;
};

inline RootClassification classify_roots(const QuantisationResult& R,
                                         double sep_tol = 1e-6) {
  const DressedSuite& S = *R.sol.S;
  RootClassification c;
  std::vector<cplx> all;
  for (size_t a = 0; a < R.spec.size(); ++a) {
    cplx r = R.roots[a];
    all.push_back(r);
    if (R.spec[a].particle) {
      ++c.n_particles;
      if (r.imag() <= 0.0) c.particles_upper = false;
    } else {
      ++c.n_holes;
      if (winding_number(R.sol.C, r) != 1) c.holes_enclosed = false;
    }
    if (std::abs(r.imag()) > 0.5 * S.p.zeta_m) ++c.n_strings;
  }
  for (size_t a = 0; a < all.size(); ++a)
    for (size_t b = a + 1; b < all.size(); ++b) {
      double d = dist_ipi(all[a], all[b]);
      c.min_separation = std::min(c.min_separation, d);
      double dz = std::abs(dist_ipi(all[a], all[b] + I_UNIT * S.p.zeta));
      double dz2 = std::abs(dist_ipi(all[a], all[b] - I_UNIT * S.p.zeta));
      if (d < sep_tol || dz < sep_tol || dz2 < sep_tol) c.admissible = false;
      if (std::abs(dist_ipi(all[a],
                            all[b] - I_UNIT * S.p.s2 * S.p.zeta_m)) < sep_tol)
        ++c.n_singular;
    }
  return c;
}

// ---- Trotter-number convergence of root positions ------------------------
struct TrotterRootStudy {
  std::vector<int> trotter_n;
  std::vector<std::vector<cplx>> roots;  // per N
  std::vector<cplx> roots_inf;
  std::vector<double> errors;    // sup distance to the infinite-Trotter roots
  std::vector<double> u_errors;  // sup |u_N - u_inf| over fixed probe points
  double slope = 0.0;            // fitted d log(err) / d log(N)
  double u_slope = 0.0;
};

inline TrotterRootStudy trotter_root_convergence(
    const ModelParams& base, int s, const std::vector<RootSpec>& spec,
    const std::vector<int>& ns, const QuadOrders& qo = QuadOrders{},
    const QuantisationOptions& opt = QuantisationOptions{}) {
  TrotterRootStudy st;
  st.trotter_n = ns;
  ModelParams pinf = base;
  pinf.trotter_N = 0;
  fill_derived(pinf);
  DressedSuite Sinf = dressed_suite(pinf, qo);
  QuantisationResult Rinf = solve_quantisation(Sinf, s, spec, opt);
  st.roots_inf = Rinf.roots;
  std::vector<cplx> probes = {cplx(0.0, 0.0), cplx(0.55 * Sinf.q, 0.0),
                              cplx(0.3, -0.2 * base.zeta)};
  for (int N : ns) {
    ModelParams p = base;
    p.trotter_N = N;
    fill_derived(p);
    validate_params(p);
    DressedSuite S = dressed_suite(p, qo);
    QuantisationResult R = solve_quantisation(S, s, spec, opt);
    st.roots.push_back(R.roots);
    double e = 0.0;
    for (size_t a = 0; a < R.roots.size(); ++a)
      e = std::max(e, std::abs(R.roots[a] - st.roots_inf[a]));
    st.errors.push_back(e);
    double ue = 0.0;
    for (cplx z : probes)
      ue = std::max(ue, std::abs(R.sol.u_at(z) - Rinf.sol.u_at(z)));
    st.u_errors.push_back(ue);
  }
  // least-squares slope of log err vs log N
  auto fit = [&](const std::vector<double>& err) {
    int m = int(ns.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < m; ++i) {
      double x = std::log(double(ns[i])), y = std::log(err[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
  };
  st.slope = fit(st.errors);
  st.u_slope = fit(st.u_errors);
  return st;
}

}  // namespace qtm
