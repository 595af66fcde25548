#pragma once
// Closed-form bare quantities: bare energy/phase/momentum, kernel,
// finite-Trotter driving term, string kernels and string energies.

#include <complex>
#include <utility>

#include "qtm/multiset.hpp"
#include "qtm/params.hpp"

namespace qtm {

inline cplx coth(cplx z) { return std::cosh(z) / std::sinh(z); }

// reduce Im(z) to (-pi/2, pi/2]  (fundamental strip of i*pi periodicity)
inline cplx strip_reduce(cplx z) {
  double im = z.imag();
  double r = std::remainder(im, PI);  // in [-pi/2, pi/2]
  if (r == -PI / 2) r = PI / 2;
  return cplx(z.real(), r);
}

constexpr double pole_tol = 1e-10;

// ------------------------------------------------------------ bare energy ---
inline cplx bare_energy(cplx lam, const ModelParams& p) {
  if (dist_ipi(lam, cplx(0, p.zeta / 2)) < pole_tol ||
      dist_ipi(lam, cplx(0, -p.zeta / 2)) < pole_tol)
    throw err("PoleHit", "bare_energy pole at +-i zeta/2");
  double s = std::sin(p.zeta);
  return p.h - 2.0 * p.J * s * s /
                   (std::sinh(lam + I_UNIT * (p.zeta / 2)) *
                    std::sinh(lam - I_UNIT * (p.zeta / 2)));
}

inline cplx bare_energy_prime(cplx lam, const ModelParams& p) {
  double s = std::sin(p.zeta);
  cplx a = std::sinh(lam + I_UNIT * (p.zeta / 2));
  cplx b = std::sinh(lam - I_UNIT * (p.zeta / 2));
  cplx ca = std::cosh(lam + I_UNIT * (p.zeta / 2));
  cplx cb = std::cosh(lam - I_UNIT * (p.zeta / 2));
  return 2.0 * p.J * s * s * (ca * b + a * cb) / (a * a * b * b);
}

// ------------------------------------------------------------- bare phase ---
struct BranchedFunctionValue {
  cplx value;
  bool on_cut = false;
};

inline BranchedFunctionValue bare_phase(cplx lam, const ModelParams& p) {
  cplx z = strip_reduce(lam);
  bool cut = std::abs(std::abs(z.imag()) - p.zeta_m) < pole_tol && z.real() > 0;
  if (cut) z += cplx(0, 1e-9);  // + boundary value
  cplx v;
  if (std::abs(z.imag()) < p.zeta_m) {
    v = I_UNIT * std::log(std::sinh(I_UNIT * p.zeta + z) /
                          std::sinh(I_UNIT * p.zeta - z));
  } else {
    v = -PI * p.s2 + I_UNIT * std::log(std::sinh(I_UNIT * p.zeta + z) /
                                       std::sinh(z - I_UNIT * p.zeta));
  }
  return {v, cut};
}

inline cplx theta_plus(cplx lam, const ModelParams& p) {
  return bare_phase(lam, p).value;
}

// ---------------------------------------------------------------- kernel ----
inline cplx kernel_K(cplx lam, const ModelParams& p) {
  if (dist_ipi(lam, cplx(0, p.zeta)) < pole_tol ||
      dist_ipi(lam, cplx(0, -p.zeta)) < pole_tol)
    throw err("PoleHit", "kernel pole at +-i zeta");
  return std::sin(2 * p.zeta) /
         (2 * PI * std::sinh(lam - I_UNIT * p.zeta) *
          std::sinh(lam + I_UNIT * p.zeta));
}

inline cplx kernel_K_prime(cplx lam, const ModelParams& p) {
  return -kernel_K(lam, p) *
         (coth(lam - I_UNIT * p.zeta) + coth(lam + I_UNIT * p.zeta));
}

// ----------------------------------------------------------- bare momentum --
inline cplx bare_momentum(cplx lam, const ModelParams& p) {
  if (dist_ipi(lam, cplx(0, p.zeta / 2)) < pole_tol ||
      dist_ipi(lam, cplx(0, -p.zeta / 2)) < pole_tol)
    throw err("BranchPointHit", "bare_momentum branch point at +-i zeta/2");
  return I_UNIT * std::log(std::sinh(I_UNIT * (p.zeta / 2) + lam) /
                           std::sinh(I_UNIT * (p.zeta / 2) - lam));
}

inline cplx bare_momentum_prime(cplx lam, const ModelParams& p) {
  return std::sin(p.zeta) / (std::sinh(lam + I_UNIT * (p.zeta / 2)) *
                             std::sinh(lam - I_UNIT * (p.zeta / 2)));
}

// ----------------------------------------------- finite-Trotter driving -----
// distance (mod i pi) from z to the vertical segment Re=0, Im in [lo, hi]
inline double dist_vseg_ipi(cplx z, double lo, double hi) {
  double mid = (lo + hi) / 2;
  cplx d = z - cplx(0.0, mid);
  double im = std::remainder(d.imag(), PI) + mid;
  double imc = std::min(std::max(im, lo), hi);
  return std::hypot(d.real(), im - imc);
}

// h - T w_N(lam); cuts on the vertical segments through -+ i zeta/2 of
// half-extent J sin z /(N T); each log term is a principal log of the ratio.
inline cplx trotter_driving(cplx lam, const ModelParams& p) {
  if (!p.finite_trotter()) return bare_energy(lam, p);
  double g = p.cut_half_extent();
  cplx a = p.aleph / double(p.trotter_N);  // = -i g
  cplx b = I_UNIT * (p.zeta / 2);
  if (dist_vseg_ipi(lam, -p.zeta / 2 - g, -p.zeta / 2 + g) < pole_tol ||
      dist_vseg_ipi(lam, p.zeta / 2 - g, p.zeta / 2 + g) < pole_tol)
    throw err("CutHit", "trotter driving evaluated on a branch cut");
  double N = p.trotter_N;
  cplx w = N * std::log(std::sinh(lam - a + b) / std::sinh(lam + a + b)) +
           N * std::log(std::sinh(lam + a - b) / std::sinh(lam - a - b));
  return p.h - p.T * w;
}

inline cplx trotter_driving_prime(cplx lam, const ModelParams& p) {
  if (!p.finite_trotter()) return bare_energy_prime(lam, p);
  cplx a = p.aleph / double(p.trotter_N);
  cplx b = I_UNIT * (p.zeta / 2);
  double N = p.trotter_N;
  cplx wp = N * (coth(lam - a + b) - coth(lam + a + b) + coth(lam + a - b) -
                 coth(lam - a - b));
  return -p.T * wp;
}

// generic driving term of the non-linear problem (finite or infinite Trotter)
inline cplx driving(cplx lam, const ModelParams& p) {
  return p.finite_trotter() ? trotter_driving(lam, p) : bare_energy(lam, p);
}
inline cplx driving_prime(cplx lam, const ModelParams& p) {
  return p.finite_trotter() ? trotter_driving_prime(lam, p)
                            : bare_energy_prime(lam, p);
}

// ------------------------------------------------------- string quantities --
inline std::pair<cplx, cplx> string_quantities(cplx lam, int k,
                                               const ModelParams& p) {
  cplx iz = I_UNIT * p.zeta;
  auto near_pole = [&](cplx z) { return dist_ipi(z, 0.0) < pole_tol; };
  if (near_pole(lam - double(k) * iz) || near_pole(lam - double(k - 1) * iz) ||
      near_pole(lam + iz) || near_pole(lam) ||
      near_pole(lam + I_UNIT * (p.zeta / 2)) ||
      near_pole(lam + I_UNIT * ((0.5 - k) * p.zeta)))
    throw err("PoleHit", "string quantity evaluated at a coth pole");
  cplx Kk = (coth(lam - double(k) * iz) + coth(lam - double(k - 1) * iz) -
             coth(lam + iz) - coth(lam)) /
            (2.0 * PI * I_UNIT);
  cplx ek = double(k) * p.h -
            2.0 * I_UNIT * p.J * std::sin(p.zeta) *
                (coth(lam + I_UNIT * (p.zeta / 2)) -
                 coth(lam + I_UNIT * ((0.5 - k) * p.zeta)));
  return {Kk, ek};
}

}  // namespace qtm
