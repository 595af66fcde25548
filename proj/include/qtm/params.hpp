#pragma once
// Model parameters for the XXZ quantum-transfer-matrix solver.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace qtm {

using cplx = std::complex<double>;
constexpr double PI = 3.14159265358979323846;
const cplx I_UNIT{0.0, 1.0};

// ---------------------------------------------------------------- errors ----
struct QtmError : std::runtime_error {
  std::string kind;
  QtmError(std::string k, const std::string& msg)
      : std::runtime_error(k + ": " + msg), kind(std::move(k)) {}
};

inline QtmError err(const std::string& kind, const std::string& msg) {
  return QtmError(kind, msg);
}

// ---------------------------------------------------------------- params ----
struct ModelParams {
  // physical
  double J = 1.0;     // coupling, > 0
  double zeta = 1.3;  // anisotropy angle, 0 < zeta <= pi/2
  double h = 2.0;     // magnetic field, 0 < h < 4J(1+cos zeta)
  double T = 0.1;     // temperature, > 0
  int trotter_N = 0;  // 0 = infinite Trotter number, else even positive

  // algorithmic
  double M = 3.0;    // delta_T exponent constant
  double c_d = 0.5;  // pole-exclusion disk scale

  // separation constants (never fixed numerically in the source material;
  // configuration values, reported as diagnostics only)
  double c_sep = 0.1, c_rep = 0.5, c_loc = 0.1, c_ref = 0.1, c_gen = 0.1;

  // derived
  double Delta = 0.0;    // cos zeta
  double zeta_m = 0.0;   // min(zeta, pi - zeta)
  double s2 = 1.0;       // sgn(pi - 2 zeta)
  double delta_T = 0.0;  // -M T ln T
  cplx aleph{0.0, 0.0};  // -i J sin(zeta) / T
  bool zeta_rational_warn = false;
  bool validated = false;

  bool finite_trotter() const { return trotter_N > 0; }
  double sz() const { return std::sin(zeta); }
  // half-extent of the finite-N driving-term cuts around -i zeta/2
  double cut_half_extent() const {
    return finite_trotter() ? J * std::sin(zeta) / (trotter_N * T) : 0.0;
  }
};

inline double sgn(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

inline void fill_derived(ModelParams& p) {
  p.Delta = std::cos(p.zeta);
  p.zeta_m = std::min(p.zeta, PI - p.zeta);
  p.s2 = p.zeta == PI / 2 ? 1.0 : sgn(PI - 2 * p.zeta);
  p.delta_T = -p.M * p.T * std::log(p.T);
  p.aleph = cplx(0.0, -p.J * std::sin(p.zeta) / p.T);
}

// Heuristic rationality probe for zeta/pi (warning only).
inline bool looks_rational_over_pi(double zeta) {
  double x = zeta / PI;
  for (int den = 1; den <= 64; ++den) {
    double num = x * den;
    if (std::abs(num - std::round(num)) < 1e-12 * den) return true;
  }
  return false;
}

inline ModelParams validate_params(ModelParams p) {
  if (p.J <= 0.0) throw err("NonPositive", "J must be > 0");
  if (p.T <= 0.0) throw err("NonPositive", "T must be > 0");
  if (!(p.zeta > 0.0 && p.zeta <= PI / 2))
    throw err("OutOfRegime", "zeta must lie in (0, pi/2]");
  double hmax = 4.0 * p.J * (1.0 + std::cos(p.zeta));
  if (!(p.h > 0.0 && p.h < hmax))
    throw err("OutOfRegime", "h must lie in (0, 4J(1+cos zeta)) = (0, " +
                                 std::to_string(hmax) + ")");
  if (p.trotter_N < 0 || (p.trotter_N > 0 && p.trotter_N % 2 != 0))
    throw err("OddTrotter", "finite Trotter number must be even and positive");
  if (p.M <= 0.0) throw err("NonPositive", "M must be > 0");
  if (p.c_d <= 0.0) throw err("NonPositive", "c_d must be > 0");
  fill_derived(p);
  p.zeta_rational_warn = looks_rational_over_pi(p.zeta);
  p.validated = true;
  return p;
}

}  // namespace qtm
