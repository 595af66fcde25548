#pragma once
// Dressed functions: Fermi point, dressed energy/charge/phase/momentum and
// the resolvent on [-q,q], extension evaluators valid on the whole working
// strip, the constant tau, Fermi velocity, curved-contour solves and the
// finite-Trotter dressed energy, dual-representation cross-check.

#include <Eigen/Dense>
#include <map>
#include <memory>

#include "qtm/fredholm.hpp"
#include "qtm/special.hpp"

namespace qtm {

struct QuadOrders {
  int seg_panels = 4;
  int seg_order = 64;
  int curve_order = 24;
  double fermi_tol = 1e-12;
};

// ------------------------------------------------------------- Fermi point --
namespace detail {
// eps(Q|Q): solve (id+K) eps = eps0 on [-Q,Q], evaluate at Q by extension
inline double eps_at_edge(double Q, const ModelParams& p, int panels, int order) {
  if (Q <= 0.0) return bare_energy(0.0, p).real();
  QuadratureGrid g = make_segment_grid(Q, panels, order);
  NystromOperator op;
  op.build(g, [&](cplx d) { return kernel_K(d, p); });
  Vec rhs = g.sample([&](cplx l) { return bare_energy(l, p); });
  Vec f = op.solve(rhs);
  return op.extend(Q, f, [&](cplx l) { return bare_energy(l, p); }).real();
}
}  // namespace detail

inline double fermi_point(const ModelParams& p, double tol = 1e-12) {
  int panels = 4, order = 24;
  double Qmax = 5.0;
  double lo = 0.0, flo = detail::eps_at_edge(0.0, p, panels, order);
  if (flo >= 0.0) return 0.0;  // boundary field: q = 0
  double hi = -1.0, fhi = 0.0;
  for (double Q = 0.25; Q <= Qmax + 1e-9; Q += 0.25) {
    double f = detail::eps_at_edge(Q, p, panels, order);
    if (f > 0.0) {
      hi = Q;
      fhi = f;
      break;
    }
    lo = Q;
    flo = f;
  }
  if (hi < 0.0)
    throw err("NoBracket", "eps(Q|Q) does not change sign on [0, Qmax]");
  // secant with bisection fallback
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    double mid = lo - flo * (hi - lo) / (fhi - flo);
    if (!(mid > lo + 0.05 * tol && mid < hi - 0.05 * tol)) mid = 0.5 * (lo + hi);
    double fm = detail::eps_at_edge(mid, p, panels, order);
    if (fm < 0.0) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
  }
  return 0.5 * (lo + hi);
}

// ------------------------------------------------------------ DressedSuite --
struct DressedSuite {
  ModelParams p;
  QuadOrders ord;
  double q = 0.0;
  QuadratureGrid seg;  // [-q,q], panels graded toward the endpoints
  NystromOperator op;  // id + K on seg
  Vec eps_v, Z_v, pp_v;  // dressed energy, charge, momentum-derivative
  cplx tau = 0.0;
  double vF = 0.0;
  mutable std::vector<std::pair<cplx, Vec>> phi_cache;  // phi(. , mu) columns
  mutable std::vector<std::pair<cplx, Vec>> res_cache;  // resolvent columns

  // ---- extension evaluators (valid for |Im lam| < zeta mod i pi) ----
  cplx eps_at(cplx l) const {
    return op.extend(l, eps_v, [&](cplx z) { return bare_energy(z, p); });
  }
  cplx eps_prime_at(cplx l) const {
    return op.extend_prime(l, eps_v,
                           [&](cplx z) { return bare_energy_prime(z, p); },
                           [&](cplx d) { return kernel_K_prime(d, p); });
  }
  cplx eps_second_at(cplx l) const {  // central differences of eps_prime_at
    double hh = 1e-5;
    return (eps_prime_at(l + hh) - eps_prime_at(l - hh)) / (2 * hh);
  }
  cplx Z_at(cplx l) const {
    return op.extend(l, Z_v, [](cplx) { return cplx(1.0); });
  }
  cplx Z_prime_at(cplx l) const {
    return op.extend_prime(l, Z_v, [](cplx) { return cplx(0.0); },
                           [&](cplx d) { return kernel_K_prime(d, p); });
  }
  cplx pprime_at(cplx l) const {
    return op.extend(l, pp_v, [&](cplx z) { return bare_momentum_prime(z, p); });
  }
  // dressed momentum p(lam) = p0(lam) - (1/2pi) int theta(lam-mu) p'(mu) dmu
  cplx mom_at(cplx l) const {
    cplx s = bare_momentum(l, p);
    for (int j = 0; j < seg.size(); ++j)
      s -= seg.weights[j] * theta_plus(l - seg.nodes[j], p) * pp_v(j) /
           (2 * PI);
    return s;
  }

  const Vec& phi_column(cplx mu) const {
    for (auto& e : phi_cache)
      if (std::abs(e.first - mu) < 1e-13) return e.second;
    Vec rhs(seg.size());
    for (int i = 0; i < seg.size(); ++i)
      rhs(i) = theta_plus(seg.nodes[i] - mu, p) / (2 * PI);
    phi_cache.emplace_back(mu, op.solve(rhs));
    return phi_cache.back().second;
  }
  cplx phi_at(cplx l, cplx mu) const {
    const Vec& c = phi_column(mu);
    cplx s = theta_plus(l - mu, p) / (2 * PI);
    for (int j = 0; j < seg.size(); ++j)
      s -= seg.weights[j] * kernel_K(l - seg.nodes[j], p) * c(j);
    return s;
  }
  cplx phi_dlam_at(cplx l, cplx mu) const {  // d/dlam phi(lam, mu)
    const Vec& c = phi_column(mu);
    cplx s = kernel_K(l - mu, p);
    for (int j = 0; j < seg.size(); ++j)
      s -= seg.weights[j] * kernel_K_prime(l - seg.nodes[j], p) * c(j);
    return s;
  }

  const Vec& res_column(cplx mu) const {
    for (auto& e : res_cache)
      if (std::abs(e.first - mu) < 1e-13) return e.second;
    res_cache.emplace_back(mu, op.resolvent_column(mu));
    return res_cache.back().second;
  }
  cplx R_at(cplx l, cplx mu) const {
    return op.resolvent(l, mu, res_column(mu));
  }
};

inline QuadratureGrid graded_segment(double q, int panels, int order) {
  // symmetric grading toward +-q where dressed functions lose smoothness
  std::vector<double> fr;
  if (panels <= 2)
    fr = {0.0, 0.5, 1.0};
  else if (panels == 3)
    fr = {0.0, 0.15, 0.85, 1.0};
  else if (panels == 4)
    fr = {0.0, 0.08, 0.5, 0.92, 1.0};
  else {
    fr.push_back(0.0);
    for (int k = 1; k < panels; ++k) {
      double t = double(k) / panels;
      fr.push_back(0.5 * (1.0 - std::cos(PI * t)));  // cosine clustering
    }
    fr.push_back(1.0);
  }
  QuadratureGrid g;
  g.parametrization = "segment[-q,q] graded";
  for (size_t k = 0; k + 1 < fr.size(); ++k) {
    double a = -q + 2 * q * fr[k], b = -q + 2 * q * fr[k + 1];
    g.panels.push_back(make_panel(cplx(a, 0), cplx(b, 0), order, "seg"));
  }
  g.flatten();
  return g;
}

inline DressedSuite dressed_suite(const ModelParams& p,
                                  QuadOrders ord = QuadOrders{}) {
  DressedSuite S;
  S.p = p;
  S.ord = ord;
  S.q = fermi_point(p, ord.fermi_tol);
  S.seg = graded_segment(S.q, ord.seg_panels, ord.seg_order);
  if (S.seg.size() == 0) {  // q = 0 boundary case: identity operator
    S.seg = make_segment_grid(0.0, 1, 2);
  }
  // capture by value: the stored kernel must survive copies of the suite
  S.op.build(S.seg, [p](cplx d) { return kernel_K(d, p); });
  S.eps_v = S.op.solve(S.seg.sample([&](cplx l) { return bare_energy(l, p); }));
  S.Z_v = S.op.solve(Vec::Ones(S.seg.size()));
  S.pp_v =
      S.op.solve(S.seg.sample([&](cplx l) { return bare_momentum_prime(l, p); }));
  // tau = h - 2J cos z - int eps(mu) K(i z/2 + mu) dmu
  cplx acc = 0.0;
  for (int j = 0; j < S.seg.size(); ++j)
    acc += S.seg.weights[j] * S.eps_v(j) *
           kernel_K(I_UNIT * (p.zeta / 2) + S.seg.nodes[j], p);
  S.tau = p.h - 2 * p.J * std::cos(p.zeta) - acc;
  S.vF = (S.eps_prime_at(S.q) / S.pprime_at(S.q)).real();
  return S;
}

// ------------------------------------------------- curved-contour solves ----
// Linear integral equations solved directly on a traced curve grid (the Fermi
// curve with the disk bypass).  Solutions coincide with the segment ones on
// the working strip; the finite-Trotter dressed energy genuinely needs this.
struct CurvedSuite {
  const DressedSuite* S = nullptr;
  NystromOperator op_c;  // id + K on the curve
  Vec eps_c_v, Z_c_v, pp_c_v, WN_v;
  bool has_WN = false;

  cplx eps_c_at(cplx l) const {
    return op_c.extend(l, eps_c_v, [&](cplx z) { return bare_energy(z, S->p); });
  }
  cplx Z_c_at(cplx l) const {
    return op_c.extend(l, Z_c_v, [](cplx) { return cplx(1.0); });
  }
  cplx WN_at(cplx l) const {
    if (!has_WN) throw err("NoTrotter", "W_N not solved (infinite Trotter)");
    return op_c.extend(l, WN_v, [&](cplx z) { return trotter_driving(z, S->p); });
  }
  cplx WN_prime_at(cplx l) const {
    if (!has_WN) throw err("NoTrotter", "W_N not solved (infinite Trotter)");
    return op_c.extend_prime(
        l, WN_v, [&](cplx z) { return trotter_driving_prime(z, S->p); },
        [&](cplx d) { return kernel_K_prime(d, S->p); });
  }
};

inline CurvedSuite curved_suite(const DressedSuite& S,
                                const QuadratureGrid& curve) {
  CurvedSuite C;
  C.S = &S;
  C.op_c.build(curve, [p = S.p](cplx d) { return kernel_K(d, p); });
  C.eps_c_v =
      C.op_c.solve(curve.sample([&](cplx l) { return bare_energy(l, S.p); }));
  C.Z_c_v = C.op_c.solve(Vec::Ones(curve.size()));
  C.pp_c_v = C.op_c.solve(
      curve.sample([&](cplx l) { return bare_momentum_prime(l, S.p); }));
  if (S.p.finite_trotter()) {
    if (S.p.c_d * S.p.T <= 1.3 * S.p.cut_half_extent())
      throw err("GeometryDegenerate",
                "disk radius c_d*T does not clear the finite-N cuts");
    C.WN_v = C.op_c.solve(
        curve.sample([&](cplx l) { return trotter_driving(l, S.p); }));
    C.has_WN = true;
  }
  return C;
}

// ------------------------------------------------ segment Fredholm det ------
inline double fredholm_det_segment(const ModelParams& p, double Q,
                                   int panels = 4, int order = 64) {
  if (Q <= 0.0) return 1.0;
  QuadratureGrid g = graded_segment(Q, panels, order);
  NystromOperator op;
  op.build(g, [&](cplx d) { return kernel_K(d, p); });
  return op.det().real();
}

// --------------------------------------- dual representation cross-check ----
// Real-line resolvent kernel R(x) with Fourier transform
// sinh[k(pi/2 - z)] / (sinh[k pi/2] + sinh[k(pi/2 - z)]).
struct RealLineResolvent {
  double zeta;
  std::vector<double> kk, fk;  // trapezoid samples of the transform
  explicit RealLineResolvent(double z, int nk = 4000, double kmax = 0.0)
      : zeta(z) {
    if (kmax <= 0.0) kmax = 80.0 / std::max(z, 0.2);
    for (int i = 0; i <= nk; ++i) {
      double k = kmax * i / nk;
      double num = std::sinh(k * (PI / 2 - zeta));
      double den = std::sinh(k * PI / 2) + num;
      fk.push_back(k == 0.0 ? (PI / 2 - zeta) / (PI - zeta) : num / den);
      kk.push_back(k);
    }
  }
  double operator()(double x) const {
    // R(x) = (1/pi) int_0^inf cos(kx) F(k) dk   (even function)
    double s = 0.0;
    for (size_t i = 0; i + 1 < kk.size(); ++i) {
      double dm = kk[i + 1] - kk[i];
      s += 0.5 * dm *
           (std::cos(kk[i] * x) * fk[i] + std::cos(kk[i + 1] * x) * fk[i + 1]);
    }
    return s / PI;
  }
};

inline double eps_infinity(double lam, const ModelParams& p) {
  return p.h * PI / (2 * (PI - p.zeta)) -
         2 * PI * p.J * std::sin(p.zeta) / (p.zeta * std::cosh(PI * lam / p.zeta));
}

// Solve eps = eps_inf + int_{R \ [-q,q]} R(l-m) eps(m) dm on a truncated
// exterior and return max |eps_dual - eps| on [-q,q].
inline double dual_representation_check(const DressedSuite& S,
                                        double cutoff = 12.0, int order = 32) {
  const ModelParams& p = S.p;
  if (p.zeta >= PI / 2 - 1e-12) {
    // free fermion: R vanishes identically; compare eps_inf-free forms directly
    double dev = 0.0;
    for (int i = 0; i <= 20; ++i) {
      double l = -S.q + 2 * S.q * i / 20.0;
      dev = std::max(dev, std::abs(bare_energy(l, p).real() - S.eps_at(l).real()));
    }
    return dev;
  }
  RealLineResolvent R(p.zeta);
  // exterior grid: [q, cutoff] and [-cutoff, -q], graded toward +-q
  QuadratureGrid g;
  std::vector<double> br = geometric_breaks(cutoff - S.q, 6, 0.2);
  for (size_t k = 0; k + 1 < br.size(); ++k) {
    g.panels.push_back(make_panel(cplx(S.q + br[k], 0), cplx(S.q + br[k + 1], 0),
                                  order, "ext+"));
    g.panels.push_back(make_panel(cplx(-S.q - br[k + 1], 0),
                                  cplx(-S.q - br[k], 0), order, "ext-"));
  }
  g.flatten();
  int n = g.size();
  Mat A = Mat::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      A(i, j) -= g.weights[j].real() *
                 R(g.nodes[i].real() - g.nodes[j].real());
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) rhs(i) = eps_infinity(g.nodes[i].real(), p);
  // tail correction: past the cutoff eps is essentially flat; approximate
  // eps(mu) ~ eps_inf(cutoff) there and fold the remaining integral into rhs
  auto tail_int = [&](double l) {
    double s = 0.0, hstep = 0.25;
    for (double x = cutoff + hstep / 2; x < cutoff + 25.0; x += hstep)
      s += hstep * (R(l - x) + R(l + x));
    return s * p.h;
  };
  for (int i = 0; i < n; ++i) rhs(i) += tail_int(g.nodes[i].real());
  Eigen::VectorXd eouter =
      Eigen::PartialPivLU<Eigen::MatrixXd>(A.real()).solve(rhs);
  double dev = 0.0;
  for (int i = 0; i <= 24; ++i) {
    double l = -S.q + 2 * S.q * i / 24.0;
    double v = eps_infinity(l, p) + tail_int(l);
    for (int j = 0; j < n; ++j)
      v += g.weights[j].real() * R(l - g.nodes[j].real()) * eouter(j);
    dev = std::max(dev, std::abs(v - S.eps_at(l).real()));
  }
  return dev;
}

// ------------------------------------ string energies, domain membership ----
// D_eps = {|Im l| <= zeta/2 (mod i pi), Re eps(l) < 0}; lower-half part and
// the i-pi periodised union are what the positivity statements refer to.
struct DomainFlag {
  bool inside = false;
  bool on_boundary = false;
};

inline DomainFlag in_D_eps_ipi_lower(cplx lam, const DressedSuite& S,
                                     double btol = 1e-9) {
  cplx z = strip_reduce(lam);
  DomainFlag f;
  if (std::abs(std::abs(z.imag()) - S.p.zeta / 2) < btol) f.on_boundary = true;
  if (std::abs(z.imag()) > S.p.zeta / 2 || z.imag() > 0.0) return f;
  double re = S.eps_at(z).real();
  if (std::abs(re) < btol) f.on_boundary = true;
  f.inside = re < 0.0;
  return f;
}
inline DomainFlag in_D_eps_ipi(cplx lam, const DressedSuite& S,
                               double btol = 1e-9) {
  cplx z = strip_reduce(lam);
  DomainFlag f;
  if (std::abs(std::abs(z.imag()) - S.p.zeta / 2) < btol) f.on_boundary = true;
  if (std::abs(z.imag()) > S.p.zeta / 2) return f;
  double re = S.eps_at(z).real();
  if (std::abs(re) < btol) f.on_boundary = true;
  f.inside = re < 0.0;
  return f;
}

// First-sheet dressed energy on the full strip |Im| <= pi/2: the extension
// formula plus the residue correction picked up when the kernel pole crosses
// the segment (|Im lam| > zeta with |Re lam| < q).
inline cplx eps_first_sheet(cplx lam, const DressedSuite& S) {
  cplx z = strip_reduce(lam);
  double zt = S.p.zeta;
  cplx v = S.eps_at(z);
  if (std::abs(z.real()) < S.q) {
    if (z.imag() > zt + 1e-12) v += S.eps_at(z - I_UNIT * zt);
    if (z.imag() < -zt - 1e-12) v += S.eps_at(z + I_UNIT * zt);
  }
  return v;
}

// meromorphic continuation of the curved dressed energy:
// eps_c(l) = eps(l) + (eps 1_{D^dn})(l - i z) - (eps 1_{D^dn})(l + i z)
inline cplx eps_c_continued(cplx lam, const DressedSuite& S) {
  // the unconditioned term is the plain (single-valued) dressed energy; the
  // indicator terms alone account for the residues picked up across the cuts
  cplx v = S.eps_at(strip_reduce(lam));
  DomainFlag a = in_D_eps_ipi_lower(lam - I_UNIT * S.p.zeta, S);
  DomainFlag b = in_D_eps_ipi_lower(lam + I_UNIT * S.p.zeta, S);
  if (a.inside) v += S.eps_at(strip_reduce(lam - I_UNIT * S.p.zeta));
  if (b.inside) v -= S.eps_at(strip_reduce(lam + I_UNIT * S.p.zeta));
  return v;
}

// two-string energy: eps_{c;2}^{(-)}(l) = eps(l) + eps(l - i zeta)
//   + (eps 1)(l - 2 i z) + (eps 1)(l - i z) - (eps 1)(l + i z) - (eps 1)(l),
// the indicators referring to the i-pi periodised lower part of D_eps.
inline cplx eps_c2_minus(cplx lam, const DressedSuite& S) {
  cplx iz = I_UNIT * S.p.zeta;
  cplx v = S.eps_at(strip_reduce(lam)) + S.eps_at(strip_reduce(lam - iz));
  auto ind = [&](cplx z) -> cplx {
    DomainFlag f = in_D_eps_ipi_lower(z, S);
    return f.inside ? S.eps_at(strip_reduce(z)) : cplx(0.0);
  };
  return v + ind(lam - 2.0 * iz) + ind(lam - iz) - ind(lam + iz) - ind(lam);
}

}  // namespace qtm
