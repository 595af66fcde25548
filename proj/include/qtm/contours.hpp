#pragma once
// Integration contour machinery: inversion of the dressed-energy field,
// level-curve tracing, and assembly of the closed low-temperature contour
// made of two real-axis windows, four steepest-level rails and two arcs on
// a small disk around the lower driving pole.

#include <array>
#include <ostream>

#include "qtm/dressed.hpp"

namespace qtm {

// A scalar analytic field u and its derivative, the object whose level sets
// shape the contour (the dressed energy for the reference contour, the full
// nonlinear solution for adapted ones).
struct UField {
  std::function<cplx(cplx)> val, der;
};

inline UField eps_field(const DressedSuite& S) {
  return {[&S](cplx l) { return S.eps_at(strip_reduce(l)); },
          [&S](cplx l) { return S.eps_prime_at(strip_reduce(l)); }};
}

inline UField wn_field(const CurvedSuite& C) {
  return {[&C](cplx l) { return C.WN_at(strip_reduce(l)); },
          [&C](cplx l) { return C.WN_prime_at(strip_reduce(l)); }};
}

// Newton inversion u(lam) = s from a seed, with a trust-region step cap so a
// seed on the correct branch cannot jump across the strip to the mirror one.
inline cplx field_inverse(const UField& u, cplx s, cplx seed,
                          double tol = 1e-13, int maxit = 80,
                          double cap = 0.5) {
  cplx l = seed;
  for (int it = 0; it < maxit; ++it) {
    cplx f = u.val(l) - s;
    if (std::abs(f) < tol * (1.0 + std::abs(s))) return l;
    cplx d = u.der(l);
    if (std::abs(d) < 1e-14)
      throw err("NewtonStall", "field inversion: vanishing derivative");
    cplx step = f / d;
    double m = std::abs(step);
    if (m > cap) step *= cap / m;
    l -= step;
  }
  throw err("NewtonStall", "field inversion did not converge");
}

// Cold-start inversion of the dressed energy.  Two asymptotic seeds: the
// linearization at the Fermi point (small |s|) and the simple-pole expansion
// eps ~ tau - 2iJ sin(zeta)/(lam + i zeta/2) near the lower pole (large |s|).
// side = +1 selects the branch descending from +q, side = -1 from -q.
inline cplx eps_inverse(const DressedSuite& S, cplx s, int side) {
  UField u = eps_field(S);
  double zt = S.p.zeta;
  cplx dq = S.eps_prime_at(side * S.q);
  cplx seed_f = cplx(side * S.q, 0) + s / dq;
  cplx pole_off = -2.0 * I_UNIT * S.p.J * std::sin(zt) / (s - S.tau);
  cplx seed_p = -I_UNIT * zt / 2.0 + pole_off;
  bool pole_ok = std::abs(pole_off) < 0.45 * zt && std::abs(pole_off) > 1e-14;
  cplx seed = seed_f;
  if (pole_ok) {
    double rf = std::abs(u.val(seed_f) - s);
    double rp = std::abs(u.val(seed_p) - s);
    if (rp < rf) seed = seed_p;
  }
  try {
    return field_inverse(u, s, seed);
  } catch (const QtmError&) {
    if (pole_ok && seed != seed_p) return field_inverse(u, s, seed_p);
    throw;
  }
}

// Trace the level curve Re u = Re u(start) from start, initial direction dir,
// until entering the disk |z - center| < radius (or |Re z| > xmax).  Returns
// sampled points including an endpoint snapped near the disk boundary.
inline std::vector<cplx> trace_fermi_curve(const UField& u, cplx start,
                                           cplx dir, cplx center,
                                           double radius, double step = 0.02,
                                           int max_steps = 4000,
                                           double xmax = 25.0) {
  double level = u.val(start).real();
  std::vector<cplx> pts{start};
  cplx z = start, prev_t = dir / std::abs(dir);
  for (int k = 0; k < max_steps; ++k) {
    cplx d = u.der(z);
    if (std::abs(d) < 1e-13) throw err("NewtonStall", "level trace stalled");
    cplx t = I_UNIT * std::conj(d) / std::abs(d);  // tangent of Re u level set
    if ((t * std::conj(prev_t)).real() < 0) t = -t;
    double h = std::min(step, 0.35 * std::abs(z - center));
    cplx zn = z + h * t;
    for (int c = 0; c < 4; ++c) {  // project back onto the level set
      cplx dd = u.der(zn);
      cplx n = std::conj(dd) / std::abs(dd);
      zn -= (u.val(zn).real() - level) / std::abs(dd) * n;
    }
    prev_t = t;
    z = zn;
    pts.push_back(z);
    if (std::abs(z - center) <= radius || std::abs(z.real()) > xmax) break;
  }
  return pts;
}

struct ContourOptions {
  int win_order = 24;    // Gauss order per window half
  int rail_panels = 8;   // geometric panels per rail
  int rail_order = 16;
  int arc_panels = 6;
  int arc_order = 16;
  double rail_ratio = 0.12;  // grading ratio toward the window end
  double delta = 0.0;        // window half-extent override (0: use delta_T)
};

struct Contour {
  QuadratureGrid grid;  // closed traversal, winding +1 about the pole
  cplx qR, qL;          // zeros of the field near +-q
  double delta = 0.0;   // window half-extent in field value
  cplx center;          // lower pole -i zeta/2
  double radius = 0.0;  // disk radius c_d * T
  // rail endpoints on the disk: [R inner, L inner, L outer, R outer]
  std::array<cplx, 4> y{};
  std::array<double, 4> theta_hat{};
};

namespace detail {

// panel whose nodes solve u(z(s)) = s along a given straight path of values;
// weights carry dz = ds / u'(z)
inline Panel pullback_panel(const UField& u, cplx s0, cplx s1, cplx& seed,
                            int order, const std::string& tag) {
  std::vector<double> x, w;
  gauss_legendre(order, x, w);
  Panel P;
  P.t = x;
  P.tag = tag;
  bary_weights(x, P.bary);
  P.a = field_inverse(u, s0, seed);
  cplx prev = P.a;
  cplx mid = 0.5 * (s0 + s1), half = 0.5 * (s1 - s0);
  for (int i = 0; i < order; ++i) {
    cplx s = mid + half * x[i];
    cplx z = field_inverse(u, s, prev);
    prev = z;
    P.nodes.push_back(z);
    P.weights.push_back(half * w[i] / u.der(z));
  }
  P.b = field_inverse(u, s1, prev);
  seed = P.b;
  return P;
}

// locate t on the ray s = z0 + i t (t of sign sgn) where the level curve
// meets the disk; returns (t_end, z_end) and leaves a continuation table
inline std::pair<double, cplx> rail_end(const UField& u, cplx z0_val,
                                        cplx start, int sgn, cplx center,
                                        double radius, double delta) {
  cplx z = start;
  double t = 0.0, dt = std::max(0.5 * delta, 1e-6);
  double t_prev = 0.0;
  cplx z_prev = z;
  for (int k = 0; k < 400; ++k) {
    t_prev = t;
    z_prev = z;
    t += sgn * dt;
    z = field_inverse(u, z0_val + I_UNIT * t, z);
    if (std::abs(z - center) <= radius) break;
    dt = std::min(dt * 1.5, 0.25 * std::abs(z0_val + I_UNIT * t));
    if (k == 399) throw err("NewtonStall", "rail never reached the disk");
  }
  // Illinois iteration on g(t) = |z(t)-center| - radius between t_prev
  // (outside, g > 0) and t (inside, g < 0)
  double lo = t_prev, hi = t;
  double glo = std::abs(z_prev - center) - radius;
  double ghi = std::abs(z - center) - radius;
  cplx zm = z_prev;
  double tm = hi;
  for (int it = 0; it < 60; ++it) {
    tm = (lo * ghi - hi * glo) / (ghi - glo);
    zm = field_inverse(u, z0_val + I_UNIT * tm, zm);
    double gm = std::abs(zm - center) - radius;
    if (std::abs(gm) < 1e-13 * (1.0 + radius) ||
        std::abs(hi - lo) < 1e-13 * (1.0 + std::abs(hi)))
      break;
    if ((gm > 0) == (glo > 0)) {
      lo = tm;
      glo = gm;
      ghi *= 0.5;
    } else {
      hi = tm;
      ghi = gm;
      glo *= 0.5;
    }
  }
  return {tm, zm};
}

// geometric rail panels in t over [0, t_end] (graded toward t = 0 where the
// curve bends on the Fermi-velocity scale), traversed disk->window if
// to_window, else window->disk
inline void add_rail(QuadratureGrid& g, const UField& u, cplx zval,
                     double t_end, cplx window_end, bool to_window,
                     const ContourOptions& opt, const std::string& tag) {
  std::vector<double> br = geometric_breaks(std::abs(t_end), opt.rail_panels,
                                            opt.rail_ratio);
  double sgn = t_end >= 0 ? 1.0 : -1.0;
  std::vector<Panel> ps;
  cplx seed = window_end;
  for (size_t k = 0; k + 1 < br.size(); ++k) {
    cplx s0 = zval + I_UNIT * (sgn * br[k]);
    cplx s1 = zval + I_UNIT * (sgn * br[k + 1]);
    ps.push_back(pullback_panel(u, s0, s1, seed, opt.rail_order, tag));
  }
  if (to_window) {  // reverse: disk -> window means t |t| decreasing
    for (auto it = ps.rbegin(); it != ps.rend(); ++it) {
      Panel P = *it;
      std::reverse(P.nodes.begin(), P.nodes.end());
      std::reverse(P.weights.begin(), P.weights.end());
      for (auto& w : P.weights) w = -w;
      std::swap(P.a, P.b);
      g.panels.push_back(P);
    }
  } else {
    for (auto& P : ps) g.panels.push_back(P);
  }
}

inline void add_arc(QuadratureGrid& g, cplx center, double radius, double th0,
                    double th1, const ContourOptions& opt,
                    const std::string& tag) {
  auto zf = [&](double th) { return center + radius * std::exp(I_UNIT * th); };
  auto dzf = [&](double th) {
    return I_UNIT * radius * std::exp(I_UNIT * th);
  };
  for (int k = 0; k < opt.arc_panels; ++k) {
    double a = th0 + (th1 - th0) * k / opt.arc_panels;
    double b = th0 + (th1 - th0) * (k + 1) / opt.arc_panels;
    g.panels.push_back(make_curve_panel(zf, dzf, a, b, opt.arc_order, tag));
  }
}

}  // namespace detail

// Build the closed contour adapted to the field u: real-value windows of
// half-extent delta through the two field zeros, four rails along the level
// curves Re u = +-delta descending to the disk around the lower pole, and two
// arcs closing the curve around the disk (winding +1).
inline Contour build_contour(const UField& u, const ModelParams& p, cplx qR_seed,
                             cplx qL_seed,
                             const ContourOptions& opt = ContourOptions{}) {
  Contour C;
  C.delta = opt.delta > 0.0 ? opt.delta : p.delta_T;
  C.center = -I_UNIT * p.zeta / 2.0;
  C.radius = p.c_d * p.T;
  C.qR = field_inverse(u, 0.0, qR_seed);
  C.qL = field_inverse(u, 0.0, qL_seed);
  double d = C.delta;

  // window endpoints (field values -d and +d on either side of each zero)
  cplx sR = C.qR;
  cplx wR_out = field_inverse(u, cplx(d, 0), sR);   // outer R end, u = +d
  cplx wR_in = field_inverse(u, cplx(-d, 0), sR);   // inner R end, u = -d
  cplx sL = C.qL;
  cplx wL_out = field_inverse(u, cplx(d, 0), sL);
  cplx wL_in = field_inverse(u, cplx(-d, 0), sL);

  // rail/disk intersections: R rails run to t < 0, L rails to t > 0
  auto [tRo, yRo] = detail::rail_end(u, cplx(d, 0), wR_out, -1, C.center,
                                     C.radius, d);
  auto [tRi, yRi] = detail::rail_end(u, cplx(-d, 0), wR_in, -1, C.center,
                                     C.radius, d);
  auto [tLo, yLo] = detail::rail_end(u, cplx(d, 0), wL_out, +1, C.center,
                                     C.radius, d);
  auto [tLi, yLi] = detail::rail_end(u, cplx(-d, 0), wL_in, +1, C.center,
                                     C.radius, d);
  C.y = {yRi, yLi, yLo, yRo};
  double thRi = std::arg(yRi - C.center), thLi = std::arg(yLi - C.center);
  double thLo = std::arg(yLo - C.center), thRo = std::arg(yRo - C.center);
  C.theta_hat = {thRi, thLi, thLo, thRo};

  QuadratureGrid& g = C.grid;
  g.parametrization = "windows+rails+arcs";
  // traversal: R outer rail up, R window outward->inward, R inner rail down,
  // upper arc, L inner rail up, L window inward->outward, L outer rail down,
  // lower arc; counterclockwise about the pole overall
  detail::add_rail(g, u, cplx(d, 0), tRo, wR_out, true, opt, "rail_R_outer");
  {
    cplx seed = wR_out;
    g.panels.push_back(
        detail::pullback_panel(u, cplx(d, 0), cplx(0, 0), seed, opt.win_order,
                               "window_R"));
    g.panels.push_back(detail::pullback_panel(u, cplx(0, 0), cplx(-d, 0), seed,
                                              opt.win_order, "window_R"));
  }
  detail::add_rail(g, u, cplx(-d, 0), tRi, wR_in, false, opt, "rail_R_inner");
  {
    double a = thRi, b = thLi;
    while (b <= a) b += 2 * PI;
    detail::add_arc(g, C.center, C.radius, a, b, opt, "arc_upper");
  }
  detail::add_rail(g, u, cplx(-d, 0), tLi, wL_in, true, opt, "rail_L_inner");
  {
    cplx seed = wL_in;
    g.panels.push_back(detail::pullback_panel(u, cplx(-d, 0), cplx(0, 0), seed,
                                              opt.win_order, "window_L"));
    g.panels.push_back(
        detail::pullback_panel(u, cplx(0, 0), cplx(d, 0), seed, opt.win_order,
                               "window_L"));
  }
  detail::add_rail(g, u, cplx(d, 0), tLo, wL_out, false, opt, "rail_L_outer");
  {
    double a = thLo, b = thRo;
    while (b <= a) b += 2 * PI;
    while (b - a > 2 * PI) a += 2 * PI;
    detail::add_arc(g, C.center, C.radius, a, b, opt, "arc_lower");
  }
  g.flatten();
  return C;
}

// reference contour: the level-curve geometry of the dressed energy itself
inline Contour build_ref_contour(const DressedSuite& S,
                                 const ContourOptions& opt = ContourOptions{}) {
  return build_contour(eps_field(S), S.p, cplx(S.q, 0), cplx(-S.q, 0), opt);
}

// re-adapt the geometry to an updated field, seeding from a previous contour
inline Contour adapt_contour(const UField& u, const ModelParams& p,
                             const Contour& prev,
                             const ContourOptions& opt = ContourOptions{}) {
  return build_contour(u, p, prev.qR, prev.qL, opt);
}

// winding number of the contour about w (1 = enclosed, 0 = outside)
inline int winding_number(const Contour& C, cplx w) {
  cplx s = 0.0;
  for (size_t i = 0; i < C.grid.nodes.size(); ++i)
    s += C.grid.weights[i] / (C.grid.nodes[i] - w);
  return int(std::lround((s / (2.0 * PI * I_UNIT)).real()));
}

inline void write_contour_csv(const Contour& C, std::ostream& os) {
  os << "curve_id,idx,re,im\n";
  os.precision(17);
  std::string cur;
  int idx = 0;
  for (const auto& P : C.grid.panels) {
    if (P.tag != cur) {
      cur = P.tag;
      idx = 0;
    }
    for (cplx z : P.nodes)
      os << cur << ',' << idx++ << ',' << z.real() << ',' << z.imag() << '\n';
  }
}

}  // namespace qtm
