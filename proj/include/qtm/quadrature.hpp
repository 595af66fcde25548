#pragma once
// Composite Gauss-Legendre quadrature on complex polylines with per-panel
// barycentric interpolation and differentiation.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "qtm/params.hpp"

namespace qtm {

// Gauss-Legendre nodes/weights on (-1,1), Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& x,
                           std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

// One smooth panel: nodes along a parametrized arc t in (-1,1) -> z(t).
struct Panel {
  std::vector<cplx> nodes;    // z(t_i)
  std::vector<cplx> weights;  // w_i * z'(t_i)
  std::vector<double> t;      // reference nodes in (-1,1)
  std::vector<double> bary;   // barycentric weights for t-nodes
  cplx a, b;                  // endpoints (straight panels); informational
  std::string tag;

  // barycentric interpolation in the reference coordinate
  cplx interp(double tt, const std::vector<cplx>& vals) const {
    cplx num = 0.0, den = 0.0;
    for (size_t i = 0; i < t.size(); ++i) {
      double d = tt - t[i];
      if (std::abs(d) < 1e-14) return vals[i];
      double q = bary[i] / d;
      num += q * vals[i];
      den += q;
    }
    return num / den;
  }
};

inline void bary_weights(const std::vector<double>& t, std::vector<double>& b) {
  int n = int(t.size());
  b.assign(n, 1.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (j != i) b[i] /= (t[i] - t[j]) * 2.0;  // *2: overflow guard scaling
}

// straight panel from a to b
inline Panel make_panel(cplx a, cplx b, int order, const std::string& tag = "") {
  std::vector<double> x, w;
  gauss_legendre(order, x, w);
  Panel P;
  P.a = a;
  P.b = b;
  P.t = x;
  P.tag = tag;
  bary_weights(x, P.bary);
  cplx mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < order; ++i) {
    P.nodes.push_back(mid + half * x[i]);
    P.weights.push_back(half * w[i]);
  }
  return P;
}

// panel along a parametrized curve s in [s0,s1] with map z(s), z'(s)
inline Panel make_curve_panel(const std::function<cplx(double)>& z,
                              const std::function<cplx(double)>& dz, double s0,
                              double s1, int order,
                              const std::string& tag = "") {
  std::vector<double> x, w;
  gauss_legendre(order, x, w);
  Panel P;
  P.t = x;
  P.tag = tag;
  bary_weights(x, P.bary);
  double mid = 0.5 * (s0 + s1), half = 0.5 * (s1 - s0);
  P.a = z(s0);
  P.b = z(s1);
  for (int i = 0; i < order; ++i) {
    double s = mid + half * x[i];
    P.nodes.push_back(z(s));
    P.weights.push_back(half * w[i] * dz(s));
  }
  return P;
}

struct QuadratureGrid {
  std::vector<Panel> panels;
  std::vector<cplx> nodes;    // flattened
  std::vector<cplx> weights;  // flattened
  std::string parametrization;

  void flatten() {
    nodes.clear();
    weights.clear();
    for (auto& P : panels) {
      nodes.insert(nodes.end(), P.nodes.begin(), P.nodes.end());
      weights.insert(weights.end(), P.weights.begin(), P.weights.end());
    }
  }
  int size() const { return int(nodes.size()); }
  cplx total_length() const {  // complex contour integral of 1
    cplx s = 0.0;
    for (auto& w : weights) s += w;
    return s;
  }
  template <class F>
  cplx integrate(F&& f) const {
    cplx s = 0.0;
    for (size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
    return s;
  }
  template <class F>
  Eigen::VectorXcd sample(F&& f) const {
    Eigen::VectorXcd v(size());
    for (int i = 0; i < size(); ++i) v(i) = f(nodes[i]);
    return v;
  }
};

// segment [-Q,Q] split into n_panels equal straight panels
inline QuadratureGrid make_segment_grid(double Q, int n_panels, int order) {
  QuadratureGrid g;
  g.parametrization = "segment[-Q,Q]";
  if (Q > 0.0) {
    for (int k = 0; k < n_panels; ++k) {
      double a = -Q + 2.0 * Q * k / n_panels;
      double b = -Q + 2.0 * Q * (k + 1) / n_panels;
      g.panels.push_back(make_panel(cplx(a, 0), cplx(b, 0), order, "seg"));
    }
  }
  g.flatten();
  return g;
}

// straight segment from a to b split into n_panels
inline QuadratureGrid make_line_grid(cplx a, cplx b, int n_panels, int order,
                                     const std::string& tag = "line") {
  QuadratureGrid g;
  g.parametrization = tag;
  for (int k = 0; k < n_panels; ++k) {
    cplx pa = a + (b - a) * (double(k) / n_panels);
    cplx pb = a + (b - a) * (double(k + 1) / n_panels);
    g.panels.push_back(make_panel(pa, pb, order, tag));
  }
  g.flatten();
  return g;
}

// geometric grading of [0, L]: breakpoints 0, L*r^{m-1}, ..., L*r, L
inline std::vector<double> geometric_breaks(double L, int m, double r = 0.25) {
  std::vector<double> b{0.0};
  for (int k = m - 1; k >= 1; --k) b.push_back(L * std::pow(r, k));
  b.push_back(L);
  return b;
}

}  // namespace qtm
