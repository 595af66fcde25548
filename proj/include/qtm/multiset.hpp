#pragma once
// Signed multisets of complex points and the i*pi-periodic metric.

#include <complex>
#include <utility>
#include <vector>

#include "qtm/params.hpp"

namespace qtm {

// distance on C / (i pi Z)
inline double dist_ipi(cplx z, cplx w) {
  cplx d = z - w;
  double im = std::remainder(d.imag(), PI);
  return std::hypot(d.real(), im);
}

// Points with integer multiplicities (positive or negative).  Coinciding
// points are merged with absolute tolerance 1e-12; the representative is the
// first-inserted point.
struct SignedMultiset {
  static constexpr double merge_tol = 1e-12;
  std::vector<std::pair<cplx, int>> entries;

  SignedMultiset() = default;
  SignedMultiset(std::initializer_list<std::pair<cplx, int>> init) {
    for (auto& e : init) add(e.first, e.second);
  }

  void add(cplx pt, int mult) {
    if (mult == 0) return;
    for (auto it = entries.begin(); it != entries.end(); ++it) {
      if (std::abs(it->first - pt) < merge_tol) {
        it->second += mult;
        if (it->second == 0) entries.erase(it);
        return;
      }
    }
    entries.push_back({pt, mult});
  }

  int total() const {
    int n = 0;
    for (auto& e : entries) n += e.second;
    return n;
  }
  int abs_total() const {
    int n = 0;
    for (auto& e : entries) n += std::abs(e.second);
    return n;
  }
  bool empty() const { return entries.empty(); }

  template <class F>
  cplx sum(F&& f) const {  // weighted sum: multiplicity-many copies
    cplx s = 0.0;
    for (auto& e : entries) s += double(e.second) * f(e.first);
    return s;
  }
  template <class F>
  cplx log_product(F&& logf) const {  // weighted product in log domain
    cplx s = 0.0;
    for (auto& e : entries) s += double(e.second) * logf(e.first);
    return s;
  }
};

enum class MsOp { Sum, Difference };

inline SignedMultiset ms_combine(const SignedMultiset& A,
                                 const SignedMultiset& B, MsOp op) {
  SignedMultiset r = A;
  for (auto& e : B.entries) r.add(e.first, op == MsOp::Sum ? e.second : -e.second);
  return r;
}

}  // namespace qtm
