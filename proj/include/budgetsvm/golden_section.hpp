#pragma once

#include <cmath>

namespace budgetsvm {

struct LineSearchResult {
  double x;
  double value;
  int iterations;
};

/// Golden section search for the maximum of a unimodal `f` on [lo, hi].
/// Stops when the bracket is narrower than `tolerance` or after
/// `max_iterations` bracket reductions; returns the best interior probe.
template <class F>
LineSearchResult golden_section_maximize(F&& f, double lo, double hi, double tolerance,
                                         int max_iterations) {
  constexpr double kInvPhi = 0.61803398874989484820;  // (sqrt(5) - 1) / 2
  double c = hi - kInvPhi * (hi - lo);
  double d = lo + kInvPhi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  int it = 0;
  while (it < max_iterations && hi - lo > tolerance) {
    ++it;
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - kInvPhi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + kInvPhi * (hi - lo);
      fd = f(d);
    }
  }
  return fc >= fd ? LineSearchResult{c, fc, it} : LineSearchResult{d, fd, it};
}

}  // namespace budgetsvm
