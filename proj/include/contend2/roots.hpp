#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "contend2/error.hpp"

namespace contend2 {

/// c3 x^3 + c2 x^2 + c1 x + c0 together with a bracket [lo, hi] on which
/// the polynomial changes sign.
struct CubicSpec {
  std::array<double, 4> coefficients;  // c3, c2, c1, c0
  double lo;
  double hi;

  double operator()(double x) const {
    const auto& c = coefficients;
    return ((c[0] * x + c[1]) * x + c[2]) * x + c[3];
  }
  double derivative(double x) const {
    const auto& c = coefficients;
    return (3.0 * c[0] * x + 2.0 * c[1]) * x + c[2];
  }
  double scale() const {
    double s = 0.0;
    for (double c : coefficients) s = std::max(s, std::abs(c));
    return s;
  }
};

/// Bisection to narrow the bracket, then safeguarded Newton. A Newton step
/// that leaves the current bracket is replaced by a bisection step.
inline double solve_cubic_in_bracket(const CubicSpec& spec, double tol = 1e-12) {
  if (!(tol > 0.0)) throw InvalidArgument("root tolerance must be positive");
  double lo = std::min(spec.lo, spec.hi);
  double hi = std::max(spec.lo, spec.hi);
  double flo = spec(lo);
  const double fhi = spec(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0)) {
    throw NoSignChange("cubic does not change sign on [" + std::to_string(lo) + ", " +
                       std::to_string(hi) + "]");
  }
  const double target = tol * spec.scale();

  for (int i = 0; i < 40; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = spec(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }

  double x = 0.5 * (lo + hi);
  for (int i = 0; i < 100; ++i) {
    const double fx = spec(x);
    if (fx == 0.0) return x;
    if ((fx < 0.0) == (flo < 0.0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
    }
    const double d = spec.derivative(x);
    double next = (d != 0.0) ? x - fx / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - x);
    x = next;
    if (std::abs(spec(x)) <= target && step <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(x)) {
      break;
    }
    if (hi - lo <= 2.0 * std::numeric_limits<double>::epsilon() * std::abs(x)) break;
  }
  if (std::abs(spec(x)) > target) {
    throw Error("cubic root solver: residual " + std::to_string(std::abs(spec(x))) +
                " above tolerance");
  }
  return x;
}

/// Plain bisection for a continuous f with a sign change on [lo, hi].
template <class F>
double bisect_root(F&& f, double lo, double hi, double xtol = 1e-15) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0)) {
    throw NoSignChange("function does not change sign on [" + std::to_string(lo) + ", " +
                       std::to_string(hi) + "]");
  }
  for (int i = 0; i < 200 && hi - lo > xtol; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace contend2
