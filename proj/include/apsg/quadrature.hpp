#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "apsg/common.hpp"

namespace apsg {

// Gauss-Kronrod 7-15 rule (QUADPACK qk15 constants). Kronrod abscissae on
// [0,1] half-interval; every other node carries a Gauss weight.
namespace gk15 {
inline constexpr double xgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double wgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
}  // namespace gk15

inline double norm_of(double v) { return std::abs(v); }
inline double norm_of(const cplx& v) { return std::abs(v); }
inline double norm_of(const Vec& v) { return v.norm(); }
inline double norm_of(const Mat& v) { return v.norm(); }

template <class V>
struct QuadResult {
  V value;
  double error = 0.0;   // accumulated |K15 - G7| over accepted panels
  long evaluations = 0;
};

namespace detail {

template <class F, class V = std::invoke_result_t<F, double>>
std::pair<V, double> gk15_panel(F&& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double r = 0.5 * (b - a);
  V fc = f(c);
  V kron = gk15::wgk[7] * fc;
  V gauss = gk15::wg[3] * fc;
  for (int i = 0; i < 7; ++i) {
    V lo = f(c - r * gk15::xgk[i]);
    V hi = f(c + r * gk15::xgk[i]);
    V pair_sum = lo + hi;
    kron = kron + gk15::wgk[i] * pair_sum;
    if (i % 2 == 1) gauss = gauss + gk15::wg[i / 2] * pair_sum;
  }
  kron = r * kron;
  gauss = r * gauss;
  return {kron, norm_of(V(kron - gauss))};
}

template <class F, class V>
void gk15_adaptive(F&& f, double a, double b, double abs_tol, double rel_tol,
                   int depth, QuadResult<V>& acc, double global_scale) {
  auto [value, err] = gk15_panel(f, a, b);
  acc.evaluations += 15;
  const double tol = std::max(abs_tol, rel_tol * std::max(global_scale, norm_of(value)));
  if (err <= tol || depth >= 48 || (b - a) < 1e-14 * (1.0 + std::abs(a))) {
    acc.value = acc.value + value;
    acc.error += err;
    return;
  }
  const double m = 0.5 * (a + b);
  gk15_adaptive(f, a, m, 0.5 * abs_tol, rel_tol, depth + 1, acc, global_scale);
  gk15_adaptive(f, m, b, 0.5 * abs_tol, rel_tol, depth + 1, acc, global_scale);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod integration of a smooth integrand over [a, b].
/// Works for double, complex and Eigen vector/matrix values.
template <class F, class V = std::invoke_result_t<F, double>>
QuadResult<V> integrate(F&& f, double a, double b, double abs_tol = 1e-10,
                        double rel_tol = 1e-10) {
  QuadResult<V> acc;
  acc.value = V(0.0 * f(0.5 * (a + b)));  // zero of the right shape
  if (a == b) return acc;
  const double sign = (a <= b) ? 1.0 : -1.0;
  const double lo = std::min(a, b), hi = std::max(a, b);
  auto [probe, perr] = detail::gk15_panel(f, lo, hi);
  const double scale = norm_of(probe);
  detail::gk15_adaptive(f, lo, hi, abs_tol, rel_tol, 0, acc, scale);
  if (sign < 0) acc.value = V(-acc.value);
  return acc;
}

/// Running integral of f from `from` over the points of `grid` (ascending).
/// Returns the cumulative values; each cell is integrated adaptively.
template <class F, class V = std::invoke_result_t<F, double>>
std::vector<V> cumulative_integral(F&& f, double from, const std::vector<double>& grid,
                                   double abs_tol = 1e-11, double rel_tol = 1e-11) {
  std::vector<V> out;
  out.reserve(grid.size());
  V running = V(0.0 * f(from));
  double prev = from;
  for (double t : grid) {
    running = running + integrate(f, prev, t, abs_tol, rel_tol).value;
    out.push_back(running);
    prev = t;
  }
  return out;
}

/// Composite Simpson over uniformly spaced samples with indices [i0, i1]
/// (inclusive); `sample(i)` produces the i-th value. An odd interval count is
/// finished with the 3/8 rule on the last three cells.
template <class GetF, class V = std::invoke_result_t<GetF, std::size_t>>
V simpson_indexed(GetF&& sample, double h, std::size_t i0, std::size_t i1) {
  if (i1 <= i0) return V(0.0 * sample(i0));
  std::size_t n = i1 - i0;
  V sum = V(0.0 * sample(i0));
  std::size_t even_end = i1;
  if (n % 2 == 1) {
    if (n >= 3) {
      even_end = i1 - 3;
      sum = sum + (3.0 * h / 8.0) * (sample(even_end) + 3.0 * sample(even_end + 1) +
                                     3.0 * sample(even_end + 2) + sample(i1));
    } else {
      return V((h / 2.0) * (sample(i0) + sample(i1)));
    }
  }
  if (even_end > i0) {
    V acc = sample(i0) + sample(even_end);
    for (std::size_t i = i0 + 1; i < even_end; i += 2) acc = acc + 4.0 * sample(i);
    for (std::size_t i = i0 + 2; i < even_end; i += 2) acc = acc + 2.0 * sample(i);
    sum = sum + (h / 3.0) * acc;
  }
  return sum;
}

template <class V>
V simpson_on_grid(const std::vector<V>& samples, double h, std::size_t i0, std::size_t i1) {
  return simpson_indexed([&](std::size_t i) { return samples[i]; }, h, i0, i1);
}

}  // namespace apsg
