#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <utility>
#include <vector>

#include "apsg/common.hpp"

namespace apsg {

/// A compactly supported smooth function R -> C. Values are exactly zero
/// outside support(); derivative() yields the exact first derivative as a new
/// function object, so arbitrary orders are available by chaining.
class CompactFunction {
 public:
  virtual ~CompactFunction() = default;
  virtual Interval support() const = 0;
  virtual cplx value(double t) const = 0;
  virtual std::shared_ptr<const CompactFunction> derivative() const = 0;
};

using CompactFnPtr = std::shared_ptr<const CompactFunction>;

CompactFnPtr nth_derivative(CompactFnPtr f, int k);

/// Mollifier-polynomial test function: N * P(t)/w(t)^k * exp(-1/w(t)) on
/// (a,b) with w(t) = (t-a)(b-t), zero elsewhere. Differentiation stays in the
/// family (P and k change), so supports are exact at every order.
class TestFunction final : public CompactFunction {
 public:
  /// poly(t) * normalized mollifier on (a,b); the normalization makes the
  /// sup-norm equal to 1 when poly == {1}.
  static TestFunction bump(double a, double b, std::vector<cplx> poly);

  Interval support() const override { return {a_, b_}; }
  cplx value(double t) const override;
  CompactFnPtr derivative() const override;

  /// Exact k-th derivative via the mollifier-rational recurrence.
  TestFunction derived(int k = 1) const;
  TestFunction scaled(cplx alpha) const;

  const std::vector<cplx>& numerator() const { return num_; }
  int denominator_power() const { return wpow_; }
  double normalizer() const { return norm_; }

 private:
  TestFunction(double a, double b, std::vector<cplx> num, int wpow, double norm)
      : a_(a), b_(b), num_(std::move(num)), wpow_(wpow), norm_(norm) {}

  double a_, b_;
  std::vector<cplx> num_;  // ascending coefficients
  int wpow_;
  double norm_;
};

/// alpha1*f1 + alpha2*f2 + ... of shared function objects.
class LinearCombination final : public CompactFunction {
 public:
  explicit LinearCombination(std::vector<std::pair<cplx, CompactFnPtr>> terms);
  Interval support() const override { return supp_; }
  cplx value(double t) const override;
  CompactFnPtr derivative() const override;

 private:
  std::vector<std::pair<cplx, CompactFnPtr>> terms_;
  Interval supp_;
};

CompactFnPtr lincomb(std::vector<std::pair<cplx, CompactFnPtr>> terms);
CompactFnPtr shared(TestFunction f);

/// phi *0 psi with both supports in [0, inf): exact evaluation by adaptive
/// quadrature at every call; d/dt (phi *0 psi) = phi' *0 psi since all
/// derivatives of phi vanish at the left support edge.
class Convolution0 final : public CompactFunction {
 public:
  Convolution0(CompactFnPtr f, CompactFnPtr g);
  Interval support() const override { return supp_; }
  cplx value(double t) const override;
  CompactFnPtr derivative() const override;

 private:
  CompactFnPtr f_, g_;
  Interval supp_;
};

/// Uniformly sampled view of a smooth function: cubic interpolation between
/// samples, a per-point quadrature error estimate, CSV export. Still a
/// CompactFunction; derivative() is delegated, not differenced.
class SampledFunction final : public CompactFunction {
 public:
  SampledFunction(Interval supp, double t0, double h, std::vector<cplx> values,
                  std::vector<double> errors,
                  std::function<CompactFnPtr()> derivative_maker);

  static SampledFunction sample(CompactFnPtr base, int cells);

  Interval support() const override { return supp_; }
  cplx value(double t) const override;
  CompactFnPtr derivative() const override { return derivative_maker_(); }

  double step() const { return h_; }
  double grid_start() const { return t0_; }
  const std::vector<cplx>& samples() const { return values_; }
  const std::vector<double>& point_errors() const { return errors_; }
  void write_csv(std::ostream& os) const;

 private:
  Interval supp_;
  double t0_, h_;
  std::vector<cplx> values_;
  std::vector<double> errors_;
  std::function<CompactFnPtr()> derivative_maker_;
};

/// Fixed normalizer zeta: support inside [-2,-1], unit integral.
class NormalizerZeta {
 public:
  NormalizerZeta();  // canonical representative: normalized bump on (-2,-1)

  /// Bypasses validation; used to probe checker sensitivity to a broken zeta.
  static NormalizerZeta unchecked(TestFunction f);

  const TestFunction& fn() const { return fn_; }

 private:
  explicit NormalizerZeta(TestFunction f) : fn_(std::move(f)) {}
  TestFunction fn_;
};

/// cells <= 0 picks a density matched to the narrowest feature, keeping the
/// cubic-interpolation error well below the quadrature tolerances.
SampledFunction convolve0(const TestFunction& phi, const TestFunction& psi, int cells = 0);

/// I(f)(t) = integral_{-inf}^{t} [f(u) - zeta(u) * integral(f)] du.
/// Compactly supported; d/dt I(f) = f - zeta * integral(f) exactly.
SampledFunction antideriv_I(CompactFnPtr f, const NormalizerZeta& zeta, int cells = 0);
SampledFunction antideriv_I(const TestFunction& f, const NormalizerZeta& zeta, int cells = 0);

cplx integral(const CompactFunction& f, double abs_tol = 1e-12, double rel_tol = 1e-12);
double sup_norm(const CompactFunction& f);

}  // namespace apsg
