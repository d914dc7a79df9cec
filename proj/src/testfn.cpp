#include "apsg/testfn.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "apsg/quadrature.hpp"

namespace apsg {

namespace {

// Polynomials as ascending complex coefficient lists.
using Poly = std::vector<cplx>;

cplx poly_eval(const Poly& p, double t) {
  cplx acc = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * t + *it;
  return acc;
}

Poly poly_mul(const Poly& p, const Poly& q) {
  Poly out(p.size() + q.size() - 1, cplx(0.0));
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < q.size(); ++j) out[i + j] += p[i] * q[j];
  return out;
}

Poly poly_axpy(cplx alpha, const Poly& p, Poly q) {
  if (q.size() < p.size()) q.resize(p.size(), cplx(0.0));
  for (std::size_t i = 0; i < p.size(); ++i) q[i] += alpha * p[i];
  return q;
}

Poly poly_diff(const Poly& p) {
  if (p.size() <= 1) return {cplx(0.0)};
  Poly out(p.size() - 1);
  for (std::size_t i = 1; i < p.size(); ++i) out[i - 1] = double(i) * p[i];
  return out;
}

}  // namespace

CompactFnPtr nth_derivative(CompactFnPtr f, int k) {
  require(k >= 0, "derivative order must be non-negative");
  for (int i = 0; i < k; ++i) f = f->derivative();
  return f;
}

// ---------------------------------------------------------------------------
// TestFunction

TestFunction TestFunction::bump(double a, double b, std::vector<cplx> poly) {
  require(a < b, "bump: degenerate interval (need a < b)");
  require(!poly.empty(), "bump: empty polynomial");
  const double len = b - a;
  // sup of exp(-1/w) on (a,b) is exp(-4/len^2), attained at the midpoint
  const double norm = std::exp(4.0 / (len * len));
  return TestFunction(a, b, std::move(poly), 0, norm);
}

cplx TestFunction::value(double t) const {
  if (t <= a_ || t >= b_) return cplx(0.0);
  const double w = (t - a_) * (b_ - t);
  const double expo = -1.0 / w - double(wpow_) * std::log(w);
  if (expo < -700.0) return cplx(0.0);
  return poly_eval(num_, t) * (norm_ * std::exp(expo));
}

TestFunction TestFunction::derived(int k) const {
  require(k >= 0, "derivative order must be non-negative");
  // w = (t-a)(b-t); d/dt [P/w^m * e^{-1/w}] = [P'w^2 - m P w' w + P w'] / w^{m+2} * e^{-1/w}
  const Poly w = {-a_ * b_, a_ + b_, cplx(-1.0)};
  const Poly wp = {a_ + b_, cplx(-2.0)};
  const Poly w2 = poly_mul(w, w);
  Poly num = num_;
  int m = wpow_;
  for (int i = 0; i < k; ++i) {
    Poly next = poly_mul(poly_diff(num), w2);
    next = poly_axpy(cplx(-double(m)), poly_mul(poly_mul(num, wp), w), std::move(next));
    next = poly_axpy(cplx(1.0), poly_mul(num, wp), std::move(next));
    num = std::move(next);
    m += 2;
  }
  return TestFunction(a_, b_, std::move(num), m, norm_);
}

CompactFnPtr TestFunction::derivative() const {
  return std::make_shared<TestFunction>(derived(1));
}

TestFunction TestFunction::scaled(cplx alpha) const {
  Poly num = num_;
  for (auto& c : num) c *= alpha;
  return TestFunction(a_, b_, std::move(num), wpow_, norm_);
}

// ---------------------------------------------------------------------------
// LinearCombination

LinearCombination::LinearCombination(std::vector<std::pair<cplx, CompactFnPtr>> terms)
    : terms_(std::move(terms)) {
  require(!terms_.empty(), "lincomb: no terms");
  supp_ = terms_.front().second->support();
  for (const auto& [c, f] : terms_) supp_ = Interval::hull(supp_, f->support());
}

cplx LinearCombination::value(double t) const {
  cplx acc = 0.0;
  for (const auto& [c, f] : terms_) acc += c * f->value(t);
  return acc;
}

CompactFnPtr LinearCombination::derivative() const {
  std::vector<std::pair<cplx, CompactFnPtr>> terms;
  terms.reserve(terms_.size());
  for (const auto& [c, f] : terms_) terms.emplace_back(c, f->derivative());
  return std::make_shared<LinearCombination>(std::move(terms));
}

CompactFnPtr lincomb(std::vector<std::pair<cplx, CompactFnPtr>> terms) {
  return std::make_shared<LinearCombination>(std::move(terms));
}

CompactFnPtr shared(TestFunction f) { return std::make_shared<TestFunction>(std::move(f)); }

// ---------------------------------------------------------------------------
// Convolution0

Convolution0::Convolution0(CompactFnPtr f, CompactFnPtr g) : f_(std::move(f)), g_(std::move(g)) {
  const Interval sf = f_->support(), sg = g_->support();
  require(sf.lo >= -1e-12 && sg.lo >= -1e-12,
          "convolve0: supports must lie in [0, inf)");
  supp_ = {sf.lo + sg.lo, sf.hi + sg.hi};
}

cplx Convolution0::value(double t) const {
  if (t <= supp_.lo || t >= supp_.hi) return cplx(0.0);
  const Interval sf = f_->support(), sg = g_->support();
  const double lo = std::max(sg.lo, t - sf.hi);
  const double hi = std::min(sg.hi, t - sf.lo);
  if (hi <= lo) return cplx(0.0);
  auto integrand = [&](double s) { return f_->value(t - s) * g_->value(s); };
  return integrate(integrand, lo, hi, 1e-12, 1e-11).value;
}

CompactFnPtr Convolution0::derivative() const {
  return std::make_shared<Convolution0>(f_->derivative(), g_);
}

// ---------------------------------------------------------------------------
// SampledFunction

SampledFunction::SampledFunction(Interval supp, double t0, double h, std::vector<cplx> values,
                                 std::vector<double> errors,
                                 std::function<CompactFnPtr()> derivative_maker)
    : supp_(supp),
      t0_(t0),
      h_(h),
      values_(std::move(values)),
      errors_(std::move(errors)),
      derivative_maker_(std::move(derivative_maker)) {
  require(h_ > 0 && values_.size() >= 4, "sampled function: need h > 0 and >= 4 samples");
}

SampledFunction SampledFunction::sample(CompactFnPtr base, int cells) {
  const Interval s = base->support();
  const double h = s.length() / cells;
  std::vector<cplx> vals(static_cast<std::size_t>(cells) + 1);
  std::vector<double> errs(vals.size(), 0.0);
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = base->value(s.lo + double(i) * h);
  return SampledFunction(s, s.lo, h, std::move(vals), std::move(errs),
                         [base]() { return base->derivative(); });
}

cplx SampledFunction::value(double t) const {
  if (t <= supp_.lo || t >= supp_.hi) return cplx(0.0);
  const long n = static_cast<long>(values_.size());
  double u = (t - t0_) / h_;
  if (u <= 0.0) return values_.front();
  if (u >= double(n - 1)) return values_.back();
  // cubic Lagrange through the 4 nearest samples
  long j0 = static_cast<long>(std::floor(u)) - 1;
  j0 = std::max(0l, std::min(j0, n - 4));
  cplx acc = 0.0;
  for (long m = 0; m < 4; ++m) {
    double lm = 1.0;
    for (long q = 0; q < 4; ++q)
      if (q != m) lm *= (u - double(j0 + q)) / double(m - q);
    acc += lm * values_[static_cast<std::size_t>(j0 + m)];
  }
  return acc;
}

void SampledFunction::write_csv(std::ostream& os) const {
  os << "t,re,im\n";
  char buf[96];
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double t = t0_ + double(i) * h_;
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", t, values_[i].real(),
                  values_[i].imag());
    os << buf;
  }
}

// ---------------------------------------------------------------------------
// NormalizerZeta

NormalizerZeta::NormalizerZeta() : fn_(TestFunction::bump(-2.0, -1.0, {cplx(1.0)})) {
  const cplx q = integral(fn_);
  fn_ = fn_.scaled(1.0 / q);
}

NormalizerZeta NormalizerZeta::unchecked(TestFunction f) { return NormalizerZeta(std::move(f)); }

// ---------------------------------------------------------------------------
// convolve0 / antideriv_I

namespace {

// sample density matched to the narrowest feature of the inputs
int feature_cells(double length, double feature, int per_feature, int lo, int hi) {
  const double f = std::max(std::min(feature, 1.0), 1e-3);
  const double c = double(per_feature) * length / f;
  return std::clamp(static_cast<int>(c), lo, hi);
}

}  // namespace

SampledFunction convolve0(const TestFunction& phi, const TestFunction& psi, int cells) {
  auto base = std::make_shared<Convolution0>(shared(phi), shared(psi));
  const Interval s = base->support();
  if (cells <= 0)
    cells = feature_cells(s.length(),
                          std::min(phi.support().length(), psi.support().length()), 512, 1024,
                          32768);
  const double h = s.length() / cells;
  std::vector<cplx> vals(static_cast<std::size_t>(cells) + 1);
  std::vector<double> errs(vals.size(), 0.0);
  const Interval sf = phi.support(), sg = psi.support();
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const double t = s.lo + double(i) * h;
    const double lo = std::max(sg.lo, t - sf.hi);
    const double hi = std::min(sg.hi, t - sf.lo);
    if (hi <= lo) continue;
    auto integrand = [&](double x) { return phi.value(t - x) * psi.value(x); };
    auto q = integrate(integrand, lo, hi, 1e-12, 1e-11);
    vals[i] = q.value;
    errs[i] = q.error;
  }
  return SampledFunction(s, s.lo, h, std::move(vals), std::move(errs),
                         [base]() { return base->derivative(); });
}

SampledFunction antideriv_I(CompactFnPtr f, const NormalizerZeta& zeta, int cells) {
  const cplx total = integral(*f);
  const Interval sf = f->support();
  const Interval sz = zeta.fn().support();
  const Interval s = {std::min(sf.lo, sz.lo), std::max(sf.hi, sz.hi)};
  if (cells <= 0) cells = feature_cells(s.length(), sf.length(), 768, 2048, 32768);
  const double h = s.length() / cells;
  auto zfn = shared(zeta.fn());
  auto integrand = [f, zfn, total](double u) { return f->value(u) - total * zfn->value(u); };

  std::vector<double> grid(static_cast<std::size_t>(cells) + 1);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = s.lo + double(i) * h;
  auto vals = cumulative_integral(integrand, s.lo, grid, 1e-12, 1e-11);
  std::vector<double> errs(vals.size(), 1e-11);

  return SampledFunction(s, s.lo, h, std::move(vals), std::move(errs), [f, zfn, total]() {
    return lincomb({{cplx(1.0), f}, {-total, zfn}});
  });
}

SampledFunction antideriv_I(const TestFunction& f, const NormalizerZeta& zeta, int cells) {
  return antideriv_I(shared(f), zeta, cells);
}

// ---------------------------------------------------------------------------

cplx integral(const CompactFunction& f, double abs_tol, double rel_tol) {
  const Interval s = f.support();
  return integrate([&](double t) { return f.value(t); }, s.lo, s.hi, abs_tol, rel_tol).value;
}

double sup_norm(const CompactFunction& f) {
  const Interval s = f.support();
  const int n = 4096;
  const double h = s.length() / n;
  double best = 0.0, best_t = s.lo;
  for (int i = 0; i <= n; ++i) {
    const double t = s.lo + i * h;
    const double v = std::abs(f.value(t));
    if (v > best) {
      best = v;
      best_t = t;
    }
  }
  // golden-section refinement of |f| around the grid maximum
  double a = std::max(s.lo, best_t - h), b = std::min(s.hi, best_t + h);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = std::abs(f.value(c)), fd = std::abs(f.value(d));
  for (int it = 0; it < 80 && (b - a) > 1e-13; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = std::abs(f.value(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = std::abs(f.value(d));
    }
  }
  return std::max(best, std::max(fc, fd));
}

}  // namespace apsg
