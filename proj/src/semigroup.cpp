#include "apsg/semigroup.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <ostream>
#include <unsupported/Eigen/MatrixFunctions>

#include "apsg/quadrature.hpp"

namespace apsg {

double g_weight(int n, double t) {
  require(n >= 1, "g_weight: n must be >= 1");
  double acc = 1.0;
  for (int k = 1; k < n; ++k) acc *= t / double(k);
  return acc;  // t^{n-1}/(n-1)!
}

cplx kernel_s(cplx lambda, int n, double t) {
  if (n == 0) return std::exp(lambda * t);
  const cplx z = lambda * t;
  if (std::abs(z) < 1e-3) {
    // series continuation: t^n sum_{j>=0} z^j / (j+n)!
    double nfact = 1.0;
    for (int k = 2; k <= n; ++k) nfact *= double(k);
    cplx term = 1.0 / nfact;
    cplx sum = term;
    for (int j = 1; j <= 10; ++j) {
      term *= z / double(n + j);
      sum += term;
    }
    return std::pow(t, n) * sum;
  }
  cplx partial = 0.0, zk = 1.0;
  for (int k = 0; k < n; ++k) {
    partial += zk;
    zk *= z / double(k + 1);
  }
  return (std::exp(z) - partial) / std::pow(lambda, n);
}

cplx kernel_cos(cplx lambda, int n, double t) {
  if (lambda == cplx(0.0)) return kernel_s(cplx(0.0), n, t);
  const cplx mu = std::sqrt(lambda);
  return 0.5 * (kernel_s(mu, n, t) + kernel_s(-mu, n, t));
}

// ---------------------------------------------------------------------------
// Trajectory / ExtendedTrajectory

void Trajectory::validate() const {
  require(h > 0.0, "trajectory: step must be positive");
  require(values.allFinite(), "trajectory: non-finite values");
}

void Trajectory::write_csv(std::ostream& os) const {
  os << "t";
  for (Eigen::Index i = 0; i < dim(); ++i) os << ",re_" << (i + 1) << ",im_" << (i + 1);
  os << "\n";
  char buf[64];
  for (Eigen::Index k = 0; k < samples(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", time(k));
    os << buf;
    for (Eigen::Index i = 0; i < dim(); ++i) {
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g", values(i, k).real(), values(i, k).imag());
      os << buf;
    }
    os << "\n";
  }
}

Vec ExtendedTrajectory::value_at(double t) const {
  Vec acc = Vec::Zero(coeffs.rows());
  for (std::size_t j = 0; j < freqs.size(); ++j)
    acc += coeffs.col(static_cast<Eigen::Index>(j)) * std::exp(kImag * (freqs[j] * t));
  return acc;
}

// ---------------------------------------------------------------------------
// helpers

namespace {

Mat block_generator(const Mat& A) {
  const Eigen::Index d = A.rows();
  Mat B = Mat::Zero(2 * d, 2 * d);
  B.topRightCorner(d, d) = Mat::Identity(d, d);
  B.bottomLeftCorner(d, d) = A;
  return B;
}

// Non-owning view; only for derivative chains that live within one call.
CompactFnPtr borrow(const CompactFunction& f) {
  return CompactFnPtr(&f, [](const CompactFunction*) {});
}

double spectral_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues().maxCoeff();
}

// First derivative by central differences with a 4-level Richardson table.
Vec d1_richardson(const std::function<Vec(double)>& f, double t, double h0) {
  constexpr int L = 4;
  std::vector<Vec> R(L);
  for (int k = 0; k < L; ++k) {
    const double h = h0 / double(1 << k);
    R[static_cast<std::size_t>(k)] = (f(t + h) - f(t - h)) / (2.0 * h);
  }
  for (int m = 1; m < L; ++m) {
    const double p = std::pow(4.0, m);
    for (int k = L - 1; k >= m; --k)
      R[static_cast<std::size_t>(k)] =
          (p * R[static_cast<std::size_t>(k)] - R[static_cast<std::size_t>(k - 1)]) / (p - 1.0);
  }
  return R[L - 1];
}

}  // namespace

// ---------------------------------------------------------------------------
// IntegratedFamily

IntegratedFamily::IntegratedFamily(OperatorPair pair, int n, FamilyKind kind,
                                   EvalStrategy strategy, double tau)
    : pair_(std::move(pair)), n_(n), kind_(kind), strategy_(strategy), tau_(tau) {
  require(n_ >= 0, "integrated family: order must be >= 0");
  require(tau_ > 0, "integrated family: horizon must be positive");
  const Eigen::Index d = pair_.dim();
  if (pair_.variant() == OperatorPair::Variant::spectral) {
    eigen_ok_ = true;
    V_ = Mat::Identity(d, d);
    Vinv_ = V_;
    for (const auto& m : pair_.modes()) eig_values_.push_back(m.lambda);
  } else {
    Eigen::ComplexEigenSolver<Mat> es(pair_.A());
    if (es.info() == Eigen::Success) {
      Eigen::JacobiSVD<Mat> svd(es.eigenvectors());
      const double smin = svd.singularValues().minCoeff();
      const double smax = svd.singularValues().maxCoeff();
      if (smin > 1e-8 * std::max(smax, 1.0)) {
        eigen_ok_ = true;
        V_ = es.eigenvectors();
        Vinv_ = V_.partialPivLu().inverse();
        for (Eigen::Index j = 0; j < d; ++j) eig_values_.push_back(es.eigenvalues()[j]);
      }
    }
    // defective matrices fall back to scaling-and-squaring exponentials
  }
}

IntegratedFamily IntegratedFamily::with_order(int n) const {
  require(n >= 0, "integrated family: order must be >= 0");
  IntegratedFamily f = *this;
  f.n_ = n;
  return f;
}

IntegratedFamily IntegratedFamily::with_strategy(EvalStrategy s) const {
  IntegratedFamily f = *this;
  f.strategy_ = s;
  return f;
}

IntegratedFamily IntegratedFamily::with_output_scale(double s) const {
  IntegratedFamily f = *this;
  f.output_scale_ = s;
  return f;
}

cplx IntegratedFamily::mode_kernel(cplx lambda, int n, double t) const {
  return kind_ == FamilyKind::semigroup ? kernel_s(lambda, n, t) : kernel_cos(lambda, n, t);
}

cplx IntegratedFamily::mode_delta(cplx lambda, double t) const {
  if (kind_ == FamilyKind::semigroup) return std::exp(lambda * t);
  if (lambda == cplx(0.0)) return cplx(1.0);
  const cplx mu = std::sqrt(lambda);
  return 0.5 * (std::exp(mu * t) + std::exp(-mu * t));  // cosh(mu t)
}

Vec IntegratedFamily::propagator_apply(double t, const Vec& x) const {
  if (kind_ == FamilyKind::semigroup) return (t * pair_.A()).exp() * x;
  const Eigen::Index d = pair_.dim();
  const Mat E = (t * block_generator(pair_.A())).exp();
  Vec z = Vec::Zero(2 * d);
  z.tail(d) = x;
  return (E * z).tail(d);  // pi2 of the block orbit of (0, x)
}

Vec IntegratedFamily::s_quadrature(double t, const Vec& x) const {
  const Vec cx = pair_.apply_C(x);
  if (n_ == 0) return propagator_apply(t, cx);
  if (t == 0.0) return Vec::Zero(x.size());
  auto integrand = [&](double s) -> Vec { return g_weight(n_, t - s) * propagator_apply(s, cx); };
  return integrate(integrand, 0.0, t, 1e-13, 1e-13).value;
}

Vec IntegratedFamily::S(double t, const Vec& x) const {
  require(t >= 0.0, "S_n: t must be >= 0");
  Vec out;
  if (eigen_ok_ && strategy_ == EvalStrategy::eigen_closed_form) {
    Vec y = Vinv_ * pair_.apply_C(x);
    for (Eigen::Index j = 0; j < y.size(); ++j)
      y[j] *= mode_kernel(eig_values_[static_cast<std::size_t>(j)], n_, t);
    out = V_ * y;
  } else {
    out = s_quadrature(t, x);
  }
  return output_scale_ * out;
}

Vec IntegratedFamily::G_phi(const CompactFunction& phi, const Vec& x) const {
  const Interval supp = phi.support();
  require(supp.hi <= tau_ + 1e-9, "G(phi): support exceeds the family horizon");
  const double lo = std::max(0.0, supp.lo);
  const double hi = std::min(supp.hi, tau_);
  if (hi <= lo) return Vec::Zero(x.size());
  const CompactFnPtr dn = nth_derivative(borrow(phi), n_);
  const double sign = (n_ % 2 == 0) ? 1.0 : -1.0;
  auto integrand = [&](double t) -> Vec { return dn->value(t) * S(t, x); };
  return sign * integrate(integrand, lo, hi, 1e-11, 1e-10).value;
}

namespace {

// Shared core of the operator-valued representation-formula integrals:
// sign * \int weight(t) S_n(t) dt as a matrix.
Mat representation_integral(const IntegratedFamily& F, const CompactFunction& weight_fn,
                            int weight_order, double lo, double hi, double sign) {
  const Eigen::Index d = F.pair().dim();
  if (hi <= lo) return Mat::Zero(d, d);
  const CompactFnPtr w = nth_derivative(borrow(weight_fn), weight_order);
  Mat basis = Mat::Identity(d, d);
  auto integrand = [&](double t) -> Mat {
    Mat s(d, d);
    for (Eigen::Index j = 0; j < d; ++j) s.col(j) = F.S(t, basis.col(j));
    return w->value(t) * s;
  };
  return sign * integrate(integrand, lo, hi, 1e-11, 1e-10).value;
}

}  // namespace

Mat IntegratedFamily::G_phi_matrix(const CompactFunction& phi) const {
  const Interval supp = phi.support();
  require(supp.hi <= tau_ + 1e-9, "G(phi): support exceeds the family horizon");
  const double sign = (n_ % 2 == 0) ? 1.0 : -1.0;
  return representation_integral(*this, phi, n_, std::max(0.0, supp.lo), std::min(supp.hi, tau_),
                                 sign);
}

Mat IntegratedFamily::G_primitive_matrix(const CompactFunction& phi,
                                         const NormalizerZeta& zeta) const {
  const Interval supp = phi.support();
  require(supp.hi <= tau_ + 1e-9, "G^{-1}(phi): support exceeds the family horizon");
  if (n_ >= 1) {
    // G^{-1}(phi) = -G(I(phi)) and I(phi)^{(n)} = phi^{(n-1)} - (\int phi) zeta^{(n-1)};
    // zeta lives in [-2,-1], so only phi^{(n-1)} survives on the integration range.
    const double sign = -((n_ % 2 == 0) ? 1.0 : -1.0);
    return representation_integral(*this, phi, n_ - 1, std::max(0.0, supp.lo),
                                   std::min(supp.hi, tau_), sign);
  }
  const SampledFunction iphi = antideriv_I(borrow(phi), zeta);
  const Interval is = iphi.support();
  return representation_integral(*this, iphi, 0, std::max(0.0, is.lo), std::min(is.hi, tau_),
                                 -1.0);
}

Vec IntegratedFamily::G_delta(double t, const Vec& x) const {
  require(t >= 0.0, "G(delta_t): t must be >= 0");
  double ratio = 0.0;
  if (!pair_.admissible(x, &ratio))
    throw std::domain_error("outside solution space: coefficient-decay bound exceeded (ratio " +
                            std::to_string(ratio) + ")");
  if (eigen_ok_ && strategy_ == EvalStrategy::eigen_closed_form) {
    Vec y = Vinv_ * x;
    for (Eigen::Index j = 0; j < y.size(); ++j)
      y[j] *= mode_delta(eig_values_[static_cast<std::size_t>(j)], t);
    return output_scale_ * (V_ * y);
  }
  // definitional route: the n-fold derivative of C^{-1} S_n(.) x
  std::function<Vec(double)> level = [this, &x](double s) { return pair_.solve_C(s_quadrature(s, x)); };
  const double h0 =
      std::pow(std::numeric_limits<double>::epsilon(), 1.0 / double(n_ + 2)) * std::max(1.0, t);
  for (int i = 0; i < n_; ++i) {
    auto below = level;
    level = [below, h0](double s) { return d1_richardson(below, s, h0); };
  }
  return output_scale_ * level(t);
}

Trajectory IntegratedFamily::orbit(const Vec& x, double T, double h) const {
  require(h > 0 && T > 0, "orbit: need positive T and h");
  double ratio = 0.0;
  if (!pair_.admissible(x, &ratio))
    throw std::domain_error("outside solution space: coefficient-decay bound exceeded");
  if (!eigen_ok_) return orbit_propagator(x, T, h);
  const auto N = static_cast<Eigen::Index>(std::floor(T / h + 1e-9));
  Trajectory tr;
  tr.h = h;
  tr.values.resize(x.size(), N + 1);
  tr.provenance = "G(delta_t) x, eigen closed form";
  const Vec y0 = Vinv_ * x;
  Vec y(y0.size());
  for (Eigen::Index k = 0; k <= N; ++k) {
    const double t = h * double(k);
    for (Eigen::Index j = 0; j < y.size(); ++j)
      y[j] = mode_delta(eig_values_[static_cast<std::size_t>(j)], t) * y0[j];
    tr.values.col(k) = output_scale_ * (V_ * y);
  }
  tr.validate();
  return tr;
}

Trajectory IntegratedFamily::orbit_propagator(const Vec& x, double T, double h) const {
  require(h > 0 && T > 0, "orbit: need positive T and h");
  double ratio = 0.0;
  if (!pair_.admissible(x, &ratio))
    throw std::domain_error("outside solution space: coefficient-decay bound exceeded");
  const auto N = static_cast<Eigen::Index>(std::floor(T / h + 1e-9));
  Trajectory tr;
  tr.h = h;
  tr.values.resize(x.size(), N + 1);
  tr.provenance = "G(delta_t) x, expm stepping";
  if (kind_ == FamilyKind::semigroup) {
    const Mat P = (h * pair_.A()).exp();
    Vec v = x;
    for (Eigen::Index k = 0; k <= N; ++k) {
      tr.values.col(k) = output_scale_ * v;
      v = P * v;
    }
  } else {
    const Eigen::Index d = pair_.dim();
    const Mat P = (h * block_generator(pair_.A())).exp();
    Vec z = Vec::Zero(2 * d);
    z.tail(d) = x;
    for (Eigen::Index k = 0; k <= N; ++k) {
      tr.values.col(k) = output_scale_ * z.tail(d);
      z = P * z;
    }
  }
  tr.validate();
  return tr;
}

// ---------------------------------------------------------------------------
// axiom checkers

double check_cds_axiom(const IntegratedFamily& F, const TestFunction& phi,
                       const TestFunction& psi) {
  const Convolution0 conv(shared(phi), shared(psi));
  const Mat lhs = F.G_phi_matrix(conv) * F.pair().C();
  const Mat rhs = F.G_phi_matrix(phi) * F.G_phi_matrix(psi);
  return spectral_norm(lhs - rhs);
}

double check_cdcf_axiom(const IntegratedFamily& F, const TestFunction& phi,
                        const TestFunction& psi, const NormalizerZeta& zeta) {
  require(F.kind() == FamilyKind::cosine, "check_cdcf_axiom: cosine families only");
  const Convolution0 conv(shared(phi), shared(psi));
  const Mat g_phi = F.G_phi_matrix(phi);
  const Mat g_psi = F.G_phi_matrix(psi);
  const Mat g1_phi = F.G_primitive_matrix(phi, zeta);
  const Mat g1_psi = F.G_primitive_matrix(psi, zeta);
  const Mat lhs = F.G_primitive_matrix(conv, zeta) * F.pair().C();
  return spectral_norm(lhs - (g1_phi * g_psi + g_phi * g1_psi));
}

// ---------------------------------------------------------------------------
// cosine reduction

Vec CosineReduction::embed_second(const Vec& x) const {
  Vec z = Vec::Zero(2 * d);
  z.tail(d) = x;
  return z;
}

Vec CosineReduction::project1(const Vec& z) const { return z.head(d); }
Vec CosineReduction::project2(const Vec& z) const { return z.tail(d); }

Vec CosineReduction::induced_delta(double t, const Vec& x) const {
  const Mat E = (t * block.A()).exp();
  return (E * embed_second(x)).tail(d);
}

CosineReduction cosine_reduction(const OperatorPair& pair) {
  const Eigen::Index d = pair.dim();
  Mat bC = Mat::Zero(2 * d, 2 * d);
  bC.topLeftCorner(d, d) = pair.C();
  bC.bottomRightCorner(d, d) = pair.C();
  CosineReduction r;
  r.block = OperatorPair::matrix_pair(block_generator(pair.A()), std::move(bC));
  r.d = d;
  return r;
}

// ---------------------------------------------------------------------------
// mild solutions and the negative-generator construction

double mild_solution_residual(const IntegratedFamily& F, const Vec& x, double t) {
  auto u = [&](double s) { return F.G_delta(s, x); };
  Vec integral_part;
  if (F.kind() == FamilyKind::semigroup) {
    integral_part = integrate(u, 0.0, t, 1e-11, 1e-11).value;
  } else {
    auto weighted = [&](double s) -> Vec { return (t - s) * F.G_delta(s, x); };
    integral_part = integrate(weighted, 0.0, t, 1e-11, 1e-11).value;
  }
  return (F.pair().A() * integral_part - (u(t) - x)).norm();
}

Vec negative_integrated(const IntegratedFamily& F, const ExtendedTrajectory& ext, double t) {
  require(F.order() >= 1, "negative_integrated: order must be >= 1");
  require(t >= 0.0 && t < F.horizon(), "negative_integrated: t outside [0, tau)");
  auto integrand = [&](double s) -> Vec {
    return g_weight(F.order(), t - s) * F.pair().apply_C(ext.value_at(-s));
  };
  return integrate(integrand, 0.0, t, 1e-11, 1e-11).value;
}

double negative_integrated_identity_residual(const IntegratedFamily& F,
                                             const ExtendedTrajectory& ext, double t,
                                             const Vec& x) {
  const int n = F.order();
  // \int_0^t S^-_n(s) x ds telescopes to the order-(n+1) kernel integral.
  auto snp1 = [&](double s) -> Vec {
    return g_weight(n + 1, t - s) * F.pair().apply_C(ext.value_at(-s));
  };
  const Vec iterated = integrate(snp1, 0.0, t, 1e-11, 1e-11).value;
  const Vec sn_t = negative_integrated(F, ext, t);
  const Vec rhs = sn_t - g_weight(n + 1, t) * F.pair().apply_C(x);
  return ((-F.pair().A()) * iterated - rhs).norm();
}

}  // namespace apsg
