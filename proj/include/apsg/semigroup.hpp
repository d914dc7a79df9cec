#pragma once

#include <functional>
#include <iosfwd>
#include <string>

#include "apsg/modelops.hpp"
#include "apsg/testfn.hpp"

namespace apsg {

/// g_n(t) = t^{n-1} / (n-1)!  for n >= 1 (the Riemann-Liouville weight).
double g_weight(int n, double t);

/// (g_n *0 e^{lambda .})(t): closed form lambda^{-n} (e^{lambda t} - sum_{k<n}
/// (lambda t)^k / k!), continued by the power series near lambda t = 0, and
/// t^n / n! at lambda = 0. kernel_s(lambda, 0, t) = e^{lambda t}.
cplx kernel_s(cplx lambda, int n, double t);

/// (g_n *0 cosh(sqrt(lambda) .))(t); for lambda = -r^2 this is the integrated
/// cosine kernel (g_n *0 cos(r .))(t). Even in sqrt(lambda), so the branch is
/// immaterial.
cplx kernel_cos(cplx lambda, int n, double t);

enum class FamilyKind { semigroup, cosine };
enum class EvalStrategy { eigen_closed_form, exponential_quadrature };

/// Uniformly sampled orbit t -> vector on [0, T].
struct Trajectory {
  double h = 0.0;
  Mat values;  // d x (samples), column k holds the value at t = k h
  std::string provenance;

  Eigen::Index dim() const { return values.rows(); }
  Eigen::Index samples() const { return values.cols(); }
  double time(Eigen::Index k) const { return h * double(k); }
  double horizon() const { return h * double(values.cols() - 1); }
  Vec at(Eigen::Index k) const { return values.col(k); }

  void validate() const;  // uniform grid by construction; checks finiteness
  void write_csv(std::ostream& os) const;
};

/// Two-sided extension of an orbit on [-T, T], carried by its trigonometric
/// reconstruction sum_j coeffs_j e^{i freqs_j t} (usable at any real t).
struct ExtendedTrajectory {
  double h = 0.0;
  double T = 0.0;
  Mat values;                 // d x (2N+1), column k at t = -T + k h
  std::vector<double> freqs;  // Bohr frequencies used for the extension
  Mat coeffs;                 // d x k
  double agreement_error = 0.0;  // max deviation from the source on [0, T]

  Vec value_at(double t) const;
};

/// An n-times integrated C-semigroup or C-cosine function over a model pair,
/// with per-eigenvalue closed-form kernels or a matrix-exponential quadrature
/// route. Immutable; all evaluation is pure.
class IntegratedFamily {
 public:
  IntegratedFamily(OperatorPair pair, int n, FamilyKind kind,
                   EvalStrategy strategy = EvalStrategy::eigen_closed_form,
                   double tau = 1e6);

  const OperatorPair& pair() const { return pair_; }
  int order() const { return n_; }
  FamilyKind kind() const { return kind_; }
  EvalStrategy strategy() const { return strategy_; }
  double horizon() const { return tau_; }
  bool eigen_available() const { return eigen_ok_; }

  IntegratedFamily with_order(int n) const;
  IntegratedFamily with_strategy(EvalStrategy s) const;
  /// Fault-injection knob: scales every S_n output; used to validate that the
  /// axiom checkers flag corrupted families.
  IntegratedFamily with_output_scale(double s) const;

  /// S_n(t) x.
  Vec S(double t, const Vec& x) const;

  /// G(phi) x = (-1)^n \int_0^tau phi^{(n)}(t) S_n(t) x dt.
  Vec G_phi(const CompactFunction& phi, const Vec& x) const;
  Mat G_phi_matrix(const CompactFunction& phi) const;
  /// G^{-1}(phi) = -G(I(phi)).
  Mat G_primitive_matrix(const CompactFunction& phi, const NormalizerZeta& zeta) const;

  /// G(delta_t) x: the orbit map. Closed form through the eigenbasis, or the
  /// definitional n-fold derivative of C^{-1} S_n under the quadrature
  /// strategy. Rejects t < 0 and inadmissible vectors.
  Vec G_delta(double t, const Vec& x) const;

  /// e^{tA} x (semigroup) / block-cosine value (cosine) by scaling-and-squaring;
  /// strategy-independent reference route.
  Vec propagator_apply(double t, const Vec& x) const;

  /// Orbit sampling: closed form per sample when the eigenbasis is usable,
  /// otherwise matrix-exponential stepping.
  Trajectory orbit(const Vec& x, double T, double h) const;
  /// Orbit by repeated application of expm(h A) (mutual oracle for `orbit`).
  Trajectory orbit_propagator(const Vec& x, double T, double h) const;

  const std::vector<cplx>& eigenvalues() const { return eig_values_; }
  const Mat& eigenvectors() const { return V_; }

 private:
  cplx mode_kernel(cplx lambda, int n, double t) const;
  cplx mode_delta(cplx lambda, double t) const;
  Vec s_quadrature(double t, const Vec& x) const;

  OperatorPair pair_;
  int n_ = 1;
  FamilyKind kind_ = FamilyKind::semigroup;
  EvalStrategy strategy_ = EvalStrategy::eigen_closed_form;
  double tau_ = 1e6;
  double output_scale_ = 1.0;

  bool eigen_ok_ = false;
  std::vector<cplx> eig_values_;
  Mat V_, Vinv_;
};

/// Residual of the (C-DS) axiom G(phi *0 psi) C = G(phi) G(psi) as an
/// operator norm on the model space.
double check_cds_axiom(const IntegratedFamily& F, const TestFunction& phi,
                       const TestFunction& psi);

/// Residual of (C-DCF1): G^{-1}(phi *0 psi) C = G^{-1}(phi) G(psi) + G(phi) G^{-1}(psi).
double check_cdcf_axiom(const IntegratedFamily& F, const TestFunction& phi,
                        const TestFunction& psi, const NormalizerZeta& zeta);

/// The E+E block reduction of a cosine pair: blockA = [[0, I], [A, 0]],
/// blockC = diag(C, C); the induced cosine orbit is pi2 of the block orbit of
/// (0, x).
struct CosineReduction {
  OperatorPair block;
  Eigen::Index d = 0;

  Vec embed_second(const Vec& x) const;
  Vec project1(const Vec& z) const;
  Vec project2(const Vec& z) const;
  /// pi2( e^{t blockA} (0, x) ) = Cos(t) x.
  Vec induced_delta(double t, const Vec& x) const;
};

CosineReduction cosine_reduction(const OperatorPair& pair);

/// Residual of the defining mild-solution identity:
///   semigroup:  A \int_0^t u(s) ds = u(t) - x,
///   cosine:     A \int_0^t (t-s) u(s) ds = u(t) - x   (y = 0),
/// with u(s) = G(delta_s) x.
double mild_solution_residual(const IntegratedFamily& F, const Vec& x, double t);

/// S^-_n(t) x = \int_0^t g_n(t-s) C S(-s) x ds, the candidate n-times
/// integrated C-semigroup for -A built from the extension of the orbit of x.
Vec negative_integrated(const IntegratedFamily& F, const ExtendedTrajectory& ext, double t);

/// Residual of the integrated-semigroup identity for -A:
///   (-A) \int_0^t S^-_n(s) x ds = S^-_n(t) x - g_{n+1}(t) C x.
double negative_integrated_identity_residual(const IntegratedFamily& F,
                                             const ExtendedTrajectory& ext, double t,
                                             const Vec& x);

}  // namespace apsg
