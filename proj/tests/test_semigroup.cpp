#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "apsg/quadrature.hpp"
#include "apsg/rng.hpp"
#include "apsg/semigroup.hpp"
#include "doctest.h"

using namespace apsg;

namespace {

OperatorPair diag_pair(std::vector<cplx> lams) {
  Mat A = Mat::Zero(static_cast<Eigen::Index>(lams.size()), static_cast<Eigen::Index>(lams.size()));
  for (std::size_t i = 0; i < lams.size(); ++i)
    A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = lams[i];
  return OperatorPair::matrix_pair(A, Mat::Identity(A.rows(), A.cols()));
}

// random diagonalizable pair with bounded eigenvalue radius and a commuting,
// well-conditioned C
OperatorPair random_pair(Rng& rng, Eigen::Index d, double radius = 1.0,
                         bool imaginary_spectrum = false) {
  const Mat U = rng.unitary(d);
  Mat D = Mat::Zero(d, d), E = Mat::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    D(j, j) = imaginary_spectrum ? cplx(0.0, rng.uniform(-radius, radius)) : rng.disc(radius);
    E(j, j) = cplx(rng.uniform(0.5, 1.5), 0.0) * rng.unit_complex();
  }
  return OperatorPair::matrix_pair(U * D * U.adjoint(), U * E * U.adjoint());
}

TestFunction random_bump(Rng& rng) {
  const double a = rng.uniform(0.05, 0.8);
  const double b = a + rng.uniform(0.5, 1.4);
  return TestFunction::bump(a, b, {cplx(rng.uniform(0.6, 1.5)), cplx(rng.uniform(-0.3, 0.3))});
}

}  // namespace

TEST_CASE("kernel_s basics") {
  CHECK(std::abs(kernel_s(cplx(0.3, 0.7), 0, 1.2) - std::exp(cplx(0.3, 0.7) * 1.2)) < 1e-14);
  CHECK(std::abs(kernel_s(cplx(0.0), 3, 2.0) - cplx(8.0 / 6.0)) < 1e-14);
  // (g_1 *0 e^{i.})(pi) = int_0^pi e^{is} ds = 2i, against the quadrature oracle
  const cplx oracle = integrate([](double s) { return std::exp(cplx(0, s)); }, 0.0, M_PI).value;
  CHECK(std::abs(kernel_s(cplx(0, 1), 1, M_PI) - cplx(0, 2)) < 1e-12);
  CHECK(std::abs(kernel_s(cplx(0, 1), 1, M_PI) - oracle) < 1e-10);
}

TEST_CASE("kernel_s series branch is continuous across the switch") {
  for (int n : {1, 2, 3}) {
    const cplx lam(0.4, 0.9);
    const double t_lo = 0.9e-3 / std::abs(lam);  // series side
    const double t_hi = 1.1e-3 / std::abs(lam);  // direct side
    auto oracle = [&](double t) {
      return integrate([&](double s) { return g_weight(n, t - s) * std::exp(lam * s); }, 0.0, t,
                       1e-15, 1e-15)
          .value;
    };
    CHECK(std::abs(kernel_s(lam, n, t_lo) - oracle(t_lo)) < 1e-14);
    CHECK(std::abs(kernel_s(lam, n, t_hi) - oracle(t_hi)) < 1e-14);
  }
}

TEST_CASE("cosine kernel reduces to cos for negative real eigenvalues") {
  // lambda = -4: cos(2t); (g_1 *0 cos(2.))(t) = sin(2t)/2
  CHECK(std::abs(kernel_cos(cplx(-4, 0), 0, 0.7) - std::cos(1.4)) < 1e-14);
  CHECK(std::abs(kernel_cos(cplx(-4, 0), 1, 0.7) - std::sin(1.4) / 2.0) < 1e-14);
}

TEST_CASE("S_n at zero is the zero map for n >= 1 and C for n = 0") {
  Rng rng(1);
  auto p = random_pair(rng, 3);
  const Vec x = rng.vector(3);
  IntegratedFamily f1(p, 1, FamilyKind::semigroup);
  CHECK(f1.S(0.0, x).norm() == 0.0);
  IntegratedFamily f0(p, 0, FamilyKind::semigroup);
  CHECK((f0.S(0.0, x) - p.C() * x).norm() < 1e-12);
}

TEST_CASE("integrated value on an eigenvector matches the kernel") {
  auto p = diag_pair({cplx(0, 1)});
  IntegratedFamily f(p, 1, FamilyKind::semigroup);
  const Vec e1 = Vec::Unit(1, 0);
  CHECK((f.S(M_PI, e1) - cplx(0, 2) * e1).norm() < 1e-12);
}

TEST_CASE("eigen and exponential-quadrature strategies agree") {
  Rng rng(7);
  auto p = random_pair(rng, 4);
  for (int n : {0, 1, 2}) {
    IntegratedFamily eig(p, n, FamilyKind::semigroup, EvalStrategy::eigen_closed_form);
    IntegratedFamily quad(p, n, FamilyKind::semigroup, EvalStrategy::exponential_quadrature);
    for (int i = 0; i < 7; ++i) {
      const double t = rng.uniform(0.0, 3.0);
      const Vec x = rng.vector(4);
      CHECK((eig.S(t, x) - quad.S(t, x)).norm() < 1e-7);
    }
  }
}

TEST_CASE("order consistency: d/dt S_{n+1} = S_n") {
  Rng rng(13);
  auto p = random_pair(rng, 3);
  IntegratedFamily f1(p, 1, FamilyKind::semigroup);
  IntegratedFamily f2(p, 2, FamilyKind::semigroup);
  const Vec x = rng.vector(3);
  for (double t : {0.5, 1.0, 2.2}) {
    const double fd = 1e-5;
    const Vec deriv = (f2.S(t + fd, x) - f2.S(t - fd, x)) / (2.0 * fd);
    CHECK((deriv - f1.S(t, x)).norm() < 1e-7);
  }
}

TEST_CASE("G(phi) for the zero generator is integration") {
  Mat A = Mat::Zero(2, 2);
  auto p = OperatorPair::matrix_pair(A, Mat::Identity(2, 2));
  IntegratedFamily f(p, 1, FamilyKind::semigroup);
  auto phi = TestFunction::bump(0.1, 1.2, {cplx(1.0), cplx(0.5)});
  Rng rng(3);
  const Vec x = rng.vector(2);
  const cplx total = integral(phi);
  CHECK((f.G_phi(phi, x) - total * x).norm() < 1e-10);
}

TEST_CASE("representation formula is independent of the integration order") {
  Rng rng(17);
  for (int rep = 0; rep < 5; ++rep) {
    auto p = random_pair(rng, 1 + rng.index(4));
    IntegratedFamily f(p, 1, FamilyKind::semigroup);
    auto phi = random_bump(rng);
    const Vec x = rng.vector(p.dim());
    const Vec v1 = f.G_phi(phi, x);
    const Vec v2 = f.with_order(2).G_phi(phi, x);
    CHECK((v1 - v2).norm() < 1e-7);
  }
}

TEST_CASE("G(phi) on an eigenvector is the transform of the character") {
  auto p = diag_pair({cplx(0, 1)});
  IntegratedFamily f(p, 1, FamilyKind::semigroup);
  auto phi = TestFunction::bump(0.0, 1.0, {cplx(1.0)});
  const Vec e1 = Vec::Unit(1, 0);
  const cplx oracle =
      integrate([&](double t) { return phi.value(t) * std::exp(cplx(0, t)); }, 0.0, 1.0).value;
  CHECK(std::abs(f.G_phi(phi, e1)[0] - oracle) < 1e-8);
}

TEST_CASE("orbit map fixes t = 0 and exponentiates eigenvalues") {
  auto p = diag_pair({cplx(0, 1)});
  IntegratedFamily f(p, 1, FamilyKind::semigroup);
  const Vec e1 = Vec::Unit(1, 0);
  CHECK((f.G_delta(0.0, e1) - e1).norm() == 0.0);
  for (double t : {0.3, 1.7, 6.0})
    CHECK((f.G_delta(t, e1) - std::exp(cplx(0, t)) * e1).norm() < 1e-13);
  CHECK_THROWS_AS(f.G_delta(-0.1, e1), std::invalid_argument);
}

TEST_CASE("cosine orbit on a negative eigenvalue is the cosine") {
  auto p = diag_pair({cplx(-4, 0)});
  IntegratedFamily f(p, 1, FamilyKind::cosine);
  const Vec e1 = Vec::Unit(1, 0);
  CHECK((f.G_delta(M_PI / 2.0, e1) + e1).norm() < 1e-12);  // cos(pi) = -1
}

TEST_CASE("definitional route: Richardson differentiation of C^{-1} S_n") {
  Rng rng(23);
  auto p = random_pair(rng, 2, 0.8);
  for (int n : {1, 2}) {
    IntegratedFamily eig(p, n, FamilyKind::semigroup, EvalStrategy::eigen_closed_form);
    IntegratedFamily quad(p, n, FamilyKind::semigroup, EvalStrategy::exponential_quadrature);
    const Vec x = rng.vector(2);
    for (double t : {0.7, 1.9}) {
      CHECK((eig.G_delta(t, x) - quad.G_delta(t, x)).norm() < 1e-5);
    }
  }
}

TEST_CASE("semigroup law on random vectors") {
  Rng rng(29);
  auto p = random_pair(rng, 4, 1.0, true);
  IntegratedFamily f(p, 1, FamilyKind::semigroup);
  for (int i = 0; i < 50; ++i) {
    const double t = rng.uniform(0.0, 5.0), s = rng.uniform(0.0, 5.0);
    const Vec x = rng.vector(4);
    const double res = (f.G_delta(t, f.G_delta(s, x)) - f.G_delta(t + s, x)).norm();
    CHECK(res <= 1e-8 * (1.0 + x.norm()));
  }
}

TEST_CASE("d'Alembert law for the cosine kind") {
  Rng rng(31);
  auto p = diag_pair({cplx(-1, 0), cplx(-4, 0), cplx(-2.25, 0)});
  IntegratedFamily f(p, 1, FamilyKind::cosine);
  for (int i = 0; i < 50; ++i) {
    const double t = rng.uniform(0.0, 4.0), s = rng.uniform(0.0, 4.0);
    const Vec x = rng.vector(3);
    const Vec lhs = 2.0 * f.G_delta(s, f.G_delta(t, x));
    const Vec rhs = f.G_delta(t + s, x) + f.G_delta(std::abs(t - s), x);
    CHECK((lhs - rhs).norm() <= 1e-8 * (1.0 + x.norm()));
  }
}

TEST_CASE("C-commutation of the distribution actions") {
  Rng rng(37);
  auto p = random_pair(rng, 3);
  IntegratedFamily f(p, 1, FamilyKind::semigroup);
  auto phi = random_bump(rng);
  const Vec x = rng.vector(3);
  const double t = rng.uniform(0.2, 2.0);
  CHECK((f.G_delta(t, p.C() * x) - p.C() * f.G_delta(t, x)).norm() < 1e-10);
  CHECK((f.G_phi(phi, p.C() * x) - p.C() * f.G_phi(phi, x)).norm() < 1e-10);
}

TEST_CASE("eigenvector integrated identity") {
  // S_n(t)x - g_{n+1}(t) C x = ir int_0^t S_n(s)x ds for Ax = ir x
  Rng rng(41);
  auto p = diag_pair({cplx(0, 1.7)});
  const Vec e1 = Vec::Unit(1, 0);
  for (int n : {1, 2}) {
    IntegratedFamily f(p, n, FamilyKind::semigroup);
    for (double t : {0.8, 2.9}) {
      const Vec lhs = f.S(t, e1) - g_weight(n + 1, t) * p.C() * e1;
      const Vec integral_part =
          integrate([&](double s) -> Vec { return f.S(s, e1); }, 0.0, t, 1e-12, 1e-12).value;
      CHECK((lhs - cplx(0, 1.7) * integral_part).norm() <= 1e-8);
    }
  }
}

TEST_CASE("(C-DS) axiom: trivial, random, and corrupted") {
  Mat A0 = Mat::Zero(2, 2);
  auto p0 = OperatorPair::matrix_pair(A0, Mat::Identity(2, 2));
  IntegratedFamily f0(p0, 1, FamilyKind::semigroup);
  auto phi = TestFunction::bump(0.1, 1.1, {cplx(1.0)});
  auto psi = TestFunction::bump(0.2, 1.0, {cplx(0.8), cplx(0.2)});
  CHECK(check_cds_axiom(f0, phi, psi) < 1e-9);

  Rng rng(43);
  auto p = random_pair(rng, 3);
  IntegratedFamily f(p, 1, FamilyKind::semigroup);
  CHECK(check_cds_axiom(f, phi, psi) < 1e-6);

  CHECK(check_cds_axiom(f.with_output_scale(1.01), phi, psi) > 1e-3);
}

TEST_CASE("(C-DCF) axiom: trivial, random, and corrupted zeta") {
  NormalizerZeta zeta;
  auto phi = TestFunction::bump(0.1, 1.1, {cplx(1.0)});
  auto psi = TestFunction::bump(0.2, 1.0, {cplx(0.9), cplx(-0.1)});

  Mat A0 = Mat::Zero(1, 1);
  auto p0 = OperatorPair::matrix_pair(A0, Mat::Identity(1, 1));
  IntegratedFamily f0(p0, 1, FamilyKind::cosine);
  CHECK(check_cdcf_axiom(f0, phi, psi, zeta) < 1e-8);

  auto p = diag_pair({cplx(-1, 0)});
  IntegratedFamily f(p, 1, FamilyKind::cosine);
  CHECK(check_cdcf_axiom(f, phi, psi, zeta) < 1e-6);

  // a zeta with integral 1.01 breaks I(phi') = phi and must be detected
  NormalizerZeta bad = NormalizerZeta::unchecked(zeta.fn().scaled(1.01));
  CHECK(check_cdcf_axiom(f, phi, psi, bad) > 1e-3);
}

TEST_CASE("cosine reduction produces the block rotation") {
  auto p = diag_pair({cplx(-1, 0)});
  const CosineReduction red = cosine_reduction(p);
  CHECK(red.block.dim() == 2);
  // block eigenvalues are +-i
  const EigenSets es = eigensets(red.block);
  bool has_i = false, has_mi = false;
  for (const auto& l : es.all_eigenvalues) {
    has_i = has_i || std::abs(l - cplx(0, 1)) < 1e-10;
    has_mi = has_mi || std::abs(l - cplx(0, -1)) < 1e-10;
  }
  CHECK(has_i);
  CHECK(has_mi);
  const Vec x = Vec::Unit(1, 0);
  for (double t : {0.0, 0.9, 2.5})
    CHECK((red.induced_delta(t, x) - std::cos(t) * x).norm() < 1e-12);
}

TEST_CASE("cosine reduction for the zero generator is the identity orbit") {
  Mat A0 = Mat::Zero(2, 2);
  auto p = OperatorPair::matrix_pair(A0, Mat::Identity(2, 2));
  const CosineReduction red = cosine_reduction(p);
  Rng rng(47);
  const Vec x = rng.vector(2);
  CHECK((red.induced_delta(1.7, x) - x).norm() < 1e-12);
}

TEST_CASE("d'Alembert holds for the reduced family") {
  auto p = diag_pair({cplx(-1, 0), cplx(-3, 0)});
  const CosineReduction red = cosine_reduction(p);
  Rng rng(53);
  for (int i = 0; i < 10; ++i) {
    const double t = rng.uniform(0.0, 3.0), s = rng.uniform(0.0, 3.0);
    const Vec x = rng.vector(2);
    const Vec lhs = 2.0 * red.induced_delta(s, red.induced_delta(t, x));
    const Vec rhs = red.induced_delta(t + s, x) + red.induced_delta(std::abs(t - s), x);
    CHECK((lhs - rhs).norm() <= 1e-8 * (1.0 + x.norm()));
  }
}

TEST_CASE("mild solution residual: eigenvector closed form") {
  auto p = diag_pair({cplx(0, 1)});
  IntegratedFamily f(p, 1, FamilyKind::semigroup);
  CHECK(mild_solution_residual(f, Vec::Unit(1, 0), 2.0) < 1e-10);
}

TEST_CASE("mild solution residual: random pairs") {
  Rng rng(59);
  auto p = random_pair(rng, 3);
  IntegratedFamily f(p, 1, FamilyKind::semigroup);
  for (int i = 0; i < 10; ++i) {
    const double t = rng.uniform(0.2, 3.0);
    const Vec x = rng.vector(3);
    CHECK(mild_solution_residual(f, x, t) < 1e-7);
  }
}

TEST_CASE("mild solution residual: cosine closed form") {
  // -4 int_0^t (t-s) cos 2s ds = cos 2t - 1
  auto p = diag_pair({cplx(-4, 0)});
  IntegratedFamily f(p, 1, FamilyKind::cosine);
  for (double t : {0.7, 1.9, 3.0}) {
    const double sym = std::cos(2.0 * t) - 1.0;
    const cplx quad =
        -4.0 *
        integrate([&](double s) { return (t - s) * std::cos(2.0 * s); }, 0.0, t, 1e-13, 1e-13)
            .value;
    CHECK(std::abs(quad - sym) < 1e-12);  // symbolic antiderivative oracle
    CHECK(mild_solution_residual(f, Vec::Unit(1, 0), t) < 1e-9);
  }
}

TEST_CASE("negative integrated family from the reflected extension") {
  auto p = diag_pair({cplx(0, 1)});
  IntegratedFamily f(p, 1, FamilyKind::semigroup);
  // extension of the orbit of e1: frequencies {1}, coefficient e1
  ExtendedTrajectory ext;
  ext.freqs = {1.0};
  ext.coeffs = Mat::Ones(1, 1);
  ext.h = 0.1;
  ext.T = 10.0;
  ext.values.resize(1, 3);
  ext.values.setOnes();
  const Vec v = negative_integrated(f, ext, M_PI);
  // oracle: int_0^pi e^{-is} ds = (1 - e^{-i pi})/i = -2i
  CHECK(std::abs(v[0] - cplx(0, -2)) < 1e-10);
}

TEST_CASE("negative integrated identity for a two-mode extension") {
  auto p = diag_pair({cplx(0, 1), cplx(0, 2)});
  IntegratedFamily f(p, 1, FamilyKind::semigroup);
  ExtendedTrajectory ext;
  ext.freqs = {1.0, 2.0};
  ext.coeffs = Mat::Identity(2, 2);
  ext.h = 0.1;
  ext.T = 10.0;
  ext.values.resize(2, 3);
  ext.values.setZero();
  const Vec x = Vec::Ones(2);
  for (double t : {0.9, 2.5, 5.0})
    CHECK(negative_integrated_identity_residual(f, ext, t, x) < 1e-6);
}

TEST_CASE("trajectories have floor(T/h)+1 rows and write csv") {
  auto p = diag_pair({cplx(0, 1), cplx(0, 1.5)});
  IntegratedFamily f(p, 1, FamilyKind::semigroup);
  const Vec x = Vec::Ones(2).normalized();
  const Trajectory tr = f.orbit(x, 10.0, 0.1);
  CHECK(tr.samples() == 101);
  const Trajectory tp = f.orbit_propagator(x, 10.0, 0.1);
  CHECK(tp.samples() == 101);
  double worst = 0.0;
  for (Eigen::Index k = 0; k < tr.samples(); ++k)
    worst = std::max(worst, (tr.values.col(k) - tp.values.col(k)).norm());
  CHECK(worst < 1e-10);  // the two trajectory routes are mutual oracles
  std::ostringstream os;
  tr.write_csv(os);
  CHECK(os.str().rfind("t,re_1,im_1,re_2,im_2\n", 0) == 0);
}

TEST_CASE("spectral variant refuses inadmissible orbit starts") {
  std::vector<SpectralMode> modes;
  for (int j = 0; j < 5; ++j)
    modes.push_back({j, cplx(0, 1.0 + 0.5 * j), cplx(std::pow(10.0, -2 * j), 0)});
  auto p = OperatorPair::spectral_pair(modes, 1e-10, 1e3);
  IntegratedFamily f(p, 1, FamilyKind::semigroup);
  Vec flat = Vec::Ones(5);
  CHECK_THROWS_AS(f.G_delta(1.0, flat), std::domain_error);
  Vec decaying(5);
  for (int j = 0; j < 5; ++j) decaying[j] = std::pow(10.0, -2 * j);
  CHECK((f.G_delta(0.0, decaying) - decaying).norm() == 0.0);
}

TEST_CASE("G(phi) rejects supports beyond the family horizon") {
  auto p = diag_pair({cplx(0, 1)});
  IntegratedFamily f(p, 1, FamilyKind::semigroup, EvalStrategy::eigen_closed_form, 2.0);
  auto phi = TestFunction::bump(0.5, 3.0, {cplx(1.0)});
  CHECK_THROWS_AS(f.G_phi(phi, Vec::Unit(1, 0)), std::invalid_argument);
}
