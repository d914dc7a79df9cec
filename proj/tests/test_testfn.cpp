#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <sstream>

#include "apsg/quadrature.hpp"
#include "apsg/rng.hpp"
#include "apsg/testfn.hpp"
#include "doctest.h"

using namespace apsg;

namespace {

TestFunction random_bump(Rng& rng, double lo_min = 0.0) {
  const double a = lo_min + rng.uniform(0.0, 1.0);
  const double b = a + rng.uniform(0.4, 1.6);
  std::vector<cplx> poly;
  const int deg = rng.index(3);
  for (int i = 0; i <= deg; ++i)
    poly.push_back(cplx(rng.uniform(0.3, 1.5), rng.uniform(-0.5, 0.5)));
  return TestFunction::bump(a, b, std::move(poly));
}

}  // namespace

TEST_CASE("bump vanishes at and outside the support boundary") {
  auto phi = TestFunction::bump(0.0, 1.0, {cplx(1.0)});
  CHECK(phi.value(0.0) == cplx(0.0));
  CHECK(phi.value(1.0) == cplx(0.0));
  CHECK(phi.value(-0.3) == cplx(0.0));
  CHECK(phi.value(2.5) == cplx(0.0));
}

TEST_CASE("unit-poly bump has sup-norm one at the midpoint") {
  auto phi = TestFunction::bump(0.0, 1.0, {cplx(1.0)});
  CHECK(std::abs(phi.value(0.5) - cplx(1.0)) < 1e-15);
}

TEST_CASE("bump value agrees with the direct mollifier formula") {
  // phi(t) = exp(-1/((t-a)(b-t))) * exp(4/(b-a)^2)
  auto phi = TestFunction::bump(0.0, 2.0, {cplx(1.0)});
  const double expected = std::exp(-1.0 / (0.5 * 1.5)) * std::exp(1.0);
  CHECK(std::abs(phi.value(0.5) - cplx(expected)) < 1e-12);
}

TEST_CASE("degenerate interval is rejected") {
  CHECK_THROWS_AS(TestFunction::bump(1.0, 1.0, {cplx(1.0)}), std::invalid_argument);
  CHECK_THROWS_AS(TestFunction::bump(2.0, 1.0, {cplx(1.0)}), std::invalid_argument);
  CHECK_THROWS_AS(TestFunction::bump(0.0, 1.0, {}), std::invalid_argument);
}

TEST_CASE("derivative vanishes at the interior maximum and order zero is identity") {
  auto phi = TestFunction::bump(0.0, 1.0, {cplx(1.0)});
  CHECK(std::abs(phi.derived(1).value(0.5)) < 1e-14);
  auto same = phi.derived(0);
  for (double t : {0.1, 0.33, 0.5, 0.77, 0.9})
    CHECK(std::abs(same.value(t) - phi.value(t)) < 1e-15);
}

TEST_CASE("second derivative matches a central finite difference") {
  auto phi = TestFunction::bump(0.0, 1.0, {cplx(1.0)});
  const double t = 0.3, fd_h = 1e-4;
  const cplx fd =
      (phi.value(t + fd_h) - 2.0 * phi.value(t) + phi.value(t - fd_h)) / (fd_h * fd_h);
  const cplx exact = phi.derived(2).value(t);
  CHECK(std::abs(exact - fd) / std::abs(exact) < 1e-6);
}

TEST_CASE("derivatives keep the exact support and vanish outside it") {
  Rng rng(42);
  for (int i = 0; i < 5; ++i) {
    auto phi = random_bump(rng);
    auto d3 = phi.derived(3);
    CHECK(d3.support().lo == phi.support().lo);
    CHECK(d3.support().hi == phi.support().hi);
    CHECK(d3.value(phi.support().lo) == cplx(0.0));
    CHECK(d3.value(phi.support().hi + 0.5) == cplx(0.0));
  }
}

TEST_CASE("derivative composition: derived(j) then derived(k) equals derived(j+k)") {
  Rng rng(7);
  auto phi = random_bump(rng);
  auto a = phi.derived(1).derived(2);
  auto b = phi.derived(3);
  const Interval s = phi.support();
  for (int i = 0; i < 100; ++i) {
    const double t = s.lo + rng.uniform() * s.length();
    CHECK(std::abs(a.value(t) - b.value(t)) < 1e-9 * (1.0 + std::abs(b.value(t))));
  }
}

TEST_CASE("convolution support arithmetic and vanishing outside") {
  auto phi = TestFunction::bump(0.0, 1.0, {cplx(1.0)});
  auto conv = convolve0(phi, phi, 256);
  CHECK(conv.support().lo == 0.0);
  CHECK(conv.support().hi == 2.0);
  CHECK(conv.value(2.5) == cplx(0.0));
}

TEST_CASE("convolution rejects supports below zero") {
  auto phi = TestFunction::bump(-0.5, 1.0, {cplx(1.0)});
  auto psi = TestFunction::bump(0.0, 1.0, {cplx(1.0)});
  CHECK_THROWS_AS(convolve0(phi, psi), std::invalid_argument);
}

TEST_CASE("Fubini: the integral of the convolution factorizes") {
  Rng rng(11);
  auto phi = random_bump(rng);
  auto psi = random_bump(rng);
  const Convolution0 conv(shared(phi), shared(psi));
  const cplx lhs = integral(conv, 1e-10, 1e-10);
  const cplx rhs = integral(phi) * integral(psi);
  CHECK(std::abs(lhs - rhs) < 1e-8);
}

TEST_CASE("convolution value against a brute-force Riemann sum") {
  auto phi = TestFunction::bump(0.0, 1.0, {cplx(1.0)});
  const double t = 1.0;
  // oracle: midpoint Riemann sum at step 1e-5 over the overlap [0, 1]
  const double step = 1e-5;
  cplx oracle = 0.0;
  for (double s = 0.5 * step; s < 1.0; s += step) oracle += phi.value(t - s) * phi.value(s) * step;
  const Convolution0 conv(shared(phi), shared(phi));
  CHECK(std::abs(conv.value(t) - oracle) < 1e-7);
  auto sampled = convolve0(phi, phi);
  CHECK(std::abs(sampled.value(t) - oracle) < 1e-7);
}

TEST_CASE("convolution is bilinear in the first argument") {
  Rng rng(23);
  auto phi1 = TestFunction::bump(0.2, 1.4, {cplx(1.0), cplx(0.3)});
  auto phi2 = TestFunction::bump(0.2, 1.4, {cplx(0.5), cplx(-0.2), cplx(0.1)});
  auto psi = random_bump(rng);
  const cplx alpha(0.7, -0.4);
  auto combo = lincomb({{alpha, shared(phi1)}, {cplx(1.0), shared(phi2)}});
  const Convolution0 lhs(combo, shared(psi));
  const Convolution0 c1(shared(phi1), shared(psi));
  const Convolution0 c2(shared(phi2), shared(psi));
  for (double t : {0.5, 1.1, 1.9, 2.4}) {
    const cplx rhs = alpha * c1.value(t) + c2.value(t);
    CHECK(std::abs(lhs.value(t) - rhs) < 1e-9);
  }
}

TEST_CASE("convolution derivative equals the derivative convolution") {
  auto phi = TestFunction::bump(0.1, 1.0, {cplx(1.0)});
  auto psi = TestFunction::bump(0.0, 0.8, {cplx(1.0), cplx(0.4)});
  const Convolution0 conv(shared(phi), shared(psi));
  auto dconv = conv.derivative();
  // oracle: central finite difference of the convolution itself
  for (double t : {0.6, 1.0, 1.5}) {
    const double fd_h = 1e-5;
    const cplx fd = (conv.value(t + fd_h) - conv.value(t - fd_h)) / (2.0 * fd_h);
    CHECK(std::abs(dconv->value(t) - fd) < 1e-6);
  }
}

TEST_CASE("the normalizer has unit integral and the declared support") {
  NormalizerZeta zeta;
  CHECK(zeta.fn().support().lo == -2.0);
  CHECK(zeta.fn().support().hi == -1.0);
  CHECK(std::abs(integral(zeta.fn()) - cplx(1.0)) < 1e-10);
}

TEST_CASE("I(phi') recovers phi pointwise") {
  NormalizerZeta zeta;
  Rng rng(5);
  for (int i = 0; i < 12; ++i) {
    auto phi = random_bump(rng);
    auto iphi = antideriv_I(phi.derived(1), zeta);
    const Interval s = phi.support();
    for (int j = 0; j <= 20; ++j) {
      const double t = s.lo - 0.2 + (s.length() + 0.4) * j / 20.0;
      CHECK(std::abs(iphi.value(t) - phi.value(t)) < 1e-8);
    }
  }
}

TEST_CASE("I(zeta) is the zero function") {
  NormalizerZeta zeta;
  auto izeta = antideriv_I(zeta.fn(), zeta);
  for (double t : {-2.5, -1.7, -1.2, -0.5, 0.0, 1.0})
    CHECK(std::abs(izeta.value(t)) < 1e-9);
}

TEST_CASE("for integral-free inputs I is the plain running integral") {
  NormalizerZeta zeta;
  auto phi = TestFunction::bump(0.5, 2.0, {cplx(1.0), cplx(0.2)});
  auto dphi = phi.derived(1);  // integral is zero
  auto iphi = antideriv_I(dphi, zeta);
  for (int j = 1; j <= 10; ++j) {
    const double t = 0.5 + 1.5 * j / 10.0;
    const cplx oracle =
        integrate([&](double u) { return dphi.value(u); }, 0.5, t, 1e-12, 1e-12).value;
    CHECK(std::abs(iphi.value(t) - oracle) < 1e-9);
  }
}

TEST_CASE("I(phi) vanishes beyond the declared compact support") {
  NormalizerZeta zeta;
  auto phi = TestFunction::bump(0.0, 1.0, {cplx(1.0)});
  auto iphi = antideriv_I(phi, zeta);
  CHECK(iphi.support().lo == -2.0);
  CHECK(iphi.support().hi == 1.0);
  CHECK(std::abs(iphi.value(1.5)) == 0.0);
  CHECK(std::abs(iphi.value(-2.5)) == 0.0);
  // just inside the upper edge the running integral has cancelled
  CHECK(std::abs(iphi.value(1.0 - 1e-6)) < 1e-7);
}

TEST_CASE("the derivative of I(phi) is phi - zeta * integral(phi)") {
  NormalizerZeta zeta;
  auto phi = TestFunction::bump(0.2, 1.3, {cplx(0.8), cplx(0.1)});
  auto iphi = antideriv_I(phi, zeta);
  auto d = iphi.derivative();
  const cplx total = integral(phi);
  for (double t : {-1.8, -1.3, 0.5, 0.9})
    CHECK(std::abs(d->value(t) - (phi.value(t) - total * zeta.fn().value(t))) < 1e-12);
}

TEST_CASE("integral of a derivative vanishes by compact support") {
  Rng rng(9);
  auto phi = random_bump(rng);
  CHECK(std::abs(integral(phi.derived(1))) < 1e-10);
}

TEST_CASE("sup-norm of the unit bump against a dense-scan oracle") {
  auto phi = TestFunction::bump(0.0, 1.0, {cplx(1.0)});
  double oracle = 0.0;
  for (int i = 0; i <= 1000000; ++i)
    oracle = std::max(oracle, std::abs(phi.value(i * 1e-6)));
  CHECK(std::abs(sup_norm(phi) - oracle) < 1e-8);
  CHECK(std::abs(sup_norm(phi) - 1.0) < 1e-8);
}

TEST_CASE("sampled functions export csv with t, re, im columns") {
  auto phi = TestFunction::bump(0.0, 1.0, {cplx(1.0)});
  auto conv = convolve0(phi, phi, 64);
  std::ostringstream os;
  conv.write_csv(os);
  const std::string s = os.str();
  CHECK(s.rfind("t,re,im\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 66);  // header + 65 samples
}
