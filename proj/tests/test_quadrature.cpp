#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>

#include "apsg/quadrature.hpp"
#include "doctest.h"

using namespace apsg;

TEST_CASE("gk15 panel is exact for smooth polynomials") {
  auto r = integrate([](double x) { return x * x * x * x * x; }, 0.0, 1.0);
  CHECK(std::abs(r.value - 1.0 / 6.0) < 1e-14);
}

TEST_CASE("complex oscillatory integral matches the closed form") {
  // int_0^pi e^{is} ds = (e^{i pi} - 1)/i = 2i
  auto r = integrate([](double s) { return std::exp(cplx(0.0, s)); }, 0.0, M_PI);
  CHECK(std::abs(r.value - cplx(0.0, 2.0)) < 1e-12);
}

TEST_CASE("damped cosine agrees with the analytic value") {
  // int_{-inf}^{inf} e^{-x^2} cos(3x) dx = sqrt(pi) e^{-9/4}
  auto r = integrate([](double x) { return std::exp(-x * x) * std::cos(3.0 * x); }, -6.0, 6.0,
                     1e-13, 1e-13);
  CHECK(std::abs(r.value - std::sqrt(M_PI) * std::exp(-2.25)) < 1e-12);
}

TEST_CASE("vector integrands work") {
  auto f = [](double t) {
    Vec v(2);
    v << cplx(t), cplx(t * t);
    return v;
  };
  auto r = integrate(f, 0.0, 1.0);
  CHECK(std::abs(r.value[0] - cplx(0.5)) < 1e-13);
  CHECK(std::abs(r.value[1] - cplx(1.0 / 3.0)) < 1e-13);
}

TEST_CASE("reversed bounds flip the sign") {
  auto r = integrate([](double x) { return cplx(x); }, 1.0, 0.0);
  CHECK(std::abs(r.value - cplx(-0.5)) < 1e-13);
}

TEST_CASE("halving the tolerance moves the value by less than the reported error") {
  auto f = [](double x) { return std::exp(std::sin(7.0 * x)) / (1.0 + x * x); };
  auto coarse = integrate(f, 0.0, 3.0, 1e-8, 1e-8);
  auto fine = integrate(f, 0.0, 3.0, 5e-9, 5e-9);
  CHECK(std::abs(coarse.value - fine.value) <= coarse.error + 1e-15);
}

TEST_CASE("cumulative integral reproduces the antiderivative on a grid") {
  std::vector<double> grid;
  for (int i = 0; i <= 50; ++i) grid.push_back(0.05 * i);
  auto vals = cumulative_integral([](double t) { return cplx(std::cos(t)); }, 0.0, grid);
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(std::abs(vals[i] - std::sin(grid[i])) < 1e-11);
}

TEST_CASE("composite simpson on a sampled grid is fourth order") {
  const double h = 0.01;
  std::vector<cplx> samples;
  for (int i = 0; i <= 1000; ++i) samples.push_back(cplx(std::sin(h * i)));
  // even interval count
  cplx full = simpson_on_grid(samples, h, 0, 1000);
  CHECK(std::abs(full - (1.0 - std::cos(10.0))) < 1e-9);
  // odd interval count finished by the 3/8 rule
  cplx odd = simpson_on_grid(samples, h, 0, 999);
  CHECK(std::abs(odd - (1.0 - std::cos(9.99))) < 1e-9);
}
