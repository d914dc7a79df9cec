#pragma once

#include <random>

#include "apsg/common.hpp"

namespace apsg {

/// Seeded deterministic random source. The uniform mapping is hand-rolled so
/// that identical seeds give identical streams on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() {  // [0, 1)
    return double(gen_() >> 11) * 0x1.0p-53;
  }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  int index(int n) { return int(gen_() % std::uint64_t(n)); }

  cplx unit_complex() {
    const double th = uniform(0.0, 6.283185307179586);
    return {std::cos(th), std::sin(th)};
  }

  cplx disc(double radius = 1.0) {
    // uniform on the disc of given radius
    const double r = radius * std::sqrt(uniform());
    return r * unit_complex();
  }

  Vec vector(Eigen::Index d, double radius = 1.0) {
    Vec v(d);
    for (Eigen::Index i = 0; i < d; ++i) v[i] = disc(radius);
    return v;
  }

  Mat matrix(Eigen::Index rows, Eigen::Index cols, double radius = 1.0) {
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = disc(radius);
    return m;
  }

  /// Haar-ish random unitary via QR of a complex Gaussian-like matrix.
  Mat unitary(Eigen::Index d) {
    Mat g(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) {
        // Box-Muller from the portable uniform stream
        const double u1 = std::max(uniform(), 1e-300), u2 = uniform();
        const double u3 = std::max(uniform(), 1e-300), u4 = uniform();
        const double re = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
        const double im = std::sqrt(-2.0 * std::log(u3)) * std::cos(6.283185307179586 * u4);
        g(i, j) = cplx(re, im);
      }
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ();
    Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < d; ++j) {
      cplx rj = r(j, j);
      q.col(j) *= (std::abs(rj) > 0) ? rj / std::abs(rj) : cplx(1.0);
    }
    return q;
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace apsg
