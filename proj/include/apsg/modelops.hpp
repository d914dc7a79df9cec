#pragma once

#include <optional>
#include <string>
#include <vector>

#include "apsg/common.hpp"

namespace apsg {

/// One diagonal mode of a truncated spectral model: A e_idx = lambda e_idx,
/// C e_idx = c e_idx with c != 0.
struct SpectralMode {
  int index = 0;
  cplx lambda{0.0};
  cplx c{1.0};
};

/// A model pair (A, C): dense commuting matrices with injective C, or a
/// truncated diagonal spectral model. The spectral variant emulates a proper
/// solution space through a coefficient-decay admissibility rule and carries a
/// declared tail-truncation error for vectors of the ambient infinite model.
class OperatorPair {
 public:
  enum class Variant { matrix, spectral };

  OperatorPair() = default;  // empty placeholder; replace via a factory

  static OperatorPair matrix_pair(Mat A, Mat C);
  static OperatorPair spectral_pair(std::vector<SpectralMode> modes, double tail_error = 0.0,
                                    double admissibility_bound = 1e10);

  Variant variant() const { return variant_; }
  Eigen::Index dim() const { return A_.rows(); }
  const Mat& A() const { return A_; }
  const Mat& C() const { return C_; }
  const std::vector<SpectralMode>& modes() const { return modes_; }
  double tail_error() const { return tail_error_; }
  double admissibility_bound() const { return admissibility_bound_; }

  /// Smallest singular value of C (injectivity margin, reported not hidden).
  double c_min_singular() const { return c_sigma_min_; }
  double commutator_norm() const { return commutator_norm_; }

  Vec apply_A(const Vec& x) const { return A_ * x; }
  Vec apply_C(const Vec& x) const { return C_ * x; }
  Vec solve_C(const Vec& y) const;  // C^{-1} y

  /// Spectral variant: max_j |x_j| / |c_j| against the admissibility bound.
  /// Matrix variant: always admissible (the solution space is everything).
  bool admissible(const Vec& x, double* worst_ratio = nullptr) const;

  std::string describe() const;

 private:
  Variant variant_ = Variant::matrix;
  Mat A_, C_;
  std::vector<SpectralMode> modes_;
  double tail_error_ = 0.0;
  double admissibility_bound_ = 1e10;
  double c_sigma_min_ = 0.0;
  double commutator_norm_ = 0.0;
};

/// Eigenvector family tagged by the spectral location of its eigenvalues:
///   D  - purely imaginary, D0 - purely imaginary nonzero,
///   H  - real non-positive, H0 - real negative.
struct EigenSet {
  std::string tag;
  std::vector<cplx> eigenvalues;
  std::vector<Vec> eigenvectors;

  std::size_t size() const { return eigenvalues.size(); }
  Mat basis() const;
};

struct EigenSets {
  EigenSet D, D0, H, H0;
  /// All eigenpairs that passed the residual gate, in solver order.
  std::vector<cplx> all_eigenvalues;
  std::vector<Vec> all_eigenvectors;
  double max_pair_residual = 0.0;
  double eigenbasis_condition = 0.0;  // large values flag a defective matrix
  std::string diagnostic;
};

/// Classify eigenpairs of A into D/D0/H/H0. The imaginary/real cut is
/// tol * spectral radius (absolute tol when the radius vanishes).
EigenSets eigensets(const OperatorPair& pair, double tol = 1e-12);

struct SpanDecomposition {
  bool member = false;
  Vec coefficients;   // least-squares coefficients in the set's basis
  double residual = 0.0;
};

/// Least-squares membership of x in span(S); member iff residual <= 1e-8 |x|.
SpanDecomposition span_membership(const Vec& x, const EigenSet& S);

struct TotalityResult {
  bool total = false;
  int rank = 0;
};

/// Numerical rank of the eigenvector matrix; total iff rank == dim.
TotalityResult totality_check(const EigenSet& S, Eigen::Index dim);

}  // namespace apsg
