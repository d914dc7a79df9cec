#include "apsg/modelops.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <set>
#include <sstream>

namespace apsg {

OperatorPair OperatorPair::matrix_pair(Mat A, Mat C) {
  require(A.rows() == A.cols() && C.rows() == C.cols() && A.rows() == C.rows(),
          "operator pair: A and C must be square with equal dimension");
  OperatorPair p;
  p.variant_ = Variant::matrix;
  p.A_ = std::move(A);
  p.C_ = std::move(C);

  Eigen::JacobiSVD<Mat> svd(p.C_);
  p.c_sigma_min_ = svd.singularValues().minCoeff();
  const double scale = std::max(1.0, p.A_.norm() * p.C_.norm());
  require(p.c_sigma_min_ > 1e-12 * std::max(1.0, svd.singularValues().maxCoeff()),
          "operator pair: C is not injective (smallest singular value ~ 0)");

  p.commutator_norm_ = (p.A_ * p.C_ - p.C_ * p.A_).norm();
  require(p.commutator_norm_ <= 1e-12 * scale,
          "operator pair: A and C do not commute (CA != AC)");
  return p;
}

OperatorPair OperatorPair::spectral_pair(std::vector<SpectralMode> modes, double tail_error,
                                         double admissibility_bound) {
  require(!modes.empty(), "spectral pair: no modes");
  std::set<int> seen;
  for (const auto& m : modes) {
    require(std::abs(m.c) > 0.0, "spectral pair: zero C-multiplier");
    require(seen.insert(m.index).second, "spectral pair: duplicate mode index");
  }
  OperatorPair p;
  p.variant_ = Variant::spectral;
  p.modes_ = std::move(modes);
  p.tail_error_ = tail_error;
  p.admissibility_bound_ = admissibility_bound;
  const Eigen::Index d = static_cast<Eigen::Index>(p.modes_.size());
  p.A_ = Mat::Zero(d, d);
  p.C_ = Mat::Zero(d, d);
  double cmin = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < d; ++j) {
    p.A_(j, j) = p.modes_[static_cast<std::size_t>(j)].lambda;
    p.C_(j, j) = p.modes_[static_cast<std::size_t>(j)].c;
    cmin = std::min(cmin, std::abs(p.modes_[static_cast<std::size_t>(j)].c));
  }
  p.c_sigma_min_ = cmin;
  p.commutator_norm_ = 0.0;  // diagonal pair, exact
  return p;
}

Vec OperatorPair::solve_C(const Vec& y) const {
  if (variant_ == Variant::spectral) {
    Vec x(y.size());
    for (Eigen::Index j = 0; j < y.size(); ++j)
      x[j] = y[j] / modes_[static_cast<std::size_t>(j)].c;
    return x;
  }
  return C_.partialPivLu().solve(y);
}

bool OperatorPair::admissible(const Vec& x, double* worst_ratio) const {
  if (variant_ == Variant::matrix) {
    if (worst_ratio) *worst_ratio = 0.0;
    return true;
  }
  double worst = 0.0;
  for (Eigen::Index j = 0; j < x.size(); ++j)
    worst = std::max(worst, std::abs(x[j]) / std::abs(modes_[static_cast<std::size_t>(j)].c));
  if (worst_ratio) *worst_ratio = worst;
  return worst <= admissibility_bound_;
}

std::string OperatorPair::describe() const {
  std::ostringstream os;
  if (variant_ == Variant::matrix) {
    os << "matrix pair, dim " << dim() << ", sigma_min(C) = " << c_sigma_min_
       << ", |[A,C]| = " << commutator_norm_;
  } else {
    os << "spectral pair, " << modes_.size() << " modes, tail error " << tail_error_
       << ", admissibility bound " << admissibility_bound_;
  }
  return os.str();
}

Mat EigenSet::basis() const {
  if (eigenvectors.empty()) return Mat(0, 0);
  Mat b(eigenvectors.front().size(), static_cast<Eigen::Index>(eigenvectors.size()));
  for (Eigen::Index j = 0; j < b.cols(); ++j) b.col(j) = eigenvectors[static_cast<std::size_t>(j)];
  return b;
}

EigenSets eigensets(const OperatorPair& pair, double tol) {
  EigenSets out;
  out.D.tag = "D";
  out.D0.tag = "D0";
  out.H.tag = "H";
  out.H0.tag = "H0";

  std::vector<cplx> lams;
  std::vector<Vec> vecs;
  if (pair.variant() == OperatorPair::Variant::spectral) {
    const Eigen::Index d = pair.dim();
    for (Eigen::Index j = 0; j < d; ++j) {
      lams.push_back(pair.modes()[static_cast<std::size_t>(j)].lambda);
      vecs.push_back(Vec::Unit(d, j));
    }
    out.eigenbasis_condition = 1.0;
  } else {
    Eigen::ComplexEigenSolver<Mat> es(pair.A());
    if (es.info() != Eigen::Success) {
      out.diagnostic = "eigen-solver failed to converge";
      return out;
    }
    const Mat V = es.eigenvectors();
    Eigen::JacobiSVD<Mat> svd(V);
    const double smin = svd.singularValues().minCoeff();
    out.eigenbasis_condition =
        smin > 0 ? svd.singularValues().maxCoeff() / smin : std::numeric_limits<double>::infinity();
    if (out.eigenbasis_condition > 1e8)
      out.diagnostic = "ill-conditioned eigenbasis (matrix close to defective)";
    for (Eigen::Index j = 0; j < V.cols(); ++j) {
      lams.push_back(es.eigenvalues()[j]);
      vecs.push_back(V.col(j));
    }
  }

  const double rho = [&] {
    double r = 0.0;
    for (const auto& l : lams) r = std::max(r, std::abs(l));
    return r;
  }();
  const double cut = tol * std::max(rho, 1.0);

  for (std::size_t j = 0; j < lams.size(); ++j) {
    const cplx lam = lams[j];
    const Vec& v = vecs[j];
    const double res = (pair.A() * v - lam * v).norm();
    out.max_pair_residual = std::max(out.max_pair_residual, res / std::max(v.norm(), 1e-300));
    if (res > 1e-10 * v.norm()) continue;  // not trusted as an eigenpair
    out.all_eigenvalues.push_back(lam);
    out.all_eigenvectors.push_back(v);
    const bool imag_axis = std::abs(lam.real()) <= cut;
    const bool real_axis = std::abs(lam.imag()) <= cut;
    const bool zero = std::abs(lam) <= cut;
    if (imag_axis) {
      out.D.eigenvalues.push_back(lam);
      out.D.eigenvectors.push_back(v);
      if (!zero) {
        out.D0.eigenvalues.push_back(lam);
        out.D0.eigenvectors.push_back(v);
      }
    }
    if (real_axis && lam.real() <= cut) {
      out.H.eigenvalues.push_back(lam);
      out.H.eigenvectors.push_back(v);
      if (!zero) {
        out.H0.eigenvalues.push_back(lam);
        out.H0.eigenvectors.push_back(v);
      }
    }
  }
  return out;
}

SpanDecomposition span_membership(const Vec& x, const EigenSet& S) {
  SpanDecomposition d;
  if (S.size() == 0) {
    d.residual = x.norm();
    d.member = d.residual == 0.0;
    d.coefficients = Vec(0);
    return d;
  }
  const Mat B = S.basis();
  d.coefficients = B.completeOrthogonalDecomposition().solve(x);
  d.residual = (B * d.coefficients - x).norm();
  d.member = d.residual <= 1e-8 * std::max(x.norm(), 1e-300);
  return d;
}

TotalityResult totality_check(const EigenSet& S, Eigen::Index dim) {
  TotalityResult r;
  if (S.size() == 0) return r;
  Eigen::JacobiSVD<Mat> svd(S.basis());
  const double smax = svd.singularValues().maxCoeff();
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > 1e-10 * std::max(smax, 1.0)) ++r.rank;
  r.total = (r.rank == dim);
  return r;
}

}  // namespace apsg
