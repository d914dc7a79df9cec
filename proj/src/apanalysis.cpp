#include "apsg/apanalysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "apsg/quadrature.hpp"

namespace apsg {

namespace {

// (1/W) \int e^{-irs} f(s) ds over sample indices [i0, i1] by Simpson.
Vec window_average(const Trajectory& f, double r, Eigen::Index i0, Eigen::Index i1) {
  auto sample = [&](std::size_t i) -> Vec {
    const double t = f.time(static_cast<Eigen::Index>(i));
    return std::exp(cplx(0.0, -r * t)) * Vec(f.values.col(static_cast<Eigen::Index>(i)));
  };
  const double W = f.h * double(i1 - i0);
  return simpson_indexed(sample, f.h, static_cast<std::size_t>(i0),
                         static_cast<std::size_t>(i1)) /
         W;
}

std::vector<double> quarter_window_sups(const Trajectory& f) {
  const Eigen::Index n = f.samples();
  std::vector<double> sups(4, 0.0);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto q = std::min<Eigen::Index>(3, (4 * k) / std::max<Eigen::Index>(n, 1));
    sups[static_cast<std::size_t>(q)] =
        std::max(sups[static_cast<std::size_t>(q)], f.values.col(k).norm());
  }
  return sups;
}

}  // namespace

BohrCoefficient bohr_coeff(const Trajectory& f, double r) {
  f.validate();
  require(std::abs(r) * f.h <= 2.0 * M_PI / 8.0 + 1e-12,
          "bohr_coeff: under-resolved grid (need >= 8 samples per period)");
  const Eigen::Index N = f.samples() - 1;
  require(N >= 64, "bohr_coeff: trajectory too short");

  const Eigen::Index w1 = N / 4, w2 = N / 2;
  const int K = 16;
  auto smoothed = [&](Eigen::Index w, std::vector<Vec>* singles) -> Vec {
    Vec acc = Vec::Zero(f.dim());
    for (int k = 0; k < K; ++k) {
      const Eigen::Index off = ((N - w) * k) / K;
      Vec m = window_average(f, r, off, off + w);
      if (singles) singles->push_back(m);
      acc += m;
    }
    return acc / double(K);
  };

  std::vector<Vec> singles2;
  const Vec m1 = smoothed(w1, nullptr);
  const Vec m2 = smoothed(w2, &singles2);

  BohrCoefficient out;
  out.r = r;
  out.value = 2.0 * m2 - m1;  // Richardson step for the O(1/T) tail
  out.windows.emplace_back(f.h * double(w1), m1);
  out.windows.emplace_back(f.h * double(w2), m2);

  double scatter = 0.0;
  for (const Vec& m : singles2) scatter = std::max(scatter, (m - m2).norm());
  // explicit alpha = T/10 shift consistency
  const Eigen::Index off10 = N / 10;
  const Vec shifted = window_average(f, r, off10, std::min(off10 + w2, N));
  scatter = std::max(scatter, (shifted - m2).norm());

  out.error_estimate = 0.5 * (m2 - m1).norm() + scatter + 1e-12 * (1.0 + out.value.norm());
  return out;
}

std::vector<double> uniform_grid(double lo, double hi, int count) {
  require(count >= 2 && hi > lo, "uniform_grid: need hi > lo and count >= 2");
  std::vector<double> g(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    g[static_cast<std::size_t>(i)] = lo + (hi - lo) * double(i) / double(count - 1);
  return g;
}

SpectrumScan bohr_spectrum(const Trajectory& f, const std::vector<double>& r_grid,
                           double threshold) {
  SpectrumScan out;
  f.validate();
  const double T = f.horizon();
  if (r_grid.size() >= 2) {
    double spacing = 0.0;
    for (std::size_t i = 1; i < r_grid.size(); ++i)
      spacing = std::max(spacing, r_grid[i] - r_grid[i - 1]);
    require(spacing <= M_PI / T + 1e-12,
            "bohr_spectrum: grid spacing exceeds the window resolution pi/T");
  }

  const auto sups = quarter_window_sups(f);
  const double smax = *std::max_element(sups.begin(), sups.end());
  const double smin = *std::min_element(sups.begin(), sups.end());
  if (smax > 0 && smin < 0.5 * smax) {
    out.diagnostic =
        "sup-norm drifts across sub-windows; (1/t)-averages do not stabilize, spectrum "
        "estimates are unreliable";
    return out;
  }

  const Eigen::Index N = f.samples() - 1;
  auto magnitude = [&](double r) { return window_average(f, r, 0, N).norm(); };

  std::vector<double> mags(r_grid.size());
  for (std::size_t i = 0; i < r_grid.size(); ++i) mags[i] = magnitude(r_grid[i]);

  std::vector<double> hits;
  for (std::size_t i = 0; i < r_grid.size(); ++i) {
    const bool local_max = (i == 0 || mags[i] >= mags[i - 1]) &&
                           (i + 1 == r_grid.size() || mags[i] > mags[i + 1]);
    if (local_max && mags[i] > 0.5 * threshold) {
      // golden-section refinement of the windowed-average magnitude
      double a = r_grid[i == 0 ? 0 : i - 1];
      double b = r_grid[std::min(i + 1, r_grid.size() - 1)];
      if (a == b) {
        hits.push_back(a);
        continue;
      }
      const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
      double c = b - gr * (b - a), d = a + gr * (b - a);
      double fc = magnitude(c), fd = magnitude(d);
      while (b - a > 1e-7) {
        if (fc > fd) {
          b = d;
          d = c;
          fd = fc;
          c = b - gr * (b - a);
          fc = magnitude(c);
        } else {
          a = c;
          c = d;
          fc = fd;
          d = a + gr * (b - a);
          fd = magnitude(d);
        }
      }
      hits.push_back(0.5 * (a + b));
    }
  }

  std::sort(hits.begin(), hits.end());
  for (double r : hits) {
    if (!out.points.empty() && std::abs(r - out.points.back().r) < 1e-6) continue;
    BohrCoefficient c = bohr_coeff(f, r);
    if (c.value.norm() > threshold) out.points.push_back(std::move(c));
  }
  return out;
}

EpsilonPeriodRow epsilon_periods(const Trajectory& f, double eps, Interval scan) {
  f.validate();
  const double T = f.horizon();
  require(scan.lo >= 0.0 && scan.hi <= 0.5 * T + 1e-9,
          "epsilon_periods: scan interval must lie inside [0, T/2]");
  EpsilonPeriodRow row;
  row.epsilon = eps;
  const Eigen::Index N = f.samples() - 1;
  const auto m_lo = static_cast<Eigen::Index>(std::ceil(scan.lo / f.h - 1e-9));
  const auto m_hi = static_cast<Eigen::Index>(std::floor(scan.hi / f.h + 1e-9));
  for (Eigen::Index m = m_lo; m <= m_hi; ++m) {
    bool ok = true;
    for (Eigen::Index j = 0; j + m <= N; ++j) {
      if ((f.values.col(j + m) - f.values.col(j)).norm() > eps) {
        ok = false;
        break;
      }
    }
    if (ok) row.periods.push_back(f.h * double(m));
  }
  double gap = 0.0;
  if (row.periods.empty()) {
    gap = scan.hi - scan.lo;
  } else {
    gap = row.periods.front() - scan.lo;
    for (std::size_t i = 1; i < row.periods.size(); ++i)
      gap = std::max(gap, row.periods[i] - row.periods[i - 1]);
    gap = std::max(gap, scan.hi - row.periods.back());
  }
  row.max_gap = gap;
  row.relatively_dense = !row.periods.empty() && gap <= 0.5 * (scan.hi - scan.lo);
  return row;
}

APReport ap_verdict(const Trajectory& f, const std::vector<double>& eps_list,
                    const APVerdictConfig& cfg) {
  f.validate();
  APReport rep;
  const double T = f.horizon();
  rep.window_sups = quarter_window_sups(f);
  rep.sup_norm = *std::max_element(rep.window_sups.begin(), rep.window_sups.end());

  const double smax = rep.sup_norm;
  const double smin = *std::min_element(rep.window_sups.begin(), rep.window_sups.end());
  const bool stable = smax == 0.0 || smin >= (1.0 - cfg.drift_tol) * smax;

  Interval scan = cfg.scan;
  if (scan.hi <= scan.lo) scan = {0.0, 0.5 * T};
  for (double eps : eps_list) rep.rows.push_back(epsilon_periods(f, eps, scan));

  if (!cfg.spectrum_grid.empty()) {
    auto sc = bohr_spectrum(f, cfg.spectrum_grid, cfg.spectrum_threshold);
    rep.spectrum = std::move(sc.points);
    if (!sc.diagnostic.empty()) rep.witness = sc.diagnostic;
  }

  if (!stable) {
    const auto& s = rep.window_sups;
    const bool monotone = s[0] <= s[1] && s[1] <= s[2] && s[2] <= s[3];
    std::ostringstream os;
    os << (monotone && s[3] > 2.0 * std::max(s[0], 1e-300)
               ? "unbounded growth: quarter-window sup-norms rise monotonically"
               : "sup-norm drift across quarter windows exceeds tolerance")
       << " [" << s[0] << ", " << s[1] << ", " << s[2] << ", " << s[3] << "]";
    rep.verdict = "not-AP";
    rep.witness = os.str();
    return rep;
  }

  const bool all_dense = std::all_of(rep.rows.begin(), rep.rows.end(),
                                     [](const EpsilonPeriodRow& r) { return r.relatively_dense; });
  if (all_dense) {
    rep.verdict = "AP-consistent";
  } else {
    rep.verdict = "inconclusive";
    for (const auto& r : rep.rows)
      if (!r.relatively_dense) {
        std::ostringstream os;
        os << "bounded, but eps = " << r.epsilon << " periods are not relatively dense on the "
           << "scanned window (max gap " << r.max_gap << ")";
        rep.witness = os.str();
        break;
      }
  }
  return rep;
}

FunctionalSet FunctionalSet::standard_plus_random(Eigen::Index d, int extra, Rng& rng) {
  FunctionalSet s;
  for (Eigen::Index i = 0; i < d; ++i) {
    s.covectors.push_back(Vec::Unit(d, i));
    s.labels.push_back("e" + std::to_string(i + 1) + "*");
  }
  for (int i = 0; i < extra; ++i) {
    Vec v = rng.vector(d);
    if (v.norm() == 0.0) v = Vec::Unit(d, 0);
    s.covectors.push_back(v / v.norm());
    s.labels.push_back("rand" + std::to_string(i + 1) + "*");
  }
  return s;
}

Trajectory scalarize(const Trajectory& f, const Vec& covector) {
  Trajectory g;
  g.h = f.h;
  g.values.resize(1, f.samples());
  for (Eigen::Index k = 0; k < f.samples(); ++k)
    g.values(0, k) = covector.dot(f.values.col(k));  // conjugate-linear in the covector
  g.provenance = f.provenance + ", scalarized";
  return g;
}

std::vector<std::pair<std::string, APReport>> weak_ap_verdict(
    const Trajectory& f, const FunctionalSet& functionals, const std::vector<double>& eps_list,
    const APVerdictConfig& cfg) {
  std::vector<std::pair<std::string, APReport>> out;
  for (std::size_t i = 0; i < functionals.covectors.size(); ++i) {
    out.emplace_back(functionals.labels[i],
                     ap_verdict(scalarize(f, functionals.covectors[i]), eps_list, cfg));
  }
  return out;
}

// ---------------------------------------------------------------------------
// trigonometric reconstruction / the extension operator

Vec TrigReconstruction::at(double t) const {
  Vec acc = Vec::Zero(coeffs.rows());
  for (std::size_t j = 0; j < freqs.size(); ++j)
    acc += coeffs.col(static_cast<Eigen::Index>(j)) * std::exp(kImag * (freqs[j] * t));
  return acc;
}

namespace {

Mat design_matrix(const std::vector<double>& t, const std::vector<double>& freqs) {
  Mat phi(static_cast<Eigen::Index>(t.size()), static_cast<Eigen::Index>(freqs.size()));
  for (std::size_t m = 0; m < t.size(); ++m)
    for (std::size_t j = 0; j < freqs.size(); ++j)
      phi(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j)) =
          std::exp(kImag * (freqs[j] * t[m]));
  return phi;
}

// least-squares amplitudes: C (d x k) minimizing sum_m |Y_m - C phi_m|^2.
// Normal equations C * conj(G) = Y * conj(phi) with the Hermitian Gram
// G = phi^H phi; conj(G) = G^T, so C = R (G^{-1})^T.
Mat ls_amplitudes(const Mat& Y, const Mat& phi) {
  const Mat G = phi.adjoint() * phi;
  const Mat R = Y * phi.conjugate();
  const Mat Greg = G + 1e-12 * G.norm() * Mat::Identity(G.rows(), G.cols());
  return Greg.partialPivLu().solve(R.transpose()).transpose();
}

}  // namespace

ExtensionResult ap_extension(const Trajectory& f, const std::vector<BohrCoefficient>& spectrum,
                             double delta) {
  f.validate();
  ExtensionResult res;
  TrigReconstruction& rec = res.recon;

  for (const auto& c : spectrum) rec.freqs.push_back(c.r);
  std::sort(rec.freqs.begin(), rec.freqs.end());
  rec.freqs.erase(std::unique(rec.freqs.begin(), rec.freqs.end(),
                              [](double a, double b) { return std::abs(a - b) < 1e-9; }),
                  rec.freqs.end());

  const Eigen::Index M = f.samples();
  double sup = 0.0;
  for (Eigen::Index k = 0; k < M; ++k) sup = std::max(sup, f.values.col(k).norm());

  if (rec.freqs.empty()) {
    rec.coeffs = Mat::Zero(f.dim(), 0);
    rec.defect = sup;
    res.ok = sup <= delta * std::max(sup, 1e-300) || sup == 0.0;
    if (!res.ok) res.reason = "spectrum incomplete - extension refused (empty spectrum)";
    return res;
  }

  // fit on a stride-limited subset, measure the defect on everything
  const Eigen::Index stride = std::max<Eigen::Index>(1, M / 20000);
  std::vector<double> t_fit;
  std::vector<Eigen::Index> idx_fit;
  for (Eigen::Index k = 0; k < M; k += stride) {
    t_fit.push_back(f.time(k));
    idx_fit.push_back(k);
  }
  Mat Y(f.dim(), static_cast<Eigen::Index>(idx_fit.size()));
  for (std::size_t m = 0; m < idx_fit.size(); ++m)
    Y.col(static_cast<Eigen::Index>(m)) = f.values.col(idx_fit[m]);

  const auto k = static_cast<Eigen::Index>(rec.freqs.size());
  Mat phi = design_matrix(t_fit, rec.freqs);
  rec.coeffs = ls_amplitudes(Y, phi);

  // Gauss-Newton polish of the frequencies (variable projection style)
  for (int iter = 0; iter < 8; ++iter) {
    const Mat E = Y - rec.coeffs * phi.transpose();
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(k, k);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(k);
    for (Eigen::Index j = 0; j < k; ++j) {
      for (Eigen::Index l = 0; l < k; ++l) {
        cplx acc = 0.0;
        for (std::size_t m = 0; m < t_fit.size(); ++m)
          acc += t_fit[m] * t_fit[m] * std::conj(phi(static_cast<Eigen::Index>(m), j)) *
                 phi(static_cast<Eigen::Index>(m), l);
        H(j, l) = 2.0 * (acc * (rec.coeffs.col(j).adjoint() * rec.coeffs.col(l))(0, 0)).real();
      }
      cplx gj = 0.0;
      for (std::size_t m = 0; m < t_fit.size(); ++m)
        gj += t_fit[m] * std::conj(phi(static_cast<Eigen::Index>(m), j)) *
              (rec.coeffs.col(j).dot(E.col(static_cast<Eigen::Index>(m))));
      g(j) = 2.0 * (kImag * gj).real();
    }
    H += 1e-12 * (1.0 + H.norm()) * Eigen::MatrixXd::Identity(k, k);
    Eigen::VectorXd step = H.ldlt().solve(-g);
    const double limit = 0.5 * M_PI / std::max(1.0, f.horizon());
    for (Eigen::Index j = 0; j < k; ++j)
      rec.freqs[static_cast<std::size_t>(j)] += std::clamp(step(j), -limit, limit);
    phi = design_matrix(t_fit, rec.freqs);
    rec.coeffs = ls_amplitudes(Y, phi);
    if (step.cwiseAbs().maxCoeff() < 1e-13) break;
  }

  double defect = 0.0;
  for (Eigen::Index m = 0; m < M; ++m)
    defect = std::max(defect, (f.values.col(m) - rec.at(f.time(m))).norm());
  rec.defect = defect;

  res.ok = defect <= delta * std::max(sup, 1e-300);
  if (!res.ok) {
    std::ostringstream os;
    os << "spectrum incomplete - extension refused (relative defect " << defect / std::max(sup, 1e-300)
       << " > " << delta << ")";
    res.reason = os.str();
  }
  return res;
}

TrigReconstruction fit_fixed_frequencies(const Trajectory& f, const std::vector<double>& freqs) {
  TrigReconstruction rec;
  rec.freqs = freqs;
  const Eigen::Index M = f.samples();
  if (freqs.empty()) {
    rec.coeffs = Mat::Zero(f.dim(), 0);
    double sup = 0.0;
    for (Eigen::Index k = 0; k < M; ++k) sup = std::max(sup, f.values.col(k).norm());
    rec.defect = sup;
    return rec;
  }
  const Eigen::Index stride = std::max<Eigen::Index>(1, M / 20000);
  std::vector<double> t_fit;
  std::vector<Eigen::Index> idx;
  for (Eigen::Index k = 0; k < M; k += stride) {
    t_fit.push_back(f.time(k));
    idx.push_back(k);
  }
  Mat Y(f.dim(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t m = 0; m < idx.size(); ++m)
    Y.col(static_cast<Eigen::Index>(m)) = f.values.col(idx[m]);
  const Mat phi = design_matrix(t_fit, rec.freqs);
  rec.coeffs = ls_amplitudes(Y, phi);
  double defect = 0.0;
  for (Eigen::Index m = 0; m < M; ++m)
    defect = std::max(defect, (f.values.col(m) - rec.at(f.time(m))).norm());
  rec.defect = defect;
  return rec;
}

Vec ap_extend(const Trajectory& f, const std::vector<BohrCoefficient>& spectrum, double t,
              double delta) {
  ExtensionResult res = ap_extension(f, spectrum, delta);
  if (!res.ok) throw std::domain_error(res.reason);
  return res.recon.at(t);
}

ExtendedTrajectory extend_to_grid(const Trajectory& f, const TrigReconstruction& recon, double T,
                                  double h) {
  require(h > 0 && T > 0, "extend_to_grid: need positive T and h");
  ExtendedTrajectory ext;
  ext.h = h;
  ext.T = T;
  ext.freqs = recon.freqs;
  ext.coeffs = recon.coeffs;
  const auto N = static_cast<Eigen::Index>(std::floor(T / h + 1e-9));
  ext.values.resize(f.dim(), 2 * N + 1);
  for (Eigen::Index i = 0; i < 2 * N + 1; ++i)
    ext.values.col(i) = recon.at(-T + h * double(i));
  double err = 0.0;
  for (Eigen::Index k = 0; k < f.samples() && f.time(k) <= T; ++k)
    err = std::max(err, (recon.at(f.time(k)) - f.values.col(k)).norm());
  ext.agreement_error = err;
  return ext;
}

double trig_sup(const std::vector<double>& freqs, const std::vector<cplx>& amps, double lo,
                double hi, double step) {
  require(freqs.size() == amps.size(), "trig_sup: mismatched lengths");
  auto eval = [&](double t) {
    cplx acc = 0.0;
    for (std::size_t j = 0; j < freqs.size(); ++j)
      acc += amps[j] * std::exp(kImag * (freqs[j] * t));
    return std::abs(acc);
  };
  double best = 0.0, best_t = lo;
  for (double t = lo; t <= hi; t += step) {
    const double v = eval(t);
    if (v > best) {
      best = v;
      best_t = t;
    }
  }
  double a = std::max(lo, best_t - step), b = std::min(hi, best_t + step);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = eval(c), fd = eval(d);
  for (int it = 0; it < 60 && (b - a) > 1e-12; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = eval(d);
    }
  }
  return std::max(best, std::max(fc, fd));
}

}  // namespace apsg
