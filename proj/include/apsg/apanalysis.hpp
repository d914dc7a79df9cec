#pragma once

#include <string>
#include <vector>

#include "apsg/rng.hpp"
#include "apsg/semigroup.hpp"

namespace apsg {

/// One Bohr-transform evaluation P_r = lim (1/t) \int_0^t e^{-irs} f(s) ds,
/// estimated from offset-averaged dyadic windows with Richardson
/// extrapolation; error_estimate tracks the observed inter-window drift and
/// offset scatter.
struct BohrCoefficient {
  double r = 0.0;
  Vec value;
  std::vector<std::pair<double, Vec>> windows;  // (window length, smoothed average)
  double error_estimate = 0.0;
};

BohrCoefficient bohr_coeff(const Trajectory& f, double r);

struct SpectrumScan {
  std::vector<BohrCoefficient> points;  // sorted by frequency
  std::string diagnostic;               // set when the averages cannot stabilize
};

/// Scan a frequency grid (spacing must resolve the window, <= pi/T), refine
/// hits by golden-section on the windowed-average magnitude, and keep refined
/// coefficients above the threshold.
SpectrumScan bohr_spectrum(const Trajectory& f, const std::vector<double>& r_grid,
                           double threshold);

std::vector<double> uniform_grid(double lo, double hi, int count);

struct EpsilonPeriodRow {
  double epsilon = 0.0;
  std::vector<double> periods;
  double max_gap = 0.0;     // largest hit-free stretch of the scanned window
  bool relatively_dense = false;
};

/// Grid search for eps-periods: tau with sup_t |f(t+tau) - f(t)| <= eps over
/// the in-sample overlap. The scan interval must sit inside [0, T/2].
EpsilonPeriodRow epsilon_periods(const Trajectory& f, double eps, Interval scan);

struct APReport {
  std::vector<EpsilonPeriodRow> rows;
  std::vector<BohrCoefficient> spectrum;
  double sup_norm = 0.0;
  std::vector<double> window_sups;  // quarter-window sup-norms
  std::string verdict;              // "AP-consistent" | "not-AP" | "inconclusive"
  std::string witness;
};

struct APVerdictConfig {
  Interval scan{0.0, -1.0};  // default: [0, T/2]
  double drift_tol = 0.25;
  std::vector<double> spectrum_grid;  // empty: skip the spectrum scan
  double spectrum_threshold = 0.05;
};

/// Boundedness (stable quarter-window sups) + relative density of eps-periods
/// for every requested eps. Verdicts are consistency statements about the
/// sampled window, never proofs; "not-AP" is only issued with a witness.
APReport ap_verdict(const Trajectory& f, const std::vector<double>& eps_list,
                    const APVerdictConfig& cfg = {});

/// Unit covectors used to scalarize trajectories for weak almost periodicity.
struct FunctionalSet {
  std::vector<Vec> covectors;
  std::vector<std::string> labels;

  static FunctionalSet standard_plus_random(Eigen::Index d, int extra, Rng& rng);
};

Trajectory scalarize(const Trajectory& f, const Vec& covector);

std::vector<std::pair<std::string, APReport>> weak_ap_verdict(
    const Trajectory& f, const FunctionalSet& functionals, const std::vector<double>& eps_list,
    const APVerdictConfig& cfg = {});

/// Trigonometric reconstruction sum_j coeffs_j e^{i freqs_j t} fitted to a
/// trajectory: least-squares amplitudes on detected frequencies plus a
/// Gauss-Newton frequency polish (variable projection). `defect` is the
/// relative sup-norm misfit on the fit window.
struct TrigReconstruction {
  std::vector<double> freqs;
  Mat coeffs;  // d x k
  double defect = 0.0;

  Vec at(double t) const;
};

struct ExtensionResult {
  bool ok = false;
  std::string reason;
  TrigReconstruction recon;
};

/// The Bart-Goldberg extension realized by trigonometric reconstruction from
/// the Bohr spectrum. Refuses when the spectrum misses more than `delta` of
/// the trajectory in relative sup-norm.
ExtensionResult ap_extension(const Trajectory& f, const std::vector<BohrCoefficient>& spectrum,
                             double delta = 1e-3);

/// Least-squares amplitudes on an already-polished frequency list (no
/// frequency refinement); cheap enough to run per vector.
TrigReconstruction fit_fixed_frequencies(const Trajectory& f, const std::vector<double>& freqs);

/// Extension value at any real t (negative included); throws on refusal.
Vec ap_extend(const Trajectory& f, const std::vector<BohrCoefficient>& spectrum, double t,
              double delta = 1e-3);

ExtendedTrajectory extend_to_grid(const Trajectory& f, const TrigReconstruction& recon, double T,
                                  double h);

/// sup over a dense grid of |sum_j amps_j e^{i freqs_j t}| with golden-section
/// refinement around the best cell.
double trig_sup(const std::vector<double>& freqs, const std::vector<cplx>& amps, double lo,
                double hi, double step);

}  // namespace apsg
