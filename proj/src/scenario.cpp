#include "apsg/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <sstream>

#include "json.hpp"

namespace apsg {

using ordered_json = nlohmann::ordered_json;

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  throw std::invalid_argument("scenario field '" + field + "': " + what);
}

cplx parse_complex(const ordered_json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    field_error(field, "expected a [re, im] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

Vec parse_vector(const ordered_json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) field_error(field, "expected a non-empty array of [re, im]");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = parse_complex(j[i], field + "[" + std::to_string(i) + "]");
  return v;
}

Mat parse_matrix(const ordered_json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) field_error(field, "expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Mat m;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Vec row = parse_vector(j[i], field + "[" + std::to_string(i) + "]");
    if (i == 0) m.resize(rows, row.size());
    if (row.size() != m.cols()) field_error(field, "ragged rows");
    m.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return m;
}

OperatorPair parse_operator(const ordered_json& j) {
  if (!j.is_object() || !j.contains("type")) field_error("operator", "missing 'type'");
  const std::string type = j["type"].get<std::string>();
  if (type == "matrix") {
    if (!j.contains("A") || !j.contains("C")) field_error("operator", "matrix form needs A and C");
    return OperatorPair::matrix_pair(parse_matrix(j["A"], "operator.A"),
                                     parse_matrix(j["C"], "operator.C"));
  }
  if (type == "spectral") {
    if (!j.contains("modes") || !j["modes"].is_array() || j["modes"].empty())
      field_error("operator.modes", "expected a non-empty array");
    std::vector<SpectralMode> modes;
    int idx = 0;
    for (const auto& m : j["modes"]) {
      SpectralMode mode;
      mode.index = m.contains("index") ? m["index"].get<int>() : idx;
      if (!m.contains("lambda") || !m.contains("c"))
        field_error("operator.modes", "each mode needs 'lambda' and 'c'");
      mode.lambda = parse_complex(m["lambda"], "operator.modes.lambda");
      mode.c = parse_complex(m["c"], "operator.modes.c");
      modes.push_back(mode);
      ++idx;
    }
    const double tail = j.value("tail_error", 0.0);
    const double adm = j.value("admissibility_bound", 1e10);
    return OperatorPair::spectral_pair(std::move(modes), tail, adm);
  }
  field_error("operator.type", "expected 'matrix' or 'spectral'");
}

SubspaceSpec parse_subspace(const ordered_json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "spanD") return SubspaceSpec::named(SubspaceSpec::Tag::spanD);
    if (s == "spanD0") return SubspaceSpec::named(SubspaceSpec::Tag::spanD0);
    if (s == "spanH") return SubspaceSpec::named(SubspaceSpec::Tag::spanH);
    if (s == "spanH0") return SubspaceSpec::named(SubspaceSpec::Tag::spanH0);
    if (s == "fullZ") return SubspaceSpec::named(SubspaceSpec::Tag::fullZ);
    field_error("subspace", "unknown tag '" + s + "'");
  }
  if (j.is_object() && j.contains("custom")) {
    const auto& arr = j["custom"];
    if (!arr.is_array() || arr.empty()) field_error("subspace.custom", "expected vectors");
    Mat basis;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const Vec v = parse_vector(arr[i], "subspace.custom[" + std::to_string(i) + "]");
      if (i == 0) basis.resize(v.size(), static_cast<Eigen::Index>(arr.size()));
      basis.col(static_cast<Eigen::Index>(i)) = v;
    }
    return SubspaceSpec::custom(std::move(basis));
  }
  field_error("subspace", "expected a tag string or {\"custom\": [...]}");
}

ordered_json residuals_json(const CheckResult& c) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : c.residuals)
    arr.push_back({{"name", r.name}, {"value", r.value}, {"tolerance", r.tolerance}});
  return arr;
}

ordered_json check_json(const CheckResult& c) {
  ordered_json j;
  j["id"] = c.id;
  j["inputs_digest"] = c.inputs_digest;
  j["status"] = c.status;
  j["pass"] = c.pass;
  j["tolerance"] = c.tolerance;
  j["residuals"] = residuals_json(c);
  j["witnesses"] = c.witnesses;
  j["notes"] = c.notes;
  return j;
}

ordered_json bohr_json(const BohrCoefficient& b) {
  ordered_json j;
  j["r"] = b.r;
  j["norm"] = b.value.norm();
  j["error_estimate"] = b.error_estimate;
  ordered_json val = ordered_json::array();
  for (Eigen::Index i = 0; i < b.value.size(); ++i)
    val.push_back({b.value[i].real(), b.value[i].imag()});
  j["value"] = val;
  return j;
}

ordered_json ap_report_json(const APReport& rep) {
  ordered_json j;
  j["verdict"] = rep.verdict;
  j["witness"] = rep.witness;
  j["sup_norm"] = rep.sup_norm;
  j["window_sups"] = rep.window_sups;
  ordered_json rows = ordered_json::array();
  for (const auto& row : rep.rows) {
    ordered_json rj;
    rj["epsilon"] = row.epsilon;
    rj["period_count"] = row.periods.size();
    rj["max_gap"] = row.max_gap;
    rj["relatively_dense"] = row.relatively_dense;
    rows.push_back(rj);
  }
  j["epsilon_rows"] = rows;
  ordered_json spec = ordered_json::array();
  for (const auto& b : rep.spectrum) spec.push_back(bohr_json(b));
  j["spectrum"] = spec;
  return j;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    require(os.good(), "cannot open output file " + tmp.string());
    os << content;
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

Scenario Scenario::load(const std::filesystem::path& file) {
  std::ifstream is(file);
  require(is.good(), "cannot open scenario file " + file.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return from_json_text(ss.str(), file.string());
}

Scenario Scenario::from_json_text(const std::string& text, const std::string& origin) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw std::invalid_argument("scenario parse error in " + origin + ": " + e.what());
  }

  Scenario sc;
  sc.name = j.value("name", std::string("unnamed"));
  if (!j.contains("seed") || !j["seed"].is_number_unsigned())
    field_error("seed", "required (runs must be reproducible)");
  sc.seed = j["seed"].get<std::uint64_t>();

  const std::string kind = j.value("kind", std::string("semigroup"));
  if (kind == "semigroup")
    sc.kind = FamilyKind::semigroup;
  else if (kind == "cosine")
    sc.kind = FamilyKind::cosine;
  else
    field_error("kind", "expected 'semigroup' or 'cosine'");

  sc.order = j.value("n", 1);
  if (sc.order < 0) field_error("n", "integration order must be >= 0");

  if (!j.contains("operator")) field_error("operator", "required");
  sc.pair = parse_operator(j["operator"]);

  // horizon/step: explicit or derived from the span frequencies
  const ResolvedSpan span = resolve_span(
      sc.pair, j.contains("subspace") ? parse_subspace(j["subspace"])
                                      : SubspaceSpec::named(sc.kind == FamilyKind::semigroup
                                                                ? SubspaceSpec::Tag::spanD
                                                                : SubspaceSpec::Tag::spanH));
  const auto freqs = span_frequencies(span, sc.kind);
  sc.horizon = j.value("horizon", default_horizon(freqs));
  sc.step = j.value("step", default_step(freqs));
  if (!(sc.step > 0)) field_error("step", "must be positive");
  if (sc.horizon < 100.0 * sc.step)
    field_error("horizon", "must cover at least 100 sample steps (T >= 100 h)");

  if (j.contains("frequency_grid")) {
    const auto& g = j["frequency_grid"];
    if (!g.is_object() || !g.contains("min") || !g.contains("max") || !g.contains("count"))
      field_error("frequency_grid", "expected {min, max, count}");
    const double lo = g["min"].get<double>(), hi = g["max"].get<double>();
    const int count = g["count"].get<int>();
    if (!(hi > lo) || count < 2) field_error("frequency_grid", "need max > min, count >= 2");
    if ((hi - lo) / double(count - 1) > M_PI / sc.horizon + 1e-12)
      field_error("frequency_grid",
                  "grid spacing exceeds the frequency resolution pi/horizon of the window");
    sc.freq_grid = uniform_grid(lo, hi, count);
  }

  if (j.contains("epsilons")) {
    for (const auto& e : j["epsilons"]) sc.epsilons.push_back(e.get<double>());
    for (double e : sc.epsilons)
      if (!(e > 0)) field_error("epsilons", "entries must be positive");
  }

  if (j.contains("subspace")) sc.subspace = parse_subspace(j["subspace"]);
  else
    sc.subspace = SubspaceSpec::named(sc.kind == FamilyKind::semigroup ? SubspaceSpec::Tag::spanD
                                                                       : SubspaceSpec::Tag::spanH);

  if (j.contains("checks")) {
    for (const auto& c : j["checks"]) sc.checks.push_back(c.get<std::string>());
    if (sc.checks.size() == 1 && sc.checks[0] == "all") {
      sc.checks.clear();
      for (const auto& info : check_catalogue())
        if (!info.exploratory) sc.checks.push_back(info.id);
    }
    for (const auto& c : sc.checks) {
      bool known = false;
      for (const auto& info : check_catalogue()) known = known || info.id == c;
      if (!known) field_error("checks", "unknown check id '" + c + "'");
    }
  }

  if (j.contains("orbits"))
    for (std::size_t i = 0; i < j["orbits"].size(); ++i) {
      Vec v = parse_vector(j["orbits"][i], "orbits[" + std::to_string(i) + "]");
      if (v.size() != sc.pair.dim()) field_error("orbits", "vector dimension mismatch");
      sc.orbits.push_back(std::move(v));
    }

  if (j.contains("tolerances"))
    for (auto it = j["tolerances"].begin(); it != j["tolerances"].end(); ++it)
      sc.tolerance_overrides[it.key()] = it.value().get<double>();

  return sc;
}

namespace {

CheckConfig config_for(const Scenario& sc, const RunOptions& opts, const std::string& check_id) {
  CheckConfig cfg;
  cfg.seed = sc.seed;
  cfg.T = sc.horizon;
  cfg.h = sc.step;
  cfg.epsilons = sc.epsilons;  // empty: per-orbit relative defaults
  cfg.freq_grid = sc.freq_grid;
  CheckConfig scaled = cfg.scaled(opts.tol_scale);
  const auto it = sc.tolerance_overrides.find(check_id);
  if (it != sc.tolerance_overrides.end()) {
    if (check_id == "eigvec-orbit") scaled.tol_closed = it->second;
    else if (check_id == "antiderivative" || check_id == "negative-generator")
      scaled.tol_quadrature = it->second;
    else if (check_id == "extension-laws") scaled.tol_extension = it->second;
    else if (check_id == "bohr-eigenrelation") scaled.tol_bohr = it->second;
  }
  return scaled;
}

}  // namespace

int run_scenario(const Scenario& sc, const std::filesystem::path& outdir, const RunOptions& opts) {
  namespace fs = std::filesystem;
  fs::create_directories(outdir);
  fs::create_directories(outdir / "trajectories");

  // checks (independent; may run concurrently, merged in id order)
  std::vector<CheckResult> results(sc.checks.size());
  auto run_one = [&](std::size_t i) {
    results[i] = run_check(sc.checks[i], sc.pair, sc.kind, sc.subspace,
                           config_for(sc, opts, sc.checks[i]));
  };
  if (opts.parallel > 1) {
    std::vector<std::future<void>> futs;
    for (std::size_t i = 0; i < sc.checks.size(); ++i)
      futs.push_back(std::async(std::launch::async, run_one, i));
    for (auto& f : futs) f.get();
  } else {
    for (std::size_t i = 0; i < sc.checks.size(); ++i) run_one(i);
  }
  std::sort(results.begin(), results.end(),
            [](const CheckResult& a, const CheckResult& b) { return a.id < b.id; });

  // orbit analyses
  ordered_json orbits_json = ordered_json::array();
  std::ostringstream spectrum_csv, periods_csv;
  spectrum_csv << "orbit,r,norm,error_estimate\n";
  periods_csv << "orbit,epsilon,tau\n";
  char buf[128];

  IntegratedFamily fam(sc.pair, sc.order, sc.kind);
  for (std::size_t i = 0; i < sc.orbits.size(); ++i) {
    ordered_json oj;
    oj["index"] = i;
    try {
      const Trajectory tr = fam.orbit(sc.orbits[i], sc.horizon, sc.step);
      APVerdictConfig vcfg;
      vcfg.spectrum_grid = sc.freq_grid;
      std::vector<double> eps = sc.epsilons;
      if (eps.empty()) {
        double sup = 0.0;
        for (Eigen::Index k = 0; k < tr.samples(); ++k)
          sup = std::max(sup, tr.values.col(k).norm());
        if (sup == 0.0) sup = 1.0;
        eps = {0.5 * sup, 0.35 * sup, 0.25 * sup};
      }
      const APReport rep = ap_verdict(tr, eps, vcfg);
      oj["provenance"] = tr.provenance;
      oj["report"] = ap_report_json(rep);

      std::ostringstream csv;
      tr.write_csv(csv);
      atomic_write(outdir / "trajectories" / ("orbit_" + std::to_string(i) + ".csv"), csv.str());

      for (const auto& b : rep.spectrum) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", i, b.r, b.value.norm(),
                      b.error_estimate);
        spectrum_csv << buf;
      }
      for (const auto& row : rep.rows) {
        std::size_t count = 0;
        for (double tau : row.periods) {
          if (++count > 1000) break;  // plot-sized cap; the full gap statistics are in the report
          std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", i, row.epsilon, tau);
          periods_csv << buf;
        }
      }
    } catch (const std::exception& e) {
      oj["refused"] = e.what();
    }
    orbits_json.push_back(oj);
  }

  ordered_json report;
  report["scenario"] = sc.name;
  report["seed"] = sc.seed;
  report["kind"] = sc.kind == FamilyKind::semigroup ? "semigroup" : "cosine";
  report["operator"] = sc.pair.describe();
  report["subspace"] = sc.subspace.name();
  report["horizon"] = sc.horizon;
  report["step"] = sc.step;
  ordered_json checks_json = ordered_json::array();
  bool all_pass = true;
  for (const auto& c : results) {
    checks_json.push_back(check_json(c));
    const bool exploratory = c.status == "exploratory";
    if (!exploratory && !c.pass) all_pass = false;
  }
  report["checks"] = checks_json;
  report["orbits"] = orbits_json;
  report["pass"] = all_pass;

  atomic_write(outdir / "report.json", report.dump(2) + "\n");
  atomic_write(outdir / "spectrum.csv", spectrum_csv.str());
  atomic_write(outdir / "periods.csv", periods_csv.str());

  return all_pass ? 0 : 1;
}

}  // namespace apsg
