#pragma once

// Configuration-driven scenario runner. A JSON config names one scenario and
// its model; the runner produces CSV tables and a manifest that can be fed
// back in as a config.

#include <cinttypes>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qthermo/cli/version.hpp"
#include "qthermo/engine.hpp"
#include "qthermo/models/birth_death.hpp"
#include "qthermo/models/chem.hpp"
#include "qthermo/models/levels.hpp"
#include "qthermo/models/pv.hpp"
#include "qthermo/thermo.hpp"

namespace qthermo::cli {

using json = nlohmann::json;

/// Invalid or incomplete configuration; the message starts with the field path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical failure from the library, tagged with the scenario name.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(const std::string& scenario, const Error& e)
      : std::runtime_error(scenario + ": " + e.what()), kind_(e.kind()) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string formatNumber(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void row(const std::vector<double>& values) {
    if (values.size() != header_.size()) throw std::logic_error("csv row width mismatch");
    rows_.push_back(values);
  }

  std::string str() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < header_.size(); ++i) os << (i ? "," : "") << header_[i];
    os << '\n';
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << formatNumber(r[i]);
      os << '\n';
    }
    return os.str();
  }

  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<double>> rows_;
};

/// Reads one JSON object, recording every value it hands out (defaults
/// included) into `resolved`; finish() rejects keys nobody asked for.
class Fields {
 public:
  Fields(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  template <typename T>
  T get(const std::string& key) {
    if (!obj_.contains(key)) throw ConfigError(where(key) + ": missing required field");
    return take<T>(key);
  }

  template <typename T>
  T opt(const std::string& key, T fallback) {
    if (!obj_.contains(key) || obj_.at(key).is_null()) {
      used_.insert(key);
      resolved_[key] = fallback;
      return fallback;
    }
    return take<T>(key);
  }

  bool has(const std::string& key) const { return obj_.contains(key) && !obj_.at(key).is_null(); }

  Fields child(const std::string& key) {
    if (!obj_.contains(key)) throw ConfigError(where(key) + ": missing required field");
    used_.insert(key);
    return Fields(obj_.at(key), where(key));
  }

  const json& raw(const std::string& key) {
    if (!obj_.contains(key)) throw ConfigError(where(key) + ": missing required field");
    used_.insert(key);
    return obj_.at(key);
  }

  void store(const std::string& key, json value) { resolved_[key] = std::move(value); }

  std::string where(const std::string& key = "") const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  json finish() {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!used_.count(it.key())) throw ConfigError(where(it.key()) + ": unknown key");
    return resolved_;
  }

 private:
  template <typename T>
  T take(const std::string& key) {
    used_.insert(key);
    try {
      T v = obj_.at(key).get<T>();
      resolved_[key] = v;
      return v;
    } catch (const json::exception&) {
      throw ConfigError(where(key) + ": wrong type (" + obj_.at(key).dump() + ")");
    }
  }

  const json& obj_;
  std::string path_;
  std::set<std::string> used_;
  json resolved_ = json::object();
};

inline void check(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw ConfigError(path + ": " + what);
}

inline Eigen::MatrixXd readMatrix(Fields& f, const std::string& key, Index rows, Index cols) {
  const auto v = f.get<std::vector<std::vector<double>>>(key);
  check(Index(v.size()) == rows, f.where(key), "expected " + std::to_string(rows) + " rows");
  Eigen::MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    check(Index(v[std::size_t(i)].size()) == cols, f.where(key), "expected " + std::to_string(cols) + " columns");
    for (Index j = 0; j < cols; ++j) m(i, j) = v[std::size_t(i)][std::size_t(j)];
  }
  return m;
}

inline LevelSpec readLevelModel(Fields& f) {
  LevelSpec s;
  s.energies = f.get<std::vector<double>>("energies");
  s.drive = f.opt<std::vector<double>>("drive", {});
  s.g = f.opt<double>("g", 0.0);
  s.Omega = f.opt<double>("Omega", 1.0);
  const json& baths = f.raw("baths");
  check(baths.is_array() && !baths.empty(), f.where("baths"), "expected a nonempty array");
  json resolvedBaths = json::array();
  for (std::size_t i = 0; i < baths.size(); ++i) {
    Fields b(baths[i], f.where("baths") + "[" + std::to_string(i) + "]");
    LevelBath lb;
    lb.label = b.get<std::string>("label");
    lb.beta = b.get<double>("beta");
    const json& tr = b.raw("transitions");
    check(tr.is_array(), b.where("transitions"), "expected an array");
    json resolvedTr = json::array();
    for (std::size_t j = 0; j < tr.size(); ++j) {
      Fields t(tr[j], b.where("transitions") + "[" + std::to_string(j) + "]");
      LevelTransition lt;
      lt.lower = t.get<Index>("lower");
      lt.upper = t.get<Index>("upper");
      lt.rate = t.get<double>("rate");
      lb.transitions.push_back(lt);
      resolvedTr.push_back(t.finish());
    }
    b.store("transitions", resolvedTr);
    s.baths.push_back(std::move(lb));
    resolvedBaths.push_back(b.finish());
  }
  f.store("baths", resolvedBaths);
  return s;
}

inline std::map<std::string, double> bathBetas(const LevelSpec& s) {
  std::map<std::string, double> out;
  for (const auto& b : s.baths) out[b.label] = b.beta;
  return out;
}

inline std::vector<double> timeGrid(Fields& grid) {
  const double tMax = grid.get<double>("tMax");
  const auto steps = grid.get<std::size_t>("steps");
  check(tMax > 0.0, grid.where("tMax"), "must be positive");
  check(steps >= 2, grid.where("steps"), "must be at least 2");
  return linspace(0.0, tMax, steps + 1);
}

struct RunResult {
  std::string scenario;
  /// file name -> contents, written in key order.
  std::map<std::string, std::string> files;
  json manifest;
};

struct ScenarioOutput {
  std::map<std::string, std::string> files;
  json extra = json::object();
};

inline ScenarioOutput runEvolve(Fields& root) {
  Fields model = root.child("model");
  const LevelSpec spec = readLevelModel(model);
  root.store("model", model.finish());
  const Index d = Index(spec.energies.size());

  std::vector<double> pops;
  if (root.has("initial")) {
    Fields init = root.child("initial");
    pops = init.get<std::vector<double>>("populations");
    root.store("initial", init.finish());
  } else {
    pops.assign(std::size_t(d), 0.0);
    pops[0] = 1.0;
    root.store("initial", json{{"populations", pops}});
  }
  check(Index(pops.size()) == d, "initial.populations", "expected one entry per level");

  Fields grid = root.child("grid");
  const std::vector<double> times = timeGrid(grid);
  LawOptions lo;
  lo.computeSigma = grid.opt<bool>("sigma", true);
  lo.gridTolerance = grid.opt<double>("gridTolerance", 1e-3);
  root.store("grid", grid.finish());

  const GeneratorFamily fam = buildLevelFamily(spec);
  const Trajectory tr = evolveDriven(fam, DensityMatrix::diagonal(pops), times);
  const auto samples = lawResiduals(tr, fam, bathBetas(spec), lo);

  std::vector<std::string> header{"t", "U", "P"};
  for (const auto& label : fam.at(0.0).bathLabels()) header.push_back("J_" + label);
  for (const char* h : {"S", "sigma", "firstLawResidual", "secondLawResidual"}) header.emplace_back(h);
  CsvTable csv(header);
  for (const auto& s : samples) {
    std::vector<double> row{s.t, s.U, s.P};
    row.insert(row.end(), s.J.begin(), s.J.end());
    row.insert(row.end(), {s.S, s.sigma, s.firstLawResidual, s.secondLawResidual});
    csv.row(row);
  }
  return {{{"thermo_trace.csv", csv.str()}}, json::object()};
}

inline PvSpec readPvModel(Fields& f) {
  PvSpec s;
  s.conduction = f.get<std::vector<double>>("conduction");
  s.valence = f.get<std::vector<double>>("valence");
  check(!s.conduction.empty() && !s.valence.empty(), f.where(), "both bands need at least one mode");
  const Index kc = Index(s.conduction.size()), kv = Index(s.valence.size());
  s.beta = f.get<double>("beta");
  s.beta1 = f.get<double>("beta1");
  s.intraC = readMatrix(f, "intraC", kc, kc);
  s.intraV = readMatrix(f, "intraV", kv, kv);
  s.inter = readMatrix(f, "inter", kc, kv);
  s.muC = f.opt<double>("muC", 0.0);
  s.muV = f.opt<double>("muV", 0.0);
  s.g = f.get<double>("g");
  s.Omega = f.get<double>("Omega");
  return s;
}

inline ScenarioOutput runPvSweep(Fields& root) {
  Fields model = root.child("model");
  const PvSpec spec = readPvModel(model);
  root.store("model", model.finish());
  validate(spec);
  const double vOc = openCircuitVoltage(spec);

  Fields grid = root.child("grid");
  const double vMin = grid.opt<double>("vMin", 0.0);
  const double vMax = grid.opt<double>("vMax", 1.2 * vOc);
  const auto points = grid.opt<std::size_t>("points", 25);
  root.store("grid", grid.finish());
  check(points >= 2, "grid.points", "must be at least 2");
  check(vMax > vMin, "grid.vMax", "must exceed vMin");

  CsvTable csv({"V", "pAnalytic", "pNumeric"});
  for (double v : linspace(vMin, vMax, points)) csv.row({v, pvAnalyticPower(spec, v), pvNumericPower(spec, v)});
  return {{{"pv_curve.csv", csv.str()}}, json{{"vOc", vOc}, {"degenerateGap", hasDegenerateGap(spec)}}};
}

inline ChemSpec readChemModel(Fields& f) {
  ChemSpec s;
  s.omega = f.opt<double>("omega", 1.0);
  s.gammaUp = f.get<double>("gammaUp");
  s.gammaDown = f.get<double>("gammaDown");
  s.decoherence = f.opt<double>("decoherence", 0.0);
  s.dim = f.opt<Index>("dim", 60);
  if (f.has("chemistry")) {
    Fields c = f.child("chemistry");
    ChemChemistry ch;
    ch.beta = c.get<double>("beta");
    ch.muA = c.get<double>("muA");
    ch.muB = c.get<double>("muB");
    ch.muC = c.get<double>("muC");
    f.store("chemistry", c.finish());
    s.chemistry = ch;
  }
  return s;
}

inline ScenarioOutput runChemEngine(Fields& root) {
  Fields model = root.child("model");
  const ChemSpec spec = readChemModel(model);
  root.store("model", model.finish());
  validate(spec);

  Fields init = root.child("initial");
  const cplx alpha0(init.get<double>("alphaRe"), init.opt<double>("alphaIm", 0.0));
  root.store("initial", init.finish());

  Fields grid = root.child("grid");
  const std::vector<double> times = timeGrid(grid);
  BandOptions bo;
  bo.dt = grid.opt<double>("dt", 0.01);
  bo.maxDim = grid.opt<Index>("maxDim", 2048);
  root.store("grid", grid.finish());
  check(bo.maxDim >= spec.dim, "grid.maxDim", "must be at least model.dim");

  const DensityMatrix rho0 = coherentState(spec.dim, alpha0);
  const double e0 = spec.omega * meanNumber(rho0.matrix());
  const cplx a0 = meanAmplitude(rho0.matrix());
  OscillatorBandPropagator prop(spec, rho0.matrix(), bo);
  CsvTable csv({"t", "E_numeric", "E_analytic", "|alpha|_numeric", "|alpha|_analytic", "ergotropy", "eta"});
  for (double t : times) {
    prop.advanceTo(t);
    const DensityMatrix rho{Operator(prop.density())};
    const double e = prop.energy();
    const double w = ergotropy(rho, spec.omega * numberOperator(prop.dim()));
    csv.row({t, e, analyticEnergy(spec, e0, t), std::abs(prop.amplitude()), std::abs(analyticAmplitude(spec, a0, t)), w,
             e > 0.0 ? w / e : 0.0});
  }
  return {{{"chem_trace.csv", csv.str()}},
          json{{"finalDim", prop.dim()}, {"maxTopPopulation", prop.maxTopPopulation()}, {"valid", prop.valid()}}};
}

inline ScenarioOutput runReplicator(Fields& root, std::uint64_t seed) {
  Fields model = root.child("model");
  const double up = model.get<double>("gammaUp");
  const double down = model.get<double>("gammaDown");
  const auto n0 = model.get<std::uint64_t>("n0");
  const auto nMax = model.opt<std::size_t>("nMax", 200);
  root.store("model", model.finish());
  check(nMax >= 1 && n0 <= nMax, "model.n0", "must not exceed nMax");

  Fields grid = root.child("grid");
  const std::vector<double> times = timeGrid(grid);
  const auto trajectories = grid.opt<std::size_t>("trajectories", 10000);
  const auto threads = grid.opt<unsigned>("threads", 0u);
  root.store("grid", grid.finish());
  check(trajectories >= 1, "grid.trajectories", "must be at least 1");

  const auto ode = birthDeathEvolve(birthDeathDelta(nMax, std::size_t(n0)), up, down, times);
  const EnsembleStats mc = gillespieEnsemble(n0, up, down, times, trajectories, seed, threads);
  CsvTable csv({"t", "mean_ode", "var_ode", "mean_mc", "stderr_mc", "extinction_fraction"});
  for (std::size_t k = 0; k < times.size(); ++k)
    csv.row({times[k], ode[k].mean(), ode[k].variance(), mc.mean[k], mc.stderrMean[k], mc.extinctionFraction[k]});
  return {{{"repl_stats.csv", csv.str()}}, json::object()};
}

inline ScenarioOutput runEnginePower(Fields& root) {
  Fields model = root.child("model");
  const LevelSpec spec = readLevelModel(model);
  root.store("model", model.finish());

  DerivativeOptions opt;
  if (root.has("derivative")) {
    Fields d = root.child("derivative");
    opt.delta = d.opt<double>("delta", 0.0);
    opt.extrapolate = d.opt<bool>("extrapolate", false);
    opt.identityTolerance = d.opt<double>("identityTolerance", 1e-4);
    root.store("derivative", d.finish());
  } else {
    root.store("derivative", json{{"delta", 0.0}, {"extrapolate", false}, {"identityTolerance", 1e-4}});
  }
  const PowerReport r = powerReport(buildLevelFamily(spec), opt);
  CsvTable csv({"pBarResolvent", "pBarFast", "identityResidual"});
  csv.row({r.pBarResolvent, r.pBarFast, r.identityResidual});
  return {{{"power_report.csv", csv.str()}}, json{{"richardsonError", r.richardsonError}}};
}

/// A manifest written by a previous run is accepted in place of a config.
inline json unwrapManifest(const json& doc) {
  if (doc.is_object() && doc.contains("artifact_version") && doc.contains("config")) return doc.at("config");
  return doc;
}

/// Applies key=value with a dotted key path; the value is read as JSON when
/// it parses and as a plain string otherwise.
inline void applyOverride(json& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--override '" + assignment + "': expected key=value");
  const std::string path = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json* node = &cfg;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty() || !node->is_object()) throw ConfigError(path + ": cannot override inside a non-object");
    if (dot == std::string::npos) {
      (*node)[key] = std::move(value);
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

inline RunResult runScenario(const json& document, std::optional<std::uint64_t> seedOverride = std::nullopt) {
  const json cfg = unwrapManifest(document);
  Fields root(cfg, "");
  const std::string scenario = root.get<std::string>("scenario");
  std::uint64_t seed = root.opt<std::uint64_t>("seed", 0);
  if (seedOverride) {
    seed = *seedOverride;
    root.store("seed", seed);
  }

  static const std::map<std::string, std::set<std::string>> sections{
      {"evolve", {"model", "initial", "grid"}},
      {"pv-sweep", {"model", "grid"}},
      {"chem-engine", {"model", "initial", "grid"}},
      {"replicator", {"model", "grid"}},
      {"engine-power", {"model", "derivative"}}};
  const auto known = sections.find(scenario);
  if (known == sections.end()) throw ConfigError("scenario: unknown scenario '" + scenario + "'");
  for (auto it = cfg.begin(); it != cfg.end(); ++it)
    if (it.key() != "scenario" && it.key() != "seed" && !known->second.count(it.key()))
      throw ConfigError(it.key() + ": unknown key for scenario '" + scenario + "'");

  ScenarioOutput out;
  try {
    if (scenario == "evolve")
      out = runEvolve(root);
    else if (scenario == "pv-sweep")
      out = runPvSweep(root);
    else if (scenario == "chem-engine")
      out = runChemEngine(root);
    else if (scenario == "replicator")
      out = runReplicator(root, seed);
    else
      out = runEnginePower(root);
  } catch (const Error& e) {
    // Shape and dimension problems stem from the config itself.
    if (e.kind() == ErrorKind::InvalidDimension || e.kind() == ErrorKind::ShapeError ||
        e.kind() == ErrorKind::InvalidArgument || e.kind() == ErrorKind::IncompleteAssignment ||
        e.kind() == ErrorKind::DetailedBalanceViolation)
      throw ConfigError(scenario + ": " + e.what());
    throw ScenarioError(scenario, e);
  }

  RunResult r;
  r.scenario = scenario;
  r.files = std::move(out.files);
  json outputs = json::array();
  for (const auto& [name, body] : r.files) outputs.push_back(name);
  r.manifest = json{{"artifact_version", kArtifactVersion},
                    {"library", std::string("qthermo ") + kVersion},
                    {"config", root.finish()},
                    {"outputs", outputs}};
  for (auto it = out.extra.begin(); it != out.extra.end(); ++it) r.manifest[it.key()] = it.value();
  return r;
}

}  // namespace qthermo::cli
