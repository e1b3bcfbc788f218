#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "meg/core.hpp"
#include "meg/edge_markov.hpp"
#include "meg/expansion.hpp"
#include "meg/flooding.hpp"
#include "meg/geometric.hpp"
#include "meg/stats.hpp"

namespace meg {

struct ConfigError : std::runtime_error {
  int line;
  ConfigError(int line_, const std::string& msg)
      : std::runtime_error("config line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

enum class ModelKind { Geometric, Edge };

inline const char* modelName(ModelKind m) { return m == ModelKind::Geometric ? "geometric" : "edge"; }

/// One grid axis: an explicit value list, or "auto" resolved per point
/// (R: 3 sqrt(log n / delta), r: R/2, p: from phat = 8 log n / n and q).
struct GridAxis {
  std::vector<double> values;
  bool isAuto = false;

  size_t size() const { return isAuto ? 1 : values.size(); }
};

struct ExperimentConfig {
  ModelKind model = ModelKind::Geometric;
  std::uint64_t masterSeed = 1;
  int seeds = 1;
  SourcePolicy sourcePolicy = SourcePolicy::RandomOne;
  std::vector<NodeId> sourceList;
  std::int64_t maxSteps = 0;  // 0 = auto from the expansion bound
  bool timing = true;
  bool lazy = false;
  std::string out;  // result CSV path; CLI flags may override

  GridAxis n;
  GridAxis R, r, eps{{1.0}, false}, delta{{1.0}, false};  // geometric axes
  GridAxis p, q;                                          // edge axes
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parseDouble(const std::string& tok, int line) {
  try {
    size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(line, "expected a number, got '" + tok + "'");
  }
}

inline GridAxis parseAxis(const std::string& value, int line) {
  GridAxis axis;
  if (value == "auto") {
    axis.isAuto = true;
    return axis;
  }
  std::stringstream ss(value);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) throw ConfigError(line, "empty list element");
    axis.values.push_back(parseDouble(tok, line));
  }
  if (axis.values.empty()) throw ConfigError(line, "empty value list");
  return axis;
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// key = value sections; '#' comments; [experiment] and [grid].
inline ExperimentConfig parseConfig(std::istream& in) {
  ExperimentConfig cfg;
  bool sawModel = false, sawN = false;
  std::string section;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    if (const auto hash = s.find('#'); hash != std::string::npos) s.erase(hash);
    s = detail::trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(line, "unterminated section header");
      section = detail::trim(s.substr(1, s.size() - 2));
      if (section != "experiment" && section != "grid") throw ConfigError(line, "unknown section '" + section + "'");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "expected key = value");
    const std::string key = detail::trim(s.substr(0, eq));
    const std::string value = detail::trim(s.substr(eq + 1));
    if (section.empty()) throw ConfigError(line, "key outside any section");
    if (value.empty()) throw ConfigError(line, "missing value for '" + key + "'");

    if (section == "experiment") {
      if (key == "model") {
        if (value == "geometric") cfg.model = ModelKind::Geometric;
        else if (value == "edge") cfg.model = ModelKind::Edge;
        else throw ConfigError(line, "model must be geometric or edge");
        sawModel = true;
      } else if (key == "master_seed") {
        cfg.masterSeed = static_cast<std::uint64_t>(std::strtoull(value.c_str(), nullptr, 10));
      } else if (key == "seeds") {
        cfg.seeds = static_cast<int>(detail::parseDouble(value, line));
        if (cfg.seeds < 1) throw ConfigError(line, "seeds must be >= 1");
      } else if (key == "source") {
        if (value == "random") cfg.sourcePolicy = SourcePolicy::RandomOne;
        else if (value == "all") cfg.sourcePolicy = SourcePolicy::All;
        else {
          cfg.sourcePolicy = SourcePolicy::FixedList;
          const GridAxis axis = detail::parseAxis(value, line);
          for (double v : axis.values) cfg.sourceList.push_back(static_cast<NodeId>(v));
        }
      } else if (key == "max_steps") {
        cfg.maxSteps = static_cast<std::int64_t>(detail::parseDouble(value, line));
      } else if (key == "timing") {
        if (value == "on") cfg.timing = true;
        else if (value == "off") cfg.timing = false;
        else throw ConfigError(line, "timing must be on or off");
      } else if (key == "lazy") {
        if (value == "on") cfg.lazy = true;
        else if (value == "off") cfg.lazy = false;
        else throw ConfigError(line, "lazy must be on or off");
      } else if (key == "out") {
        cfg.out = value;
      } else {
        throw ConfigError(line, "unknown experiment key '" + key + "'");
      }
    } else {
      if (key == "n") {
        cfg.n = detail::parseAxis(value, line);
        if (cfg.n.isAuto) throw ConfigError(line, "n cannot be auto");
        sawN = true;
      } else if (key == "R") cfg.R = detail::parseAxis(value, line);
      else if (key == "r") cfg.r = detail::parseAxis(value, line);
      else if (key == "eps") cfg.eps = detail::parseAxis(value, line);
      else if (key == "delta") cfg.delta = detail::parseAxis(value, line);
      else if (key == "p") cfg.p = detail::parseAxis(value, line);
      else if (key == "q") cfg.q = detail::parseAxis(value, line);
      else throw ConfigError(line, "unknown grid key '" + key + "'");
    }
  }
  if (!sawModel) throw ConfigError(0, "missing [experiment] model");
  if (!sawN) throw ConfigError(0, "missing [grid] n");
  if (cfg.model == ModelKind::Geometric) {
    if (cfg.R.size() == 0 && !cfg.R.isAuto) throw ConfigError(0, "geometric grid needs R");
    if (cfg.r.size() == 0 && !cfg.r.isAuto) throw ConfigError(0, "geometric grid needs r");
  } else {
    if (cfg.q.values.empty()) throw ConfigError(0, "edge grid needs a literal q");
    if (cfg.p.size() == 0 && !cfg.p.isAuto) throw ConfigError(0, "edge grid needs p");
    if (cfg.q.isAuto) throw ConfigError(0, "q cannot be auto");
  }
  return cfg;
}

inline ExperimentConfig parseConfigString(const std::string& text) {
  std::istringstream in(text);
  return parseConfig(in);
}

/// Fully resolved parameters of one grid point.
struct RunParams {
  ModelKind model = ModelKind::Geometric;
  int n = 0;
  double R = std::numeric_limits<double>::quiet_NaN();
  double r = std::numeric_limits<double>::quiet_NaN();
  double eps = std::numeric_limits<double>::quiet_NaN();
  double delta = std::numeric_limits<double>::quiet_NaN();
  double p = std::numeric_limits<double>::quiet_NaN();
  double q = std::numeric_limits<double>::quiet_NaN();
  bool lazy = false;

  double phat() const { return p / (p + q); }

  GeometricParams geometric() const { return {n, r, R, eps, delta}; }
  EdgeParams edge() const { return {n, p, q}; }

  /// Canonical identity string; its hash feeds per-run seed derivation, so
  /// run seeds depend on parameter values, never on grid position.
  std::string canonical() const {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s:%d:%.17g:%.17g:%.17g:%.17g:%.17g:%.17g", modelName(model), n, R, r, eps,
                  delta, p, q);
    return buf;
  }
};

inline double autoRadius(double n, double delta) { return 3.0 * std::sqrt(std::log(n) / delta); }

/// phat schedule used by the edge scaling experiments.
inline double autoPhat(double n) { return 8.0 * std::log(n) / n; }

struct GridPoint {
  RunParams params;
  bool valid = true;
  std::string reason;
};

inline std::vector<GridPoint> expandGrid(const ExperimentConfig& cfg) {
  std::vector<GridPoint> points;
  auto resolve = [&](RunParams base) {
    GridPoint pt;
    pt.params = base;
    try {
      if (cfg.model == ModelKind::Geometric) {
        pt.params.geometric().validate();
      } else {
        pt.params.edge().validate();
      }
    } catch (const std::exception& e) {
      pt.valid = false;
      pt.reason = e.what();
    }
    points.push_back(std::move(pt));
  };

  for (double nv : cfg.n.values) {
    RunParams base;
    base.model = cfg.model;
    base.lazy = cfg.lazy;
    base.n = static_cast<int>(nv);
    if (cfg.model == ModelKind::Geometric) {
      for (size_t di = 0; di < cfg.delta.size(); ++di) {
        const double delta = cfg.delta.isAuto ? 1.0 : cfg.delta.values[di];
        for (size_t Ri = 0; Ri < cfg.R.size(); ++Ri) {
          const double R = cfg.R.isAuto ? autoRadius(nv, delta) : cfg.R.values[Ri];
          for (size_t ri = 0; ri < cfg.r.size(); ++ri) {
            const double r = cfg.r.isAuto ? R / 2.0 : cfg.r.values[ri];
            for (size_t ei = 0; ei < cfg.eps.size(); ++ei) {
              RunParams rp = base;
              rp.delta = delta;
              rp.R = R;
              rp.r = r;
              rp.eps = cfg.eps.isAuto ? 1.0 : cfg.eps.values[ei];
              resolve(rp);
            }
          }
        }
      }
    } else {
      for (size_t qi = 0; qi < cfg.q.size(); ++qi) {
        const double q = cfg.q.values[qi];
        for (size_t pi = 0; pi < cfg.p.size(); ++pi) {
          RunParams rp = base;
          rp.q = q;
          if (cfg.p.isAuto) {
            const double phat = autoPhat(nv);
            rp.p = q * phat / (1.0 - phat);
          } else {
            rp.p = cfg.p.values[pi];
          }
          resolve(rp);
        }
      }
    }
  }
  return points;
}

/// Default step budget: 20x the analytic bound from the expansion module,
/// floored at 1000.
inline std::int64_t autoMaxSteps(const RunParams& rp) {
  double bound = 0.0;
  try {
    if (rp.model == ModelKind::Geometric)
      bound = lemmaBound(geometricSchedule(rp.n, rp.R, 0.05, 0.05));
    else
      bound = lemmaBound(edgeSchedule(rp.n, rp.phat(), 20.0));
  } catch (const std::exception&) {
    bound = static_cast<double>(rp.n);
  }
  return std::max<std::int64_t>(1000, static_cast<std::int64_t>(std::ceil(20.0 * bound)));
}

struct RunRow {
  RunParams params;
  std::uint64_t seed = 0;
  NodeId source = 0;
  std::int64_t T = -1;  // -1 = not completed
  bool completed = false;
  std::int64_t certGeo = -1;  // -1 = n/a (edge model)
  int certDeg = -1;           // 1 pass, 0 fail, -1 = n/a
  std::int64_t steps = 0;
  std::int64_t wallMs = 0;
};

struct SweepResult {
  std::vector<RunRow> rows;
  std::vector<std::string> skipped;  // one reason per skipped grid point
};

namespace detail {
constexpr std::uint64_t kRunSeed = 0x727560732d736565ULL;
}  // namespace detail

/// Seed of one run: a hash chain over (master seed, canonical parameter
/// string, seed index, source). Extending the grid leaves existing runs'
/// seeds untouched because the point enters through its values, not its
/// position.
inline std::uint64_t deriveRunSeed(std::uint64_t masterSeed, const RunParams& params, int seedIndex,
                                   std::optional<NodeId> source) {
  const std::uint64_t sourceKey = source ? static_cast<std::uint64_t>(*source) + 1 : 0;
  return RngStream(masterSeed)
      .derive(detail::kRunSeed, detail::fnv1a(params.canonical()), static_cast<std::uint64_t>(seedIndex), sourceKey)
      .key();
}

namespace detail {

inline unsigned workerCount(size_t jobs) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("MEG_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) hw = static_cast<unsigned>(std::min<long>(v, 256));
  }
  return static_cast<unsigned>(std::min<size_t>(hw, std::max<size_t>(jobs, 1)));
}

struct Job {
  RunParams params;
  std::uint64_t seed;
  std::optional<NodeId> fixedSource;  // nullopt = derive from seed
};

inline RunRow executeJob(const Job& job, std::int64_t maxSteps, bool timing) {
  RunRow row;
  row.params = job.params;
  row.seed = job.seed;
  const auto start = std::chrono::steady_clock::now();

  std::unique_ptr<EvolvingGraph> model;
  std::optional<GeometricState> initial;
  if (job.params.model == ModelKind::Geometric) {
    auto geo = std::make_unique<GeometricModel>(job.params.geometric(), job.seed);
    initial = geo->state();
    model = std::move(geo);
  } else if (job.params.lazy) {
    model = std::make_unique<LazyEdgeModel>(job.params.edge(), job.seed);
  } else {
    model = std::make_unique<DenseEdgeModel>(job.params.edge(), job.seed);
  }

  row.source = job.fixedSource ? *job.fixedSource
                               : static_cast<NodeId>(RngStream(job.seed)
                                                         .derive(meg::detail::kSourcePick)
                                                         .below(static_cast<std::uint64_t>(model->n())));
  const FloodResult res = floodOnce(*model, row.source, maxSteps);
  row.completed = res.completed();
  row.T = res.completionTime.value_or(-1);
  row.steps = res.stepsSimulated;
  if (initial) row.certGeo = geometricLowerCertificate(*initial, row.source, job.params.R, job.params.r);
  const bool anyDegreeKnown =
      std::any_of(res.maxDegrees.begin(), res.maxDegrees.end(), [](int d) { return d >= 0; });
  row.certDeg = anyDegreeKnown ? (degreeLowerCertificate(res) ? 1 : 0) : -1;
  if (timing)
    row.wallMs = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
  return row;
}

}  // namespace detail

/// Deterministic sweep: one row per (valid grid point, seed, source), rows in
/// grid order regardless of worker scheduling. Per-run seeds hash the point's
/// parameter values with the master seed, so extending the grid never
/// perturbs existing runs.
inline SweepResult runSweep(const ExperimentConfig& cfg) {
  SweepResult result;
  const std::vector<GridPoint> points = expandGrid(cfg);
  std::vector<detail::Job> jobs;
  std::vector<std::int64_t> jobMaxSteps;

  for (const GridPoint& pt : points) {
    if (!pt.valid) {
      result.skipped.push_back(pt.params.canonical() + " skipped: " + pt.reason);
      continue;
    }
    const std::int64_t maxSteps = cfg.maxSteps > 0 ? cfg.maxSteps : autoMaxSteps(pt.params);
    std::vector<std::optional<NodeId>> sources;
    switch (cfg.sourcePolicy) {
      case SourcePolicy::RandomOne:
        sources.push_back(std::nullopt);
        break;
      case SourcePolicy::All:
        for (int u = 0; u < pt.params.n; ++u) sources.emplace_back(u);
        break;
      case SourcePolicy::FixedList:
        for (NodeId u : cfg.sourceList) sources.emplace_back(u);
        break;
    }
    for (int seedIdx = 0; seedIdx < cfg.seeds; ++seedIdx) {
      for (size_t si = 0; si < sources.size(); ++si) {
        jobs.push_back({pt.params, deriveRunSeed(cfg.masterSeed, pt.params, seedIdx, sources[si]), sources[si]});
        jobMaxSteps.push_back(maxSteps);
      }
    }
  }

  result.rows.resize(jobs.size());
  std::atomic<size_t> next{0};
  const unsigned workers = detail::workerCount(jobs.size());
  auto work = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      result.rows[i] = detail::executeJob(jobs[i], jobMaxSteps[i], cfg.timing);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return result;
}

// --- result table I/O -------------------------------------------------------

inline constexpr const char* kCsvHeader = "model,n,R,r,eps,delta,p,q,seed,source,T,completed,cert_geo,cert_deg,steps,wall_ms";

namespace detail {

inline std::string formatDouble(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace detail

inline void writeResultCsv(const SweepResult& result, std::ostream& os) {
  os << kCsvHeader << '\n';
  for (const RunRow& r : result.rows) {
    os << modelName(r.params.model) << ',' << r.params.n << ',' << detail::formatDouble(r.params.R) << ','
       << detail::formatDouble(r.params.r) << ',' << detail::formatDouble(r.params.eps) << ','
       << detail::formatDouble(r.params.delta) << ',' << detail::formatDouble(r.params.p) << ','
       << detail::formatDouble(r.params.q) << ',' << r.seed << ',' << r.source << ',' << r.T << ','
       << (r.completed ? 1 : 0) << ',' << r.certGeo << ',' << r.certDeg << ',' << r.steps << ',' << r.wallMs
       << '\n';
  }
}

inline std::vector<RunRow> readResultCsv(std::istream& in) {
  std::vector<RunRow> rows;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("readResultCsv: empty input");
  if (detail::trim(line) != kCsvHeader) throw std::runtime_error("readResultCsv: unexpected header");
  int lineNo = 1;
  while (std::getline(in, line)) {
    ++lineNo;
    if (detail::trim(line).empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() == 15) cells.push_back("");  // trailing empty wall_ms
    if (cells.size() != 16) throw std::runtime_error("readResultCsv: bad column count at line " + std::to_string(lineNo));
    RunRow r;
    r.params.model = cells[0] == "geometric" ? ModelKind::Geometric : ModelKind::Edge;
    auto num = [&](const std::string& s) { return s.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(s); };
    r.params.n = static_cast<int>(std::stod(cells[1]));
    r.params.R = num(cells[2]);
    r.params.r = num(cells[3]);
    r.params.eps = num(cells[4]);
    r.params.delta = num(cells[5]);
    r.params.p = num(cells[6]);
    r.params.q = num(cells[7]);
    r.seed = std::strtoull(cells[8].c_str(), nullptr, 10);
    r.source = static_cast<NodeId>(std::stol(cells[9]));
    r.T = static_cast<std::int64_t>(std::stoll(cells[10]));
    r.completed = cells[11] == "1";
    r.certGeo = static_cast<std::int64_t>(std::stoll(cells[12]));
    r.certDeg = static_cast<int>(std::stol(cells[13]));
    r.steps = static_cast<std::int64_t>(std::stoll(cells[14]));
    r.wallMs = cells[15].empty() ? 0 : static_cast<std::int64_t>(std::stoll(cells[15]));
    rows.push_back(r);
  }
  return rows;
}

// --- scaling fits ------------------------------------------------------------

struct ScalingFit {
  std::string predictor;
  double coefficient = 0.0;  // T ~ coefficient * predictor^exponent
  double exponent = 0.0;
  double r2 = 0.0;
  std::vector<double> residuals;  // log-space residuals per completed row
};

inline double predictorValue(const RunRow& row, const std::string& predictor) {
  if (predictor == "sqrt_n_over_R") return std::sqrt(static_cast<double>(row.params.n)) / row.params.R;
  if (predictor == "log_n_over_log_np") {
    const double np = static_cast<double>(row.params.n) * row.params.phat();
    return std::log(static_cast<double>(row.params.n)) / std::log(np);
  }
  if (predictor == "n") return static_cast<double>(row.params.n);
  throw std::invalid_argument("unknown predictor '" + predictor + "'");
}

/// Log-log least squares of T against the predictor, over completed runs.
inline ScalingFit fitScaling(std::span<const RunRow> rows, const std::string& predictor) {
  std::vector<double> xs, ys;
  for (const RunRow& row : rows) {
    if (!row.completed || row.T <= 0) continue;
    const double pv = predictorValue(row, predictor);
    if (!(pv > 0.0)) continue;
    xs.push_back(std::log(pv));
    ys.push_back(std::log(static_cast<double>(row.T)));
  }
  std::vector<double> distinct = xs;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 3) throw std::invalid_argument("fitScaling: need >= 3 distinct predictor values");

  // constant response: exponent 0 (linearFit would be fine, but R^2 is 1 by
  // convention here since the fit is exact)
  ScalingFit fit;
  fit.predictor = predictor;
  const bool constantY = std::all_of(ys.begin(), ys.end(), [&](double v) { return v == ys.front(); });
  if (constantY) {
    fit.exponent = 0.0;
    fit.coefficient = std::exp(ys.front());
    fit.r2 = 1.0;
    fit.residuals.assign(ys.size(), 0.0);
    return fit;
  }
  const LinearFit lf = linearFit(xs, ys);
  fit.exponent = lf.slope;
  fit.coefficient = std::exp(lf.intercept);
  fit.r2 = lf.r2;
  fit.residuals.reserve(ys.size());
  for (size_t i = 0; i < ys.size(); ++i) fit.residuals.push_back(ys[i] - (lf.intercept + lf.slope * xs[i]));
  return fit;
}

// --- plot data ----------------------------------------------------------------

namespace detail {

inline double numericColumn(const RunRow& r, const std::string& name) {
  if (name == "n") return r.params.n;
  if (name == "R") return r.params.R;
  if (name == "r") return r.params.r;
  if (name == "eps") return r.params.eps;
  if (name == "delta") return r.params.delta;
  if (name == "p") return r.params.p;
  if (name == "q") return r.params.q;
  if (name == "seed") return static_cast<double>(r.seed);
  if (name == "source") return r.source;
  if (name == "T") return static_cast<double>(r.T);
  if (name == "completed") return r.completed ? 1.0 : 0.0;
  if (name == "cert_geo") return static_cast<double>(r.certGeo);
  if (name == "cert_deg") return r.certDeg;
  if (name == "steps") return static_cast<double>(r.steps);
  if (name == "wall_ms") return static_cast<double>(r.wallMs);
  throw std::invalid_argument("unknown column '" + name + "'");
}

}  // namespace detail

/// Tidy tab-separated plot data: x, median-aggregated y, one column per group
/// key. Rows sorted by (group values, x). T aggregation uses completed runs.
inline void emitPlotData(std::span<const RunRow> rows, const std::string& x, const std::string& y,
                         std::span<const std::string> groupBy, std::ostream& os) {
  os << x << '\t' << y;
  for (const auto& g : groupBy) os << '\t' << g;
  os << '\n';

  // NaN (column not used by the model) maps to -inf: NaN keys would break
  // map ordering
  auto keyValue = [](double v) { return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v; };
  auto cell = [](double v) { return std::isinf(v) && v < 0 ? std::string() : detail::formatDouble(v); };

  std::map<std::vector<double>, std::vector<double>> groups;  // (group..., x) -> y values
  for (const RunRow& row : rows) {
    if (y == "T" && !row.completed) continue;
    std::vector<double> key;
    for (const auto& g : groupBy) key.push_back(keyValue(detail::numericColumn(row, g)));
    key.push_back(keyValue(detail::numericColumn(row, x)));
    groups[key].push_back(detail::numericColumn(row, y));
  }
  for (auto& [key, ys] : groups) {
    os << cell(key.back()) << '\t' << detail::formatDouble(medianOf(std::move(ys)));
    for (size_t i = 0; i + 1 < key.size(); ++i) os << '\t' << cell(key[i]);
    os << '\n';
  }
}

}  // namespace meg
