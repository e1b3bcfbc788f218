// megsim: flooding experiments on stationary Markovian evolving graphs.
// Subcommands: flood (single runs), sweep (config-driven grids), audit
// ((h,k)-expansion checks), fit (scaling-law fits and plot data).

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "meg/audit_json.hpp"
#include "meg/meg.hpp"

namespace {

struct ModelFlags {
  std::string model;
  int n = 0;
  std::string R = "auto";
  std::string r = "auto";
  double eps = 1.0;
  double delta = 1.0;
  double p = 0.0;
  double q = 0.0;
  bool lazy = false;
};

void addModelFlags(CLI::App* cmd, ModelFlags& f, bool required) {
  auto* model = cmd->add_option("--model", f.model, "Model: geometric | edge")->check(CLI::IsMember({"geometric", "edge"}));
  auto* n = cmd->add_option("--n", f.n, "Node count");
  if (required) {
    model->required();
    n->required();
  }
  cmd->add_option("--R", f.R, "Transmission radius, or 'auto' = 3 sqrt(log n / delta)");
  cmd->add_option("--r", f.r, "Move radius, or 'auto' = R/2");
  cmd->add_option("--eps", f.eps, "Lattice resolution (default 1)");
  cmd->add_option("--delta", f.delta, "Node density (default 1)");
  cmd->add_option("--p", f.p, "Edge birth-rate");
  cmd->add_option("--q", f.q, "Edge death-rate");
  cmd->add_flag("--lazy", f.lazy, "Edge model: lazy per-edge oracle (no dense state)");
}

double numberOr(const std::string& value, const char* flag, double autoValue) {
  if (value == "auto") return autoValue;
  try {
    size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(std::string(flag) + " expects a number or 'auto', got '" + value + "'");
  }
}

meg::RunParams resolveParams(const ModelFlags& f) {
  meg::RunParams rp;
  rp.model = f.model == "geometric" ? meg::ModelKind::Geometric : meg::ModelKind::Edge;
  rp.n = f.n;
  rp.lazy = f.lazy;
  if (rp.model == meg::ModelKind::Geometric) {
    rp.eps = f.eps;
    rp.delta = f.delta;
    rp.R = numberOr(f.R, "--R", meg::autoRadius(f.n, f.delta));
    rp.r = numberOr(f.r, "--r", rp.R / 2.0);
    rp.geometric().validate();
  } else {
    rp.p = f.p;
    rp.q = f.q;
    rp.edge().validate();
  }
  return rp;
}

std::string paramBanner(const meg::RunParams& rp) {
  std::ostringstream os;
  os << "model=" << meg::modelName(rp.model) << " n=" << rp.n;
  if (rp.model == meg::ModelKind::Geometric)
    os << " R=" << rp.R << " r=" << rp.r << " eps=" << rp.eps << " delta=" << rp.delta;
  else
    os << " p=" << rp.p << " q=" << rp.q << " phat=" << rp.phat() << (rp.lazy ? " lazy=on" : " lazy=off");
  return os.str();
}

std::ofstream openOutput(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  return out;
}

// ---- flood -----------------------------------------------------------------

struct FloodOpts {
  ModelFlags model;
  std::uint64_t seed = 1;
  int seeds = 1;
  std::string source = "random";
  std::int64_t maxSteps = 0;
  std::string out;
  std::string dumpPositions;
  std::string dumpEdges;
  bool printConfig = false;
  bool verbose = false;
};

int runFlood(const FloodOpts& opt) {
  const meg::RunParams rp = resolveParams(opt.model);
  const std::int64_t maxSteps = opt.maxSteps > 0 ? opt.maxSteps : meg::autoMaxSteps(rp);
  std::cout << "# megsim flood " << paramBanner(rp) << " master_seed=" << opt.seed << " seeds=" << opt.seeds
            << " source=" << opt.source << " max_steps=" << maxSteps << '\n';
  if (opt.printConfig) {
    std::cout << "[experiment]\nmodel = " << meg::modelName(rp.model) << "\nmaster_seed = " << opt.seed
              << "\nseeds = " << opt.seeds << "\nsource = " << opt.source << "\nmax_steps = " << maxSteps
              << "\nlazy = " << (rp.lazy ? "on" : "off") << "\n[grid]\nn = " << rp.n << '\n';
    if (rp.model == meg::ModelKind::Geometric)
      std::cout << "R = " << rp.R << "\nr = " << rp.r << "\neps = " << rp.eps << "\ndelta = " << rp.delta << '\n';
    else
      std::cout << "p = " << rp.p << "\nq = " << rp.q << '\n';
  }
  if (!opt.dumpPositions.empty() && rp.model != meg::ModelKind::Geometric)
    throw std::runtime_error("--dump-positions requires the geometric model");
  if (!opt.dumpEdges.empty() && (rp.model != meg::ModelKind::Edge || rp.lazy))
    throw std::runtime_error("--dump-edges requires the dense edge model");
  if ((!opt.dumpPositions.empty() || !opt.dumpEdges.empty()) && (opt.seeds != 1 || opt.source == "all"))
    throw std::runtime_error("trace dumps cover one run: use --seeds 1 and a single source");

  std::vector<std::optional<meg::NodeId>> sources;
  if (opt.source == "random") {
    sources.push_back(std::nullopt);
  } else if (opt.source == "all") {
    for (int u = 0; u < rp.n; ++u) sources.emplace_back(u);
  } else {
    long id = -1;
    try {
      size_t used = 0;
      id = std::stol(opt.source, &used);
      if (used != opt.source.size()) throw std::invalid_argument(opt.source);
    } catch (const std::exception&) {
      throw std::runtime_error("--source expects random | all | node id, got '" + opt.source + "'");
    }
    if (id < 0 || id >= rp.n) throw std::runtime_error("--source node id out of range");
    sources.emplace_back(static_cast<meg::NodeId>(id));
  }

  meg::SweepResult table;
  std::vector<std::int64_t> completedTimes;
  bool anyIncomplete = false;
  for (int seedIdx = 0; seedIdx < opt.seeds; ++seedIdx) {
    for (const auto& src : sources) {
      const std::uint64_t runSeed = meg::deriveRunSeed(opt.seed, rp, seedIdx, src);
      meg::RunRow row;
      row.params = rp;
      row.seed = runSeed;

      std::unique_ptr<meg::EvolvingGraph> model;
      std::optional<meg::GeometricState> initial;
      meg::DenseEdgeModel* denseEdge = nullptr;
      std::ofstream posDump;
      if (rp.model == meg::ModelKind::Geometric) {
        auto geo = std::make_unique<meg::GeometricModel>(rp.geometric(), runSeed);
        initial = geo->state();
        if (!opt.dumpPositions.empty()) {
          posDump = openOutput(opt.dumpPositions);
          meg::writePositions(geo->state(), posDump);
        }
        model = std::move(geo);
      } else if (rp.lazy) {
        model = std::make_unique<meg::LazyEdgeModel>(rp.edge(), runSeed);
      } else {
        auto dense = std::make_unique<meg::DenseEdgeModel>(rp.edge(), runSeed, !opt.dumpEdges.empty());
        denseEdge = dense.get();
        model = std::move(dense);
      }
      row.source = src ? *src
                       : static_cast<meg::NodeId>(meg::RngStream(runSeed)
                                                      .derive(meg::detail::kSourcePick)
                                                      .below(static_cast<std::uint64_t>(rp.n)));

      std::function<void(meg::EvolvingGraph&)> onStep;
      if (posDump.is_open())
        onStep = [&](meg::EvolvingGraph& m) { meg::writePositions(static_cast<meg::GeometricModel&>(m).state(), posDump); };

      const meg::FloodResult res = meg::floodOnce(*model, row.source, maxSteps, onStep);
      row.completed = res.completed();
      row.T = res.completionTime.value_or(-1);
      row.steps = res.stepsSimulated;
      if (initial) row.certGeo = meg::geometricLowerCertificate(*initial, row.source, rp.R, rp.r);
      const bool anyDeg = std::any_of(res.maxDegrees.begin(), res.maxDegrees.end(), [](int d) { return d >= 0; });
      row.certDeg = anyDeg ? (meg::degreeLowerCertificate(res) ? 1 : 0) : -1;
      table.rows.push_back(row);

      std::cout << "run seed=" << runSeed << " source=" << row.source << " T=";
      if (row.completed) {
        std::cout << row.T;
        completedTimes.push_back(row.T);
      } else {
        std::cout << "inf";
        anyIncomplete = true;
      }
      std::cout << " cert_geo=" << row.certGeo << " cert_deg=" << row.certDeg << " steps=" << row.steps << '\n';
      if (opt.verbose || (opt.seeds == 1 && sources.size() == 1)) {
        std::cout << "trajectory:";
        for (std::int64_t m : res.trajectory) std::cout << ' ' << m;
        std::cout << '\n';
      }
      if (denseEdge && !opt.dumpEdges.empty()) {
        auto edgeDump = openOutput(opt.dumpEdges);
        meg::writeEdgeTrace(denseEdge->trace(), edgeDump);
      }
    }
  }
  if (table.rows.size() > 1) {
    std::vector<double> ts(completedTimes.begin(), completedTimes.end());
    std::cout << "summary runs=" << table.rows.size() << " completed=" << completedTimes.size();
    if (!ts.empty()) {
      std::cout << " maxT=" << *std::max_element(completedTimes.begin(), completedTimes.end())
                << " medianT=" << meg::medianOf(ts);
    }
    std::cout << (anyIncomplete ? " (some runs hit max_steps)" : "") << '\n';
  }
  if (!opt.out.empty()) {
    auto csv = openOutput(opt.out);
    meg::writeResultCsv(table, csv);
  }
  return 0;
}

// ---- sweep -----------------------------------------------------------------

struct SweepOpts {
  std::string config;
  std::string out;
  std::uint64_t masterSeed = 0;
  int seeds = 0;
  std::int64_t maxSteps = -1;
  bool masterSeedSet = false, seedsSet = false, maxStepsSet = false;
  bool printConfig = false;
};

void printResolvedConfig(const meg::ExperimentConfig& cfg, const std::string& out) {
  auto axis = [](const meg::GridAxis& a) {
    if (a.isAuto) return std::string("auto");
    std::ostringstream os;
    for (size_t i = 0; i < a.values.size(); ++i) os << (i ? ", " : "") << a.values[i];
    return os.str();
  };
  std::cout << "[experiment]\nmodel = " << meg::modelName(cfg.model) << "\nmaster_seed = " << cfg.masterSeed
            << "\nseeds = " << cfg.seeds << "\nmax_steps = " << cfg.maxSteps
            << "\ntiming = " << (cfg.timing ? "on" : "off") << "\nlazy = " << (cfg.lazy ? "on" : "off")
            << "\nout = " << out << "\n[grid]\nn = " << axis(cfg.n) << '\n';
  if (cfg.model == meg::ModelKind::Geometric) {
    std::cout << "R = " << axis(cfg.R) << "\nr = " << axis(cfg.r) << "\neps = " << axis(cfg.eps)
              << "\ndelta = " << axis(cfg.delta) << '\n';
  } else {
    std::cout << "p = " << axis(cfg.p) << "\nq = " << axis(cfg.q) << '\n';
  }
}

int runSweepCmd(const SweepOpts& opt) {
  std::ifstream in(opt.config);
  if (!in) {
    std::cerr << "megsim sweep: cannot open config file: " << opt.config << '\n';
    return 1;
  }
  meg::ExperimentConfig cfg;
  try {
    cfg = meg::parseConfig(in);
  } catch (const meg::ConfigError& e) {
    std::cerr << "megsim sweep: " << e.what() << '\n';
    return 1;
  }
  // inline flags override config file values
  if (opt.masterSeedSet) cfg.masterSeed = opt.masterSeed;
  if (opt.seedsSet) cfg.seeds = opt.seeds;
  if (opt.maxStepsSet) cfg.maxSteps = opt.maxSteps;
  const std::string out = !opt.out.empty() ? opt.out : (!cfg.out.empty() ? cfg.out : "sweep.csv");
  if (opt.printConfig) printResolvedConfig(cfg, out);

  const meg::SweepResult result = meg::runSweep(cfg);
  for (const std::string& msg : result.skipped) std::cerr << "megsim sweep: " << msg << '\n';
  auto csv = openOutput(out);
  meg::writeResultCsv(result, csv);
  std::cout << "# megsim sweep rows=" << result.rows.size() << " skipped_points=" << result.skipped.size()
            << " out=" << out << '\n';
  return result.skipped.empty() ? 0 : 2;
}

// ---- audit -----------------------------------------------------------------

struct AuditOpts {
  ModelFlags model;
  std::uint64_t seed = 1;
  std::string edgesFile;
  double h = 0.0;
  double k = -1.0;
  std::string schedule;
  bool exact = false;
  std::uint64_t sampled = 0;
  double alpha = 0.05;
  double beta = 0.05;
  double c = 20.0;
  std::uint64_t budget = 10'000'000;
  std::string out;
};

meg::Snapshot loadEdgeList(const std::string& path, int nOverride) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list: " + path);
  std::vector<std::pair<meg::NodeId, meg::NodeId>> edges;
  int maxNode = -1;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    int u, v;
    if (ss >> u >> v) {
      edges.emplace_back(u, v);
      maxNode = std::max({maxNode, u, v});
    }
  }
  const int n = nOverride > 0 ? nOverride : maxNode + 1;
  return meg::Snapshot::fromEdges(n, std::move(edges));
}

int runAudit(const AuditOpts& opt) {
  meg::Snapshot snapshot;
  std::vector<std::pair<double, double>> positions;
  std::optional<meg::RunParams> rp;
  if (!opt.edgesFile.empty()) {
    snapshot = loadEdgeList(opt.edgesFile, opt.model.n);
    if (!opt.model.model.empty()) rp = resolveParams(opt.model);
  } else {
    rp = resolveParams(opt.model);
    if (rp->model == meg::ModelKind::Geometric) {
      meg::GeometricModel model(rp->geometric(), opt.seed);
      snapshot = model.currentSnapshot();
      for (const auto& x : model.state().positions)
        positions.emplace_back(x.i * rp->eps, x.j * rp->eps);
    } else {
      snapshot = meg::sampleStationaryEdges(rp->edge(), opt.seed);
    }
  }

  const bool exact = opt.exact || opt.sampled == 0;
  const std::uint64_t samples = opt.sampled == 0 ? 1000 : opt.sampled;
  const meg::RngStream rng(opt.seed);
  meg::ExpansionReport report;
  report.mode = exact ? "exact" : "sampled";

  if (!opt.schedule.empty()) {
    if (opt.schedule != "paper") throw std::runtime_error("unknown schedule '" + opt.schedule + "' (expected: paper)");
    if (!rp) throw std::runtime_error("--schedule paper needs model parameters");
    meg::ExpansionSchedule sched;
    if (rp->model == meg::ModelKind::Geometric) {
      sched = meg::geometricSchedule(snapshot.n(), rp->R, opt.alpha, opt.beta);
    } else {
      sched = meg::edgeSchedule(snapshot.n(), rp->phat(), opt.c);
      if (!meg::edgeScheduleValidityOk(snapshot.n(), rp->phat(), opt.c))
        std::cerr << "megsim audit: warning: phat below validity threshold c log n / n (c=" << opt.c << ")\n";
    }
    report = meg::auditSchedule(snapshot, sched, exact, samples, rng, positions, opt.budget);
  } else {
    if (opt.h < 1 || opt.k < 0) throw std::runtime_error("audit needs --h and --k, or --schedule paper");
    report.items.push_back(meg::auditPoint(snapshot, opt.h, opt.k, exact, samples, rng, positions, opt.budget));
  }

  const nlohmann::json j = meg::toJson(report);
  if (opt.out.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    auto os = openOutput(opt.out);
    os << j.dump(2) << '\n';
  }
  return 0;  // an audit verdict of "fail" is data, not an error
}

// ---- fit -------------------------------------------------------------------

struct FitOpts {
  std::string in;
  std::string predictor;
  std::string plotX, plotY, plotOut;
  std::vector<std::string> plotGroup;
};

int runFit(const FitOpts& opt) {
  std::ifstream in(opt.in);
  if (!in) {
    std::cerr << "megsim fit: cannot open " << opt.in << '\n';
    return 1;
  }
  const std::vector<meg::RunRow> rows = meg::readResultCsv(in);
  if (!opt.predictor.empty()) {
    const meg::ScalingFit fit = meg::fitScaling(rows, opt.predictor);
    std::cout << "fit predictor=" << fit.predictor << " exponent=" << fit.exponent
              << " coefficient=" << fit.coefficient << " r2=" << fit.r2 << " points=" << fit.residuals.size()
              << '\n';
  }
  if (!opt.plotOut.empty()) {
    if (opt.plotX.empty() || opt.plotY.empty()) throw std::runtime_error("--plot-out needs --plot-x and --plot-y");
    auto os = openOutput(opt.plotOut);
    meg::emitPlotData(rows, opt.plotX, opt.plotY, opt.plotGroup, os);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"megsim: flooding on stationary Markovian evolving graphs"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "Print help");

  FloodOpts flood;
  auto* floodCmd = app.add_subcommand("flood", "Run the flooding process and report T with certificates");
  addModelFlags(floodCmd, flood.model, true);
  floodCmd->add_option("--seed", flood.seed, "Master seed");
  floodCmd->add_option("--seeds", flood.seeds, "Number of independent runs")->check(CLI::PositiveNumber);
  floodCmd->add_option("--source", flood.source, "Source: random | all | node id");
  floodCmd->add_option("--max-steps", flood.maxSteps, "Step budget (0 = auto from expansion bound)");
  floodCmd->add_option("--out", flood.out, "Write run rows as CSV");
  floodCmd->add_option("--dump-positions", flood.dumpPositions, "Write 't u i j' position trace (geometric)");
  floodCmd->add_option("--dump-edges", flood.dumpEdges, "Write 't u v b' edge trace (dense edge)");
  floodCmd->add_flag("--print-config", flood.printConfig, "Echo the resolved configuration");
  floodCmd->add_flag("-v,--verbose", flood.verbose, "Print trajectories for every run");

  SweepOpts sweep;
  auto* sweepCmd = app.add_subcommand("sweep", "Run a config-driven parameter sweep");
  sweepCmd->add_option("--config", sweep.config, "Experiment config file")->required();
  sweepCmd->add_option("--out", sweep.out, "Result CSV path (overrides config; default sweep.csv)");
  sweepCmd->add_option("--seed", sweep.masterSeed, "Override the config master_seed")
      ->each([&](const std::string&) { sweep.masterSeedSet = true; });
  sweepCmd->add_option("--seeds", sweep.seeds, "Override the config seeds count")
      ->each([&](const std::string&) { sweep.seedsSet = true; });
  sweepCmd->add_option("--max-steps", sweep.maxSteps, "Override the config max_steps")
      ->each([&](const std::string&) { sweep.maxStepsSet = true; });
  sweepCmd->add_flag("--print-config", sweep.printConfig, "Echo the resolved configuration");

  AuditOpts audit;
  auto* auditCmd = app.add_subcommand("audit", "Audit (h,k)-expansion of a stationary snapshot");
  auditCmd->set_help_flag("--help", "Print help");
  addModelFlags(auditCmd, audit.model, false);
  auditCmd->add_option("--seed", audit.seed, "Snapshot seed");
  auditCmd->add_option("--edges", audit.edgesFile, "Load snapshot from 'u v' edge list instead of sampling");
  auditCmd->add_option("--h", audit.h, "Set-size bound h");
  auditCmd->add_option("--k", audit.k, "Required expansion k");
  auditCmd->add_option("--schedule", audit.schedule, "Audit a named schedule: paper");
  auditCmd->add_flag("--exact", audit.exact, "Exhaustive subset enumeration");
  auditCmd->add_option("--sampled", audit.sampled, "Sampled mode with this many proposals");
  auditCmd->add_option("--alpha", audit.alpha, "Geometric schedule constant alpha");
  auditCmd->add_option("--beta", audit.beta, "Geometric schedule constant beta");
  auditCmd->add_option("--c", audit.c, "Edge schedule constant c");
  auditCmd->add_option("--budget", audit.budget, "Exact-mode subset budget");
  auditCmd->add_option("--out", audit.out, "Write the JSON report here instead of stdout");

  FitOpts fit;
  auto* fitCmd = app.add_subcommand("fit", "Fit scaling laws over a sweep CSV / emit plot data");
  fitCmd->add_option("--in", fit.in, "Sweep result CSV")->required();
  fitCmd->add_option("--predictor", fit.predictor, "sqrt_n_over_R | log_n_over_log_np | n");
  fitCmd->add_option("--plot-x", fit.plotX, "Plot data x column");
  fitCmd->add_option("--plot-y", fit.plotY, "Plot data y column (median-aggregated)");
  fitCmd->add_option("--plot-group", fit.plotGroup, "Plot data group columns");
  fitCmd->add_option("--plot-out", fit.plotOut, "Plot data output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp" || e.get_name() == "CallForVersion")
      return app.exit(e);
    std::cerr << "megsim: " << e.what() << '\n';
    return 1;
  }

  try {
    if (floodCmd->parsed()) return runFlood(flood);
    if (sweepCmd->parsed()) return runSweepCmd(sweep);
    if (auditCmd->parsed()) return runAudit(audit);
    if (fitCmd->parsed()) return runFit(fit);
  } catch (const meg::BudgetExceeded& e) {
    std::cerr << "megsim: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "megsim: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
