#include "ctsa/cli/cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>

#include "ctsa/cts/dm.hpp"
#include "ctsa/cts/pipeline.hpp"
#include "ctsa/grid/case_io.hpp"
#include "ctsa/grid/scenario.hpp"
#include "ctsa/report/report_json.hpp"
#include "ctsa/service/http_server.hpp"

namespace ctsa::cli {

namespace {

// Raised for anything the user can fix: bad flags, unreadable or invalid files.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StudyFlags {
  std::string method = "cbce";
  int k = kDefaultCandidateCount;
  int top = kDefaultTopN;
  double vtol = kDefaultVoltThreshold;
  double ftol = kDefaultFlowThreshold;
  double volt_weight = kDefaultVoltWeight;
  int workers = 1;
};

void add_threshold_flags(CLI::App* cmd, StudyFlags& f) {
  cmd->add_option("--vtol", f.vtol, "Aggregate voltage-violation threshold for criticality (pu)")
      ->capture_default_str();
  cmd->add_option("--ftol", f.ftol, "Aggregate overload threshold for criticality (MVA)")->capture_default_str();
  cmd->add_option("--volt-weight", f.volt_weight, "MVA per pu of voltage violation in the scalarized total")
      ->capture_default_str();
}

void add_study_flags(CLI::App* cmd, StudyFlags& f) {
  cmd->add_option("--method", f.method, "Candidate generator: ce, cbce, cbve, dm1, dm2 or dm3")
      ->capture_default_str()
      ->check(CLI::IsMember({"ce", "cbce", "cbve", "dm1", "dm2", "dm3"}));
  cmd->add_option("--k", f.k, "Candidate list length for cbce / cbve")->capture_default_str();
  cmd->add_option("--top", f.top, "Switching actions kept per contingency")->capture_default_str();
  add_threshold_flags(cmd, f);
}

CtsOptions options_from(const StudyFlags& f) {
  CtsOptions o;
  o.method = *parse_method(f.method);
  o.k = f.k;
  o.top_n = f.top;
  o.screening.v_threshold = f.vtol;
  o.screening.f_threshold = f.ftol;
  o.evaluation.volt_weight = f.volt_weight;
  o.workers = f.workers;
  return o;
}

template <class F>
auto input(F&& load) -> decltype(load()) {
  try {
    return load();
  } catch (const CaseParseError& e) {
    throw InputError(std::string(e.what()));
  } catch (const NetworkError& e) {
    throw InputError(e.what());
  } catch (const ContingencyError& e) {
    throw InputError(e.what());
  } catch (const CtsError& e) {
    throw InputError(e.what());
  } catch (const std::ios_base::failure& e) {
    throw InputError(e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

Network read_case(const std::string& path) {
  try {
    return load_case_file(path);
  } catch (const std::exception& e) {
    throw InputError(e.what());  // unreadable file or invalid case data
  }
}

std::vector<Contingency> read_contingencies(const std::string& path, const Network& net) {
  if (path.empty()) return enumerate_contingencies(net);
  return input([&] { return load_contingency_file(path, net); });
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path);
  f << text;
  if (!f) throw InputError("failed writing " + path);
}

std::string fixed(double x, int digits) {
  if (!std::isfinite(x)) return "-";
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << x;
  return s.str();
}

void print_summary(std::ostream& out, const CtsReport& r, std::size_t assessed) {
  const auto& o = r.options;
  out << "base case: converged, losses " << fixed(r.base_losses_mw, 2) << " MW\n";
  out << "contingencies: " << assessed << " assessed, " << r.critical.size() << " critical (vtol "
      << o.screening.v_threshold << " pu, ftol " << o.screening.f_threshold << " MVA)\n";
  out << "method " << to_string(o.method) << " (k=" << o.k << ", top=" << o.top_n << ")\n\n";
  out << std::left << std::setw(12) << "contingency" << std::setw(12) << "status" << std::right
      << std::setw(11) << "dflow_mva" << std::setw(10) << "dvolt_pu" << std::setw(8) << "best"
      << std::setw(12) << "reduction%" << std::setw(8) << "pareto" << std::setw(7) << "depth" << "\n";
  for (const auto& c : r.critical) {
    const auto& s = c.screening;
    out << std::left << std::setw(12) << s.contingency.id << std::setw(12) << to_string(s.status) << std::right
        << std::setw(11) << fixed(s.report.agg_flow, 2) << std::setw(10) << fixed(s.report.agg_volt, 4);
    if (c.top.empty()) {
      out << std::setw(8) << "-" << std::setw(12) << (c.attempted ? "no CTS" : "n/a") << std::setw(8) << "-"
          << std::setw(7) << "-";
    } else {
      const auto& b = c.top.front();
      out << std::setw(8) << b.candidate.branch.value << std::setw(12) << fixed(b.reduction_pct, 2)
          << std::setw(8) << (b.pareto ? "yes" : "no") << std::setw(7) << b.candidate.source_rank + 1;
    }
    out << "\n";
  }
  const auto& m = r.metrics;
  out << "\nP_CTS = " << (m.p_cts_pct ? fixed(*m.p_cts_pct, 2) + " %" : std::string("n/a"))
      << "   D_CTS = " << (m.d_cts ? fixed(*m.d_cts, 2) : std::string("n/a")) << "   (N_c = " << m.n_c
      << ", M_c = " << m.m_c << ")\n";
  out << "wall time " << fixed(r.timing.tn_s, 3) << " s with " << r.timing.n << " worker(s)\n";
}

std::optional<DmModel> read_dm_model(const std::string& path, Method method) {
  if (!is_dm(method)) return std::nullopt;
  if (path.empty()) throw InputError(std::string("method ") + to_string(method) + " requires --dm-model");
  return input([&] { return load_dm_model(path); });
}

// ---------------------------------------------------------------- scan

struct ScanFlags {
  StudyFlags study;
  std::string case_path, contingencies, out, dm_model;
  bool no_timing = false;
};

int cmd_scan(const ScanFlags& f, std::ostream& out, std::ostream& err) {
  CtsOptions opts = options_from(f.study);
  Network net = read_case(f.case_path);
  auto list = read_contingencies(f.contingencies, net);
  auto model = read_dm_model(f.dm_model, opts.method);
  if (model) opts.dm_model = &*model;
  input([&] { validate(opts); return 0; });

  BaseCase base;
  try {
    base = solve_base_case(std::move(net), opts.screening.power_flow);
  } catch (const BaseCaseDiverged& e) {
    err << "error: " << e.what() << "\n";
    if (!f.out.empty()) {
      CtsReport failed;
      failed.base_converged = false;
      failed.base_losses_mw = std::numeric_limits<double>::quiet_NaN();
      failed.options = opts;
      failed.options.dm_model = nullptr;
      auto doc = report_to_json(failed, false);
      doc["base"]["losses_mw"] = nullptr;
      const auto text = doc.dump(2) + "\n";
      if (f.out == "-") {
        out << text;
      } else {
        write_text(f.out, text);
      }
    }
    return kExitBaseDiverged;
  }

  const auto report = run_scan(base, list, opts);
  const auto text = report_string(report, !f.no_timing);
  if (f.out == "-") {
    out << text;
    return kExitOk;
  }
  if (!f.out.empty()) write_text(f.out, text);
  print_summary(out, report, list.size());
  if (!f.out.empty()) out << "report written to " << f.out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- dm-train

struct TrainFlags {
  StudyFlags study;
  std::vector<std::string> cases;
  std::string contingencies, out, out_dir;
  std::vector<double> load_scales{1.0};
  std::string method = "dm1";
  bool all_levels = false;
};

std::string scale_label(double s) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(3) << s;
  return o.str();
}

int cmd_dm_train(const TrainFlags& f, std::ostream& out, std::ostream& err) {
  CtsOptions opts = options_from(f.study);
  opts.method = Method::ce;
  input([&] { validate(opts); return 0; });
  if (f.all_levels && f.out_dir.empty()) throw InputError("--all-levels needs --out-dir");
  if (!f.all_levels && !f.out_dir.empty()) throw InputError("--out-dir is only used with --all-levels");

  std::vector<DmScenario> scenarios;
  for (const auto& path : f.cases) {
    const Network net = read_case(path);
    const auto list = f.contingencies.empty() ? std::vector<Contingency>{} : read_contingencies(f.contingencies, net);
    for (double scale : f.load_scales) {
      Network scaled = net;
      input([&] { scale_demand(scaled, scale); return 0; });
      scenarios.push_back({std::filesystem::path(path).filename().string() + "@" + scale_label(scale),
                           std::move(scaled), list});
    }
  }
  DmHarvest harvest;
  try {
    harvest = dm_harvest(scenarios, opts);
  } catch (const BaseCaseDiverged& e) {
    err << "error: " << e.what() << "\n";
    return kExitBaseDiverged;
  }

  std::vector<Method> levels = {*parse_method(f.method)};
  if (f.all_levels) levels = {Method::dm1, Method::dm2, Method::dm3};
  for (Method m : levels) {
    const auto model = dm_model_from(harvest, dm_threshold_pct(m));
    if (model.branches.empty()) {
      err << "warning: " << to_string(m) << " model is empty: no branch reduced violations by more than "
          << dm_threshold_pct(m) << "%\n";
    }
    const auto text = dm_model_json(model);
    std::string target = f.out;
    if (f.all_levels) {
      std::filesystem::create_directories(f.out_dir);
      target = (std::filesystem::path(f.out_dir) / (std::string(to_string(m)) + ".json")).string();
    }
    if (target.empty() || target == "-") {
      out << text;
    } else {
      write_text(target, text);
      out << to_string(m) << ": " << model.branches.size() << " branches -> " << target << "\n";
    }
  }
  if (!f.out.empty() || f.all_levels) {
    out << "trained on " << harvest.meta.scenarios.size() << " scenario(s), "
        << harvest.meta.critical_contingencies << " critical contingencies, " << harvest.meta.evaluations
        << " evaluations\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------- bench

struct BenchFlags {
  StudyFlags study;
  std::string case_path, contingencies, dm_model, out;
  std::vector<int> workers{1, 2, 4};
  int repeat = 1;
};

int cmd_bench(const BenchFlags& f, std::ostream& out, std::ostream& err) {
  CtsOptions opts = options_from(f.study);
  Network net = read_case(f.case_path);
  auto list = read_contingencies(f.contingencies, net);
  auto model = read_dm_model(f.dm_model, opts.method);
  if (model) opts.dm_model = &*model;
  if (f.repeat < 1) throw InputError("--repeat must be >= 1");
  std::vector<int> counts = f.workers;
  for (int n : counts) {
    if (n < 1) throw InputError("worker counts must be >= 1");
  }
  if (std::find(counts.begin(), counts.end(), 1) == counts.end()) counts.insert(counts.begin(), 1);
  std::sort(counts.begin(), counts.end());
  counts.erase(std::unique(counts.begin(), counts.end()), counts.end());
  input([&] { validate(opts); return 0; });

  BaseCase base;
  try {
    base = solve_base_case(std::move(net), opts.screening.power_flow);
  } catch (const BaseCaseDiverged& e) {
    err << "error: " << e.what() << "\n";
    return kExitBaseDiverged;
  }

  std::string reference;
  double t1 = 0.0;
  std::size_t tasks = 0;
  bool all_identical = true;
  Json runs = Json::array();
  out << "case " << f.case_path << ", method " << to_string(opts.method) << ", " << list.size()
      << " contingencies, hardware threads " << hardware_workers() << "\n";
  out << std::setw(8) << "workers" << std::setw(12) << "time_s" << std::setw(10) << "speedup" << std::setw(12)
      << "efficiency" << std::setw(11) << "identical" << "\n";
  for (int n : counts) {
    opts.workers = n;
    double best = std::numeric_limits<double>::infinity();
    bool identical = true;
    for (int r = 0; r < f.repeat; ++r) {
      const auto report = run_scan(base, list, opts);
      best = std::min(best, report.timing.tn_s);
      tasks = report.timing.task_count;
      const auto text = report_string(report, false);
      if (reference.empty()) reference = text;
      identical = identical && text == reference;
    }
    if (n == 1) t1 = best;
    const double eta = parallel_efficiency({n, t1, best, tasks});
    all_identical = all_identical && identical;
    out << std::setw(8) << n << std::setw(12) << fixed(best, 4) << std::setw(10) << fixed(t1 / best, 2)
        << std::setw(12) << fixed(eta, 3) << std::setw(11) << (identical ? "yes" : "NO") << "\n";
    runs.push_back(Json{{"n", n}, {"tn_s", best}, {"speedup", t1 / best}, {"efficiency", eta},
                        {"identical", identical}});
  }
  if (!f.out.empty()) {
    Json doc{{"case", f.case_path},
             {"method", to_string(opts.method)},
             {"contingencies", list.size()},
             {"tasks", tasks},
             {"hardware_threads", hardware_workers()},
             {"repeat", f.repeat},
             {"t1_s", t1},
             {"runs", std::move(runs)},
             {"reports_identical", all_identical}};
    write_text(f.out, doc.dump(2) + "\n");
  }
  if (!all_identical) {
    err << "error: reports differ between worker counts\n";
    return kExitFailure;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- serve

struct ServeFlags {
  StudyFlags study;
  std::string case_path, contingencies, host = "127.0.0.1", static_dir;
  std::vector<std::string> dm_models;
  int port = 8080;
  double async_after_s = 5.0;
};

std::atomic<service::HttpServer*> g_server{nullptr};

extern "C" void stop_on_signal(int) {
  if (auto* s = g_server.load()) s->stop();
}

int cmd_serve(const ServeFlags& f, std::ostream& out, std::ostream& err) {
  service::ServiceConfig cfg;
  cfg.case_path = f.case_path;
  cfg.contingencies_path = f.contingencies;
  cfg.defaults = options_from(f.study);
  if (!(f.async_after_s >= 0.0)) throw InputError("--async-after must be >= 0");
  cfg.async_after = std::chrono::milliseconds(static_cast<long long>(f.async_after_s * 1000.0));
  for (const auto& path : f.dm_models) {
    auto model = input([&] { return load_dm_model(path); });
    std::optional<Method> level;
    for (Method m : {Method::dm1, Method::dm2, Method::dm3}) {
      if (dm_threshold_pct(m) == model.threshold_pct) level = m;
    }
    if (!level) throw InputError(path + ": threshold " + std::to_string(model.threshold_pct) + "% is not 0, 5 or 10");
    cfg.dm_models[*level] = std::move(model);
  }
  if (!f.case_path.empty()) read_case(f.case_path);  // report a bad case up front, with exit code 3
  service::Session session(std::move(cfg));
  service::HttpServer server(session, f.static_dir);
  const int port = server.bind(f.host, f.port);
  if (port < 0) {
    err << "error: cannot bind " << f.host << ":" << f.port << "\n";
    return kExitInputError;
  }
  out << "listening on http://" << f.host << ":" << port << std::endl;
  g_server = &server;
  std::signal(SIGINT, stop_on_signal);
  std::signal(SIGTERM, stop_on_signal);
  const bool ok = server.listen();
  g_server = nullptr;
  return ok ? kExitOk : kExitFailure;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Real-time contingency analysis with corrective transmission switching", "ctsa"};
  app.require_subcommand(1);

  ScanFlags scan;
  auto* s = app.add_subcommand("scan", "Screen N-1 contingencies and rank corrective switching actions");
  s->add_option("--case", scan.case_path, "MATPOWER case file")->required();
  s->add_option("--contingencies", scan.contingencies, "Contingency list (JSON); default: every N-1 event");
  add_study_flags(s, scan.study);
  s->add_option("--workers", scan.study.workers, "Worker threads")->capture_default_str();
  s->add_option("--dm-model", scan.dm_model, "DM model file (required for dm1/dm2/dm3)");
  s->add_option("--out", scan.out, "Write the JSON report here ('-' for stdout)");
  s->add_flag("--no-timing", scan.no_timing, "Omit the timing block from the report");

  TrainFlags train;
  auto* t = app.add_subcommand("dm-train", "Build data-mining candidate lists from complete enumeration");
  t->add_option("--case", train.cases, "Training case file(s)")->required();
  t->add_option("--contingencies", train.contingencies, "Contingency list applied to every case");
  t->add_option("--load-scales", train.load_scales, "Demand multipliers; one scenario per case and scale")
      ->delimiter(',')
      ->capture_default_str();
  t->add_option("--method", train.method, "Model to build: dm1 (>0%), dm2 (>5%) or dm3 (>10%)")
      ->capture_default_str()
      ->check(CLI::IsMember({"dm1", "dm2", "dm3"}));
  t->add_flag("--all-levels", train.all_levels, "Build dm1, dm2 and dm3 from one harvest");
  t->add_option("--out", train.out, "Model file (default: stdout)");
  t->add_option("--out-dir", train.out_dir, "Directory for dm1.json, dm2.json and dm3.json (--all-levels)");
  add_threshold_flags(t, train.study);
  t->add_option("--workers", train.study.workers, "Worker threads")->capture_default_str();

  BenchFlags bench;
  auto* b = app.add_subcommand("bench", "Time a scan at several worker counts and check identical reports");
  b->add_option("--case", bench.case_path, "MATPOWER case file")->required();
  b->add_option("--contingencies", bench.contingencies, "Contingency list (JSON)");
  add_study_flags(b, bench.study);
  b->add_option("--workers", bench.workers, "Worker counts, e.g. 1,2,4")->delimiter(',')->capture_default_str();
  b->add_option("--repeat", bench.repeat, "Runs per worker count (best time is kept)")->capture_default_str();
  b->add_option("--dm-model", bench.dm_model, "DM model file (required for dm1/dm2/dm3)");
  b->add_option("--out", bench.out, "Write the timing table as JSON");

  ServeFlags serve;
  auto* v = app.add_subcommand("serve", "Serve the HTTP API and static files");
  v->add_option("--case", serve.case_path, "Case to load at start-up (optional; see POST /api/reload)");
  v->add_option("--contingencies", serve.contingencies, "Contingency list (JSON)");
  v->add_option("--host", serve.host, "Bind address")->capture_default_str();
  v->add_option("--port", serve.port, "Port (0 picks a free one)")->capture_default_str()->check(CLI::Range(0, 65535));
  v->add_option("--static-dir", serve.static_dir, "Directory served at /");
  v->add_option("--dm-model", serve.dm_models, "DM model file(s); the threshold selects dm1/dm2/dm3");
  v->add_option("--async-after", serve.async_after_s, "Seconds before a request is answered with 202 + token")
      ->capture_default_str();
  add_study_flags(v, serve.study);
  v->add_option("--workers", serve.study.workers, "Worker threads")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (s->parsed()) return cmd_scan(scan, out, err);
    if (t->parsed()) return cmd_dm_train(train, out, err);
    if (b->parsed()) return cmd_bench(bench, out, err);
    if (v->parsed()) return cmd_serve(serve, out, err);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitInputError;
}

}  // namespace ctsa::cli
