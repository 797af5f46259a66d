#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "memkit/error.hpp"
#include "memkit/index.hpp"
#include "memkit/report.hpp"
#include "memkit/sim.hpp"

namespace memkit::cli {

namespace {

struct Options {
  std::string command;
  std::vector<std::string> netlists;
  std::string point_file;
  bool oracle = false;
  double rank_tol = kDefaultRankTol;
  double tstop = 1.0;
  double dt = 1e-3;
  double newton_tol = 1e-10;
  std::string out_path;
  std::string format = "human";
  int jobs = 1;
};

struct Outcome {
  int code = kOk;
  std::string out;
  std::string err;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string trace_path(const Options& o, const std::string& netlist) {
  if (o.netlists.size() == 1) return o.out_path;
  return (std::filesystem::path(o.out_path) / std::filesystem::path(netlist).stem()).string() + ".csv";
}

Outcome run_one(const Options& o, const std::string& path) {
  Outcome r;
  std::ostringstream out, err;
  ReportFormat format = o.format == "machine" ? ReportFormat::machine : ReportFormat::human;
  try {
    Circuit circuit = parse_netlist(read_file(path));
    if (o.command == "classify") {
      out << render_classification(circuit, format);
    } else if (o.command == "topology") {
      out << render_degeneracy(circuit, degeneracy_report(circuit), format);
    } else if (o.command == "index") {
      SemiExplicitDAE dae(circuit);
      AnalysisOptions opts;
      opts.rank_tol = o.rank_tol;
      opts.oracle = o.oracle;
      if (!o.point_file.empty()) opts.point = parse_point(dae, read_file(o.point_file));
      out << render_index(dae, analyze(dae, opts), format);
    } else {
      SemiExplicitDAE dae(circuit);
      SolverConfig config;
      config.h = o.dt;
      config.newton_tol = o.newton_tol;
      config.rank_tol = o.rank_tol;
      config.validate();
      Trace trace = simulate(dae, dae.initial_dynamic_state(), 0.0, o.tstop, config);
      if (o.out_path.empty()) {
        trace.write_csv(out);
      } else {
        std::string target = trace_path(o, path);
        std::ofstream f(target, std::ios::binary);
        if (!f) throw std::invalid_argument("cannot write " + target);
        trace.write_csv(f);
        if (format == ReportFormat::machine) {
          out << "trace=" << target << "\nsteps=" << trace.times.size() - 1 << '\n';
        } else {
          out << "wrote " << trace.times.size() << " rows to " << target << '\n';
        }
      }
    }
  } catch (const ParseError& e) {
    err << path << ": " << e.what() << '\n';
    r.code = kInputError;
  } catch (const CircuitError& e) {
    err << path << ": " << e.what() << '\n';
    r.code = kInputError;
  } catch (const std::invalid_argument& e) {
    err << path << ": " << e.what() << '\n';
    r.code = kInputError;
  } catch (const AnalysisRefusal& e) {
    err << path << ": refused: " << e.what() << '\n';
    r.code = kRefused;
  } catch (const Error& e) {
    err << path << ": " << e.what() << '\n';
    r.code = kRefused;
  }
  r.out = out.str();
  r.err = err.str();
  return r;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"memkit: topology, index and transient analysis of memristive circuits", "memkit"};
  Options o;
  app.add_option("command", o.command, "classify | topology | index | sim")
      ->required()
      ->check(CLI::IsMember({"classify", "topology", "index", "sim"}));
  app.add_option("netlist", o.netlists, "netlist files")->required();
  app.add_option("--point", o.point_file, "evaluation point file (\"label value\" lines)");
  app.add_flag("--oracle", o.oracle, "cross-check with the Kronecker index oracle");
  app.add_option("--rank-tol", o.rank_tol, "relative singular value threshold")->check(CLI::PositiveNumber);
  app.add_option("--tstop", o.tstop, "simulation end time")->check(CLI::PositiveNumber);
  app.add_option("--dt", o.dt, "step size")->check(CLI::PositiveNumber);
  app.add_option("--newton-tol", o.newton_tol, "newton residual tolerance")->check(CLI::PositiveNumber);
  app.add_option("--out", o.out_path, "CSV output (a directory when several netlists are given)");
  app.add_option("--format", o.format, "human | machine")->check(CLI::IsMember({"human", "machine"}));
  app.add_option("--jobs", o.jobs, "netlists processed in parallel")->check(CLI::PositiveNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "memkit: " << e.what() << '\n';
    return kInputError;
  }
  if (o.command == "sim" && o.netlists.size() > 1 && !o.out_path.empty())
    std::filesystem::create_directories(o.out_path);
  if (o.command == "sim" && o.netlists.size() > 1 && o.out_path.empty()) {
    err << "memkit: sim with several netlists needs --out DIR\n";
    return kInputError;
  }

  std::vector<Outcome> results(o.netlists.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < o.netlists.size(); k = next++) results[k] = run_one(o, o.netlists[k]);
  };
  const auto jobs = std::min<std::size_t>(static_cast<std::size_t>(o.jobs), o.netlists.size());
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  int code = kOk;
  for (std::size_t k = 0; k < results.size(); ++k) {
    if (o.netlists.size() > 1) out << "== " << o.netlists[k] << '\n';
    out << results[k].out;
    err << results[k].err;
    code = std::max(code, results[k].code);
  }
  return code;
}

}  // namespace memkit::cli
