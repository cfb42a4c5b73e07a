#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include "districtsim/errors.hpp"
#include "districtsim/numfmt.hpp"
#include "districtsim/protocol.hpp"
#include "districtsim/remote.hpp"
#include "districtsim/report.hpp"
#include "districtsim/simulators.hpp"

using namespace districtsim;

namespace {

constexpr double kYear = 365.0 * 86400.0;

std::shared_ptr<const scenario::Scenario> load(const std::string& path) {
  return std::make_shared<const scenario::Scenario>(scenario::load_data(scenario::load_scenario(path)));
}

std::unique_ptr<cosim::Simulator> local_simulator(std::shared_ptr<const scenario::Scenario> s, const std::string& id) {
  if (id == "grid") {
    if (!s->topology) throw ConfigError("files/topology", "scenario has no grid");
    return std::make_unique<sim::GridSimulator>(s);
  }
  return std::make_unique<sim::BuildingSimulator>(s, id);
}

std::vector<std::string> building_ids(const scenario::ScenarioConfig& c) {
  std::vector<std::string> ids;
  for (const auto& b : c.buildings) ids.push_back(b.id);
  return ids;
}

void print_summary(const std::vector<report::BuildingReport>& reports) {
  for (const auto& r : reports)
    std::printf("%s  mean T_air %s C  Q_ht_total %s kWh  radiators %s kWh\n", r.id.c_str(),
                format_fixed(r.indicators.mean_t_air_c, 2).c_str(), format_fixed(r.indicators.q_ht_total_kwh, 0).c_str(),
                format_fixed(r.indicators.q_radiators_kwh, 0).c_str());
}

void finish(const cosim::RunLog& log, const scenario::ScenarioConfig& config, const std::string& out,
            const std::vector<report::ReferenceRecord>& refs, bool require_year) {
  std::vector<report::BuildingReport> reports;
  const double span = config.t_end - config.t0;
  if (span >= kYear || require_year)
    reports = report::district_reports(log, config, refs);
  else
    std::printf("horizon shorter than a year: no annual indicators\n");
  const std::string grid = log.column({"grid", "Q_plant"}) == cosim::RunLog::npos ? "" : "grid";
  report::emit_outputs(log, building_ids(config), grid, reports, out);
  print_summary(reports);
  std::printf("wrote %s\n", out.c_str());
}

std::vector<report::ReferenceRecord> references_for(const scenario::ScenarioConfig& c, const std::string& override_path) {
  if (!override_path.empty()) return report::load_references(override_path);
  if (c.reference_file.empty()) throw ConfigError("/files/references", "no reference file configured");
  return report::load_references(c.reference_file);
}

int cmd_run(const std::string& scenario_path, const std::string& out, bool parallel) {
  auto s = load(scenario_path);
  const auto t0 = std::chrono::steady_clock::now();
  const auto log = sim::run_district(s, parallel);
  std::printf("simulated %zu steps in %.2f s\n", log.rows(),
              std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  finish(log, s->config, out, {}, false);
  return 0;
}

int cmd_validate(const std::string& scenario_path, const std::string& out, const std::string& refs_path) {
  auto s = load(scenario_path);
  const auto refs = references_for(s->config, refs_path);
  const auto log = sim::run_district(s);
  const auto reports = report::district_reports(log, s->config, refs);
  const std::string grid = s->topology ? "grid" : "";
  report::emit_outputs(log, building_ids(s->config), grid, reports, out);
  std::cout << report::validation_text(reports);
  std::printf("wrote %s\n", out.c_str());
  return 0;
}

int cmd_cosim(const std::string& coupling_path, const std::string& scenario_override, const std::string& out,
              const std::vector<std::string>& connect, bool parallel) {
  auto file = scenario::load_coupling(coupling_path);
  if (!scenario_override.empty()) file.scenario = scenario_override;
  for (const auto& c : connect) {
    const auto eq = c.find('=');
    if (eq == std::string::npos || eq == 0) throw InvalidParameter("--connect expects ID=host:port, got '" + c + "'");
    file.remote[c.substr(0, eq)] = c.substr(eq + 1);
  }
  auto s = load(file.scenario.string());
  auto ids = building_ids(s->config);
  if (s->topology) ids.push_back("grid");
  if (file.coupling.edges.empty() && s->topology) file.coupling = sim::district_coupling(building_ids(s->config));
  for (const auto& [id, ep] : file.remote)
    if (std::find(ids.begin(), ids.end(), id) == ids.end())
      throw ConfigError("/remote/" + id, "no simulator with this id in the scenario");

  std::vector<std::unique_ptr<cosim::Simulator>> owned;
  for (const auto& id : ids) {
    auto local = local_simulator(s, id);
    auto it = file.remote.find(id);
    if (it == file.remote.end()) {
      owned.push_back(std::move(local));
    } else {
      std::printf("%s -> %s\n", id.c_str(), it->second.c_str());
      owned.push_back(std::make_unique<remote::RemoteSimulator>(transport::Endpoint::parse(it->second), id,
                                                                local->descriptor()));
    }
  }
  std::vector<cosim::Simulator*> sims;
  for (auto& o : owned) sims.push_back(o.get());
  cosim::MasterOptions opt;
  opt.t0 = s->config.t0;
  opt.t_end = s->config.t_end;
  opt.dt_comm = s->config.dt_comm;
  opt.parallel = parallel;
  const auto t0 = std::chrono::steady_clock::now();
  const auto log = cosim::master_run(sims, file.coupling, opt);
  std::printf("simulated %zu steps in %.2f s\n", log.rows(),
              std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  finish(log, s->config, out, {}, false);
  return 0;
}

int cmd_serve(const std::string& scenario_path, const std::string& id, const std::string& listen) {
  auto s = load(scenario_path);
  auto sim = local_simulator(s, id);
  transport::Listener listener(transport::Endpoint::parse(listen));
  std::printf("serving %s on port %u\n", id.c_str(), static_cast<unsigned>(listener.port()));
  std::fflush(stdout);
  remote::serve_once(*sim, listener);
  return 0;
}

int cmd_protocol_dump(const std::string& out) {
  using protocol::Message;
  cosim::SimulatorDescriptor d;
  d.id = "B1";
  d.inputs = {{"T_sup", "K", 368.15}, {"m_flow", "kg/s", 0.0}};
  d.outputs = {{"T_buffer", "K", 0.0}};
  const std::vector<Message> session = {
      Message::hello("B1"),
      Message::init(d),
      Message::step(900.0, 900.0, {{"T_sup", 353.15}}),
      Message::step_ok(1800.0, {{"Q_demand", 8372.0 / 3.0}, {"T_buffer", 351.15}}),
      Message::error("tank \"B1\" diverged\n"),
      Message::terminate(),
  };
  std::string bytes;
  for (const auto& m : session) bytes += protocol::encode_message(m);
  if (out.empty() || out == "-") {
    std::cout << bytes;
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!(f << bytes)) throw IoError("cannot write '" + out + "'");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"District heating co-simulation"};
  app.require_subcommand(1);
  std::string scenario_path, out = "out", listen, refs, coupling, sim_id;
  std::vector<std::string> connect;
  std::uint64_t seed = 0;
  bool parallel = false;

  auto common = [&](CLI::App* c) {
    c->add_option("--seed", seed, "Accepted for interface stability; runs are deterministic");
    c->add_flag("--parallel", parallel, "Step simulators concurrently within a communication step");
  };

  auto* run = app.add_subcommand("run", "Simulate every building (and the grid) in-process");
  run->add_option("--scenario", scenario_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "Output directory");
  common(run);

  auto* val = app.add_subcommand("validate", "Run and compare annual indicators against references");
  val->add_option("--scenario", scenario_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  val->add_option("--out", out, "Output directory");
  val->add_option("--references", refs, "Reference file overriding the scenario's")->check(CLI::ExistingFile);
  val->add_option("--seed", seed, "Accepted for interface stability; runs are deterministic");

  auto* cos = app.add_subcommand("cosim", "Master run from a coupling file, optionally with remote simulators");
  cos->add_option("--coupling", coupling, "Coupling JSON")->required()->check(CLI::ExistingFile);
  cos->add_option("--scenario", scenario_path, "Scenario JSON overriding the coupling file's");
  cos->add_option("--out", out, "Output directory");
  cos->add_option("--connect", connect, "ID=host:port of a served simulator (repeatable)");
  common(cos);

  auto* srv = app.add_subcommand("serve", "Serve one simulator to a remote master");
  srv->add_option("--scenario", scenario_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  srv->add_option("--simulator", sim_id, "Building id or 'grid'")->required();
  srv->add_option("--listen", listen, "host:port or port; port 0 picks a free one")->required();
  srv->add_option("--seed", seed, "Accepted for interface stability; runs are deterministic");

  auto* dump = app.add_subcommand("protocol-dump", "Print the reference wire frames");
  dump->add_option("--out", out, "File to write, '-' for stdout")->default_str("-");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(scenario_path, out, parallel);
    if (*val) return cmd_validate(scenario_path, out, refs);
    if (*cos) return cmd_cosim(coupling, scenario_path, out, connect, parallel);
    if (*srv) return cmd_serve(scenario_path, sim_id, listen);
    if (*dump) return cmd_protocol_dump(dump->count("--out") ? out : "-");
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
