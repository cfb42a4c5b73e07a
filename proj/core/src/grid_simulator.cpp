#include "districtsim/errors.hpp"
#include "districtsim/hiu.hpp"
#include "districtsim/simulators.hpp"
#include "districtsim/units.hpp"

#include <cmath>
#include <limits>
#include <memory>

namespace districtsim::sim {

std::string grid_port(const std::string& signal, const std::string& building_id) {
  return signal + "[" + building_id + "]";
}

GridSimulator::GridSimulator(std::shared_ptr<const scenario::Scenario> scenario, std::string id)
    : scenario_(std::move(scenario)) {
  if (!scenario_->topology) throw ConfigError("/files/topology", "the grid simulator needs a network topology");
  topo_ = &*scenario_->topology;
  const auto& cfg = scenario_->config;
  descriptor_.id = std::move(id);
  for (std::size_t k : topo_->substations()) {
    const std::string& b = topo_->nodes()[k].building;
    buildings_.push_back(b);
    approach_.push_back(cfg.building(b).hx.approach);
    descriptor_.inputs.push_back({grid_port(hiu::kPortBufferTemp, b), "K", cfg.substation.buffer_set});
    descriptor_.inputs.push_back({grid_port(hiu::kPortDemand, b), "W", 0.0});
    descriptor_.outputs.push_back({grid_port(hiu::kPortSupplyTemp, b), "K", 0.0});
    descriptor_.outputs.push_back({grid_port(hiu::kPortMassFlow, b), "kg/s", 0.0});
    descriptor_.outputs.push_back({grid_port(hiu::kPortReturnRequest, b), "K", 0.0});
    descriptor_.outputs.push_back({grid_port("mode", b), "1", 0.0});
  }
  descriptor_.outputs.push_back({"Q_plant", "W", 0.0});
  descriptor_.outputs.push_back({"Q_loss", "W", 0.0});
  descriptor_.outputs.push_back({"Q_substations", "W", 0.0});
  descriptor_.outputs.push_back({"T_supply", "K", 0.0});
  descriptor_.outputs.push_back({"T_return", "K", 0.0});
  descriptor_.outputs.push_back({"m_plant", "kg/s", 0.0});
  descriptor_.outputs.push_back({"head", "Pa", 0.0});
  descriptor_.outputs.push_back({"saturated", "1", 0.0});
  descriptor_.validate();
  states_.resize(buildings_.size());
  measured_supply_.assign(buildings_.size(), std::numeric_limits<double>::quiet_NaN());
}

cosim::PortValues GridSimulator::step(double t, double dt, const cosim::PortValues& inputs) {
  if (!(dt > 0.0)) throw InvalidParameter("time step must be > 0");
  const auto& cfg = scenario_->config;
  const auto& sub = cfg.substation;
  const std::size_t nb = buildings_.size();
  std::vector<double> q(nb), t_buffer(nb);
  for (std::size_t i = 0; i < nb; ++i) {
    q[i] = std::max(0.0, inputs.at(grid_port(hiu::kPortDemand, buildings_[i])));
    t_buffer[i] = inputs.at(grid_port(hiu::kPortBufferTemp, buildings_[i]));
  }

  const int n = std::max(1, static_cast<int>(std::ceil(dt / cfg.grid_substep_s - 1e-9)));
  const double h = dt / n;
  std::vector<double> sup_sum(nb, 0.0), m_sum(nb, 0.0), req_sum(nb, 0.0);
  double q_plant = 0.0, q_loss = 0.0, q_sub = 0.0, t_supply = 0.0, t_return = 0.0, m_plant = 0.0, head = 0.0;
  bool saturated = false;
  std::vector<dhnet::SubstationFlow> flows(nb);
  for (int k = 0; k < n; ++k) {
    const double ts = t + k * h;
    const double t_s = cfg.source.supply.at(ts);
    const double t_g = dhnet::ground_temperature(ts, to_kelvin(cfg.ground.mean_c), cfg.ground.amplitude_k,
                                                 cfg.ground.phase_day);

    // Local supply the substations would see at their fixed-drop flows decides the mode.
    for (std::size_t i = 0; i < nb; ++i) flows[i] = {q[i] / (kCpWater * sub.delta_t1), t_s - sub.delta_t1};
    const auto predicted = dhnet::network_solve(*topo_, flows, t_g, t_s);

    std::vector<double> delta(nb);
    for (std::size_t i = 0; i < nb; ++i) {
      const double local = predicted.substation_supply[i];
      const double feedback = std::isnan(measured_supply_[i]) ? local : measured_supply_[i];
      const auto r = dhnet::substation_step(q[i], t_buffer[i], local, feedback, sub, states_[i], h);
      states_[i] = r.state;
      flows[i].m_flow = r.m_flow;
      delta[i] = r.delta_t;
    }
    const auto supplied = dhnet::network_solve(*topo_, flows, t_g, t_s);
    for (std::size_t i = 0; i < nb; ++i) {
      // The exchanger cannot cool grid water below the tank plus its approach.
      const double local = supplied.substation_supply[i];
      const double request = local - delta[i];
      flows[i].t_ret = std::min(local, std::max(request, t_buffer[i] + approach_[i]));
      req_sum[i] += request;
    }
    last_ = dhnet::network_solve(*topo_, flows, t_g, t_s);
    const auto src = dhnet::source_step(last_, cfg.source, ts);

    for (std::size_t i = 0; i < nb; ++i) {
      measured_supply_[i] = last_.substation_supply[i];
      sup_sum[i] += last_.substation_supply[i];
      m_sum[i] += flows[i].m_flow;
    }
    q_plant += src.q_plant;
    q_loss += last_.q_losses();
    q_sub += last_.q_substations;
    t_supply += src.t_supply;
    t_return += last_.t_return_plant;
    m_plant += last_.m_root;
    head += src.head;
    saturated = saturated || src.saturated;
  }

  const double inv = 1.0 / n;
  cosim::PortValues out;
  for (std::size_t i = 0; i < nb; ++i) {
    const auto& b = buildings_[i];
    out[grid_port(hiu::kPortSupplyTemp, b)] = sup_sum[i] * inv;
    out[grid_port(hiu::kPortMassFlow, b)] = m_sum[i] * inv;
    out[grid_port(hiu::kPortReturnRequest, b)] = req_sum[i] * inv;
    out[grid_port("mode", b)] = states_[i].mode;
  }
  out["Q_plant"] = q_plant * inv;
  out["Q_loss"] = q_loss * inv;
  out["Q_substations"] = q_sub * inv;
  out["T_supply"] = t_supply * inv;
  out["T_return"] = t_return * inv;
  out["m_plant"] = m_plant * inv;
  out["head"] = head * inv;
  out["saturated"] = saturated ? 1.0 : 0.0;
  return out;
}

cosim::Coupling district_coupling(const std::vector<std::string>& building_ids, const std::string& grid_id) {
  cosim::Coupling c;
  for (const auto& b : building_ids) {
    for (const char* port : {hiu::kPortSupplyTemp, hiu::kPortMassFlow, hiu::kPortReturnRequest})
      c.edges.push_back({{grid_id, grid_port(port, b)}, {b, port}});
    for (const char* port : {hiu::kPortBufferTemp, hiu::kPortDemand})
      c.edges.push_back({{b, port}, {grid_id, grid_port(port, b)}});
  }
  return c;
}

cosim::RunLog run_district(std::shared_ptr<const scenario::Scenario> scenario, bool parallel,
                           std::vector<std::size_t> order) {
  std::vector<std::unique_ptr<cosim::Simulator>> owned;
  std::vector<std::string> ids;
  for (const auto& b : scenario->config.buildings) {
    owned.push_back(std::make_unique<BuildingSimulator>(scenario, b.id));
    ids.push_back(b.id);
  }
  cosim::Coupling coupling;
  if (scenario->topology) {
    owned.push_back(std::make_unique<GridSimulator>(scenario));
    coupling = district_coupling(ids);
  }
  std::vector<cosim::Simulator*> sims;
  for (auto& s : owned) sims.push_back(s.get());
  cosim::MasterOptions opt;
  opt.t0 = scenario->config.t0;
  opt.t_end = scenario->config.t_end;
  opt.dt_comm = scenario->config.dt_comm;
  opt.parallel = parallel;
  opt.order = std::move(order);
  return cosim::master_run(sims, coupling, opt);
}

}  // namespace districtsim::sim
