#include "districtsim/dhnet.hpp"

#include "districtsim/errors.hpp"
#include "districtsim/units.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace districtsim::dhnet {

double pipe_outlet(double t_in, double m_flow, double t_ground, double u_prime, double length) {
  if (!(m_flow >= 0.0)) throw InvalidParameter("pipe mass flow must be >= 0");
  if (m_flow == 0.0) return t_ground;
  return t_ground + (t_in - t_ground) * std::exp(-u_prime * length / (m_flow * kCpWater));
}

double pipe_pressure_drop(double m_flow, double diameter, double length, double /*roughness*/, double friction) {
  if (!(diameter > 0.0)) throw InvalidParameter("pipe diameter must be > 0");
  if (!(length > 0.0)) throw InvalidParameter("pipe length must be > 0");
  if (!(m_flow >= 0.0)) throw InvalidParameter("pipe mass flow must be >= 0");
  const double area = std::numbers::pi * diameter * diameter / 4.0;
  const double v = m_flow / (kRhoWater * area);
  return friction * (length / diameter) * kRhoWater * v * v / 2.0;
}

double ground_temperature(double t_s, double mean, double amplitude, double phase_day) {
  const double day = t_s / kSecondsPerDay;
  return mean + amplitude * std::cos(2.0 * std::numbers::pi * (day - phase_day) / kDaysPerYear);
}

NetworkTopology::NetworkTopology(std::vector<Node> nodes, std::vector<Pipe> pipes)
    : nodes_(std::move(nodes)), pipes_(std::move(pipes)) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!index.emplace(nodes_[i].id, i).second) throw TopologyError("duplicate node '" + nodes_[i].id + "'");
    if (nodes_[i].kind == NodeKind::source) {
      if (source_ != npos) throw TopologyError("more than one source node");
      source_ = i;
    }
    if (nodes_[i].kind == NodeKind::substation) {
      if (nodes_[i].building.empty()) throw TopologyError("substation '" + nodes_[i].id + "' has no building");
      substations_.push_back(i);
    }
  }
  if (source_ == npos) throw TopologyError("network has no source node");
  if (pipes_.size() + 1 != nodes_.size())
    throw TopologyError("a tree over " + std::to_string(nodes_.size()) + " nodes needs " +
                        std::to_string(nodes_.size() - 1) + " pipes, got " + std::to_string(pipes_.size()));

  std::vector<std::vector<std::size_t>> incident(nodes_.size());
  std::map<std::string, bool> pipe_ids;
  for (std::size_t p = 0; p < pipes_.size(); ++p) {
    const auto& pipe = pipes_[p];
    if (!pipe_ids.emplace(pipe.id, true).second) throw TopologyError("duplicate pipe '" + pipe.id + "'");
    auto a = index.find(pipe.from), b = index.find(pipe.to);
    if (a == index.end() || b == index.end())
      throw TopologyError("pipe '" + pipe.id + "' references an unknown node");
    if (a->second == b->second) throw TopologyError("pipe '" + pipe.id + "' is a self loop");
    if (!(pipe.length > 0.0) || !(pipe.diameter > 0.0))
      throw TopologyError("pipe '" + pipe.id + "' needs positive length and diameter");
    if (!(pipe.u_prime >= 0.0) || !(pipe.roughness >= 0.0))
      throw TopologyError("pipe '" + pipe.id + "' has a negative loss coefficient or roughness");
    incident[a->second].push_back(p);
    incident[b->second].push_back(p);
  }

  parent_pipe_.assign(nodes_.size(), npos);
  upstream_.assign(pipes_.size(), npos);
  downstream_.assign(pipes_.size(), npos);
  std::vector<bool> seen(nodes_.size(), false);
  order_.push_back(source_);
  seen[source_] = true;
  for (std::size_t head = 0; head < order_.size(); ++head) {
    const std::size_t n = order_[head];
    for (std::size_t p : incident[n]) {
      if (p == parent_pipe_[n]) continue;
      const std::size_t other = index.at(pipes_[p].from) == n ? index.at(pipes_[p].to) : index.at(pipes_[p].from);
      if (seen[other]) throw TopologyError("network contains a cycle through pipe '" + pipes_[p].id + "'");
      seen[other] = true;
      parent_pipe_[other] = p;
      upstream_[p] = n;
      downstream_[p] = other;
      order_.push_back(other);
    }
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (!seen[i]) throw TopologyError("node '" + nodes_[i].id + "' is not connected to the source");
  for (std::size_t s : substations_)
    if (incident[s].size() != 1) throw TopologyError("substation '" + nodes_[s].id + "' is not a leaf");
  std::map<std::string, bool> buildings;
  for (std::size_t s : substations_)
    if (!buildings.emplace(nodes_[s].building, true).second)
      throw TopologyError("building '" + nodes_[s].building + "' is bound to more than one substation");
}

std::size_t NetworkTopology::node_index(const std::string& id) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].id == id) return i;
  throw TopologyError("unknown node '" + id + "'");
}

std::size_t NetworkTopology::substation_of(const std::string& building) const {
  for (std::size_t k = 0; k < substations_.size(); ++k)
    if (nodes_[substations_[k]].building == building) return k;
  throw TopologyError("no substation bound to building '" + building + "'");
}

NetworkSolution network_solve(const NetworkTopology& topo, const std::vector<SubstationFlow>& flows, double t_ground,
                              double t_supply, double friction) {
  const auto& subs = topo.substations();
  if (flows.size() != subs.size())
    throw InvalidParameter("expected " + std::to_string(subs.size()) + " substation flows, got " +
                           std::to_string(flows.size()));
  const std::size_t n_nodes = topo.nodes().size();
  const std::size_t n_pipes = topo.pipes().size();
  const auto& order = topo.topological_order();

  NetworkSolution s;
  s.t_supply = t_supply;
  s.t_ground = t_ground;
  s.pipe_flow.assign(n_pipes, 0.0);
  s.pipe_dp.assign(n_pipes, 0.0);
  s.supply_temp.assign(n_nodes, t_ground);
  s.return_temp.assign(n_nodes, t_ground);

  // Mass balance leaf -> root: every pipe carries the draw of its subtree.
  std::vector<double> node_draw(n_nodes, 0.0);
  for (std::size_t k = 0; k < subs.size(); ++k) {
    if (!(flows[k].m_flow >= 0.0)) throw InvalidParameter("substation mass flow must be >= 0");
    node_draw[subs[k]] = flows[k].m_flow;
  }
  std::vector<double> subtree = node_draw;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::size_t p = topo.parent_pipe(*it);
    if (p == NetworkTopology::npos) continue;
    s.pipe_flow[p] = subtree[*it];
    subtree[topo.pipe_upstream(p)] += subtree[*it];
  }
  s.m_root = subtree[topo.source()];

  // Supply side root -> leaf.
  s.supply_temp[topo.source()] = t_supply;
  for (std::size_t n : order) {
    const std::size_t p = topo.parent_pipe(n);
    if (p == NetworkTopology::npos) continue;
    const auto& pipe = topo.pipes()[p];
    const double t_in = s.supply_temp[topo.pipe_upstream(p)];
    const double m = s.pipe_flow[p];
    const double t_out = pipe_outlet(t_in, m, t_ground, pipe.u_prime, pipe.length);
    s.supply_temp[n] = t_out;
    s.q_supply_losses += m * kCpWater * (t_in - t_out);
    s.pipe_dp[p] = pipe_pressure_drop(m, pipe.diameter, pipe.length, pipe.roughness, friction);
  }

  // Return side leaf -> root with flow-weighted mixing.
  std::vector<double> enthalpy(n_nodes, 0.0);  // sum of m * T arriving at each node
  for (std::size_t k = 0; k < subs.size(); ++k) {
    enthalpy[subs[k]] += flows[k].m_flow * flows[k].t_ret;
    s.q_substations += flows[k].m_flow * kCpWater * (s.supply_temp[subs[k]] - flows[k].t_ret);
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::size_t n = *it;
    const double m = subtree[n];
    s.return_temp[n] = m > 0.0 ? enthalpy[n] / m : t_ground;
    const std::size_t p = topo.parent_pipe(n);
    if (p == NetworkTopology::npos) continue;
    const auto& pipe = topo.pipes()[p];
    const double t_out = pipe_outlet(s.return_temp[n], m, t_ground, pipe.u_prime, pipe.length);
    s.q_return_losses += m * kCpWater * (s.return_temp[n] - t_out);
    enthalpy[topo.pipe_upstream(p)] += m * t_out;
  }
  s.t_return_plant = s.return_temp[topo.source()];

  s.substation_supply.resize(subs.size());
  s.substation_dp.resize(subs.size());
  for (std::size_t k = 0; k < subs.size(); ++k) {
    s.substation_supply[k] = s.supply_temp[subs[k]];
    double dp = 0.0;
    for (std::size_t n = subs[k]; topo.parent_pipe(n) != NetworkTopology::npos; n = topo.pipe_upstream(topo.parent_pipe(n)))
      dp += s.pipe_dp[topo.parent_pipe(n)];
    s.substation_dp[k] = 2.0 * dp;
    if (k == 0 || s.substation_dp[k] > s.dp_critical) {
      s.critical = k;
      s.dp_critical = s.substation_dp[k];
    }
  }
  return s;
}

SupplySchedule::SupplySchedule(std::vector<std::pair<double, double>> points) : points_(std::move(points)) {
  if (points_.empty()) throw InvalidParameter("supply schedule needs at least one point");
  for (std::size_t i = 1; i < points_.size(); ++i)
    if (!(points_[i].first > points_[i - 1].first))
      throw InvalidParameter("supply schedule times must be strictly increasing");
  for (const auto& [t, v] : points_)
    if (!std::isfinite(t) || !(v > 0.0)) throw InvalidParameter("supply schedule values must be positive kelvin");
}

double SupplySchedule::at(double t_s) const {
  if (t_s <= points_.front().first) return points_.front().second;
  if (t_s >= points_.back().first) return points_.back().second;
  auto hi = std::upper_bound(points_.begin(), points_.end(), t_s,
                             [](double t, const auto& p) { return t < p.first; });
  auto lo = hi - 1;
  const double w = (t_s - lo->first) / (hi->first - lo->first);
  return lo->second + w * (hi->second - lo->second);
}

void SourceSpec::validate() const {
  if (!(dp_set_critical > 0.0)) throw InvalidParameter("critical differential pressure must be > 0");
  if (!(max_head >= dp_set_critical)) throw InvalidParameter("maximum head must be >= critical set point");
}

SourceResult source_step(const NetworkSolution& solution, const SourceSpec& source, double t_s) {
  SourceResult r;
  r.t_supply = source.supply.at(t_s);
  const double wanted = solution.dp_critical + source.dp_set_critical;
  r.saturated = wanted > source.max_head;
  r.head = std::min(source.max_head, wanted);
  r.q_plant = solution.q_plant();
  return r;
}

void PidParams::validate() const {
  if (!(kp >= 0.0 && ki >= 0.0 && kd >= 0.0)) throw InvalidParameter("PID gains must be >= 0");
  if (!(m_max > 0.0)) throw InvalidParameter("PID flow limit must be > 0");
}

double SubstationParams::set_level(double t_buffer) const { return std::max(t_buffer, buffer_set) + supply_margin; }

void SubstationParams::validate() const {
  if (!(delta_t1 > 0.0)) throw InvalidParameter("mode-1 temperature drop must be > 0");
  if (!(supply_margin >= 0.0)) throw InvalidParameter("supply margin must be >= 0");
  pid.validate();
}

SubstationResult substation_step(double q_demand, double t_buffer, double t_sup_local, double t_sup_feedback,
                                 const SubstationParams& params, const SubstationState& state, double dt_s) {
  if (!(dt_s > 0.0)) throw InvalidParameter("time step must be > 0");
  if (!(q_demand >= 0.0)) throw InvalidParameter("heat demand must be >= 0");
  if (!std::isfinite(t_buffer) || !std::isfinite(t_sup_local) || !std::isfinite(t_sup_feedback))
    throw NumericError("non-finite substation temperature");

  SubstationResult r;
  r.state = state;
  const double level = params.set_level(t_buffer);
  const double m1 = q_demand / (kCpWater * params.delta_t1);

  if (t_sup_local >= level) {
    r.state.mode = 1;
    r.state.pid = {};
    r.m_flow = m1;
    r.delta_t = params.delta_t1;
    r.t_ret_request = t_sup_local - params.delta_t1;
    return r;
  }

  const auto& pid = params.pid;
  const double i_max = pid.ki > 0.0 ? pid.m_max / pid.ki : 0.0;
  if (state.mode != 2) {
    // Bumpless entry: start from the flow mode 1 would have used.
    r.state.pid.integral = pid.ki > 0.0 ? std::clamp(m1, 0.0, pid.m_max) / pid.ki : 0.0;
    r.state.pid.prev_error = level - t_sup_feedback;
  }
  r.state.mode = 2;
  const double error = level - t_sup_feedback;
  r.state.pid.integral = std::clamp(r.state.pid.integral + error * dt_s, 0.0, i_max);
  const double derivative = (error - r.state.pid.prev_error) / dt_s;
  r.state.pid.prev_error = error;
  r.m_flow = std::clamp(pid.kp * error + pid.ki * r.state.pid.integral + pid.kd * derivative, 0.0, pid.m_max);
  r.delta_t = r.m_flow > 0.0 ? q_demand / (kCpWater * r.m_flow) : 0.0;
  r.t_ret_request = t_sup_local - r.delta_t;
  return r;
}

}  // namespace districtsim::dhnet
