#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace districtsim::dhnet {

/// Outlet temperature of a steady pipe exchanging heat with the ground.
double pipe_outlet(double t_in, double m_flow, double t_ground, double u_prime, double length);

inline constexpr double kDefaultFriction = 0.03;

/// Darcy-Weisbach pressure drop with a fixed friction factor. Roughness is
/// accepted for file compatibility and does not enter the fixed-factor law.
double pipe_pressure_drop(double m_flow, double diameter, double length, double roughness,
                          double friction = kDefaultFriction);

/// Annual cosine around `mean` peaking on `phase_day`.
double ground_temperature(double t_s, double mean, double amplitude, double phase_day);

enum class NodeKind { source, junction, substation };

struct Node {
  std::string id;
  NodeKind kind = NodeKind::junction;
  double x = 0.0;
  double y = 0.0;
  std::string building;  // substations only
};

struct Pipe {
  std::string id;
  std::string from;
  std::string to;
  double length = 0.0;     // m
  double u_prime = 0.0;    // W/(m K)
  double diameter = 0.0;   // m
  double roughness = 0.0;  // m
};

/// Tree rooted at the single source. Pipes may be listed in either direction;
/// they are oriented away from the source on construction.
class NetworkTopology {
 public:
  NetworkTopology(std::vector<Node> nodes, std::vector<Pipe> pipes);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Pipe>& pipes() const { return pipes_; }
  std::size_t source() const { return source_; }
  /// Node indices of substations in file order.
  const std::vector<std::size_t>& substations() const { return substations_; }
  /// Index of the pipe feeding each node (npos for the source).
  std::size_t parent_pipe(std::size_t node) const { return parent_pipe_[node]; }
  /// Upstream node of each pipe (after orientation).
  std::size_t pipe_upstream(std::size_t pipe) const { return upstream_[pipe]; }
  std::size_t pipe_downstream(std::size_t pipe) const { return downstream_[pipe]; }
  /// Nodes ordered so that every node appears after its parent.
  const std::vector<std::size_t>& topological_order() const { return order_; }
  std::size_t node_index(const std::string& id) const;
  /// Substation position (0-based) bound to `building`, throws TopologyError if absent.
  std::size_t substation_of(const std::string& building) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::vector<Node> nodes_;
  std::vector<Pipe> pipes_;
  std::size_t source_ = npos;
  std::vector<std::size_t> substations_;
  std::vector<std::size_t> parent_pipe_;
  std::vector<std::size_t> upstream_;
  std::vector<std::size_t> downstream_;
  std::vector<std::size_t> order_;
};

struct SubstationFlow {
  double m_flow = 0.0;  // kg/s
  double t_ret = 0.0;   // K, water handed back to the return line
};

struct NetworkSolution {
  double t_supply = 0.0;
  double t_ground = 0.0;
  double m_root = 0.0;
  double t_return_plant = 0.0;
  std::vector<double> pipe_flow;        // kg/s, per pipe
  std::vector<double> supply_temp;      // K, per node
  std::vector<double> return_temp;      // K, per node (mixed, leaving the node towards the source)
  std::vector<double> pipe_dp;          // Pa, supply pipe (return mirrors it)
  std::vector<double> substation_supply;  // K, per substation
  std::vector<double> substation_dp;      // Pa, supply + return path
  std::size_t critical = 0;             // substation position with the largest path drop
  double dp_critical = 0.0;
  double q_substations = 0.0;           // W
  double q_supply_losses = 0.0;         // W
  double q_return_losses = 0.0;         // W

  double q_losses() const { return q_supply_losses + q_return_losses; }
  double q_plant() const { return q_substations + q_losses(); }
};

/// Steady temperatures, flows and pressure drops for given substation draws.
NetworkSolution network_solve(const NetworkTopology& topo, const std::vector<SubstationFlow>& flows, double t_ground,
                              double t_supply, double friction = kDefaultFriction);

/// Supply temperature versus time, linearly interpolated and held beyond the ends.
class SupplySchedule {
 public:
  SupplySchedule() = default;
  explicit SupplySchedule(double constant_k) : points_{{0.0, constant_k}} {}
  explicit SupplySchedule(std::vector<std::pair<double, double>> points);

  double at(double t_s) const;
  const std::vector<std::pair<double, double>>& points() const { return points_; }

 private:
  std::vector<std::pair<double, double>> points_{{0.0, 368.15}};
};

struct SourceSpec {
  SupplySchedule supply;
  double dp_set_critical = 50000.0;  // Pa
  double max_head = 1.0e6;           // Pa

  void validate() const;
};

struct SourceResult {
  double t_supply = 0.0;
  double head = 0.0;
  double q_plant = 0.0;
  bool saturated = false;
};

SourceResult source_step(const NetworkSolution& solution, const SourceSpec& source, double t_s);

struct PidParams {
  double kp = 5.0e-4;  // kg/(s K)
  double ki = 5.0e-6;  // kg/(s^2 K)
  double kd = 0.0;     // kg/K
  double m_max = 2.0;  // kg/s

  void validate() const;
};

struct PidState {
  double integral = 0.0;    // K s
  double prev_error = 0.0;  // K
};

struct SubstationParams {
  double delta_t1 = 15.0;        // K
  double buffer_set = 353.15;    // K
  double supply_margin = 5.0;    // K above the buffer level needed to charge it
  PidParams pid;

  /// Local supply temperature below which the PID takes over.
  double set_level(double t_buffer) const;
  void validate() const;
};

struct SubstationState {
  int mode = 1;
  PidState pid;
};

struct SubstationResult {
  double m_flow = 0.0;
  double delta_t = 0.0;
  double t_ret_request = 0.0;
  SubstationState state;
};

/// Two-state control: fixed temperature drop when the local supply is hot
/// enough, otherwise a PID on the local supply temperature sets the flow.
/// `t_sup_local` decides the mode and anchors the return request,
/// `t_sup_feedback` is the measurement the PID acts on.
SubstationResult substation_step(double q_demand, double t_buffer, double t_sup_local, double t_sup_feedback,
                                 const SubstationParams& params, const SubstationState& state, double dt_s);

}  // namespace districtsim::dhnet
