#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace districtsim::cosim {

struct PortSpec {
  std::string name;
  std::string unit;
  double default_value = 0.0;  // inputs only

  bool operator==(const PortSpec&) const = default;
};

struct SimulatorDescriptor {
  std::string id;
  std::vector<PortSpec> inputs;
  std::vector<PortSpec> outputs;

  /// Port names must be unique across inputs and outputs of one simulator.
  void validate() const;
  const PortSpec* input(const std::string& name) const;
  const PortSpec* output(const std::string& name) const;

  bool operator==(const SimulatorDescriptor&) const = default;
};

using PortValues = std::map<std::string, double>;

/// Anything the master can advance: in-process models or remote sessions.
class Simulator {
 public:
  virtual ~Simulator() = default;
  virtual const SimulatorDescriptor& descriptor() const = 0;
  /// Advance over [t, t + dt] with inputs held constant; return outputs at t + dt.
  virtual PortValues step(double t, double dt, const PortValues& inputs) = 0;
  /// Called once when a run ends, successfully or not.
  virtual void terminate() {}
};

struct PortKey {
  std::string simulator;
  std::string port;

  auto operator<=>(const PortKey&) const = default;
  std::string str() const { return simulator + "." + port; }
};

struct Edge {
  PortKey from;
  PortKey to;
};

/// Directed producer -> consumer links, each delayed by one communication step.
struct Coupling {
  std::vector<Edge> edges;

  /// Every edge must join a declared output to a declared input; an input
  /// may have at most one producer.
  void validate(const std::vector<const SimulatorDescriptor*>& descriptors) const;
};

struct PortFrame {
  double time = 0.0;
  std::map<PortKey, double> values;
};

/// Inputs for every simulator at the next communication point: defaults,
/// overridden by the producers' values in `previous` (none at the first step).
std::map<std::string, PortValues> exchange(const PortFrame* previous, const Coupling& coupling,
                                           const std::vector<const SimulatorDescriptor*>& descriptors);

/// Column-oriented record of every port value at every communication point.
/// Row k holds the inputs used over step k and the outputs at its end; its
/// time is the end of the step.
class RunLog {
 public:
  RunLog() = default;
  explicit RunLog(std::vector<PortKey> columns);

  const std::vector<PortKey>& columns() const { return columns_; }
  const std::vector<double>& times() const { return times_; }
  std::size_t rows() const { return times_.size(); }
  double at(std::size_t row, std::size_t col) const { return values_[row * columns_.size() + col]; }
  /// npos when absent.
  std::size_t column(const PortKey& key) const;
  std::vector<double> series(const PortKey& key) const;

  void append(const PortFrame& frame);

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::vector<PortKey> columns_;
  std::vector<double> times_;
  std::vector<double> values_;
};

struct MasterOptions {
  double t0 = 0.0;
  double t_end = 0.0;
  double dt_comm = 900.0;
  bool parallel = false;
  /// Execution order within a step as a permutation of simulator indices; empty = declaration order.
  std::vector<std::size_t> order;
};

/// Fixed-step loosely coupled run. Any simulator failure aborts the run with a
/// SimulationError naming the step and simulator; terminate() is called on
/// every simulator on all paths.
RunLog master_run(const std::vector<Simulator*>& simulators, const Coupling& coupling, const MasterOptions& options);

}  // namespace districtsim::cosim
