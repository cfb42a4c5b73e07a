#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>

#include "districtsim/cosim.hpp"
#include "districtsim/transport.hpp"

namespace districtsim::remote {

inline constexpr std::chrono::milliseconds kDefaultStepTimeout{30000};

/// Master-side proxy for a simulator served by another process.
class RemoteSimulator : public cosim::Simulator {
 public:
  /// Connects and performs the HELLO/INIT handshake. When `expected` is
  /// given, the served descriptor must match it exactly.
  RemoteSimulator(const transport::Endpoint& endpoint, const std::string& expected_id,
                  std::optional<cosim::SimulatorDescriptor> expected = std::nullopt,
                  std::chrono::milliseconds step_timeout = kDefaultStepTimeout,
                  std::map<std::string, double> params = {});
  ~RemoteSimulator() override;

  const cosim::SimulatorDescriptor& descriptor() const override { return descriptor_; }
  cosim::PortValues step(double t, double dt, const cosim::PortValues& inputs) override;
  /// Sends TERMINATE once; later calls do nothing.
  void terminate() override;

 private:
  void abort_session();

  transport::Connection conn_;
  cosim::SimulatorDescriptor descriptor_;
  std::chrono::milliseconds timeout_;
  bool terminated_ = false;
};

struct ServeOptions {
  std::chrono::milliseconds accept_timeout{std::chrono::hours(24)};
  std::chrono::milliseconds idle_timeout{std::chrono::minutes(10)};
};

/// Serves one master session on an accepted connection. Returns normally
/// after TERMINATE; a failing step is reported to the master as ERROR and
/// the session ends.
void serve_session(cosim::Simulator& sim, transport::Connection& conn, const ServeOptions& options = {});

/// Accepts one connection on `listener` and serves it.
void serve_once(cosim::Simulator& sim, transport::Listener& listener, const ServeOptions& options = {});

}  // namespace districtsim::remote
