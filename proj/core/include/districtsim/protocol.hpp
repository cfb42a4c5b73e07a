#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "districtsim/cosim.hpp"

namespace districtsim::protocol {

inline constexpr int kVersion = 1;

enum class Kind { hello, init, step, step_ok, error, terminate };

std::string_view to_string(Kind kind);

/// One wire frame. Only the fields of its kind are encoded:
///   HELLO     version, id
///   INIT      ports (inputs, outputs), params
///   STEP      t, dt, inputs
///   STEP_OK   t, outputs
///   ERROR     message
///   TERMINATE -
struct Message {
  Kind kind = Kind::terminate;
  int version = kVersion;
  std::string id;
  std::vector<cosim::PortSpec> input_ports;
  std::vector<cosim::PortSpec> output_ports;
  std::map<std::string, double> params;
  double t = 0.0;
  double dt = 0.0;
  cosim::PortValues values;  // STEP inputs or STEP_OK outputs
  std::string message;

  static Message hello(std::string id);
  static Message init(const cosim::SimulatorDescriptor& d, std::map<std::string, double> params = {});
  static Message step(double t, double dt, cosim::PortValues inputs);
  static Message step_ok(double t, cosim::PortValues outputs);
  static Message error(std::string text);
  static Message terminate();

  bool operator==(const Message&) const = default;
};

/// Canonical frame: one JSON object, keys in byte order, numbers in shortest
/// round-trip form, no whitespace, terminated by a single '\n'.
std::string encode_message(const Message& msg);

/// Parse one frame (with or without the trailing newline). Unknown fields are
/// ignored. Throws DecodeError with the byte offset of the first problem.
Message decode_message(std::string_view frame);

}  // namespace districtsim::protocol
