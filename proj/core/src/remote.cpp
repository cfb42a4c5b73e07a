#include "districtsim/remote.hpp"

#include "districtsim/errors.hpp"
#include "districtsim/protocol.hpp"

namespace districtsim::remote {

using protocol::Kind;
using protocol::Message;

namespace {

Message receive(transport::Connection& conn, std::chrono::milliseconds timeout) {
  return protocol::decode_message(conn.receive_line(timeout));
}

void send(transport::Connection& conn, const Message& m) { conn.send(protocol::encode_message(m)); }

}  // namespace

RemoteSimulator::RemoteSimulator(const transport::Endpoint& endpoint, const std::string& expected_id,
                                 std::optional<cosim::SimulatorDescriptor> expected,
                                 std::chrono::milliseconds step_timeout, std::map<std::string, double> params)
    : timeout_(step_timeout) {
  conn_ = transport::connect(endpoint, step_timeout);
  try {
    send(conn_, Message::hello("master"));
    Message hello = receive(conn_, timeout_);
    if (hello.kind == Kind::error) throw ProtocolError("server refused session: " + hello.message);
    if (hello.kind != Kind::hello) throw ProtocolError("expected HELLO from " + endpoint.str());
    if (hello.version != protocol::kVersion)
      throw ProtocolError("protocol version mismatch: server speaks " + std::to_string(hello.version) +
                          ", master speaks " + std::to_string(protocol::kVersion));
    if (hello.id != expected_id)
      throw ProtocolError("server at " + endpoint.str() + " serves '" + hello.id + "', expected '" + expected_id + "'");

    cosim::SimulatorDescriptor ask;
    if (expected) ask = *expected;
    send(conn_, Message::init(ask, std::move(params)));
    Message init = receive(conn_, timeout_);
    if (init.kind == Kind::error) throw ProtocolError("server rejected INIT: " + init.message);
    if (init.kind != Kind::init) throw ProtocolError("expected INIT from " + endpoint.str());
    descriptor_.id = hello.id;
    descriptor_.inputs = init.input_ports;
    descriptor_.outputs = init.output_ports;
    descriptor_.validate();
    if (expected && !(*expected == descriptor_))
      throw ProtocolError("ports served by '" + hello.id + "' differ from the expected descriptor");
  } catch (...) {
    abort_session();
    throw;
  }
}

RemoteSimulator::~RemoteSimulator() { terminate(); }

void RemoteSimulator::abort_session() {
  if (terminated_) return;
  terminated_ = true;
  try {
    if (conn_.is_open()) send(conn_, Message::terminate());
  } catch (...) {
  }
  conn_.close();
}

void RemoteSimulator::terminate() { abort_session(); }

cosim::PortValues RemoteSimulator::step(double t, double dt, const cosim::PortValues& inputs) {
  if (terminated_) throw ProtocolError("session with '" + descriptor_.id + "' already terminated");
  try {
    send(conn_, Message::step(t, dt, inputs));
    Message reply = receive(conn_, timeout_);
    if (reply.kind == Kind::error) throw ProtocolError("remote step failed: " + reply.message);
    if (reply.kind != Kind::step_ok) throw ProtocolError("expected STEP_OK, got " + std::string(to_string(reply.kind)));
    if (reply.t != t + dt) throw ProtocolError("STEP_OK time does not match the requested step");
    return reply.values;
  } catch (...) {
    abort_session();
    throw;
  }
}

void serve_session(cosim::Simulator& sim, transport::Connection& conn, const ServeOptions& options) {
  const auto& d = sim.descriptor();
  Message hello = receive(conn, options.idle_timeout);
  if (hello.kind != Kind::hello) {
    send(conn, Message::error("expected HELLO"));
    return;
  }
  send(conn, Message::hello(d.id));
  if (hello.version != protocol::kVersion) return;

  for (;;) {
    Message m;
    try {
      m = receive(conn, options.idle_timeout);
    } catch (const DecodeError& e) {
      send(conn, Message::error(e.what()));
      continue;
    }
    switch (m.kind) {
      case Kind::init:
        send(conn, Message::init(d));
        break;
      case Kind::step:
        try {
          send(conn, Message::step_ok(m.t + m.dt, sim.step(m.t, m.dt, m.values)));
        } catch (const TransportError&) {
          throw;
        } catch (const std::exception& e) {
          send(conn, Message::error(e.what()));
          sim.terminate();
          return;
        }
        break;
      case Kind::terminate:
        sim.terminate();
        return;
      default:
        send(conn, Message::error("unexpected " + std::string(protocol::to_string(m.kind)) + " frame"));
        break;
    }
  }
}

void serve_once(cosim::Simulator& sim, transport::Listener& listener, const ServeOptions& options) {
  auto conn = listener.accept(options.accept_timeout);
  serve_session(sim, conn, options);
}

}  // namespace districtsim::remote
