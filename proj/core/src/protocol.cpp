#include "districtsim/protocol.hpp"

#include "districtsim/errors.hpp"
#include "districtsim/numfmt.hpp"

#include <json.hpp>

#include <cmath>

namespace districtsim::protocol {

using nlohmann::json;

std::string_view to_string(Kind kind) {
  switch (kind) {
    case Kind::hello: return "HELLO";
    case Kind::init: return "INIT";
    case Kind::step: return "STEP";
    case Kind::step_ok: return "STEP_OK";
    case Kind::error: return "ERROR";
    case Kind::terminate: return "TERMINATE";
  }
  return "?";
}

Message Message::hello(std::string id) {
  Message m;
  m.kind = Kind::hello;
  m.id = std::move(id);
  return m;
}

Message Message::init(const cosim::SimulatorDescriptor& d, std::map<std::string, double> params) {
  Message m;
  m.kind = Kind::init;
  m.input_ports = d.inputs;
  m.output_ports = d.outputs;
  for (auto& p : m.output_ports) p.default_value = 0.0;
  m.params = std::move(params);
  return m;
}

Message Message::step(double t, double dt, cosim::PortValues inputs) {
  Message m;
  m.kind = Kind::step;
  m.t = t;
  m.dt = dt;
  m.values = std::move(inputs);
  return m;
}

Message Message::step_ok(double t, cosim::PortValues outputs) {
  Message m;
  m.kind = Kind::step_ok;
  m.t = t;
  m.values = std::move(outputs);
  return m;
}

Message Message::error(std::string text) {
  Message m;
  m.kind = Kind::error;
  m.message = std::move(text);
  return m;
}

Message Message::terminate() { return Message{}; }

namespace {

void put_string(std::string& out, std::string_view s) {
  static constexpr char hex[] = "0123456789abcdef";
  out += '"';
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          out += "\\u00";
          out += hex[c >> 4];
          out += hex[c & 0xf];
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  out += '"';
}

void put_number(std::string& out, double v) {
  if (!std::isfinite(v)) throw ProtocolError("non-finite number cannot be sent");
  append_double(out, v);
}

void put_key(std::string& out, std::string_view key) {
  put_string(out, key);
  out += ':';
}

void put_map(std::string& out, const std::map<std::string, double>& values) {
  out += '{';
  bool first = true;
  for (const auto& [k, v] : values) {
    if (!first) out += ',';
    first = false;
    put_key(out, k);
    put_number(out, v);
  }
  out += '}';
}

void put_ports(std::string& out, const std::vector<cosim::PortSpec>& ports, bool with_default) {
  out += '[';
  for (std::size_t i = 0; i < ports.size(); ++i) {
    if (i) out += ',';
    out += '{';
    if (with_default) {
      put_key(out, "default");
      put_number(out, ports[i].default_value);
      out += ',';
    }
    put_key(out, "name");
    put_string(out, ports[i].name);
    out += ',';
    put_key(out, "unit");
    put_string(out, ports[i].unit);
    out += '}';
  }
  out += ']';
}

[[noreturn]] void fail(std::size_t offset, const std::string& what) { throw DecodeError(offset, what); }

const json& field(const json& obj, const char* name) {
  auto it = obj.find(name);
  if (it == obj.end()) fail(0, std::string("missing field '") + name + "'");
  return *it;
}

double number(const json& v, const std::string& what) {
  if (!v.is_number()) fail(0, what + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(0, what + " is out of range");
  return d;
}

std::string text(const json& v, const std::string& what) {
  if (!v.is_string()) fail(0, what + " must be a string");
  return v.get<std::string>();
}

std::map<std::string, double> number_map(const json& v, const std::string& what) {
  if (!v.is_object()) fail(0, what + " must be an object");
  std::map<std::string, double> out;
  for (auto it = v.begin(); it != v.end(); ++it) out[it.key()] = number(it.value(), what + "." + it.key());
  return out;
}

std::vector<cosim::PortSpec> port_list(const json& v, const std::string& what, bool with_default) {
  if (!v.is_array()) fail(0, what + " must be an array");
  std::vector<cosim::PortSpec> out;
  for (const auto& p : v) {
    if (!p.is_object()) fail(0, what + " entries must be objects");
    cosim::PortSpec spec;
    spec.name = text(field(p, "name"), what + ".name");
    spec.unit = text(field(p, "unit"), what + ".unit");
    if (with_default) spec.default_value = number(field(p, "default"), what + ".default");
    out.push_back(std::move(spec));
  }
  return out;
}

}  // namespace

std::string encode_message(const Message& msg) {
  std::string out;
  out += '{';
  switch (msg.kind) {
    case Kind::hello:
      put_key(out, "id");
      put_string(out, msg.id);
      out += ',';
      put_key(out, "kind");
      put_string(out, "HELLO");
      out += ',';
      put_key(out, "version");
      out += std::to_string(msg.version);
      break;
    case Kind::init:
      put_key(out, "kind");
      put_string(out, "INIT");
      out += ',';
      put_key(out, "params");
      put_map(out, msg.params);
      out += ',';
      put_key(out, "ports");
      out += '{';
      put_key(out, "inputs");
      put_ports(out, msg.input_ports, true);
      out += ',';
      put_key(out, "outputs");
      put_ports(out, msg.output_ports, false);
      out += '}';
      break;
    case Kind::step:
      put_key(out, "dt");
      put_number(out, msg.dt);
      out += ',';
      put_key(out, "inputs");
      put_map(out, msg.values);
      out += ',';
      put_key(out, "kind");
      put_string(out, "STEP");
      out += ',';
      put_key(out, "t");
      put_number(out, msg.t);
      break;
    case Kind::step_ok:
      put_key(out, "kind");
      put_string(out, "STEP_OK");
      out += ',';
      put_key(out, "outputs");
      put_map(out, msg.values);
      out += ',';
      put_key(out, "t");
      put_number(out, msg.t);
      break;
    case Kind::error:
      put_key(out, "kind");
      put_string(out, "ERROR");
      out += ',';
      put_key(out, "message");
      put_string(out, msg.message);
      break;
    case Kind::terminate:
      put_key(out, "kind");
      put_string(out, "TERMINATE");
      break;
  }
  out += "}\n";
  return out;
}

Message decode_message(std::string_view frame) {
  if (!frame.empty() && frame.back() == '\n') frame.remove_suffix(1);
  if (auto nl = frame.find('\n'); nl != std::string_view::npos) fail(nl, "embedded newline in frame");
  if (frame.empty()) fail(0, "empty frame");

  json doc;
  try {
    doc = json::parse(frame.begin(), frame.end());
  } catch (const json::parse_error& e) {
    // nlohmann reports the 1-based position of the offending character.
    fail(e.byte > 0 ? e.byte - 1 : 0, e.what());
  } catch (const json::exception& e) {
    fail(0, e.what());
  }
  if (!doc.is_object()) fail(0, "frame is not an object");

  try {
    const std::string kind = text(field(doc, "kind"), "kind");
    Message m;
    if (kind == "HELLO") {
      m.kind = Kind::hello;
      const auto& v = field(doc, "version");
      if (!v.is_number_integer()) fail(0, "version must be an integer");
      const auto version = v.get<long long>();
      if (version < 0 || version > 1'000'000) fail(0, "version out of range");
      m.version = static_cast<int>(version);
      m.id = text(field(doc, "id"), "id");
    } else if (kind == "INIT") {
      m.kind = Kind::init;
      const auto& ports = field(doc, "ports");
      if (!ports.is_object()) fail(0, "ports must be an object");
      m.input_ports = port_list(field(ports, "inputs"), "ports.inputs", true);
      m.output_ports = port_list(field(ports, "outputs"), "ports.outputs", false);
      m.params = number_map(field(doc, "params"), "params");
    } else if (kind == "STEP") {
      m.kind = Kind::step;
      m.t = number(field(doc, "t"), "t");
      m.dt = number(field(doc, "dt"), "dt");
      m.values = number_map(field(doc, "inputs"), "inputs");
    } else if (kind == "STEP_OK") {
      m.kind = Kind::step_ok;
      m.t = number(field(doc, "t"), "t");
      m.values = number_map(field(doc, "outputs"), "outputs");
    } else if (kind == "ERROR") {
      m.kind = Kind::error;
      m.message = text(field(doc, "message"), "message");
    } else if (kind == "TERMINATE") {
      m.kind = Kind::terminate;
    } else {
      fail(0, "unknown frame kind '" + kind + "'");
    }
    return m;
  } catch (const json::exception& e) {
    fail(0, e.what());
  }
}

}  // namespace districtsim::protocol
