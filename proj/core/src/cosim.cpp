#include "districtsim/cosim.hpp"

#include "districtsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <future>
#include <set>

namespace districtsim::cosim {

void SimulatorDescriptor::validate() const {
  if (id.empty()) throw ConfigError("", "simulator id must not be empty");
  std::set<std::string> names;
  for (const auto* ports : {&inputs, &outputs})
    for (const auto& p : *ports) {
      if (p.name.empty()) throw ConfigError(id, "empty port name");
      if (!names.insert(p.name).second) throw ConfigError(id, "duplicate port '" + p.name + "'");
    }
}

const PortSpec* SimulatorDescriptor::input(const std::string& name) const {
  for (const auto& p : inputs)
    if (p.name == name) return &p;
  return nullptr;
}

const PortSpec* SimulatorDescriptor::output(const std::string& name) const {
  for (const auto& p : outputs)
    if (p.name == name) return &p;
  return nullptr;
}

namespace {

const SimulatorDescriptor* find(const std::vector<const SimulatorDescriptor*>& ds, const std::string& id) {
  for (const auto* d : ds)
    if (d->id == id) return d;
  return nullptr;
}

}  // namespace

void Coupling::validate(const std::vector<const SimulatorDescriptor*>& descriptors) const {
  std::set<PortKey> consumers;
  for (const auto& e : edges) {
    const auto* src = find(descriptors, e.from.simulator);
    const auto* dst = find(descriptors, e.to.simulator);
    if (!src || !src->output(e.from.port)) throw ConfigError(e.from.str(), "coupling source is not a declared output");
    if (!dst || !dst->input(e.to.port)) throw ConfigError(e.to.str(), "coupling target is not a declared input");
    if (!consumers.insert(e.to).second) throw ConfigError(e.to.str(), "input has more than one producer");
  }
}

std::map<std::string, PortValues> exchange(const PortFrame* previous, const Coupling& coupling,
                                           const std::vector<const SimulatorDescriptor*>& descriptors) {
  std::map<std::string, PortValues> inputs;
  for (const auto* d : descriptors) {
    auto& in = inputs[d->id];
    for (const auto& p : d->inputs) in[p.name] = p.default_value;
  }
  if (!previous) return inputs;
  for (const auto& e : coupling.edges) {
    auto it = previous->values.find(e.from);
    if (it == previous->values.end()) throw ProtocolError("no value for " + e.from.str() + " in previous frame");
    inputs[e.to.simulator][e.to.port] = it->second;
  }
  return inputs;
}

RunLog::RunLog(std::vector<PortKey> columns) : columns_(std::move(columns)) {
  std::sort(columns_.begin(), columns_.end());
}

std::size_t RunLog::column(const PortKey& key) const {
  auto it = std::lower_bound(columns_.begin(), columns_.end(), key);
  return (it != columns_.end() && *it == key) ? static_cast<std::size_t>(it - columns_.begin()) : npos;
}

std::vector<double> RunLog::series(const PortKey& key) const {
  const std::size_t c = column(key);
  if (c == npos) throw InvalidParameter("no column " + key.str() + " in run log");
  std::vector<double> out(rows());
  for (std::size_t r = 0; r < rows(); ++r) out[r] = at(r, c);
  return out;
}

void RunLog::append(const PortFrame& frame) {
  if (frame.values.size() != columns_.size()) throw ProtocolError("frame does not match log columns");
  times_.push_back(frame.time);
  std::size_t c = 0;
  for (const auto& [key, v] : frame.values) {
    if (!(key == columns_[c++])) throw ProtocolError("frame does not match log columns at " + key.str());
    values_.push_back(v);
  }
}

RunLog master_run(const std::vector<Simulator*>& simulators, const Coupling& coupling, const MasterOptions& options) {
  if (!(options.dt_comm > 0.0)) throw InvalidParameter("communication step must be > 0");
  if (!(options.t_end > options.t0)) throw InvalidParameter("end time must be after start time");
  const double span = (options.t_end - options.t0) / options.dt_comm;
  const auto n_steps = static_cast<std::size_t>(std::llround(span));
  if (std::abs(span - static_cast<double>(n_steps)) > 1e-9 * std::max(1.0, span))
    throw InvalidParameter("horizon is not a whole number of communication steps");

  std::vector<const SimulatorDescriptor*> descriptors;
  std::set<std::string> ids;
  std::vector<PortKey> columns;
  for (auto* s : simulators) {
    const auto& d = s->descriptor();
    d.validate();
    if (!ids.insert(d.id).second) throw ConfigError(d.id, "duplicate simulator id");
    descriptors.push_back(&d);
    for (const auto* ports : {&d.inputs, &d.outputs})
      for (const auto& p : *ports) columns.push_back({d.id, p.name});
  }
  coupling.validate(descriptors);

  std::vector<std::size_t> order = options.order;
  if (order.empty())
    for (std::size_t i = 0; i < simulators.size(); ++i) order.push_back(i);
  {
    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i)
      if (sorted.size() != simulators.size() || sorted[i] != i)
        throw InvalidParameter("execution order is not a permutation of the simulators");
  }

  RunLog log(columns);
  auto terminate_all = [&] {
    for (auto* s : simulators) {
      try {
        s->terminate();
      } catch (...) {
      }
    }
  };

  PortFrame previous;
  for (std::size_t k = 0; k < n_steps; ++k) {
    const double t = options.t0 + static_cast<double>(k) * options.dt_comm;
    std::map<std::string, PortValues> inputs;
    try {
      inputs = exchange(k == 0 ? nullptr : &previous, coupling, descriptors);
    } catch (const std::exception& e) {
      terminate_all();
      throw SimulationError(k, "master", e.what());
    }

    std::vector<PortValues> outputs(simulators.size());
    std::vector<std::exception_ptr> failures(simulators.size());
    auto run_one = [&](std::size_t i) {
      try {
        outputs[i] = simulators[i]->step(t, options.dt_comm, inputs[descriptors[i]->id]);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    };
    if (options.parallel && simulators.size() > 1) {
      std::vector<std::future<void>> jobs;
      for (std::size_t i : order) jobs.push_back(std::async(std::launch::async, run_one, i));
      for (auto& j : jobs) j.get();
    } else {
      for (std::size_t i : order) run_one(i);
    }

    PortFrame frame;
    frame.time = t + options.dt_comm;
    for (std::size_t i = 0; i < simulators.size(); ++i) {
      const auto& d = *descriptors[i];
      std::string failure;
      if (failures[i]) {
        try {
          std::rethrow_exception(failures[i]);
        } catch (const std::exception& e) {
          failure = e.what();
        } catch (...) {
          failure = "unknown error";
        }
      } else {
        for (const auto& p : d.outputs) {
          auto it = outputs[i].find(p.name);
          if (it == outputs[i].end()) {
            failure = "missing output '" + p.name + "'";
            break;
          }
          frame.values[{d.id, p.name}] = it->second;
        }
      }
      if (!failure.empty()) {
        terminate_all();
        throw SimulationError(k, d.id, failure);
      }
      for (const auto& [port, v] : inputs[d.id]) frame.values[{d.id, port}] = v;
    }
    log.append(frame);
    previous = std::move(frame);
  }
  terminate_all();
  return log;
}

}  // namespace districtsim::cosim
