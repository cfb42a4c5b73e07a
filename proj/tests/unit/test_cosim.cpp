#include "districtsim/cosim.hpp"
#include "districtsim/errors.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cmath>
#include <numeric>
#include <random>

using namespace districtsim;
using namespace districtsim::cosim;

namespace {

// Emits the number of completed steps.
class Counter : public Simulator {
 public:
  explicit Counter(std::string id) { d_.id = std::move(id), d_.outputs = {{"x", "1", 0.0}}; }
  const SimulatorDescriptor& descriptor() const override { return d_; }
  PortValues step(double, double, const PortValues&) override { return {{"x", ++n_}}; }
  void terminate() override { ++terminated; }
  int terminated = 0;

 private:
  SimulatorDescriptor d_;
  double n_ = 0.0;
};

// Reports its input.
class Echo : public Simulator {
 public:
  explicit Echo(std::string id, double def = -1.0) {
    d_.id = std::move(id);
    d_.inputs = {{"in", "1", def}};
    d_.outputs = {{"seen", "1", 0.0}};
  }
  const SimulatorDescriptor& descriptor() const override { return d_; }
  PortValues step(double, double, const PortValues& in) override { return {{"seen", in.at("in")}}; }

 private:
  SimulatorDescriptor d_;
};

// Nonlinear state machine fed by another simulator, sensitive to input ordering bugs.
class Mixer : public Simulator {
 public:
  Mixer(std::string id, double seed) : state_(seed) {
    d_.id = std::move(id);
    d_.inputs = {{"a", "1", 0.25}, {"b", "1", 0.5}};
    d_.outputs = {{"y", "1", 0.0}};
  }
  const SimulatorDescriptor& descriptor() const override { return d_; }
  PortValues step(double t, double dt, const PortValues& in) override {
    state_ = std::fmod(state_ * 3.7 + std::sin(in.at("a")) + in.at("b") * 0.1 + t / (dt * 1000.0), 10.0);
    return {{"y", state_}};
  }

 private:
  SimulatorDescriptor d_;
  double state_;
};

class Failing : public Simulator {
 public:
  explicit Failing(int at) : at_(at) { d_.id = "bad", d_.outputs = {{"z", "1", 0.0}}; }
  const SimulatorDescriptor& descriptor() const override { return d_; }
  PortValues step(double, double, const PortValues&) override {
    if (n_++ == at_) throw NumericError("diverged");
    return {{"z", 1.0}};
  }

 private:
  SimulatorDescriptor d_;
  int at_;
  int n_ = 0;
};

MasterOptions span(double t0, double t_end, double dt = 900.0) {
  MasterOptions o;
  o.t0 = t0;
  o.t_end = t_end;
  o.dt_comm = dt;
  return o;
}

bool bitwise_equal(const RunLog& a, const RunLog& b) {
  if (a.columns() != b.columns() || a.times() != b.times()) return false;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.columns().size(); ++c)
      if (std::bit_cast<std::uint64_t>(a.at(r, c)) != std::bit_cast<std::uint64_t>(b.at(r, c))) return false;
  return true;
}

}  // namespace

TEST(Master, NoSimulators) {
  auto log = master_run({}, {}, span(0.0, 3600.0, 900.0));
  EXPECT_EQ(log.columns().size(), 0u);
}

TEST(Master, SingleSimulatorFrameCount) {
  Counter a("A");
  auto log = master_run({&a}, {}, span(0.0, 86400.0, 900.0));
  EXPECT_EQ(log.rows(), 96u);
  EXPECT_EQ(log.times().front(), 900.0);
  EXPECT_EQ(log.times().back(), 86400.0);
  EXPECT_EQ(a.terminated, 1);
}

TEST(Master, DelayedCounterTrace) {
  Counter a("A");
  Echo b("B");
  Coupling c{{{{"A", "x"}, {"B", "in"}}}};
  auto log = master_run({&a, &b}, c, span(0.0, 5 * 900.0, 900.0));
  ASSERT_EQ(log.rows(), 5u);
  const std::vector<double> ax = {1, 2, 3, 4, 5};
  const std::vector<double> bin = {-1, 1, 2, 3, 4};
  EXPECT_EQ(log.series({"A", "x"}), ax);
  EXPECT_EQ(log.series({"B", "in"}), bin);
  EXPECT_EQ(log.series({"B", "seen"}), bin);
}

TEST(Master, RejectsBadHorizonAndCoupling) {
  Counter a("A");
  Echo b("B");
  EXPECT_THROW(master_run({&a}, {}, span(0.0, 1000.0, 900.0)), InvalidParameter);
  EXPECT_THROW(master_run({&a}, {}, span(0.0, 0.0, 900.0)), InvalidParameter);
  Coupling wrong{{{{"A", "nope"}, {"B", "in"}}}};
  EXPECT_THROW(master_run({&a, &b}, wrong, span(0.0, 900.0, 900.0)), ConfigError);
  Coupling twice{{{{"A", "x"}, {"B", "in"}}, {{"A", "x"}, {"B", "in"}}}};
  EXPECT_THROW(master_run({&a, &b}, twice, span(0.0, 900.0, 900.0)), ConfigError);
  Counter dup("A");
  EXPECT_THROW(master_run({&a, &dup}, {}, span(0.0, 900.0, 900.0)), ConfigError);
}

TEST(Master, FailureNamesStepAndSimulator) {
  Counter a("A");
  Failing bad(3);
  try {
    master_run({&a, &bad}, {}, span(0.0, 10 * 900.0, 900.0));
    FAIL() << "expected SimulationError";
  } catch (const SimulationError& e) {
    EXPECT_EQ(e.step(), 3u);
    EXPECT_EQ(e.simulator(), "bad");
    EXPECT_NE(std::string(e.what()).find("diverged"), std::string::npos);
  }
  EXPECT_EQ(a.terminated, 1);
}

TEST(Exchange, DefaultsAndBroadcast) {
  Counter a("A");
  Echo b1("B1", 7.0), b2("B2"), b3("B3");
  std::vector<const SimulatorDescriptor*> ds = {&a.descriptor(), &b1.descriptor(), &b2.descriptor(), &b3.descriptor()};
  auto first = exchange(nullptr, {}, ds);
  EXPECT_EQ(first["B1"]["in"], 7.0);
  EXPECT_EQ(first["B2"]["in"], -1.0);

  Coupling fan{{{{"A", "x"}, {"B1", "in"}}, {{"A", "x"}, {"B2", "in"}}, {{"A", "x"}, {"B3", "in"}}}};
  PortFrame prev;
  prev.values[{"A", "x"}] = 5.0;
  auto next = exchange(&prev, fan, ds);
  EXPECT_EQ(next["B1"]["in"], 5.0);
  EXPECT_EQ(next["B2"]["in"], 5.0);
  EXPECT_EQ(next["B3"]["in"], 5.0);

  PortFrame empty;
  EXPECT_THROW(exchange(&empty, fan, ds), ProtocolError);
}

TEST(Master, DelaySemanticsProperty) {
  // Random graph of mixers: every consumer input at row k equals its producer output at row k-1.
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 5);
    std::vector<std::unique_ptr<Mixer>> sims;
    for (int i = 0; i < n; ++i) sims.push_back(std::make_unique<Mixer>("M" + std::to_string(i), 0.1 * (i + 1)));
    Coupling c;
    for (int i = 0; i < n; ++i)
      for (const char* port : {"a", "b"})
        if (rng() % 3) c.edges.push_back({{"M" + std::to_string(rng() % n), "y"}, {"M" + std::to_string(i), port}});
    std::vector<Simulator*> ptrs;
    for (auto& s : sims) ptrs.push_back(s.get());
    auto log = master_run(ptrs, c, span(0.0, 20 * 900.0, 900.0));
    for (const auto& e : c.edges) {
      auto prod = log.series(e.from), cons = log.series(e.to);
      for (std::size_t k = 1; k < log.rows(); ++k) EXPECT_EQ(cons[k], prod[k - 1]);
      const double def = e.to.port == "a" ? 0.25 : 0.5;
      EXPECT_EQ(cons[0], def);
    }
  }
}

TEST(Master, ExecutionOrderAndParallelismDoNotChangeLog) {
  auto run = [](std::vector<std::size_t> order, bool parallel) {
    std::vector<std::unique_ptr<Mixer>> sims;
    for (int i = 0; i < 5; ++i) sims.push_back(std::make_unique<Mixer>("M" + std::to_string(i), 0.3 * (i + 1)));
    Coupling c;
    for (int i = 0; i < 5; ++i) {
      c.edges.push_back({{"M" + std::to_string((i + 1) % 5), "y"}, {"M" + std::to_string(i), "a"}});
      c.edges.push_back({{"M" + std::to_string((i + 3) % 5), "y"}, {"M" + std::to_string(i), "b"}});
    }
    std::vector<Simulator*> ptrs;
    for (auto& s : sims) ptrs.push_back(s.get());
    MasterOptions o{0.0, 96 * 900.0, 900.0, parallel, std::move(order)};
    return master_run(ptrs, c, o);
  };
  const auto reference = run({}, false);
  std::vector<std::size_t> perm = {0, 1, 2, 3, 4};
  std::mt19937_64 rng(42);
  for (int i = 0; i < 10; ++i) {
    std::shuffle(perm.begin(), perm.end(), rng);
    EXPECT_TRUE(bitwise_equal(reference, run(perm, false)));
    EXPECT_TRUE(bitwise_equal(reference, run(perm, true)));
  }
  EXPECT_THROW(run({0, 0, 1, 2, 3}, false), InvalidParameter);
}

TEST(RunLog, ColumnsAreSorted) {
  RunLog log({{"b", "x"}, {"a", "y"}, {"a", "x"}});
  EXPECT_EQ(log.columns()[0].str(), "a.x");
  EXPECT_EQ(log.columns()[2].str(), "b.x");
  EXPECT_EQ(log.column({"c", "x"}), RunLog::npos);
}

TEST(Descriptor, DuplicatePortNames) {
  SimulatorDescriptor d{"s", {{"p", "K", 0.0}}, {{"p", "K", 0.0}}};
  EXPECT_THROW(d.validate(), ConfigError);
}
