#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "districtsim/errors.hpp"
#include "districtsim/report.hpp"
#include "districtsim/units.hpp"
#include "oracles.hpp"

using namespace districtsim;
using districtsim::cosim::PortFrame;
using districtsim::cosim::PortKey;
using districtsim::cosim::RunLog;

namespace {

const std::vector<PortKey> kColumns = {{"B1", "T_air"},      {"B1", "Q_ht_ven"}, {"B1", "Q_ht_tr"},
                                       {"B1", "Q_radiator"}, {"grid", "Q_plant"}};

template <typename F>
RunLog make_log(double dt, std::size_t rows, F values) {
  RunLog log(kColumns);
  for (std::size_t k = 0; k < rows; ++k) {
    PortFrame f;
    f.time = dt * static_cast<double>(k + 1);
    auto v = values(f.time - dt);
    for (std::size_t c = 0; c < kColumns.size(); ++c) f.values[kColumns[c]] = v[c];
    log.append(f);
  }
  return log;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("districtsim_report_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST(Indicators, ConstantLogHasClosedForm) {
  const double dt = 900.0;
  auto log = make_log(dt, 35040, [](double) { return std::vector<double>{to_kelvin(20.0), 500.0, 1500.0, 800.0, 1000.0}; });
  report::IndicatorOptions opt;
  auto a = report::annual_indicators(log, "B1", opt);
  // 222 heating days at 24 h
  EXPECT_NEAR(a.mean_t_air_c, 20.0, 1e-9);
  EXPECT_NEAR(a.q_ht_ven_kwh, 0.5 * 24 * 222, 1e-6);
  EXPECT_NEAR(a.q_ht_tr_kwh, 1.5 * 24 * 222, 1e-6);
  EXPECT_DOUBLE_EQ(a.q_ht_total_kwh, a.q_ht_ven_kwh + a.q_ht_tr_kwh);
  EXPECT_NEAR(a.q_radiators_kwh, 0.8 * 8760, 1e-6);
  EXPECT_NEAR(a.q_plant_kwh, 8760, 1e-6);

  opt.window = report::LossWindow::full_year;
  a = report::annual_indicators(log, "B1", opt);
  EXPECT_NEAR(a.q_ht_tr_kwh, 1.5 * 8760, 1e-6);
}

TEST(Indicators, ShortOrGappyLogsAreRejected) {
  auto day = make_log(900.0, 96, [](double) { return std::vector<double>(5, 1.0); });
  EXPECT_THROW(report::annual_indicators(day, "B1"), InvalidParameter);

  RunLog gappy(kColumns);
  for (int k = 0; k < 35041; ++k) {
    if (k == 100) continue;
    PortFrame f;
    f.time = 900.0 * (k + 1);
    for (const auto& c : kColumns) f.values[c] = 1.0;
    gappy.append(f);
  }
  EXPECT_THROW(report::annual_indicators(gappy, "B1"), InvalidParameter);

  report::IndicatorOptions opt;
  opt.min_span_s = 0.0;
  EXPECT_THROW(report::annual_indicators(day, "B2", opt), InvalidParameter);
}

TEST(Indicators, StepSumMatchesTrapezoidOfSmoothSignal) {
  const double dt = 900.0;
  auto power = [](double t) { return 2000.0 + 1500.0 * std::cos(2.0 * M_PI * t / (365.0 * 86400.0)) + 300.0 * std::sin(2.0 * M_PI * t / 86400.0); };
  // step means of a smooth signal: midpoint value
  auto log = make_log(dt, 35040, [&](double start) {
    double p = power(start + 0.5 * dt);
    return std::vector<double>{to_kelvin(20.0), p, p, p, p};
  });
  report::IndicatorOptions opt;
  opt.window = report::LossWindow::full_year;
  auto a = report::annual_indicators(log, "B1", opt);

  std::vector<double> fine;
  const double h = 60.0;
  for (int i = 0; i <= 365 * 1440; ++i) fine.push_back(power(h * i));
  const double ref = joules_to_kwh(oracle::trapezoid(fine, h));
  EXPECT_LT(oracle::relative_error(a.q_ht_tr_kwh, ref), 1e-3);
  EXPECT_LT(oracle::relative_error(a.q_plant_kwh, ref), 1e-3);
}

TEST(References, ErrorPercentages) {
  report::AnnualIndicators a;
  a.q_ht_total_kwh = 93.5;
  a.q_ht_tr_kwh = 96.5;
  a.q_ht_ven_kwh = 50.0;
  report::ReferenceRecord ref{"B1", "table", {{"q_ht_total_kwh", 100.0}, {"q_ht_tr_kwh", 100.0}, {"q_ht_ven_kwh", 50.0}, {"q_plant_kwh", 0.0}}};
  auto t = report::compare_reference(a, ref);
  ASSERT_EQ(t.rows.size(), 4u);
  EXPECT_NEAR(*t.row("q_ht_total_kwh")->error_pct, -6.5, 1e-12);
  EXPECT_NEAR(*t.row("q_ht_tr_kwh")->error_pct, -3.5, 1e-12);
  EXPECT_EQ(*t.row("q_ht_ven_kwh")->error_pct, 0.0);
  EXPECT_FALSE(t.row("q_plant_kwh")->error_pct);
  EXPECT_FALSE(t.row("q_plant_kwh")->flag.empty());
  EXPECT_EQ(t.row("mean_t_air_c"), nullptr);
}

TEST(References, ParseAndReject) {
  auto recs = report::parse_references(R"({"records":[{"id":"B1","source":"x","q_ht_tr_kwh":12.5}]})");
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].source, "x");
  EXPECT_EQ(recs[0].values.at("q_ht_tr_kwh"), 12.5);
  EXPECT_THROW(report::parse_references(R"({"records":[{"id":"B1","q_bogus":1}]})"), ConfigError);
  EXPECT_THROW(report::parse_references(R"({"records":[{"q_ht_tr_kwh":1}]})"), ConfigError);
  EXPECT_THROW(report::parse_references("[1,"), ConfigError);
  try {
    report::parse_references(R"({"records":[{"id":"B1"},{"id":"B2","q_ht_tr_kwh":"x"}]})", "refs.json");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("/records/1/q_ht_tr_kwh"), std::string::npos) << e.what();
  }
}

TEST(Outputs, RerunIsByteIdentical) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 3000.0);
  std::vector<std::vector<double>> rows;
  for (int k = 0; k < 200; ++k) rows.push_back({to_kelvin(u(rng) / 100.0), u(rng), u(rng), u(rng), u(rng)});
  std::size_t i = 0;
  auto log = make_log(900.0, rows.size(), [&](double) { return rows[i++]; });
  report::IndicatorOptions opt;
  opt.min_span_s = 0.0;
  std::vector<report::BuildingReport> reps{{"B1", report::annual_indicators(log, "B1", opt), std::nullopt}};

  auto a = scratch("a"), b = scratch("b");
  report::emit_outputs(log, {"B1"}, "grid", reps, a);
  report::emit_outputs(log, {"B1"}, "grid", reps, b);
  for (const char* f : {"buildings/B1.csv", "grid.csv", "indicators.csv", "validation.json", "validation.txt"}) {
    ASSERT_TRUE(std::filesystem::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  auto csv = slurp(a / "buildings/B1.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "time_s,T_air_C,T_out_C,T_buffer_C,Q_radiator_W,Q_ac_W,Q_ht_ven_W,Q_ht_tr_W,Q_demand_W,Q_hx_W");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 201);
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

TEST(Outputs, EmptyLogWritesHeadersOnly) {
  RunLog log(kColumns);
  auto dir = scratch("empty");
  report::emit_outputs(log, {"B1"}, "grid", {}, dir);
  auto csv = slurp(dir / "buildings/B1.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1);
  auto grid = slurp(dir / "grid.csv");
  EXPECT_EQ(std::count(grid.begin(), grid.end(), '\n'), 1);
  EXPECT_EQ(slurp(dir / "indicators.csv"), "building,mean_t_air_c,q_ht_ven_kwh,q_ht_tr_kwh,q_ht_total_kwh,q_radiators_kwh,q_plant_kwh\n");
  std::filesystem::remove_all(dir);
}

TEST(Outputs, UnwritableDirectoryNamesPath) {
  RunLog log(kColumns);
  auto blocker = scratch("blocker");
  { std::ofstream(blocker) << "x"; }
  try {
    report::emit_outputs(log, {"B1"}, "grid", {}, blocker / "out");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find(blocker.string()), std::string::npos);
  }
  std::filesystem::remove(blocker);
}

TEST(Outputs, ValidationTextShowsErrors) {
  report::AnnualIndicators a;
  a.q_ht_total_kwh = 93.5;
  report::ReferenceRecord ref{"B1", "table", {{"q_ht_total_kwh", 100.0}}};
  std::vector<report::BuildingReport> reps{{"B1", a, report::compare_reference(a, ref)}};
  auto text = report::validation_text(reps);
  EXPECT_NE(text.find("-6.50"), std::string::npos) << text;
  auto js = report::validation_json(reps);
  EXPECT_NE(js.find("\"error_pct\": -6.5"), std::string::npos) << js;
}
