#include "districtsim/report.hpp"

#include "districtsim/errors.hpp"
#include "districtsim/numfmt.hpp"
#include "districtsim/units.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace districtsim::report {

using nlohmann::json;

namespace {

double step_of(const cosim::RunLog& log) {
  const auto& t = log.times();
  if (t.size() < 2) throw InvalidParameter("run log needs at least two rows to establish its step");
  const double dt = t[1] - t[0];
  if (!(dt > 0.0)) throw InvalidParameter("run log times must increase");
  for (std::size_t k = 1; k < t.size(); ++k)
    if (std::abs((t[k] - t[k - 1]) - dt) > 1e-6 * dt)
      throw InvalidParameter("gap in run log before t = " + format_double(t[k]) + " s");
  return dt;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << text;
  f.close();
  if (!f) throw IoError("failed writing '" + path.string() + "'");
}

struct CsvColumn {
  std::string header;
  cosim::PortKey key;
  double offset = 0.0;  // subtracted, for kelvin -> celsius
};

std::string csv_table(const cosim::RunLog& log, const std::vector<CsvColumn>& columns) {
  std::string out = "time_s";
  std::vector<std::size_t> idx;
  for (const auto& c : columns) {
    out += ',' + c.header;
    idx.push_back(log.column(c.key));
  }
  out += '\n';
  for (std::size_t r = 0; r < log.rows(); ++r) {
    append_double(out, log.times()[r]);
    for (std::size_t i = 0; i < columns.size(); ++i) {
      out += ',';
      if (idx[i] != cosim::RunLog::npos) append_double(out, log.at(r, idx[i]) - columns[i].offset);
    }
    out += '\n';
  }
  return out;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

AnnualIndicators annual_indicators(const cosim::RunLog& log, const std::string& building,
                                   const IndicatorOptions& options) {
  const double dt = step_of(log);
  const double span = static_cast<double>(log.rows()) * dt;
  if (span < options.min_span_s - 1e-6)
    throw InvalidParameter("annual indicators need " + format_double(options.min_span_s / 86400.0) +
                           " days of log, got " + format_double(span / 86400.0));
  const auto t_air = log.series({building, "T_air"});
  const auto ven = log.series({building, "Q_ht_ven"});
  const auto tr = log.series({building, "Q_ht_tr"});
  const auto rad = log.series({building, "Q_radiator"});
  const std::size_t plant = options.grid_id.empty() ? cosim::RunLog::npos : log.column({options.grid_id, "Q_plant"});

  AnnualIndicators a;
  double t_sum = 0.0, ven_j = 0.0, tr_j = 0.0, rad_j = 0.0, plant_j = 0.0;
  for (std::size_t k = 0; k < log.rows(); ++k) {
    const double start = log.times()[k] - dt;
    t_sum += t_air[k];
    rad_j += rad[k] * dt;
    if (plant != cosim::RunLog::npos) plant_j += log.at(k, plant) * dt;
    if (options.window == LossWindow::full_year || scenario::heating_season(start, options.calendar)) {
      ven_j += ven[k] * dt;
      tr_j += tr[k] * dt;
    }
  }
  a.mean_t_air_c = to_celsius(t_sum / static_cast<double>(log.rows()));
  a.q_ht_ven_kwh = joules_to_kwh(ven_j);
  a.q_ht_tr_kwh = joules_to_kwh(tr_j);
  a.q_ht_total_kwh = a.q_ht_ven_kwh + a.q_ht_tr_kwh;
  a.q_radiators_kwh = joules_to_kwh(rad_j);
  a.q_plant_kwh = joules_to_kwh(plant_j);
  return a;
}

const std::vector<std::string>& indicator_names() {
  static const std::vector<std::string> names = {"mean_t_air_c", "q_ht_ven_kwh",    "q_ht_tr_kwh",
                                                 "q_ht_total_kwh", "q_radiators_kwh", "q_plant_kwh"};
  return names;
}

double indicator_value(const AnnualIndicators& ind, const std::string& name) {
  if (name == "mean_t_air_c") return ind.mean_t_air_c;
  if (name == "q_ht_ven_kwh") return ind.q_ht_ven_kwh;
  if (name == "q_ht_tr_kwh") return ind.q_ht_tr_kwh;
  if (name == "q_ht_total_kwh") return ind.q_ht_total_kwh;
  if (name == "q_radiators_kwh") return ind.q_radiators_kwh;
  if (name == "q_plant_kwh") return ind.q_plant_kwh;
  throw InvalidParameter("unknown indicator '" + name + "'");
}

std::vector<ReferenceRecord> parse_references(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source, e.what());
  }
  if (!doc.is_object() || !doc.contains("records") || !doc["records"].is_array())
    throw ConfigError(source + ":/records", "expected an array of reference records");
  std::vector<ReferenceRecord> out;
  const auto& records = doc["records"];
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::string where = source + ":/records/" + std::to_string(i);
    const auto& r = records[i];
    if (!r.is_object() || !r.contains("id") || !r["id"].is_string()) throw ConfigError(where, "record needs an id");
    ReferenceRecord rec;
    rec.id = r["id"].get<std::string>();
    for (auto it = r.begin(); it != r.end(); ++it) {
      if (it.key() == "id") continue;
      if (it.key() == "source") {
        if (!it->is_string()) throw ConfigError(where + "/source", "expected a string");
        rec.source = it->get<std::string>();
        continue;
      }
      const auto& names = indicator_names();
      if (std::find(names.begin(), names.end(), it.key()) == names.end())
        throw ConfigError(where + "/" + it.key(), "unknown indicator");
      if (!it->is_number()) throw ConfigError(where + "/" + it.key(), "expected a number");
      rec.values[it.key()] = it->get<double>();
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<ReferenceRecord> load_references(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(path.string(), "cannot open reference file");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_references(ss.str(), path.filename().string());
}

const ErrorRow* ErrorTable::row(const std::string& indicator) const {
  for (const auto& r : rows)
    if (r.indicator == indicator) return &r;
  return nullptr;
}

ErrorTable compare_reference(const AnnualIndicators& ind, const ReferenceRecord& ref) {
  ErrorTable t{ref.id, ref.source, {}};
  for (const auto& name : indicator_names()) {
    auto it = ref.values.find(name);
    if (it == ref.values.end()) continue;
    ErrorRow row{name, indicator_value(ind, name), it->second, std::nullopt, {}};
    if (it->second == 0.0 || !std::isfinite(it->second))
      row.flag = "reference is zero";
    else
      row.error_pct = 100.0 * (row.simulated - it->second) / it->second;
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string validation_json(const std::vector<BuildingReport>& reports) {
  json buildings = json::array();
  for (const auto& r : reports) {
    json ind;
    for (const auto& name : indicator_names()) ind[name] = indicator_value(r.indicators, name);
    json b = {{"id", r.id}, {"indicators", ind}};
    if (r.errors) {
      json rows = json::array();
      for (const auto& e : r.errors->rows)
        rows.push_back({{"indicator", e.indicator},
                        {"simulated", e.simulated},
                        {"reference", optional_number(e.reference)},
                        {"error_pct", optional_number(e.error_pct)},
                        {"flag", e.flag}});
      b["comparison"] = {{"source", r.errors->source}, {"rows", rows}};
    }
    buildings.push_back(b);
  }
  return json({{"format", "districtsim-validation"}, {"version", 1}, {"buildings", buildings}}).dump(2) + "\n";
}

std::string validation_text(const std::vector<BuildingReport>& reports) {
  std::ostringstream o;
  for (const auto& r : reports) {
    o << "building " << r.id << "\n";
    if (!r.errors) {
      for (const auto& name : indicator_names())
        o << "  " << name << std::string(18 - name.size(), ' ') << format_fixed(indicator_value(r.indicators, name), 2)
          << "\n";
      continue;
    }
    o << "  reference: " << r.errors->source << "\n";
    o << "  indicator         simulated    reference    error %\n";
    for (const auto& e : r.errors->rows) {
      std::string sim = format_fixed(e.simulated, 2), ref = e.reference ? format_fixed(*e.reference, 2) : "-";
      std::string err = e.error_pct ? format_fixed(*e.error_pct, 2) : e.flag;
      o << "  " << e.indicator << std::string(18 - e.indicator.size(), ' ') << std::string(12 - std::min<std::size_t>(12, sim.size()), ' ')
        << sim << ' ' << std::string(12 - std::min<std::size_t>(12, ref.size()), ' ') << ref << "    " << err << "\n";
    }
  }
  return o.str();
}

void emit_outputs(const cosim::RunLog& log, const std::vector<std::string>& building_ids, const std::string& grid_id,
                  const std::vector<BuildingReport>& reports, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "buildings", ec);
  if (ec) throw IoError("cannot create '" + (out_dir / "buildings").string() + "': " + ec.message());

  for (const auto& b : building_ids) {
    write_file(out_dir / "buildings" / (b + ".csv"),
               csv_table(log, {{"T_air_C", {b, "T_air"}, kZeroCelsius},
                               {"T_out_C", {b, "T_out"}, kZeroCelsius},
                               {"T_buffer_C", {b, "T_buffer"}, kZeroCelsius},
                               {"Q_radiator_W", {b, "Q_radiator"}},
                               {"Q_ac_W", {b, "Q_ac"}},
                               {"Q_ht_ven_W", {b, "Q_ht_ven"}},
                               {"Q_ht_tr_W", {b, "Q_ht_tr"}},
                               {"Q_demand_W", {b, "Q_demand"}},
                               {"Q_hx_W", {b, "Q_hx"}}}));
  }
  if (!grid_id.empty()) {
    std::vector<CsvColumn> cols = {{"T_supply_C", {grid_id, "T_supply"}, kZeroCelsius},
                                   {"T_return_C", {grid_id, "T_return"}, kZeroCelsius},
                                   {"m_plant_kg_s", {grid_id, "m_plant"}},
                                   {"Q_plant_W", {grid_id, "Q_plant"}},
                                   {"Q_loss_W", {grid_id, "Q_loss"}},
                                   {"head_Pa", {grid_id, "head"}}};
    for (const auto& b : building_ids) {
      cols.push_back({"T_sup_C[" + b + "]", {grid_id, "T_sup[" + b + "]"}, kZeroCelsius});
      cols.push_back({"T_ret_request_C[" + b + "]", {grid_id, "T_ret_request[" + b + "]"}, kZeroCelsius});
      cols.push_back({"m_flow_kg_s[" + b + "]", {grid_id, "m_flow[" + b + "]"}});
      cols.push_back({"mode[" + b + "]", {grid_id, "mode[" + b + "]"}});
    }
    write_file(out_dir / "grid.csv", csv_table(log, cols));
  }

  std::string ind = "building";
  for (const auto& name : indicator_names()) ind += "," + name;
  ind += '\n';
  for (const auto& r : reports) {
    ind += r.id;
    for (const auto& name : indicator_names()) {
      ind += ',';
      append_double(ind, indicator_value(r.indicators, name));
    }
    ind += '\n';
  }
  write_file(out_dir / "indicators.csv", ind);
  write_file(out_dir / "validation.json", validation_json(reports));
  write_file(out_dir / "validation.txt", validation_text(reports));
}

std::vector<BuildingReport> district_reports(const cosim::RunLog& log, const scenario::ScenarioConfig& config,
                                             const std::vector<ReferenceRecord>& references, LossWindow window) {
  IndicatorOptions opt;
  opt.calendar = config.calendar;
  opt.window = window;
  if (log.column({opt.grid_id, "Q_plant"}) == cosim::RunLog::npos) opt.grid_id.clear();
  std::vector<BuildingReport> out;
  for (const auto& b : config.buildings) {
    BuildingReport r{b.id, annual_indicators(log, b.id, opt), std::nullopt};
    for (const auto& ref : references)
      if (ref.id == b.id) r.errors = compare_reference(r.indicators, ref);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace districtsim::report
