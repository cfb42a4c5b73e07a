#include "districtsim/scenario.hpp"

#include "districtsim/errors.hpp"
#include "districtsim/units.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace districtsim::scenario {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_number(const std::string& s, double& v) {
  if (s.empty()) return false;
  const char* b = s.data();
  if (*b == '+') ++b;
  auto [p, ec] = std::from_chars(b, s.data() + s.size(), v);
  return ec == std::errc{} && p == s.data() + s.size() && std::isfinite(v);
}

struct Stamp {
  int year, month, day;
  long long seconds_of_day;
};

bool parse_stamp(const std::string& s, Stamp& out) {
  // YYYY-MM-DD[T| ]HH:MM[:SS][Z]
  auto digits = [&](std::size_t pos, std::size_t n, int& v) {
    if (pos + n > s.size()) return false;
    v = 0;
    for (std::size_t i = pos; i < pos + n; ++i) {
      if (s[i] < '0' || s[i] > '9') return false;
      v = v * 10 + (s[i] - '0');
    }
    return true;
  };
  int hh = 0, mm = 0, ss = 0;
  if (!digits(0, 4, out.year) || s.size() < 16 || s[4] != '-' || !digits(5, 2, out.month) || s[7] != '-' ||
      !digits(8, 2, out.day) || (s[10] != 'T' && s[10] != ' ') || !digits(11, 2, hh) || s[13] != ':' ||
      !digits(14, 2, mm))
    return false;
  std::size_t pos = 16;
  if (pos < s.size() && s[pos] == ':') {
    if (!digits(pos + 1, 2, ss)) return false;
    pos += 3;
  }
  if (pos < s.size() && s[pos] == 'Z') ++pos;
  if (pos != s.size()) return false;
  const std::chrono::year_month_day ymd{std::chrono::year{out.year}, std::chrono::month{unsigned(out.month)},
                                        std::chrono::day{unsigned(out.day)}};
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 59) return false;
  out.seconds_of_day = hh * 3600LL + mm * 60LL + ss;
  return true;
}

double seconds_since_year_start(const Stamp& s, int ref_year) {
  using namespace std::chrono;
  const sys_days day{year{s.year} / month{unsigned(s.month)} / std::chrono::day{unsigned(s.day)}};
  const sys_days start{year{ref_year} / January / 1};
  return static_cast<double>((day - start).count()) * kSecondsPerDay + static_cast<double>(s.seconds_of_day);
}

// Reads a header line plus uniformly spaced data rows. Calls `row(fields, line_no)` per data row.
template <class RowFn>
void read_series(std::istream& in, const std::string& source, std::size_t min_fields, double& t0, double& interval,
                 std::vector<std::string>& header, RowFn&& row) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  int ref_year = 0;
  double prev_t = 0.0;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv(line);
    if (!have_header) {
      if (fields.size() < min_fields) throw IngestionError(line_no, source + ": header needs at least " + std::to_string(min_fields) + " columns");
      header = fields;
      have_header = true;
      continue;
    }
    if (fields.size() < min_fields) throw IngestionError(line_no, source + ": expected " + std::to_string(min_fields) + " columns");
    Stamp st{};
    if (!parse_stamp(fields[0], st)) throw IngestionError(line_no, source + ": bad timestamp '" + fields[0] + "'");
    if (n == 0) {
      ref_year = st.year;
      if (std::chrono::year{ref_year}.is_leap())
        throw IngestionError(line_no, source + ": leap years are not supported, the simulated year has 365 days");
    }
    const double t = seconds_since_year_start(st, ref_year);
    if (n == 0) {
      t0 = t;
    } else if (n == 1) {
      interval = t - prev_t;
      if (!(interval > 0.0) || std::fmod(900.0, interval) != 0.0)
        throw IngestionError(line_no, source + ": sampling interval must be positive and divide 900 s");
    } else if (t - prev_t != interval) {
      throw IngestionError(line_no, source + ": irregular timestamp, expected a " + std::to_string(interval) + " s step");
    }
    row(fields, line_no);
    prev_t = t;
    ++n;
  }
  if (!have_header) throw IngestionError(1, source + ": empty file");
  if (n == 0) throw IngestionError(line_no + 1, source + ": no samples");
  if (n == 1) interval = 900.0;
}

std::size_t sample_index(double t0, double interval, std::size_t n, double t_s, const char* what) {
  const double k = std::floor((t_s - t0) / interval + 1e-9);
  if (k < 0.0 || k >= static_cast<double>(n))
    throw InvalidParameter(std::string(what) + " does not cover t = " + std::to_string(t_s) + " s");
  return static_cast<std::size_t>(k);
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IngestionError(0, "cannot open '" + path.string() + "'");
  return f;
}

}  // namespace

// ---------------------------------------------------------------- weather

std::size_t WeatherSeries::index(double t_s) const { return sample_index(t0, interval_s, size(), t_s, "weather"); }
double WeatherSeries::t_out_k(double t_s) const { return to_kelvin(t_out_c[index(t_s)]); }
double WeatherSeries::ghi(double t_s) const { return ghi_w_m2[index(t_s)]; }

double WeatherSeries::mean_t_out_c() const {
  if (t_out_c.empty()) return 0.0;
  double s = 0.0;
  for (double v : t_out_c) s += v;
  return s / static_cast<double>(t_out_c.size());
}

WeatherSeries parse_weather(std::istream& in, const std::string& source) {
  WeatherSeries w;
  std::vector<std::string> header;
  read_series(in, source, 3, w.t0, w.interval_s, header, [&](const std::vector<std::string>& f, std::size_t row) {
    double t, g;
    if (!parse_number(f[1], t) || t < -90.0 || t > 70.0)
      throw IngestionError(row, source + ": bad temperature '" + f[1] + "'");
    if (!parse_number(f[2], g) || g < 0.0) throw IngestionError(row, source + ": bad irradiance '" + f[2] + "'");
    w.t_out_c.push_back(t);
    w.ghi_w_m2.push_back(g);
  });
  return w;
}

WeatherSeries load_weather(const std::filesystem::path& path) {
  auto f = open(path);
  return parse_weather(f, path.filename().string());
}

WeatherSeries adjust_mean(WeatherSeries series, double target_mean_c) {
  if (series.t_out_c.empty()) throw IngestionError(0, "cannot adjust an empty weather series");
  const double offset = target_mean_c - series.mean_t_out_c();
  for (double& v : series.t_out_c) v += offset;
  return series;
}

WeatherSeries load_weather_adjusted(const std::filesystem::path& path, double target_mean_c) {
  return adjust_mean(load_weather(path), target_mean_c);
}

// ---------------------------------------------------------------- appliances

std::size_t ApplianceProfile::index(double t_s) const {
  return sample_index(t0, interval_s, size(), t_s, "appliance profile");
}

double ApplianceProfile::electric_w(double t_s) const {
  const std::size_t row = index(t_s) * categories.size();
  double s = 0.0;
  for (std::size_t c = 0; c < categories.size(); ++c) s += power_w[row + c];
  return s;
}

double ApplianceProfile::heat_w(double t_s, const equipment::ApplianceRatios& ratios) const {
  const std::size_t row = index(t_s) * categories.size();
  double s = 0.0;
  for (std::size_t c = 0; c < categories.size(); ++c) s += ratios.ratio(categories[c]) * power_w[row + c];
  return s;
}

std::map<std::string, double> ApplianceProfile::annual_kwh() const {
  std::map<std::string, double> out;
  for (std::size_t r = 0; r < size(); ++r)
    for (std::size_t c = 0; c < categories.size(); ++c)
      out[categories[c]] += joules_to_kwh(power_w[r * categories.size() + c] * interval_s);
  return out;
}

ApplianceProfile parse_appliances(std::istream& in, const equipment::ApplianceRatios& ratios,
                                  const std::string& source) {
  ApplianceProfile p;
  std::vector<std::string> header;
  bool checked = false;
  read_series(in, source, 2, p.t0, p.interval_s, header, [&](const std::vector<std::string>& f, std::size_t row) {
    if (!checked) {
      std::set<std::string> seen;
      for (std::size_t c = 1; c < header.size(); ++c) {
        if (!ratios.contains(header[c])) throw IngestionError(1, source + ": unknown appliance category '" + header[c] + "'");
        if (!seen.insert(header[c]).second) throw IngestionError(1, source + ": duplicate category '" + header[c] + "'");
        p.categories.push_back(header[c]);
      }
      checked = true;
    }
    if (f.size() != header.size()) throw IngestionError(row, source + ": expected " + std::to_string(header.size()) + " columns");
    for (std::size_t c = 1; c < f.size(); ++c) {
      double v;
      if (!parse_number(f[c], v) || v < 0.0) throw IngestionError(row, source + ": bad power '" + f[c] + "'");
      p.power_w.push_back(v);
    }
  });
  return p;
}

ApplianceProfile load_appliances(const std::filesystem::path& path, const equipment::ApplianceRatios& ratios) {
  auto f = open(path);
  return parse_appliances(f, ratios, path.filename().string());
}

// ---------------------------------------------------------------- calendar

int day_of_year(int month, int day) {
  static constexpr int kDays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month < 1 || month > 12 || day < 1 || day > kDays[month - 1])
    throw InvalidParameter("invalid calendar date " + std::to_string(month) + "-" + std::to_string(day));
  int doy = day - 1;
  for (int m = 0; m < month - 1; ++m) doy += kDays[m];
  return doy;
}

void HeatingCalendar::validate() const {
  if (day_of_year(spring_end_month, spring_end_day) >= day_of_year(autumn_start_month, autumn_start_day))
    throw InvalidParameter("heating season must end in spring before it restarts in autumn");
}

bool heating_season(double t_s, const HeatingCalendar& calendar) {
  const long long day = static_cast<long long>(std::floor(t_s / kSecondsPerDay));
  const long long doy = ((day % kDaysPerYear) + kDaysPerYear) % kDaysPerYear;
  return doy <= day_of_year(calendar.spring_end_month, calendar.spring_end_day) ||
         doy >= day_of_year(calendar.autumn_start_month, calendar.autumn_start_day);
}

// ---------------------------------------------------------------- topology

dhnet::NetworkTopology parse_topology(std::istream& in, const std::string& source) {
  std::vector<dhnet::Node> nodes;
  std::vector<dhnet::Pipe> pipes;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = source + ":" + std::to_string(line_no);
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    auto num = [&](std::size_t i, const char* what) {
      double v;
      if (!parse_number(tok[i], v)) throw ConfigError(where, std::string("bad ") + what + " '" + tok[i] + "'");
      return v;
    };
    if (tok[0] == "node") {
      if (tok.size() < 5 || tok.size() > 6) throw ConfigError(where, "expected: node <id> <kind> <x> <y> [building]");
      dhnet::Node n;
      n.id = tok[1];
      if (tok[2] == "source") n.kind = dhnet::NodeKind::source;
      else if (tok[2] == "junction") n.kind = dhnet::NodeKind::junction;
      else if (tok[2] == "substation") n.kind = dhnet::NodeKind::substation;
      else throw ConfigError(where, "unknown node kind '" + tok[2] + "'");
      n.x = num(3, "x");
      n.y = num(4, "y");
      if (tok.size() == 6) {
        if (n.kind != dhnet::NodeKind::substation) throw ConfigError(where, "only substations bind a building");
        n.building = tok[5];
      } else if (n.kind == dhnet::NodeKind::substation) {
        throw ConfigError(where, "substation '" + n.id + "' needs a building id");
      }
      nodes.push_back(std::move(n));
    } else if (tok[0] == "pipe") {
      if (tok.size() < 7 || tok.size() > 8)
        throw ConfigError(where, "expected: pipe <id> <from> <to> <length_m> <u_prime_W_per_mK> <diameter_m> [roughness_m]");
      dhnet::Pipe p;
      p.id = tok[1];
      p.from = tok[2];
      p.to = tok[3];
      p.length = num(4, "length");
      p.u_prime = num(5, "loss coefficient");
      p.diameter = num(6, "diameter");
      p.roughness = tok.size() == 8 ? num(7, "roughness") : 0.0;
      pipes.push_back(std::move(p));
    } else {
      throw ConfigError(where, "unknown record '" + tok[0] + "'");
    }
  }
  try {
    return dhnet::NetworkTopology(std::move(nodes), std::move(pipes));
  } catch (const TopologyError& e) {
    throw ConfigError(source, e.what());
  }
}

dhnet::NetworkTopology load_topology(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(path.string(), "cannot open topology file");
  return parse_topology(f, path.filename().string());
}

// ---------------------------------------------------------------- scenario config

const BuildingConfig& ScenarioConfig::building(const std::string& id) const {
  for (const auto& b : buildings)
    if (b.id == id) return b;
  throw ConfigError("/buildings", "no building '" + id + "'");
}

ConstructionClass construction_class(const std::string& name) {
  if (name == "very_light") return {80000.0, 2.5};
  if (name == "light") return {110000.0, 2.5};
  if (name == "medium") return {165000.0, 2.5};
  if (name == "heavy") return {260000.0, 3.0};
  if (name == "very_heavy") return {370000.0, 3.5};
  throw InvalidParameter("unknown construction class '" + name + "'");
}

double window_aperture(double g_value) {
  // Non-perpendicular incidence 0.9, frame 0.7, external shading 0.6.
  return g_value * 0.9 * 0.7 * 0.6;
}

namespace {

std::string pointer_escape(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

// Strict object reader: remembers which keys were read so leftovers can be reported.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "/" : path_, "expected an object");
  }

  const std::string& path() const { return path_; }
  std::string at(const std::string& key) const { return path_ + "/" + pointer_escape(key); }
  bool has(const std::string& key) const { return j_.contains(key); }
  const json& raw() const { return j_; }

  const json& get(const std::string& key) {
    used_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) throw ConfigError(at(key), "missing required key");
    return *it;
  }

  double number(const std::string& key) {
    const json& v = get(key);
    if (!v.is_number()) throw ConfigError(at(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(at(key), "number out of range");
    return d;
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : (used_.insert(key), fallback); }

  int integer(const std::string& key, int fallback) {
    if (!has(key)) return fallback;
    const json& v = get(key);
    if (!v.is_number_integer()) throw ConfigError(at(key), "expected an integer");
    const auto i = v.get<long long>();
    if (i < -1000000 || i > 1000000) throw ConfigError(at(key), "integer out of range");
    return static_cast<int>(i);
  }

  std::string string(const std::string& key) {
    const json& v = get(key);
    if (!v.is_string()) throw ConfigError(at(key), "expected a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    return has(key) ? string(key) : (used_.insert(key), fallback);
  }

  bool flag(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = get(key);
    if (!v.is_number_integer() || (v.get<long long>() != 0 && v.get<long long>() != 1))
      throw ConfigError(at(key), "flag must be 0 or 1");
    return v.get<long long>() == 1;
  }

  Reader object(const std::string& key) { return Reader(get(key), at(key)); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw ConfigError(at(it.key()), "unknown key '" + it.key() + "'");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

std::pair<int, int> parse_month_day(const std::string& text, const std::string& where) {
  int m = 0, d = 0;
  if (text.size() != 5 || text[2] != '-' || std::sscanf(text.c_str(), "%2d-%2d", &m, &d) != 2)
    throw ConfigError(where, "expected MM-DD");
  try {
    day_of_year(m, d);
  } catch (const InvalidParameter& e) {
    throw ConfigError(where, e.what());
  }
  return {m, d};
}

std::string format_month_day(int m, int d) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%02d-%02d", m, d);
  return buf;
}

template <class Fn>
void guard(const std::string& where, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(where, e.what());
  }
}

const std::map<std::string, double>& default_orientation_factors() {
  static const std::map<std::string, double> f = {{"E", 0.55}, {"H", 1.0}, {"N", 0.35}, {"S", 0.85}, {"W", 0.55}};
  return f;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative()) path = base / path;
  return std::filesystem::absolute(path).lexically_normal();
}

BuildingConfig parse_building(Reader r, const ScenarioConfig& sc) {
  BuildingConfig b;
  b.id = r.string("id");
  if (b.id.empty() || b.id.find_first_of(" \t[].,") != std::string::npos)
    throw ConfigError(r.at("id"), "building id must be non-empty without spaces, brackets, dots or commas");
  b.label = r.string("label", "");
  b.construction_class = r.string("construction_class", "medium");
  ConstructionClass cls{};
  guard(r.at("construction_class"), [&] { cls = construction_class(b.construction_class); });

  auto& p = b.params;
  p.floor_area_m2 = r.number("floor_area_m2");
  p.storeys = r.integer("storeys", 1);
  p.f_ms = r.number("f_ms", cls.f_ms);
  p.f_red = r.number("f_red", 1.0);
  p.delta_u_tbr = r.number("delta_u_tbr", 0.1);
  p.air_change_rate = r.number("air_change_rate", 0.6);
  p.ceiling_height_m = r.number("ceiling_height_m", 2.5);
  p.heat_capacity_j_per_k = r.number("heat_capacity_j_per_k", cls.capacity_per_m2 * p.floor_area_m2 * p.storeys);
  auto check = [&](const char* key, bool ok, const char* what) {
    if (!ok) throw ConfigError(r.at(key), what);
  };
  check("floor_area_m2", p.floor_area_m2 > 0.0, "must be > 0");
  check("storeys", p.storeys >= 1, "must be >= 1");
  check("f_ms", p.f_ms > 0.0, "must be > 0");
  check("f_red", p.f_red > 0.0 && p.f_red <= 1.0, "must be in (0, 1]");
  check("delta_u_tbr", p.delta_u_tbr >= 0.0, "must be >= 0");
  check("air_change_rate", p.air_change_rate >= 0.0, "must be >= 0");
  check("ceiling_height_m", p.ceiling_height_m > 0.0, "must be > 0");
  check("heat_capacity_j_per_k", p.heat_capacity_j_per_k > 0.0, "must be > 0");

  if (r.has("modules")) {
    Reader m = r.object("modules");
    auto& f = p.flags;
    f.radiator = m.flag("radiator", f.radiator);
    f.ventilation = m.flag("ventilation", f.ventilation);
    f.air_conditioner = m.flag("air_conditioner", f.air_conditioner);
    f.appliances = m.flag("appliances", f.appliances);
    f.buffer_tank = m.flag("buffer_tank", f.buffer_tank);
    f.dhw = m.flag("dhw", f.dhw);
    f.pv = m.flag("pv", f.pv);
    f.battery = m.flag("battery", f.battery);
    f.heat_pump = m.flag("heat_pump", f.heat_pump);
    for (auto [key, on] : {std::pair{"pv", f.pv}, {"battery", f.battery}, {"heat_pump", f.heat_pump}})
      if (on) throw ConfigError(m.at(key), std::string("module '") + key + "' is not available in this engine");
    if (f.radiator && !f.buffer_tank) throw ConfigError(m.at("radiator"), "the radiator draws from the buffer tank");
    m.finish();
  }

  const json& surfaces = r.get("surfaces");
  if (!surfaces.is_array() || surfaces.empty()) throw ConfigError(r.at("surfaces"), "expected a non-empty array");
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    Reader s(surfaces[i], r.at("surfaces") + "/" + std::to_string(i));
    envelope::SurfaceSpec spec;
    guard(s.at("kind"), [&] { spec.kind = envelope::surface_kind_from_string(s.string("kind")); });
    spec.name = s.string("name", std::string(envelope::to_string(spec.kind)) + "_" + std::to_string(i));
    spec.area_m2 = s.number("area_m2");
    spec.u_value = s.number("u_value");
    spec.adjustment_b = envelope::adjustment_factor(spec.kind);
    if (spec.kind == envelope::SurfaceKind::window) {
      if (s.has("solar_aperture")) {
        spec.solar_aperture = s.number("solar_aperture");
      } else {
        spec.solar_aperture = window_aperture(s.number("g_value"));
      }
      if (s.has("solar_factor")) {
        spec.solar_factor = s.number("solar_factor");
      } else {
        const std::string o = s.string("orientation");
        auto it = sc.orientation_factors.find(o);
        if (it == sc.orientation_factors.end()) throw ConfigError(s.at("orientation"), "unknown orientation '" + o + "'");
        spec.solar_factor = it->second;
      }
    } else {
      spec.solar_aperture = 0.0;
      spec.solar_factor = s.number("solar_factor", 1.0);
    }
    guard(s.path(), [&] { spec.validate(); });
    s.finish();
    p.surfaces.push_back(std::move(spec));
  }

  if (r.has("radiator")) {
    Reader x = r.object("radiator");
    b.radiator.max_mass_flow = x.number("max_mass_flow_kg_s", b.radiator.max_mass_flow);
    b.radiator.ua_emit = x.number("ua_w_per_k", b.radiator.ua_emit);
    b.radiator.proportional_band = x.number("proportional_band_k", b.radiator.proportional_band);
    guard(x.path(), [&] { b.radiator.validate(); });
    x.finish();
  }
  if (r.has("tank")) {
    Reader x = r.object("tank");
    auto& t = b.tank;
    t.water_mass = x.number("water_mass_kg", t.water_mass);
    t.set_point = to_kelvin(x.number("set_point_c", to_celsius(t.set_point)));
    t.band_low = to_kelvin(x.number("band_low_c", to_celsius(t.band_low)));
    t.band_high = to_kelvin(x.number("band_high_c", to_celsius(t.band_high)));
    t.t_buffer = to_kelvin(x.number("initial_c", to_celsius(t.set_point)));
    t.ua_loss = x.number("ua_loss_w_per_k", t.ua_loss);
    x.finish();
  }
  guard(r.at("tank"), [&] { b.tank.validate(); });
  if (r.has("ac")) {
    Reader x = r.object("ac");
    b.ac.capacity = x.number("capacity_w", b.ac.capacity);
    b.ac.deadband = x.number("deadband_k", b.ac.deadband);
    b.ac.allow_heating = x.flag("heating", b.ac.allow_heating);
    b.ac.allow_cooling = x.flag("cooling", b.ac.allow_cooling);
    if (!(b.ac.capacity >= 0.0) || !(b.ac.deadband >= 0.0))
      throw ConfigError(x.path(), "air conditioner capacity and deadband must be >= 0");
    x.finish();
  }
  if (r.has("hx")) {
    Reader x = r.object("hx");
    b.hx.approach = x.number("approach_k", b.hx.approach);
    guard(x.path(), [&] { b.hx.validate(); });
    x.finish();
  }
  if (r.has("demand")) {
    Reader x = r.object("demand");
    b.demand.tau_s = x.number("tau_s", b.demand.tau_s);
    b.demand.k_p = x.number("k_p", b.demand.k_p);
    if (!(b.demand.tau_s > 0.0) || !(b.demand.k_p >= 0.0)) throw ConfigError(x.path(), "tau_s must be > 0, k_p >= 0");
    x.finish();
  }
  guard(r.path(), [&] { envelope::derive_conductances(p); });
  r.finish();
  return b;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("byte " + std::to_string(e.byte), e.what());
  }
  Reader r(doc, "");
  ScenarioConfig c;
  c.name = r.string("name");

  {
    Reader f = r.object("files");
    c.weather_file = resolve(base_dir, f.string("weather"));
    c.appliance_file = resolve(base_dir, f.string("appliances"));
    const std::string topo = f.string("topology", "");
    if (!topo.empty()) c.topology_file = resolve(base_dir, topo);
    const std::string ref = f.string("references", "");
    if (!ref.empty()) c.reference_file = resolve(base_dir, ref);
    f.finish();
  }
  if (r.has("horizon")) {
    Reader h = r.object("horizon");
    c.t0 = h.number("start_s", c.t0);
    c.t_end = h.number("end_s", c.t_end);
    c.dt_comm = h.number("dt_comm_s", c.dt_comm);
    if (!(c.dt_comm > 0.0) || !(c.t_end > c.t0)) throw ConfigError(h.path(), "need dt_comm_s > 0 and end_s > start_s");
    const double steps = (c.t_end - c.t0) / c.dt_comm;
    if (steps != std::floor(steps)) throw ConfigError(h.path(), "horizon must be a whole number of communication steps");
    h.finish();
  }
  c.weather_target_mean_c = r.number("weather_target_mean_c", c.weather_target_mean_c);
  c.set_point_k = to_kelvin(r.number("set_point_c", to_celsius(c.set_point_k)));
  if (r.has("heating_season")) {
    Reader h = r.object("heating_season");
    auto [sm, sd] = parse_month_day(h.string("spring_end", "05-10"), h.at("spring_end"));
    auto [am, ad] = parse_month_day(h.string("autumn_start", "10-01"), h.at("autumn_start"));
    c.calendar = {sm, sd, am, ad};
    guard(h.path(), [&] { c.calendar.validate(); });
    h.finish();
  }

  c.orientation_factors = default_orientation_factors();
  if (r.has("orientation_factors")) {
    Reader o = r.object("orientation_factors");
    for (const auto& [key, def] : default_orientation_factors()) {
      c.orientation_factors[key] = o.number(key, def);
      if (c.orientation_factors[key] < 0.0) throw ConfigError(o.at(key), "must be >= 0");
    }
    o.finish();
  }

  c.appliance_ratios = equipment::ApplianceRatios::defaults().entries();
  if (r.has("appliance_ratios")) {
    const json& a = r.get("appliance_ratios");
    if (!a.is_object()) throw ConfigError("/appliance_ratios", "expected an object");
    for (auto it = a.begin(); it != a.end(); ++it) {
      const std::string where = "/appliance_ratios/" + pointer_escape(it.key());
      if (!it.value().is_number()) throw ConfigError(where, "expected a number");
      const double v = it.value().get<double>();
      if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(where, "ratio must be in [0, 1]");
      c.appliance_ratios[it.key()] = v;
    }
  }

  if (r.has("ground")) {
    Reader g = r.object("ground");
    c.ground.mean_c = g.number("mean_c", c.ground.mean_c);
    c.ground.amplitude_k = g.number("amplitude_k", c.ground.amplitude_k);
    c.ground.phase_day = g.number("phase_day", c.ground.phase_day);
    g.finish();
  }

  if (r.has("source")) {
    Reader s = r.object("source");
    if (s.has("supply_schedule")) {
      if (s.has("supply_c")) throw ConfigError(s.at("supply_c"), "give either supply_c or supply_schedule");
      const json& pts = s.get("supply_schedule");
      std::vector<std::pair<double, double>> v;
      if (!pts.is_array()) throw ConfigError(s.at("supply_schedule"), "expected [[t_s, temperature_c], ...]");
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& p = pts[i];
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
          throw ConfigError(s.at("supply_schedule") + "/" + std::to_string(i), "expected [t_s, temperature_c]");
        v.emplace_back(p[0].get<double>(), to_kelvin(p[1].get<double>()));
      }
      guard(s.at("supply_schedule"), [&] { c.source.supply = dhnet::SupplySchedule(std::move(v)); });
    } else {
      c.source.supply = dhnet::SupplySchedule(to_kelvin(s.number("supply_c", 95.0)));
    }
    c.source.dp_set_critical = s.number("dp_set_critical_pa", c.source.dp_set_critical);
    c.source.max_head = s.number("max_head_pa", c.source.max_head);
    guard(s.path(), [&] { c.source.validate(); });
    s.finish();
  }

  if (r.has("substation")) {
    Reader s = r.object("substation");
    auto& p = c.substation;
    p.delta_t1 = s.number("delta_t1_k", p.delta_t1);
    p.buffer_set = to_kelvin(s.number("buffer_set_c", to_celsius(p.buffer_set)));
    p.supply_margin = s.number("supply_margin_k", p.supply_margin);
    c.grid_substep_s = s.number("substep_s", c.grid_substep_s);
    if (s.has("pid")) {
      Reader q = s.object("pid");
      p.pid.kp = q.number("kp", p.pid.kp);
      p.pid.ki = q.number("ki", p.pid.ki);
      p.pid.kd = q.number("kd", p.pid.kd);
      p.pid.m_max = q.number("m_max_kg_s", p.pid.m_max);
      q.finish();
    }
    guard(s.path(), [&] { p.validate(); });
    if (!(c.grid_substep_s > 0.0) || std::fmod(c.dt_comm, c.grid_substep_s) != 0.0)
      throw ConfigError(s.at("substep_s"), "grid sub-step must divide the communication step");
    s.finish();
  }

  const json& buildings = r.get("buildings");
  if (!buildings.is_array() || buildings.empty()) throw ConfigError("/buildings", "expected a non-empty array");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < buildings.size(); ++i) {
    c.buildings.push_back(parse_building(Reader(buildings[i], "/buildings/" + std::to_string(i)), c));
    if (!ids.insert(c.buildings.back().id).second)
      throw ConfigError("/buildings/" + std::to_string(i) + "/id", "duplicate building id '" + c.buildings.back().id + "'");
  }
  r.finish();
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(path.string(), "cannot open scenario file");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_scenario(ss.str(), std::filesystem::absolute(path).parent_path());
}

std::string dump_resolved(const ScenarioConfig& c) {
  json j;
  j["name"] = c.name;
  j["files"] = {{"weather", c.weather_file.string()}, {"appliances", c.appliance_file.string()}};
  if (!c.topology_file.empty()) j["files"]["topology"] = c.topology_file.string();
  if (!c.reference_file.empty()) j["files"]["references"] = c.reference_file.string();
  j["horizon"] = {{"start_s", c.t0}, {"end_s", c.t_end}, {"dt_comm_s", c.dt_comm}};
  j["weather_target_mean_c"] = c.weather_target_mean_c;
  j["set_point_c"] = to_celsius(c.set_point_k);
  j["heating_season"] = {
      {"spring_end", format_month_day(c.calendar.spring_end_month, c.calendar.spring_end_day)},
      {"autumn_start", format_month_day(c.calendar.autumn_start_month, c.calendar.autumn_start_day)}};
  j["orientation_factors"] = c.orientation_factors;
  j["appliance_ratios"] = c.appliance_ratios;
  j["ground"] = {{"mean_c", c.ground.mean_c}, {"amplitude_k", c.ground.amplitude_k}, {"phase_day", c.ground.phase_day}};
  const auto& pts = c.source.supply.points();
  if (pts.size() == 1) {
    j["source"]["supply_c"] = to_celsius(pts.front().second);
  } else {
    json s = json::array();
    for (const auto& [t, k] : pts) s.push_back({t, to_celsius(k)});
    j["source"]["supply_schedule"] = s;
  }
  j["source"]["dp_set_critical_pa"] = c.source.dp_set_critical;
  j["source"]["max_head_pa"] = c.source.max_head;
  const auto& sp = c.substation;
  j["substation"] = {{"delta_t1_k", sp.delta_t1},
                     {"buffer_set_c", to_celsius(sp.buffer_set)},
                     {"supply_margin_k", sp.supply_margin},
                     {"substep_s", c.grid_substep_s},
                     {"pid", {{"kp", sp.pid.kp}, {"ki", sp.pid.ki}, {"kd", sp.pid.kd}, {"m_max_kg_s", sp.pid.m_max}}}};
  json bs = json::array();
  for (const auto& b : c.buildings) {
    const auto& p = b.params;
    json jb;
    jb["id"] = b.id;
    jb["label"] = b.label;
    jb["construction_class"] = b.construction_class;
    jb["floor_area_m2"] = p.floor_area_m2;
    jb["storeys"] = p.storeys;
    jb["f_ms"] = p.f_ms;
    jb["f_red"] = p.f_red;
    jb["delta_u_tbr"] = p.delta_u_tbr;
    jb["air_change_rate"] = p.air_change_rate;
    jb["ceiling_height_m"] = p.ceiling_height_m;
    jb["heat_capacity_j_per_k"] = p.heat_capacity_j_per_k;
    const auto& f = p.flags;
    jb["modules"] = {{"radiator", int(f.radiator)},   {"ventilation", int(f.ventilation)},
                     {"air_conditioner", int(f.air_conditioner)}, {"appliances", int(f.appliances)},
                     {"buffer_tank", int(f.buffer_tank)}, {"dhw", int(f.dhw)},
                     {"pv", int(f.pv)}, {"battery", int(f.battery)}, {"heat_pump", int(f.heat_pump)}};
    json ss = json::array();
    for (const auto& s : p.surfaces) {
      json js = {{"name", s.name}, {"kind", std::string(envelope::to_string(s.kind))},
                 {"area_m2", s.area_m2}, {"u_value", s.u_value}, {"solar_factor", s.solar_factor}};
      if (s.kind == envelope::SurfaceKind::window) js["solar_aperture"] = s.solar_aperture;
      ss.push_back(js);
    }
    jb["surfaces"] = ss;
    jb["radiator"] = {{"max_mass_flow_kg_s", b.radiator.max_mass_flow},
                      {"ua_w_per_k", b.radiator.ua_emit},
                      {"proportional_band_k", b.radiator.proportional_band}};
    jb["tank"] = {{"water_mass_kg", b.tank.water_mass},       {"set_point_c", to_celsius(b.tank.set_point)},
                  {"band_low_c", to_celsius(b.tank.band_low)}, {"band_high_c", to_celsius(b.tank.band_high)},
                  {"initial_c", to_celsius(b.tank.t_buffer)},  {"ua_loss_w_per_k", b.tank.ua_loss}};
    jb["ac"] = {{"capacity_w", b.ac.capacity}, {"deadband_k", b.ac.deadband},
                {"heating", int(b.ac.allow_heating)}, {"cooling", int(b.ac.allow_cooling)}};
    jb["hx"] = {{"approach_k", b.hx.approach}};
    jb["demand"] = {{"tau_s", b.demand.tau_s}, {"k_p", b.demand.k_p}};
    bs.push_back(jb);
  }
  j["buildings"] = bs;
  return j.dump(2) + "\n";
}

Scenario load_data(const ScenarioConfig& config) {
  Scenario s{config, {}, {}, std::nullopt, equipment::ApplianceRatios(config.appliance_ratios)};
  s.weather = load_weather_adjusted(config.weather_file, config.weather_target_mean_c);
  if (s.weather.t0 > config.t0 || s.weather.t_end() < config.t_end)
    throw ConfigError("/files/weather", "weather series does not cover the simulated horizon");
  s.appliances = load_appliances(config.appliance_file, s.ratios);
  if (s.appliances.t0 > config.t0 || s.appliances.t_end() < config.t_end)
    throw ConfigError("/files/appliances", "appliance profile does not cover the simulated horizon");
  if (!config.topology_file.empty()) {
    s.topology = load_topology(config.topology_file);
    std::set<std::string> bound;
    for (std::size_t k : s.topology->substations()) {
      const auto& node = s.topology->nodes()[k];
      bool found = false;
      for (const auto& b : config.buildings) found = found || b.id == node.building;
      if (!found)
        throw ConfigError(config.topology_file.string(),
                          "substation '" + node.id + "' binds unknown building '" + node.building + "'");
      bound.insert(node.building);
    }
    for (const auto& b : config.buildings)
      if (!bound.count(b.id))
        throw ConfigError(config.topology_file.string(), "building '" + b.id + "' has no substation");
  }
  return s;
}

CouplingFile parse_coupling(const std::string& text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("byte " + std::to_string(e.byte), e.what());
  }
  Reader r(doc, "");
  CouplingFile c;
  c.scenario = resolve(base_dir, r.string("scenario"));
  if (r.has("edges")) {
    const auto& edges = r.get("edges");
    if (!edges.is_array()) throw ConfigError("/edges", "expected an array of [from, to] pairs");
    auto key = [](const json& v, const std::string& where) {
      if (!v.is_string()) throw ConfigError(where, "expected \"simulator.port\"");
      const auto s = v.get<std::string>();
      const auto dot = s.find('.');
      if (dot == std::string::npos || dot == 0 || dot + 1 == s.size())
        throw ConfigError(where, "expected \"simulator.port\", got '" + s + "'");
      return cosim::PortKey{s.substr(0, dot), s.substr(dot + 1)};
    };
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const std::string where = "/edges/" + std::to_string(i);
      if (!edges[i].is_array() || edges[i].size() != 2) throw ConfigError(where, "expected a [from, to] pair");
      c.coupling.edges.push_back({key(edges[i][0], where + "/0"), key(edges[i][1], where + "/1")});
    }
  }
  if (r.has("remote")) {
    Reader rem = r.object("remote");
    for (auto it = rem.raw().begin(); it != rem.raw().end(); ++it) c.remote[it.key()] = rem.string(it.key());
    rem.finish();
  }
  r.finish();
  return c;
}

CouplingFile load_coupling(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(path.string(), "cannot open coupling file");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_coupling(ss.str(), std::filesystem::absolute(path).parent_path());
}

}  // namespace districtsim::scenario
