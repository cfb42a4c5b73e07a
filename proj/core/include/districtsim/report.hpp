#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "districtsim/cosim.hpp"
#include "districtsim/scenario.hpp"

namespace districtsim::report {

struct AnnualIndicators {
  double mean_t_air_c = 0.0;
  double q_ht_ven_kwh = 0.0;
  double q_ht_tr_kwh = 0.0;
  double q_ht_total_kwh = 0.0;  // always q_ht_ven_kwh + q_ht_tr_kwh
  double q_radiators_kwh = 0.0;
  double q_plant_kwh = 0.0;     // district plant, 0 without a grid in the log
};

/// Which steps the envelope loss integrals cover.
enum class LossWindow { heating_season, full_year };

struct IndicatorOptions {
  scenario::HeatingCalendar calendar;
  LossWindow window = LossWindow::heating_season;
  std::string grid_id = "grid";
  double min_span_s = 365.0 * 86400.0;
};

/// Step sums over a uniformly spaced log. Throws InvalidParameter on gaps,
/// missing columns or a log shorter than `min_span_s`.
AnnualIndicators annual_indicators(const cosim::RunLog& log, const std::string& building,
                                   const IndicatorOptions& options = {});

/// Indicator names as used in reference files and error tables.
const std::vector<std::string>& indicator_names();
double indicator_value(const AnnualIndicators& ind, const std::string& name);

struct ReferenceRecord {
  std::string id;
  std::string source;
  std::map<std::string, double> values;  // indicator name -> reference value
};

/// {"records": [{"id": ..., "source": ..., "q_ht_tr_kwh": ..., "mean_t_air_c": ...}]}
std::vector<ReferenceRecord> parse_references(const std::string& text, const std::string& source = "references");
std::vector<ReferenceRecord> load_references(const std::filesystem::path& path);

struct ErrorRow {
  std::string indicator;
  double simulated = 0.0;
  std::optional<double> reference;
  std::optional<double> error_pct;  // 100 (sim - ref) / ref
  std::string flag;                 // non-empty when no error could be computed
};

struct ErrorTable {
  std::string building;
  std::string source;
  std::vector<ErrorRow> rows;

  const ErrorRow* row(const std::string& indicator) const;
};

/// Error per indicator present in the reference; zero references are flagged, not divided.
ErrorTable compare_reference(const AnnualIndicators& ind, const ReferenceRecord& ref);

struct BuildingReport {
  std::string id;
  AnnualIndicators indicators;
  std::optional<ErrorTable> errors;
};

/// Indicators for every building of the scenario, compared against the
/// matching reference record when one exists.
std::vector<BuildingReport> district_reports(const cosim::RunLog& log, const scenario::ScenarioConfig& config,
                                             const std::vector<ReferenceRecord>& references = {},
                                             LossWindow window = LossWindow::heating_season);

/// Writes buildings/<id>.csv, grid.csv (when `grid_id` is non-empty),
/// indicators.csv, validation.json and validation.txt under `out_dir`.
void emit_outputs(const cosim::RunLog& log, const std::vector<std::string>& building_ids, const std::string& grid_id,
                  const std::vector<BuildingReport>& reports, const std::filesystem::path& out_dir);

std::string validation_json(const std::vector<BuildingReport>& reports);
std::string validation_text(const std::vector<BuildingReport>& reports);

}  // namespace districtsim::report
