#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace districtsim::envelope {

enum class SurfaceKind { roof, wall, floor, window };

std::string_view to_string(SurfaceKind kind);
SurfaceKind surface_kind_from_string(std::string_view name);

/// Temperature adjustment factor b_tr of a surface kind: 0.5 for floors
/// (ground contact), 1.0 for everything else.
double adjustment_factor(SurfaceKind kind);

struct SurfaceSpec {
  std::string name;
  SurfaceKind kind = SurfaceKind::wall;
  double area_m2 = 0.0;
  double u_value = 0.0;        // W/(m2 K), as tabulated
  double adjustment_b = 1.0;
  double solar_aperture = 0.0; // effective g * shading * frame, windows only
  double solar_factor = 1.0;   // irradiance on this surface / global horizontal

  /// Surface with the kind's default adjustment factor.
  static SurfaceSpec make(SurfaceKind kind, double area_m2, double u_value, std::string name = {});

  void validate() const;
};

/// Presence flags of optional building modules (0/1 in configuration files).
struct ModuleFlags {
  bool radiator = true;
  bool ventilation = true;
  bool air_conditioner = true;
  bool appliances = true;
  bool buffer_tank = true;
  bool dhw = false;
  bool pv = false;
  bool battery = false;
  bool heat_pump = false;
};

struct BuildingParams {
  std::vector<SurfaceSpec> surfaces;
  double floor_area_m2 = 0.0;  // per storey
  int storeys = 1;
  double f_ms = 2.5;           // 2.5 light/medium, 3.0 heavy construction
  double f_red = 1.0;          // temperature reduction factor, (0, 1]
  double delta_u_tbr = 0.1;    // thermal bridge surcharge, W/(m2 K)
  double air_change_rate = 0.6;  // 1/h, before reduction
  double ceiling_height_m = 2.5;
  double heat_capacity_j_per_k = 0.0;
  ModuleFlags flags;

  double air_volume_m3() const { return floor_area_m2 * ceiling_height_m * storeys; }

  /// Throws InvalidParameter on the first violated invariant.
  void validate() const;
};

/// The five conductances of the 5R1C network plus the areas they derive from.
///
///   T_sup --h_ve-- T_air --h_the-- T_sur --h_mas-- T_mas --h_tra-- T_ext
///                                    |                |
///                                    +----h_win-------+--- T_ext
///
/// h_op is the opaque transmission conductance that h_tra and h_mas share in
/// series; it is kept for the reconstruction identity 1/h_tra + 1/h_mas = 1/h_op.
struct ConductanceSet {
  double h_win = 0.0;   // W/K, windows, T_ext <-> T_sur
  double h_tra = 0.0;   // W/K, opaque outer part, T_ext <-> T_mas
  double h_mas = 0.0;   // W/K, T_sur <-> T_mas
  double h_the = 0.0;   // W/K, T_air <-> T_sur
  double h_ve = 0.0;    // W/K, T_sup <-> T_air
  double h_op = 0.0;    // W/K
  double a_tot = 0.0;   // m2
  double a_mas = 0.0;   // m2
  double air_mass_flow = 0.0;  // kg/s of ventilation air
};

/// (b * U + dU_tbr) * F_red.
double effective_u(const SurfaceSpec& surface, double f_red, double delta_u_tbr);

/// Throws DegenerateNetwork when h_op >= h_mas (no positive h_tra exists).
ConductanceSet derive_conductances(const BuildingParams& params);

struct NodeInjections {
  double phi_ia = 0.0;  // W at the air node
  double phi_st = 0.0;  // W at the surface node
  double phi_m = 0.0;   // W at the mass node

  double total() const { return phi_ia + phi_st + phi_m; }
};

/// Half of the internal gains go to the air node; the rest plus all solar
/// gains are shared between mass and surface nodes by the area ratio a_mas/a_tot.
NodeInjections split_gains(double phi_internal_w, double phi_solar_w, const ConductanceSet& c);

struct ThermalState {
  double t_air = 0.0;  // K
  double t_sur = 0.0;  // K
  double t_mas = 0.0;  // K
  double c_m = 0.0;    // J/K

  static ThermalState uniform(double t_k, double c_m) { return {t_k, t_k, t_k, c_m}; }
};

/// Heat flows of one integration step, averaged over the step. Positive
/// values flow INTO the building (ventilation and transmission), so losses
/// are negative here; accumulate_losses flips the sign.
struct FlowRecord {
  double ventilation_w = 0.0;  // h_ve * (T_sup - T_air)
  double window_w = 0.0;       // h_win * (T_ext - T_sur)
  double opaque_w = 0.0;       // h_tra * (T_ext - T_mas)
  double mass_net_w = 0.0;     // net power into the mass node

  double transmission_w() const { return window_w + opaque_w; }
};

struct ThermalStep {
  ThermalState state;
  FlowRecord flow;
};

/// Longest internal integration step; longer requests are split evenly.
inline constexpr double kMaxSubstepSeconds = 60.0;

/// Advance the network by dt seconds. The mass node is integrated with
/// backward Euler; T_air and T_sur are solved algebraically at the end of each
/// sub-step. q_space_heat_w (radiator + air conditioner) enters at the air node.
ThermalStep step_thermal(const ThermalState& state, const ConductanceSet& c, const NodeInjections& inj,
                         double t_ext, double t_sup_air, double q_space_heat_w, double dt_s);

struct LossTotals {
  double q_ht_ven_kwh = 0.0;
  double q_ht_tr_kwh = 0.0;

  double total_kwh() const { return q_ht_ven_kwh + q_ht_tr_kwh; }
};

/// Sum a uniformly sampled flow series into ventilation and transmission
/// losses, positive when heat leaves the building.
LossTotals accumulate_losses(std::span<const FlowRecord> flows, double dt_s);

}  // namespace districtsim::envelope
