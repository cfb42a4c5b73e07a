#include "districtsim/envelope.hpp"

#include "districtsim/errors.hpp"
#include "districtsim/units.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace districtsim::envelope {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidParameter(what);
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericError(std::string("non-finite ") + what);
}

}  // namespace

std::string_view to_string(SurfaceKind kind) {
  switch (kind) {
    case SurfaceKind::roof: return "roof";
    case SurfaceKind::wall: return "wall";
    case SurfaceKind::floor: return "floor";
    case SurfaceKind::window: return "window";
  }
  return "?";
}

SurfaceKind surface_kind_from_string(std::string_view name) {
  if (name == "roof") return SurfaceKind::roof;
  if (name == "wall") return SurfaceKind::wall;
  if (name == "floor") return SurfaceKind::floor;
  if (name == "window") return SurfaceKind::window;
  throw InvalidParameter("unknown surface kind '" + std::string(name) + "'");
}

double adjustment_factor(SurfaceKind kind) { return kind == SurfaceKind::floor ? 0.5 : 1.0; }

SurfaceSpec SurfaceSpec::make(SurfaceKind kind, double area_m2, double u_value, std::string name) {
  SurfaceSpec s;
  s.name = name.empty() ? std::string(to_string(kind)) : std::move(name);
  s.kind = kind;
  s.area_m2 = area_m2;
  s.u_value = u_value;
  s.adjustment_b = adjustment_factor(kind);
  return s;
}

void SurfaceSpec::validate() const {
  const std::string who = "surface '" + name + "': ";
  require(std::isfinite(area_m2) && area_m2 > 0.0, who + "area must be > 0");
  require(std::isfinite(u_value) && u_value > 0.0, who + "U-value must be > 0");
  require(adjustment_b == adjustment_factor(kind), who + "adjustment factor does not match surface kind");
  require(std::isfinite(solar_aperture) && solar_aperture >= 0.0 && solar_aperture <= 1.0,
          who + "solar aperture must be in [0, 1]");
  require(std::isfinite(solar_factor) && solar_factor >= 0.0, who + "solar factor must be >= 0");
}

void BuildingParams::validate() const {
  require(!surfaces.empty(), "building has no surfaces");
  for (const auto& s : surfaces) s.validate();
  require(std::isfinite(floor_area_m2) && floor_area_m2 > 0.0, "floor area must be > 0");
  require(storeys >= 1, "storeys must be >= 1");
  require(std::isfinite(f_ms) && f_ms > 0.0, "mass area factor must be > 0");
  require(std::isfinite(f_red) && f_red > 0.0 && f_red <= 1.0, "reduction factor must be in (0, 1]");
  require(std::isfinite(delta_u_tbr) && delta_u_tbr >= 0.0, "thermal bridge surcharge must be >= 0");
  require(std::isfinite(air_change_rate) && air_change_rate >= 0.0, "air change rate must be >= 0");
  require(std::isfinite(ceiling_height_m) && ceiling_height_m > 0.0, "ceiling height must be > 0");
  require(std::isfinite(heat_capacity_j_per_k) && heat_capacity_j_per_k > 0.0, "heat capacity must be > 0");
}

double effective_u(const SurfaceSpec& surface, double f_red, double delta_u_tbr) {
  surface.validate();
  require(std::isfinite(f_red) && f_red > 0.0 && f_red <= 1.0, "reduction factor must be in (0, 1]");
  require(std::isfinite(delta_u_tbr) && delta_u_tbr >= 0.0, "thermal bridge surcharge must be >= 0");
  return (surface.adjustment_b * surface.u_value + delta_u_tbr) * f_red;
}

ConductanceSet derive_conductances(const BuildingParams& params) {
  params.validate();
  ConductanceSet c;
  double area = 0.0;
  for (const auto& s : params.surfaces) {
    const double h = effective_u(s, params.f_red, params.delta_u_tbr) * s.area_m2;
    if (s.kind == SurfaceKind::window) {
      c.h_win += h;
      area += s.area_m2;
    } else {
      c.h_op += h;
      // Floor slabs repeat once per storey on both faces of inner ceilings.
      area += s.kind == SurfaceKind::floor ? (2 * params.storeys - 1) * s.area_m2 : s.area_m2;
    }
  }
  c.a_tot = area;
  c.h_the = 3.45 * c.a_tot;
  c.a_mas = params.f_ms * params.floor_area_m2;
  c.h_mas = 9.1 * c.a_mas;
  if (c.h_op > 0.0) {
    if (c.h_op >= c.h_mas)
      throw DegenerateNetwork("opaque conductance " + std::to_string(c.h_op) + " W/K is not below mass coupling " +
                              std::to_string(c.h_mas) + " W/K");
    c.h_tra = 1.0 / (1.0 / c.h_op - 1.0 / c.h_mas);
  }
  if (params.flags.ventilation) {
    c.air_mass_flow = params.air_change_rate * params.f_red * params.air_volume_m3() * kRhoAir / kSecondsPerHour;
    c.h_ve = c.air_mass_flow * kCpAir;
  }
  return c;
}

NodeInjections split_gains(double phi_internal_w, double phi_solar_w, const ConductanceSet& c) {
  require_finite(phi_internal_w, "internal gain");
  require_finite(phi_solar_w, "solar gain");
  NodeInjections inj;
  inj.phi_ia = 0.5 * phi_internal_w;
  const double shared = 0.5 * phi_internal_w + phi_solar_w;
  const double ratio = c.a_tot > 0.0 ? std::clamp(c.a_mas / c.a_tot, 0.0, 1.0) : 0.0;
  inj.phi_m = ratio * shared;
  inj.phi_st = shared - inj.phi_m;
  return inj;
}

ThermalStep step_thermal(const ThermalState& state, const ConductanceSet& c, const NodeInjections& inj,
                         double t_ext, double t_sup_air, double q_space_heat_w, double dt_s) {
  require_finite(t_ext, "outdoor temperature");
  require_finite(t_sup_air, "supply air temperature");
  require_finite(q_space_heat_w, "space heating power");
  require_finite(inj.phi_ia, "air node gain");
  require_finite(inj.phi_st, "surface node gain");
  require_finite(inj.phi_m, "mass node gain");
  require_finite(state.t_mas, "mass temperature");
  require(std::isfinite(dt_s) && dt_s > 0.0, "time step must be > 0");
  require(state.c_m > 0.0, "heat capacity must be > 0");

  const int n = std::max(1, static_cast<int>(std::ceil(dt_s / kMaxSubstepSeconds - 1e-9)));
  const double h = dt_s / n;

  const double phi_a = inj.phi_ia + q_space_heat_w;
  const double h_air = c.h_ve + c.h_the;
  // T_air = (h_ve T_sup + h_the T_sur + phi_a) / h_air, substituted into the
  // surface balance; what remains depends on T_mas only.
  const double d_s = c.h_the + c.h_win + c.h_mas - (h_air > 0.0 ? c.h_the * c.h_the / h_air : 0.0);
  const double b = c.h_win * t_ext + inj.phi_st +
                   (h_air > 0.0 ? c.h_the * (c.h_ve * t_sup_air + phi_a) / h_air : 0.0);
  const double cap = state.c_m / h;
  const double lhs = cap + c.h_mas + c.h_tra - c.h_mas * c.h_mas / d_s;
  const double rhs_const = c.h_tra * t_ext + inj.phi_m + c.h_mas * b / d_s;

  ThermalStep out;
  out.state = state;
  double m = state.t_mas;
  for (int i = 0; i < n; ++i) {
    const double m_next = (cap * m + rhs_const) / lhs;
    const double s = (b + c.h_mas * m_next) / d_s;
    const double a = h_air > 0.0 ? (c.h_ve * t_sup_air + c.h_the * s + phi_a) / h_air : s;
    out.flow.ventilation_w += c.h_ve * (t_sup_air - a);
    out.flow.window_w += c.h_win * (t_ext - s);
    out.flow.opaque_w += c.h_tra * (t_ext - m_next);
    out.flow.mass_net_w += cap * (m_next - m);
    m = m_next;
    out.state.t_air = a;
    out.state.t_sur = s;
  }
  out.state.t_mas = m;
  out.flow.ventilation_w /= n;
  out.flow.window_w /= n;
  out.flow.opaque_w /= n;
  out.flow.mass_net_w /= n;
  if (!std::isfinite(out.state.t_air) || !std::isfinite(out.state.t_sur) || !std::isfinite(m))
    throw NumericError("thermal step produced a non-finite temperature");
  return out;
}

LossTotals accumulate_losses(std::span<const FlowRecord> flows, double dt_s) {
  require(std::isfinite(dt_s) && dt_s > 0.0, "time step must be > 0");
  double ven = 0.0, tr = 0.0;
  for (const auto& f : flows) {
    ven -= f.ventilation_w;
    tr -= f.transmission_w();
  }
  return {joules_to_kwh(ven * dt_s), joules_to_kwh(tr * dt_s)};
}

}  // namespace districtsim::envelope
