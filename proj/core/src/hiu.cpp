#include "districtsim/hiu.hpp"

#include "districtsim/errors.hpp"
#include "districtsim/units.hpp"

#include <algorithm>
#include <cmath>

namespace districtsim::hiu {

void HxSpec::validate() const {
  if (!(approach > 0.0)) throw InvalidParameter("heat exchanger approach must be > 0");
}

HxResult hx_transfer(double t_sup, double m_flow, double t_buffer, double t_ret_request, const HxSpec& hx) {
  if (!(m_flow >= 0.0)) throw InvalidParameter("mass flow must be >= 0");
  if (!std::isfinite(t_sup) || !std::isfinite(t_buffer) || !std::isfinite(t_ret_request))
    throw NumericError("non-finite heat exchanger input");
  if (t_sup <= t_buffer || m_flow == 0.0) return {0.0, t_sup};
  const double t_ret = std::min(t_sup, std::max(t_buffer + hx.approach, t_ret_request));
  return {m_flow * kCpWater * (t_sup - t_ret), t_ret};
}

double buffer_demand(const equipment::BufferTank& tank, double recent_discharge_w, const DemandLaw& law) {
  const double recharge = law.k_p * (tank.set_point - tank.t_buffer) * tank.heat_capacity() / law.tau_s;
  return std::max(0.0, recent_discharge_w + recharge);
}

HiuStep hiu_step(const HiuInputs& in, const equipment::BufferTank& tank, const HxSpec& hx, const DemandLaw& law,
                 double q_draw_w, double recent_discharge_w, double t_room, double dt_s) {
  HiuStep r;
  r.hx = hx_transfer(in.t_sup, in.m_flow, tank.t_buffer, in.t_ret_request, hx);
  r.tank = equipment::buffer_tank_step(tank, r.hx.q_hx, q_draw_w, t_room, dt_s);
  r.out.t_buffer = r.tank.t_buffer;
  r.out.q_demand = buffer_demand(r.tank, recent_discharge_w, law);
  return r;
}

}  // namespace districtsim::hiu
