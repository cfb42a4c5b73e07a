#pragma once

#include "districtsim/equipment.hpp"

namespace districtsim::hiu {

inline constexpr const char* kPortSupplyTemp = "T_sup";
inline constexpr const char* kPortMassFlow = "m_flow";
inline constexpr const char* kPortReturnRequest = "T_ret_request";
inline constexpr const char* kPortBufferTemp = "T_buffer";
inline constexpr const char* kPortDemand = "Q_demand";

struct HxSpec {
  double approach = 5.0;  // K, minimum grid-exit minus tank temperature

  void validate() const;
};

struct HxResult {
  double q_hx = 0.0;   // W into the tank
  double t_ret = 0.0;  // K, grid water leaving the exchanger
};

/// Approach-temperature exchanger between grid water and the buffer tank.
HxResult hx_transfer(double t_sup, double m_flow, double t_buffer, double t_ret_request, const HxSpec& hx);

struct DemandLaw {
  double tau_s = 900.0;
  double k_p = 1.0;
};

/// Power needed to cover the recent discharge and pull the tank back to its
/// set point within tau.
double buffer_demand(const equipment::BufferTank& tank, double recent_discharge_w, const DemandLaw& law = {});

struct HiuInputs {
  double t_sup = 0.0;          // K
  double m_flow = 0.0;         // kg/s
  double t_ret_request = 0.0;  // K
};

struct HiuOutputs {
  double t_buffer = 0.0;  // K
  double q_demand = 0.0;  // W
};

struct HiuStep {
  HiuOutputs out;
  equipment::BufferTank tank;
  HxResult hx;
};

/// Charge the tank from the grid, discharge it by `q_draw_w` (radiator + DHW)
/// and report the updated tank temperature with the resulting demand signal.
HiuStep hiu_step(const HiuInputs& in, const equipment::BufferTank& tank, const HxSpec& hx, const DemandLaw& law,
                 double q_draw_w, double recent_discharge_w, double t_room, double dt_s);

}  // namespace districtsim::hiu
