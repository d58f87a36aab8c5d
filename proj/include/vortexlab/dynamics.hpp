#pragma once

#include <functional>

#include "vortexlab/vortex.hpp"

namespace vortexlab {

/// Orbit of the thermostat flow F = X + lambda V, stored on a uniform fine
/// grid of spacing dt/2 so that the cocycle and Riccati integrators can take
/// RK4 steps of size dt without interpolating coefficients.
struct OrbitTrace {
  double t0 = 0.0;
  double dt_fine = 0.0;
  std::vector<PhasePoint> states;
  // samples along the orbit, filled by sample_orbit
  std::vector<double> lambda, vlambda, hlambda, Kg, kappa, p, kappa_p;

  int size() const { return static_cast<int>(states.size()); }
  double time(int k) const { return t0 + k * dt_fine; }
  int index_of(double t) const;
  bool sampled() const { return !lambda.empty(); }
};

using LambdaFn = std::function<double(const PhasePoint&)>;

struct FlowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Fixed-step RK4 integration of (z, phi) over [0, T] (T may be negative).
/// dt is the coarse step; states are stored every dt/2. The state is wrapped
/// into the fundamental domain after every step, with phi transported
/// continuously.
OrbitTrace integrate_flow(const Background& bg, const LambdaFn& lambda,
                          const PhasePoint& start, double T, double dt);

/// Orbit spanning [-t_back, t_forward] through start at time 0.
OrbitTrace make_orbit(const Background& bg, const LambdaFn& lambda,
                      const PhasePoint& start, double t_back, double t_forward,
                      double dt);

/// Fill the physics columns from the thermostat's field data.
void sample_orbit(const ThermostatField& thermo, OrbitTrace& trace);

/// max over stored steps of | |dgamma/dt|_g - 1 |, by centered differences.
double unit_speed_defect(const Background& bg, const OrbitTrace& trace);

/// Geodesic curvature of the base curve at interior sample k, computed from
/// position differences and the conformal connection only (an oracle that
/// does not trust the integrator's phi).
double base_curvature(const Background& bg, const OrbitTrace& trace, int k);

}  // namespace vortexlab
