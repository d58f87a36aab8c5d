#include "vortexlab/dynamics.hpp"

#include <cmath>

namespace vortexlab {

namespace {

struct Deriv {
  cplx dz;
  double dphi;
};

Deriv flow_rhs(const Background& bg, const LambdaFn& lambda,
               const PhasePoint& p) {
  const double es = std::exp(-bg.sigma(p.z));
  const cplx ds = bg.grad_sigma(p.z);
  const double sx = 2.0 * ds.real(), sy = -2.0 * ds.imag();
  Deriv d;
  d.dz = es * std::polar(1.0, p.phi);
  d.dphi = es * (-sx * std::sin(p.phi) + sy * std::cos(p.phi)) + lambda(p);
  return d;
}

PhasePoint rk4_step(const Background& bg, const LambdaFn& lambda,
                    const PhasePoint& p, double dt) {
  const Deriv k1 = flow_rhs(bg, lambda, p);
  const Deriv k2 = flow_rhs(
      bg, lambda, {p.z + 0.5 * dt * k1.dz, p.phi + 0.5 * dt * k1.dphi});
  const Deriv k3 = flow_rhs(
      bg, lambda, {p.z + 0.5 * dt * k2.dz, p.phi + 0.5 * dt * k2.dphi});
  const Deriv k4 = flow_rhs(bg, lambda, {p.z + dt * k3.dz, p.phi + dt * k3.dphi});
  return {p.z + dt / 6.0 * (k1.dz + 2.0 * k2.dz + 2.0 * k3.dz + k4.dz),
          p.phi + dt / 6.0 * (k1.dphi + 2.0 * k2.dphi + 2.0 * k3.dphi + k4.dphi)};
}

}  // namespace

int OrbitTrace::index_of(double t) const {
  const double x = (t - t0) / dt_fine;
  const int k = static_cast<int>(std::lround(x));
  if (k < 0 || k >= size() || std::abs(x - k) > 1e-6)
    throw std::invalid_argument("OrbitTrace::index_of: time off the grid");
  return k;
}

OrbitTrace integrate_flow(const Background& bg, const LambdaFn& lambda,
                          const PhasePoint& start, double T, double dt) {
  if (dt <= 0.0 || dt > 1e-2 + 1e-15)
    throw std::invalid_argument("integrate_flow: need 0 < dt <= 1e-2");
  const double step = (T >= 0.0 ? 0.5 * dt : -0.5 * dt);
  const int nsteps = static_cast<int>(std::lround(std::abs(T) / (0.5 * dt)));

  OrbitTrace trace;
  trace.dt_fine = 0.5 * dt;
  trace.t0 = std::min(0.0, T);
  std::vector<PhasePoint> states;
  states.reserve(nsteps + 1);

  PhasePoint p = bg.wrap(start).point;
  states.push_back(p);
  for (int k = 0; k < nsteps; ++k) {
    p = rk4_step(bg, lambda, p, step);
    if (!std::isfinite(p.z.real()) || !std::isfinite(p.z.imag()) ||
        !std::isfinite(p.phi))
      throw FlowError("integrate_flow: state became non-finite at step " +
                      std::to_string(k));
    p = bg.wrap(p).point;
    states.push_back(p);
  }
  if (T >= 0.0) {
    trace.states = std::move(states);
  } else {
    trace.states.assign(states.rbegin(), states.rend());
  }
  return trace;
}

OrbitTrace make_orbit(const Background& bg, const LambdaFn& lambda,
                      const PhasePoint& start, double t_back, double t_forward,
                      double dt) {
  OrbitTrace fwd = integrate_flow(bg, lambda, start, t_forward, dt);
  if (t_back <= 0.0) return fwd;
  OrbitTrace back = integrate_flow(bg, lambda, start, -t_back, dt);
  OrbitTrace out;
  out.dt_fine = fwd.dt_fine;
  out.t0 = back.t0;
  out.states = std::move(back.states);
  out.states.insert(out.states.end(), fwd.states.begin() + 1,
                    fwd.states.end());
  return out;
}

void sample_orbit(const ThermostatField& thermo, OrbitTrace& trace) {
  const int n = trace.size();
  trace.lambda.resize(n);
  trace.vlambda.resize(n);
  trace.hlambda.resize(n);
  trace.Kg.resize(n);
  trace.kappa.resize(n);
  trace.p.resize(n);
  trace.kappa_p.resize(n);
  for (int k = 0; k < n; ++k) {
    const ThermostatField::Sample s = thermo.sample(trace.states[k]);
    trace.lambda[k] = s.lambda;
    trace.vlambda[k] = s.vlambda;
    trace.hlambda[k] = s.hlambda;
    trace.Kg[k] = s.Kg;
    trace.kappa[k] = s.kappa;
    trace.p[k] = s.p;
    trace.kappa_p[k] = s.kappa_p;
  }
}

double unit_speed_defect(const Background& bg, const OrbitTrace& trace) {
  double worst = 0.0;
  for (int k = 2; k + 2 < trace.size(); ++k) {
    // the wrap can relocate neighbours to another representative; skip those
    bool contiguous = true;
    for (int d = -2; d < 2; ++d)
      contiguous = contiguous && std::abs(trace.states[k + d + 1].z -
                                          trace.states[k + d].z) <
                                     2.0 * trace.dt_fine;
    if (!contiguous) continue;
    const cplx zdot =
        (trace.states[k - 2].z - 8.0 * trace.states[k - 1].z +
         8.0 * trace.states[k + 1].z - trace.states[k + 2].z) /
        (12.0 * trace.dt_fine);
    const double speed = std::exp(bg.sigma(trace.states[k].z)) * std::abs(zdot);
    worst = std::max(worst, std::abs(speed - 1.0));
  }
  return worst;
}

double base_curvature(const Background& bg, const OrbitTrace& trace, int k) {
  if (k < 1 || k + 1 >= trace.size())
    throw std::invalid_argument("base_curvature: need an interior sample");
  const cplx zm = trace.states[k - 1].z, z0 = trace.states[k].z,
             zp = trace.states[k + 1].z;
  const double dt = trace.dt_fine;
  if (std::abs(zp - z0) > 4.0 * dt || std::abs(z0 - zm) > 4.0 * dt)
    throw std::invalid_argument("base_curvature: wrap relocation at sample");
  const cplx zdot = (zp - zm) / (2.0 * dt);
  const cplx zdd = (zp - 2.0 * z0 + zm) / (dt * dt);
  // covariant acceleration of the conformal metric and its J-component
  const cplx acc = zdd + 2.0 * bg.grad_sigma(z0) * zdot * zdot;
  const double e2s = std::exp(2.0 * bg.sigma(z0));
  const double speed = std::sqrt(e2s) * std::abs(zdot);
  const cplx jdot(-zdot.imag(), zdot.real());
  return e2s * (acc * std::conj(jdot)).real() / (speed * speed * speed);
}

}  // namespace vortexlab
