#pragma once

#include <memory>

#include "vortexlab/field.hpp"

namespace vortexlab {

struct SolveOptions {
  double tol = 1e-10;        // sup-norm of the discrete residual
  int max_iterations = 80;
  int stagnation_window = 20;
  double armijo = 0.5;       // accepted decrease per unit step
};

struct ConvergenceRow {
  int iteration;
  double residual_sup;
  double step_norm;
};

struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& what,
                       std::vector<ConvergenceRow> log_ = {})
      : std::runtime_error(what), log(std::move(log_)) {}
  std::vector<ConvergenceRow> log;
};

/// Damped Newton solve of  Delta u = -1 + e^{2u} - l e^{-2 l u} alpha  on the
/// quotient (Delta = hyperbolic Laplacian of g0, automorphic wrapping via the
/// grid glue rows). alpha >= 0 sampled on the grid.
RBuf solve_conformal_factor(const Background& bg0, const RBuf& alpha,
                            double ell, const SolveOptions& opts = {},
                            std::vector<ConvergenceRow>* log = nullptr);

/// K_{e^{2u} g0} = e^{-2u} (-1 - Delta u) at nodes (NaN where undefined).
RBuf curvature_of(const Grid& grid, const RBuf& u);

/// Scalar root of -1 + e^{2u} - l e^{-2lu} a0 = 0, by bisection. The solution
/// of the PDE for constant alpha is this constant.
double constant_alpha_root(double alpha0, double ell);

/// A solved (or synthetic residual-checked) vortex datum in the gauge where
/// the Hermitian metric is e^{2f} h0. The thermostat reads
/// lambda = e^f a - V theta - (1/l) H f.
struct VortexData {
  Rational ell;              // deg L / |chi(M)| = m/n
  double coupling = 0.0;     // dbar coupling; equals ell for the main system
  WeightedField A;           // weight 1 + ell, trivialized in metric_tag
  WeightedField theta;       // weight 1; empty amplitude means theta = 0
  RBuf f;                    // metric gauge (empty means 0)
  RBuf u;                    // conformal factor, g = e^{2u} g0
  std::shared_ptr<Background> bg;  // geometry of g

  bool has_theta() const { return !theta.amp.empty(); }
  bool has_f() const { return !f.empty(); }
};

/// Solve the theta = 0 vortex equations for a holomorphic A given in the g0
/// trivialization: alpha = |A|^2_{g0}, conformal solve, re-trivialization of
/// A in the solved metric.
VortexData solve_vortex(std::shared_ptr<const FuchsianGroup> group,
                        std::shared_ptr<const Grid> grid,
                        const WeightedField& A_g0, Rational ell,
                        const SolveOptions& opts = {},
                        std::vector<ConvergenceRow>* log = nullptr);

/// Hyperbolic datum (A = 0, theta = 0, u = 0) for the geodesic baseline.
VortexData hyperbolic_datum(std::shared_ptr<const FuchsianGroup> group,
                            std::shared_ptr<const Grid> grid, Rational ell);

struct ResidualReport {
  RBuf curv;           // nodal curvature-equation residual (NaN off mask)
  double curv_sup = 0.0;
  double hol_sup = 0.0;  // sup over fiber/domain of the dbar residual
};
ResidualReport vortex_residuals(const VortexData& d);

/// Real gauge action (A, theta, f) -> (e^{-w}A, theta - dw/k, f + w) with k
/// the datum's dbar coupling; lambda is invariant.
VortexData gauge_transform(const VortexData& d, const RBuf& w);

/// Synthetic Appendix-type datum from a solved theta = 0 one: the imaginary
/// gauge tau = e^{i vartheta} gives (e^{-i vartheta} A, -(1/k) star d vartheta)
/// solving K_g - delta theta = -1 + l |A|^2, dbar A = k theta^{0,1} A.
VortexData make_generalized_datum(const VortexData& solved, double k,
                                  const RBuf& vartheta);

/// Pointwise thermostat data sampler built from a vortex datum. All fields
/// are evaluated through one wrap per phase point; V-derivatives are exact in
/// the fiber, horizontal ones use the grid jets.
class ThermostatField {
 public:
  explicit ThermostatField(const VortexData& d);

  struct Sample {
    double lambda, vlambda, hlambda;
    double Kg, kappa;
    double p, vp, xp, fp, kappa_p;
    double a, va, theta, vtheta;
    cplx A;  // weight-(1+l) function value at the point
  };

  Sample sample(const PhasePoint& p) const;
  double lambda(const PhasePoint& p) const;
  const Background& background() const { return *bg_; }
  std::shared_ptr<Background> background_ptr() const { return bg_; }
  double ell() const { return ell_; }

 private:
  std::shared_ptr<Background> bg_;
  double ell_;
  FieldSum lam_, vlam_, hlam_, p_, vp_, xp_;
  FieldSum afun_, tfun_;  // the weight-(1+l) and weight-1 functions
};

/// kappa_p = kappa + Fp + p (p - V lambda) with p = theta + Va/(1+l),
/// assembled pointwise from the datum's fields (Fp = Xp + lambda Vp).
double generalized_kappa_p(const ThermostatField& thermo, const PhasePoint& p);

}  // namespace vortexlab
