#pragma once

#include <Eigen/Dense>

#include "vortexlab/dynamics.hpp"

namespace vortexlab {

/// Coefficients of the derivative cocycle along an orbit, on the fine time
/// grid (spacing dt/2): the generator is B = ((0, -1), (kappa, -Vlambda)),
/// trace -Vlambda. lambda rides along for the w-component and quadratures.
struct GeneratorSeries {
  double t0 = 0.0;
  double dt_fine = 0.0;
  std::vector<double> kappa, vlambda, lambda, p, kappa_p;

  int size() const { return static_cast<int>(kappa.size()); }
  double time(int k) const { return t0 + k * dt_fine; }
  int index_of(double t) const;
  double coarse_dt() const { return 2.0 * dt_fine; }

  static GeneratorSeries from_trace(const OrbitTrace& trace);
  static GeneratorSeries constants(double kappa, double vlambda, double t0,
                                   double t1, double dt_fine);
  static GeneratorSeries sampled(const std::function<double(double)>& kappa,
                                 const std::function<double(double)>& vlambda,
                                 double t0, double t1, double dt_fine);
};

/// Simpson quadrature of a fine-grid series over [i0, i1] (even span).
double simpson(const std::vector<double>& values, double dt_fine, int i0,
               int i1);

/// 2x2 generator series for cocycle evolution; entries on the fine grid.
struct MatrixSeries {
  double t0 = 0.0;
  double dt_fine = 0.0;
  std::vector<Eigen::Matrix2d> B;
  int size() const { return static_cast<int>(B.size()); }
};

/// B = ((0,-1),(kappa,-Vlambda)).
MatrixSeries thermostat_generator(const GeneratorSeries& gen);

/// Gauge-conjugated generator ((-p,-1),(kappa_p, -Vlambda+p)) with
/// kappa_p = kappa + Fp + p(p - Vlambda). Fp on the fine grid: supplied, or
/// centered differences of p when empty.
MatrixSeries conjugate_generator(const GeneratorSeries& gen,
                                 const std::vector<double>& p_fine,
                                 std::vector<double> fp_fine = {});

/// kappa_p series on the fine grid for the same data.
std::vector<double> kappa_p_series(const GeneratorSeries& gen,
                                   const std::vector<double>& p_fine,
                                   std::vector<double> fp_fine = {});

struct CocycleState {
  double t = 0.0;
  Eigen::Matrix2d Psi = Eigen::Matrix2d::Identity();  // e^{log_scale} absorbed
  double log_scale = 0.0;
  // log det of the full cocycle, accumulated stepwise: the determinant of
  // the propagated matrix itself loses all precision once the condition
  // number outruns the working precision.
  double log_det = 0.0;
  Eigen::RowVector2d wrow = Eigen::RowVector2d::Zero();  // dw/dt = lambda y
  Eigen::Matrix2d full() const { return std::exp(log_scale) * Psi; }
};

/// RK4 on dPsi/dt + B(t) Psi = 0 over coarse steps of [i0, i1] (fine
/// indices, even span). Log-scale renormalization every 10 time units and
/// whenever the norm exceeds 1e100. The w-row integrates lambda * (y-row)
/// when lambda data is present.
std::vector<CocycleState> evolve_cocycle(const MatrixSeries& mat, int i0,
                                         int i1,
                                         const std::vector<double>* lambda_fine
                                         = nullptr);
std::vector<CocycleState> evolve_cocycle(const GeneratorSeries& gen, int i0,
                                         int i1);

/// One coarse RK4 step of the cocycle from fine index i.
Eigen::Matrix2d cocycle_step(const MatrixSeries& mat, int i);

/// Riccati r' = -(r^2 - r Vlambda + kappa) integrated in projective form
/// (r = tan psi, so r = infinity is a regular point). Returns r at every
/// second fine index from i0 to i1 inclusive; i1 < i0 integrates backward.
/// r0 may be +-infinity.
std::vector<double> riccati_integrate(const GeneratorSeries& gen, double r0,
                                      int i0, int i1);

struct HopfOptions {
  std::vector<double> schedule = {5.0, 10.0, 20.0, 40.0, 80.0};
  double tol = 1e-9;
};

struct HopfError : std::runtime_error {
  HopfError(const std::string& what, std::vector<double> gaps_)
      : std::runtime_error(what), gaps(std::move(gaps_)) {}
  std::vector<double> gaps;
};

/// Hopf limits along the report window [i0, i1] (fine indices): r_u from
/// pushing r = infinity forward from t(i0) - R, r_s from pushing r = infinity
/// backward from t(i1) + R, with the doubling schedule and Cauchy stopping at
/// the window edges. The series must extend R_max beyond the window.
struct HopfSolutions {
  int i0 = 0, i1 = 0;
  std::vector<double> r_u, r_s;  // at fine indices i0, i0+2, ..., i1
  double achieved_R_u = 0.0, achieved_R_s = 0.0;
  std::vector<double> gaps_u, gaps_s;
  double r_u_at(int fine_index) const { return r_u[(fine_index - i0) / 2]; }
  double r_s_at(int fine_index) const { return r_s[(fine_index - i0) / 2]; }
};
HopfSolutions hopf_limit(const GeneratorSeries& gen, int i0, int i1,
                         const HopfOptions& opts = {});

/// Closed-form comparison bounds of the positive Hopf solution of
/// Fh + h^2 + Bh - 1 = 0 with |B| <= c: ((-c+sqrt(c^2+4))/2, (c+sqrt(c^2+4))/2).
std::pair<double, double> comparison_bounds(double c);

/// Solution of the constant-coefficient Riccati gamma' + gamma^2 - c gamma - 1
/// = 0 with gamma(-R) = 0, evaluated at t.
double riccati_normal_form(double c, double R, double t);

struct AnosovReport {
  double min_ru = 0.0, max_rs = 0.0;      // alternative (1) margins
  double min_alt2_u = 0.0, max_alt2_s = 0.0;  // alternative (2) margins
  bool alt1 = false, alt2 = false;
  int expected_alternative = 0;  // 1 for ell >= 1, else 2
};
AnosovReport anosov_conditions(const GeneratorSeries& gen,
                               const HopfSolutions& hopf, double ell);

struct DominationFit {
  double C = 0.0;
  double mu = 0.0;
  bool pass = false;
  double fit_residual = 0.0;  // rms deviation of log products from the line
  std::vector<double> times, log_products;
};

/// Product of restricted norms ||Psi_t|E^s(x)|| ||Psi_-t|E^u(phi_t x)|| on
/// the window, accumulated stepwise along the Hopf directions, then a
/// log-linear fit. C is the smallest constant making the bound hold at the
/// fitted rate; pass requires mu > 0.
DominationFit verify_domination(const GeneratorSeries& gen,
                                const HopfSolutions& hopf);

struct LyapunovPair {
  double chi_plus = 0.0, chi_minus = 0.0;
  double trace_integral = 0.0;  // (1/T) int Vlambda dt
};
/// QR-renormalized exponents of the 2x2 cocycle over [i0, i1].
LyapunovPair lyapunov_exponents(const GeneratorSeries& gen, int i0, int i1);

/// Consistency defect of a provider that carries its own p and kappa_p:
/// |p(t1) - p(t0) - int (kappa_p - kappa - p(p - Vlambda)) dt| by quadrature.
double provider_consistency_defect(const GeneratorSeries& gen, int i0, int i1);

struct QuadraticFormCheck {
  bool positive = true;
  double max_identity_error = 0.0;  // |Qdot_fd - (b-h_u a)^2 - (b-h_s a)^2|
  double min_qdot = 0.0;            // scaled by a^2 + b^2
};
/// Half-trace gauge p = Vlambda/2: integrates a' = b, b' = -kappa_p a and
/// checks Qdot = (b - h_u a)^2 + (b - h_s a)^2 > 0 for Q = 2ab - (h_u+h_s)a^2
/// along the window, with h_{u,s} = r_{u,s} - Vlambda/2.
QuadraticFormCheck quadratic_form_check(const GeneratorSeries& gen,
                                        const HopfSolutions& hopf,
                                        double a0, double b0);

}  // namespace vortexlab
