#include "vortexlab/vortex.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>

namespace vortexlab {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool valid(double v) { return !std::isnan(v); }
bool valid(cplx v) { return !std::isnan(v.real()) && !std::isnan(v.imag()); }
}  // namespace

double constant_alpha_root(double alpha0, double ell) {
  auto F = [&](double x) {
    return -1.0 + std::exp(2.0 * x) - ell * std::exp(-2.0 * ell * x) * alpha0;
  };
  double lo = -10.0, hi = 10.0;
  if (F(lo) > 0.0 || F(hi) < 0.0)
    throw std::invalid_argument("constant_alpha_root: bad bracket");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (F(mid) <= 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

RBuf curvature_of(const Grid& grid, const RBuf& u) {
  const RBuf lap = grid.flat_laplacian(u);
  RBuf K(grid.size(), kNaN);
  for (int idx = 0; idx < grid.size(); ++idx) {
    if (!grid.masked(idx) || !valid(lap[idx])) continue;
    const cplx z = grid.node(idx % grid.nx(), idx / grid.nx());
    const double hyp_lap = std::exp(-2.0 * Background::sigma0(z)) * lap[idx];
    K[idx] = std::exp(-2.0 * u[idx]) * (-1.0 - hyp_lap);
  }
  return K;
}

RBuf solve_conformal_factor(const Background& bg0, const RBuf& alpha_in,
                            double ell, const SolveOptions& opts,
                            std::vector<ConvergenceRow>* log) {
  const Grid& g = bg0.grid();
  RBuf alpha = alpha_in;
  g.fill_margin(alpha);

  // Unknowns: all mask nodes. Rows: PDE at core nodes, glue at margin nodes.
  std::vector<int> col_of(g.size(), -1), columns;
  for (int idx = 0; idx < g.size(); ++idx)
    if (g.masked(idx)) {
      col_of[idx] = static_cast<int>(columns.size());
      columns.push_back(idx);
    }
  const int n = static_cast<int>(columns.size());
  const int nx = g.nx();

  std::vector<double> inv_conf2(n);  // e^{-2 sigma0} per unknown node
  for (int c = 0; c < n; ++c) {
    const cplx z = g.node(columns[c] % nx, columns[c] / nx);
    inv_conf2[c] = std::exp(-2.0 * Background::sigma0(z));
  }

  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);

  auto residual = [&](const Eigen::VectorXd& v, Eigen::VectorXd& F) {
    F.resize(n);
    for (int c = 0; c < n; ++c) {
      const int idx = columns[c];
      if (g.kind(idx) == Grid::NodeKind::core) {
        const double lap =
            (v[col_of[idx - 1]] + v[col_of[idx + 1]] + v[col_of[idx - nx]] +
             v[col_of[idx + nx]] - 4.0 * v[c]) /
            (g.h() * g.h());
        F[c] = inv_conf2[c] * lap + 1.0 - std::exp(2.0 * v[c]) +
               ell * std::exp(-2.0 * ell * v[c]) * alpha[idx];
      } else {
        F[c] = v[c];  // glue part appended below
      }
    }
    for (const auto& e : g.glue()) {
      double acc = 0.0;
      for (int s = 0; s < 16; ++s) acc += e.weights[s] * v[col_of[e.donors[s]]];
      F[col_of[e.node]] -= acc;
    }
  };

  auto sup_core = [&](const Eigen::VectorXd& F) {
    double sup = 0.0;
    for (int c = 0; c < n; ++c)
      if (g.kind(columns[c]) == Grid::NodeKind::core)
        sup = std::max(sup, std::abs(F[c]));
    return sup;
  };

  Eigen::VectorXd F;
  residual(u, F);
  double res = sup_core(F);
  std::vector<ConvergenceRow> history;
  double best = res;
  int since_best = 0;

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  for (int it = 0; it < opts.max_iterations; ++it) {
    if (res < opts.tol) break;

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(17 * n);
    for (int c = 0; c < n; ++c) {
      const int idx = columns[c];
      if (g.kind(idx) == Grid::NodeKind::core) {
        const double ih2 = inv_conf2[c] / (g.h() * g.h());
        trip.emplace_back(c, col_of[idx - 1], ih2);
        trip.emplace_back(c, col_of[idx + 1], ih2);
        trip.emplace_back(c, col_of[idx - nx], ih2);
        trip.emplace_back(c, col_of[idx + nx], ih2);
        trip.emplace_back(c, c,
                          -4.0 * ih2 - 2.0 * std::exp(2.0 * u[c]) -
                              2.0 * ell * ell * std::exp(-2.0 * ell * u[c]) *
                                  alpha[idx]);
      } else {
        trip.emplace_back(c, c, 1.0);
      }
    }
    for (const auto& e : g.glue()) {
      const int r = col_of[e.node];
      for (int s = 0; s < 16; ++s)
        trip.emplace_back(r, col_of[e.donors[s]], -e.weights[s]);
    }
    Eigen::SparseMatrix<double> J(n, n);
    J.setFromTriplets(trip.begin(), trip.end());
    lu.compute(J);
    if (lu.info() != Eigen::Success)
      throw SolverError("conformal solve: Jacobian factorization failed",
                        history);
    const Eigen::VectorXd delta = lu.solve(-F);

    double s = 1.0;
    Eigen::VectorXd Fnew;
    double res_new = res;
    for (int back = 0; back < 12; ++back) {
      residual(u + s * delta, Fnew);
      res_new = sup_core(Fnew);
      if (res_new <= (1.0 - opts.armijo * s) * res) break;
      s *= 0.5;
    }
    u += s * delta;
    F.swap(Fnew);
    res = res_new;
    history.push_back({it, res, s * delta.norm()});
    if (log != nullptr) *log = history;

    if (res < best * (1.0 - 1e-12)) {
      best = res;
      since_best = 0;
    } else if (++since_best >= opts.stagnation_window) {
      throw SolverError("conformal solve: residual stagnated for " +
                            std::to_string(opts.stagnation_window) +
                            " iterations at " + std::to_string(res),
                        history);
    }
  }
  if (res >= opts.tol)
    throw SolverError("conformal solve: no convergence within iteration cap",
                      history);

  RBuf out(g.size(), kNaN);
  for (int c = 0; c < n; ++c) out[columns[c]] = u[c];
  g.fill_margin(out);
  return out;
}

VortexData hyperbolic_datum(std::shared_ptr<const FuchsianGroup> group,
                            std::shared_ptr<const Grid> grid, Rational ell) {
  VortexData d;
  d.ell = ell;
  d.coupling = ell.value();
  d.A.weight = make_rational(ell.num + ell.den, ell.den);
  d.A.metric_tag = "g";
  d.A.amp.assign(grid->size(), cplx(0.0, 0.0));
  d.u.assign(grid->size(), 0.0);
  d.bg = std::make_shared<Background>(group, grid);
  return d;
}

VortexData solve_vortex(std::shared_ptr<const FuchsianGroup> group,
                        std::shared_ptr<const Grid> grid,
                        const WeightedField& A_g0, Rational ell,
                        const SolveOptions& opts,
                        std::vector<ConvergenceRow>* log) {
  Background bg0(group, grid);
  RBuf alpha(grid->size(), kNaN);
  for (int idx = 0; idx < grid->size(); ++idx)
    if (grid->masked(idx)) alpha[idx] = std::norm(A_g0.amp[idx]);

  VortexData d;
  d.ell = ell;
  d.coupling = ell.value();
  d.u = solve_conformal_factor(bg0, alpha, ell.value(), opts, log);
  d.bg = std::make_shared<Background>(group, grid);
  d.bg->set_conformal_factor(d.u);

  const double wplus = 1.0 + ell.value();
  d.A.weight = A_g0.weight;
  d.A.metric_tag = "g";
  d.A.amp.assign(grid->size(), cplx(0.0, 0.0));
  for (int idx = 0; idx < grid->size(); ++idx)
    if (grid->masked(idx))
      d.A.amp[idx] = A_g0.amp[idx] * std::exp(-wplus * d.u[idx]);
  return d;
}

ResidualReport vortex_residuals(const VortexData& d) {
  const Background& bg = *d.bg;
  const Grid& g = bg.grid();
  const double ell = d.ell.value();

  ResidualReport rep;
  rep.curv.assign(g.size(), kNaN);
  FieldJet jetT;
  if (d.has_theta()) jetT = build_jet(bg, d.theta);
  for (int idx : g.core_nodes()) {
    const double Kg = bg.has_u() ? bg.curvature_buffer()[idx] : -1.0;
    if (!valid(Kg)) continue;
    double delta_theta_term = 0.0;  // X theta + H V theta = 2 Im W- Theta
    if (d.has_theta()) {
      if (!valid(jetT.wminus[idx])) continue;
      delta_theta_term = 2.0 * jetT.wminus[idx].imag();
    }
    rep.curv[idx] = Kg + 1.0 + delta_theta_term - ell * std::norm(d.A.amp[idx]);
  }
  for (int idx : g.domain_nodes())
    if (valid(rep.curv[idx]))
      rep.curv_sup = std::max(rep.curv_sup, std::abs(rep.curv[idx]));

  rep.hol_sup = dbar_residual_sup(bg, d.A, d.has_theta() ? &d.theta : nullptr,
                                  d.coupling);
  return rep;
}

VortexData gauge_transform(const VortexData& d, const RBuf& w) {
  const Grid& g = d.bg->grid();
  VortexData out = d;

  for (int idx = 0; idx < g.size(); ++idx)
    if (g.masked(idx)) out.A.amp[idx] = d.A.amp[idx] * std::exp(-w[idx]);

  // theta -> theta - dw/k: weight-1 amplitude shift -(2i/k) e^{-sigma} dw/dz.
  const RBuf wx = g.ddx(w), wy = g.ddy(w);
  CBuf tshift(g.size(), cplx(0.0, 0.0));
  for (int idx = 0; idx < g.size(); ++idx) {
    if (!g.masked(idx) || !valid(wx[idx]) || !valid(wy[idx])) continue;
    const cplx dw = 0.5 * cplx(wx[idx], -wy[idx]);
    tshift[idx] = cplx(0.0, -2.0 / d.coupling) *
                  std::exp(-d.bg->sigma_node(idx)) * dw;
  }
  if (out.theta.amp.empty()) {
    out.theta.weight = make_rational(1, 1);
    out.theta.metric_tag = d.A.metric_tag;
    out.theta.amp.assign(g.size(), cplx(0.0, 0.0));
  }
  for (int idx = 0; idx < g.size(); ++idx)
    if (g.masked(idx)) out.theta.amp[idx] += tshift[idx];
  g.fill_margin(out.theta.amp, 1.0);

  if (out.f.empty()) out.f.assign(g.size(), 0.0);
  for (int idx = 0; idx < g.size(); ++idx)
    if (g.masked(idx)) out.f[idx] += w[idx];
  g.fill_margin(out.f);
  return out;
}

VortexData make_generalized_datum(const VortexData& solved, double k,
                                  const RBuf& vartheta) {
  const Grid& g = solved.bg->grid();
  VortexData out = solved;
  out.coupling = k;

  for (int idx = 0; idx < g.size(); ++idx)
    if (g.masked(idx))
      out.A.amp[idx] = solved.A.amp[idx] *
                       std::polar(1.0, -vartheta[idx]);
  g.fill_margin(out.A.amp, out.A.weight.value());

  // theta = -(1/k) star d vartheta: weight-1 amplitude -(2/k) e^{-sigma} d vartheta/dz
  const RBuf vx = g.ddx(vartheta), vy = g.ddy(vartheta);
  out.theta.weight = make_rational(1, 1);
  out.theta.metric_tag = solved.A.metric_tag;
  out.theta.amp.assign(g.size(), cplx(0.0, 0.0));
  for (int idx = 0; idx < g.size(); ++idx) {
    if (!g.masked(idx) || !valid(vx[idx]) || !valid(vy[idx])) continue;
    const cplx dv = 0.5 * cplx(vx[idx], -vy[idx]);
    out.theta.amp[idx] =
        (-2.0 / k) * std::exp(-solved.bg->sigma_node(idx)) * dv;
  }
  g.fill_margin(out.theta.amp, 1.0);
  return out;
}

ThermostatField::ThermostatField(const VortexData& d)
    : bg_(d.bg), ell_(d.ell.value()) {
  const Grid& g = bg_->grid();

  afun_ = FieldSum::of(d.A);
  FieldSum lam = FieldSum::imag_part(d.A);  // a
  if (d.has_f()) {
    RBuf expf(g.size(), 1.0);
    for (int idx = 0; idx < g.size(); ++idx)
      if (g.masked(idx)) expf[idx] = std::exp(d.f[idx]);
    lam.multiply_scalar_field(expf);
    FieldSum hf = FieldSum::scalar(d.f).hderiv(*bg_);
    hf.scale(-1.0 / ell_);
    lam += hf;
  }
  if (d.has_theta()) {
    tfun_ = FieldSum::of(d.theta);
    FieldSum vtheta = FieldSum::real_part(d.theta);
    vtheta.scale(-1.0);
    lam += vtheta;
  }
  lam_ = lam;
  vlam_ = lam_.vderiv();
  hlam_ = lam_.hderiv(*bg_);

  FieldSum p = FieldSum::real_part(d.A);  // Va/(1+l)
  if (d.has_theta()) p += FieldSum::imag_part(d.theta);
  p_ = p;
  vp_ = p_.vderiv();
  xp_ = p_.xderiv(*bg_);
}

double ThermostatField::lambda(const PhasePoint& p) const {
  return lam_.evaluate(*bg_, p).real();
}

ThermostatField::Sample ThermostatField::sample(const PhasePoint& pt) const {
  const WrapResult wr = bg_->wrap(pt);
  const PhasePoint& q = wr.point;

  Sample s{};
  s.lambda = lam_.evaluate_wrapped(*bg_, q).real();
  s.vlambda = vlam_.evaluate_wrapped(*bg_, q).real();
  s.hlambda = hlam_.evaluate_wrapped(*bg_, q).real();
  s.Kg = bg_->gauss_curvature(q.z);
  s.kappa = s.Kg - s.hlambda + s.lambda * s.lambda;
  s.p = p_.evaluate_wrapped(*bg_, q).real();
  s.vp = vp_.evaluate_wrapped(*bg_, q).real();
  s.xp = xp_.evaluate_wrapped(*bg_, q).real();
  s.fp = s.xp + s.lambda * s.vp;
  s.kappa_p = s.kappa + s.fp + s.p * (s.p - s.vlambda);
  s.A = afun_.evaluate_wrapped(*bg_, q);
  s.a = s.A.imag();
  s.va = (1.0 + ell_) * s.A.real();
  if (!tfun_.empty()) {
    const cplx T = tfun_.evaluate_wrapped(*bg_, q);
    s.theta = T.imag();
    s.vtheta = T.real();
  }
  return s;
}

double generalized_kappa_p(const ThermostatField& thermo, const PhasePoint& p) {
  return thermo.sample(p).kappa_p;
}

}  // namespace vortexlab
