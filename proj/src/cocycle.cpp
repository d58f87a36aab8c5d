#include "vortexlab/cocycle.hpp"

#include <cmath>

namespace vortexlab {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

int GeneratorSeries::index_of(double t) const {
  const double x = (t - t0) / dt_fine;
  const int k = static_cast<int>(std::lround(x));
  if (k < 0 || k >= size() || std::abs(x - k) > 1e-6)
    throw std::invalid_argument("GeneratorSeries::index_of: time off the grid");
  return k;
}

GeneratorSeries GeneratorSeries::from_trace(const OrbitTrace& trace) {
  if (!trace.sampled())
    throw std::invalid_argument("from_trace: orbit has no physics samples");
  GeneratorSeries g;
  g.t0 = trace.t0;
  g.dt_fine = trace.dt_fine;
  g.kappa = trace.kappa;
  g.vlambda = trace.vlambda;
  g.lambda = trace.lambda;
  g.p = trace.p;
  g.kappa_p = trace.kappa_p;
  return g;
}

GeneratorSeries GeneratorSeries::constants(double kappa, double vlambda,
                                           double t0, double t1,
                                           double dt_fine) {
  return sampled([=](double) { return kappa; }, [=](double) { return vlambda; },
                 t0, t1, dt_fine);
}

GeneratorSeries GeneratorSeries::sampled(
    const std::function<double(double)>& kappa,
    const std::function<double(double)>& vlambda, double t0, double t1,
    double dt_fine) {
  GeneratorSeries g;
  g.t0 = t0;
  g.dt_fine = dt_fine;
  const int n = static_cast<int>(std::lround((t1 - t0) / dt_fine));
  g.kappa.resize(n + 1);
  g.vlambda.resize(n + 1);
  g.lambda.assign(n + 1, 0.0);
  for (int k = 0; k <= n; ++k) {
    const double t = t0 + k * dt_fine;
    g.kappa[k] = kappa(t);
    g.vlambda[k] = vlambda(t);
  }
  return g;
}

double simpson(const std::vector<double>& values, double dt_fine, int i0,
               int i1) {
  if ((i1 - i0) % 2 != 0 || i1 <= i0)
    throw std::invalid_argument("simpson: need an even positive span");
  double acc = 0.0;
  for (int k = i0; k + 2 <= i1; k += 2)
    acc += values[k] + 4.0 * values[k + 1] + values[k + 2];
  return acc * dt_fine / 3.0;
}

MatrixSeries thermostat_generator(const GeneratorSeries& gen) {
  MatrixSeries m;
  m.t0 = gen.t0;
  m.dt_fine = gen.dt_fine;
  m.B.resize(gen.size());
  for (int k = 0; k < gen.size(); ++k)
    m.B[k] << 0.0, -1.0, gen.kappa[k], -gen.vlambda[k];
  return m;
}

std::vector<double> kappa_p_series(const GeneratorSeries& gen,
                                   const std::vector<double>& p_fine,
                                   std::vector<double> fp_fine) {
  const int n = gen.size();
  if (fp_fine.empty()) {
    fp_fine.assign(n, 0.0);
    for (int k = 0; k < n; ++k) {
      const int a = std::max(0, k - 1), b = std::min(n - 1, k + 1);
      fp_fine[k] = (p_fine[b] - p_fine[a]) / ((b - a) * gen.dt_fine);
    }
  }
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k)
    out[k] = gen.kappa[k] + fp_fine[k] +
             p_fine[k] * (p_fine[k] - gen.vlambda[k]);
  return out;
}

MatrixSeries conjugate_generator(const GeneratorSeries& gen,
                                 const std::vector<double>& p_fine,
                                 std::vector<double> fp_fine) {
  const std::vector<double> kp = kappa_p_series(gen, p_fine, std::move(fp_fine));
  MatrixSeries m;
  m.t0 = gen.t0;
  m.dt_fine = gen.dt_fine;
  m.B.resize(gen.size());
  for (int k = 0; k < gen.size(); ++k)
    m.B[k] << -p_fine[k], -1.0, kp[k], -gen.vlambda[k] + p_fine[k];
  return m;
}

Eigen::Matrix2d cocycle_step(const MatrixSeries& mat, int i) {
  // dPsi/dt = -B(t) Psi, one RK4 step of size 2*dt_fine from fine index i
  const double dt = 2.0 * mat.dt_fine;
  const Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
  const Eigen::Matrix2d k1 = -mat.B[i];
  const Eigen::Matrix2d k2 = -mat.B[i + 1] * (I + 0.5 * dt * k1);
  const Eigen::Matrix2d k3 = -mat.B[i + 1] * (I + 0.5 * dt * k2);
  const Eigen::Matrix2d k4 = -mat.B[i + 2] * (I + dt * k3);
  return I + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

std::vector<CocycleState> evolve_cocycle(const MatrixSeries& mat, int i0,
                                         int i1,
                                         const std::vector<double>* lambda_fine) {
  if ((i1 - i0) % 2 != 0 || i1 < i0 || i1 >= mat.size())
    throw std::invalid_argument("evolve_cocycle: bad index range");
  std::vector<CocycleState> out;
  out.reserve((i1 - i0) / 2 + 1);
  CocycleState st;
  st.t = mat.t0 + i0 * mat.dt_fine;
  out.push_back(st);
  double next_renorm = st.t + 10.0;
  const double dt = 2.0 * mat.dt_fine;
  for (int i = i0; i + 2 <= i1; i += 2) {
    const Eigen::Matrix2d S = cocycle_step(mat, i);
    CocycleState nx = out.back();
    nx.t = mat.t0 + (i + 2) * mat.dt_fine;
    nx.Psi = S * nx.Psi;
    nx.log_det += std::log(std::abs(S.determinant()));
    if (lambda_fine != nullptr) {
      // augmented RK4: dw/dt = lambda * (y-row of the scaled cocycle)
      const Eigen::Matrix2d& P = out.back().Psi;
      const Eigen::Matrix2d k1 = -mat.B[i] * P;
      const Eigen::Matrix2d k2 = -mat.B[i + 1] * (P + 0.5 * dt * k1);
      const Eigen::Matrix2d k3 = -mat.B[i + 1] * (P + 0.5 * dt * k2);
      const Eigen::RowVector2d l1 = (*lambda_fine)[i] * P.row(0);
      const Eigen::RowVector2d l2 =
          (*lambda_fine)[i + 1] * (P + 0.5 * dt * k1).row(0);
      const Eigen::RowVector2d l3 =
          (*lambda_fine)[i + 1] * (P + 0.5 * dt * k2).row(0);
      const Eigen::RowVector2d l4 = (*lambda_fine)[i + 2] * (P + dt * k3).row(0);
      nx.wrow = out.back().wrow + dt / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
    }
    if (nx.t >= next_renorm || nx.Psi.norm() > 1e100) {
      const double s = nx.Psi.norm();
      nx.Psi /= s;
      nx.wrow /= s;
      nx.log_scale += std::log(s);
      while (next_renorm <= nx.t) next_renorm += 10.0;
    }
    out.push_back(nx);
  }
  return out;
}

std::vector<CocycleState> evolve_cocycle(const GeneratorSeries& gen, int i0,
                                         int i1) {
  return evolve_cocycle(thermostat_generator(gen), i0, i1,
                        gen.lambda.empty() ? nullptr : &gen.lambda);
}

std::vector<double> riccati_integrate(const GeneratorSeries& gen, double r0,
                                      int i0, int i1) {
  const int dir = (i1 >= i0) ? 1 : -1;
  if ((i1 - i0) % 2 != 0)
    throw std::invalid_argument("riccati_integrate: need an even span");
  const double dt = dir * 2.0 * gen.dt_fine;
  auto rhs = [&](double psi, int fine_idx) {
    const double s = std::sin(psi), c = std::cos(psi);
    return -s * s + s * c * gen.vlambda[fine_idx] - gen.kappa[fine_idx] * c * c;
  };
  double psi = std::isinf(r0) ? 0.5 * kPi : std::atan(r0);
  std::vector<double> out;
  out.reserve(std::abs(i1 - i0) / 2 + 1);
  out.push_back(std::tan(psi));
  for (int i = i0; i != i1; i += 2 * dir) {
    const double k1 = rhs(psi, i);
    const double k2 = rhs(psi + 0.5 * dt * k1, i + dir);
    const double k3 = rhs(psi + 0.5 * dt * k2, i + dir);
    const double k4 = rhs(psi + dt * k3, i + 2 * dir);
    psi += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    out.push_back(std::tan(psi));
  }
  return out;
}

std::pair<double, double> comparison_bounds(double c) {
  if (c < 0.0) throw std::invalid_argument("comparison_bounds: need c >= 0");
  const double s = std::sqrt(c * c + 4.0);
  return {0.5 * (-c + s), 0.5 * (c + s)};
}

double riccati_normal_form(double c, double R, double t) {
  const double s = std::sqrt(c * c + 4.0);
  const double Cp = 0.5 * (c + s), Cm = 0.5 * (c - s);
  const double E = 1.0 / (Cp - Cm);
  const double q = std::exp((-R - t) / E);
  return (1.0 - q) / (-Cm + Cp * q);
}

HopfSolutions hopf_limit(const GeneratorSeries& gen, int i0, int i1,
                         const HopfOptions& opts) {
  HopfSolutions out;
  out.i0 = i0;
  out.i1 = i1;

  auto run = [&](bool unstable) {
    std::vector<double> prev, cur;
    double achieved = 0.0;
    std::vector<double> gaps;
    const double inf = std::numeric_limits<double>::infinity();
    for (double R : opts.schedule) {
      const int span = static_cast<int>(std::lround(R / gen.dt_fine));
      const int start = unstable ? i0 - (span - span % 2)
                                 : i1 + (span - span % 2);
      if (start < 0 || start >= gen.size()) {
        if (prev.empty()) continue;
        break;  // series exhausted; use what converged so far
      }
      std::vector<double> full = unstable
                                     ? riccati_integrate(gen, inf, start, i1)
                                     : riccati_integrate(gen, inf, start, i0);
      // keep the window part
      std::vector<double> window;
      const int nwin = (i1 - i0) / 2 + 1;
      window.reserve(nwin);
      if (unstable) {
        const int offset = (i0 - start) / 2;
        for (int k = 0; k < nwin; ++k) window.push_back(full[offset + k]);
      } else {
        const int offset = (start - i1) / 2;
        for (int k = 0; k < nwin; ++k)
          window.push_back(full[offset + (i1 - i0) / 2 - k]);
      }
      achieved = R;
      if (!prev.empty()) {
        const double edge = unstable ? window.front() : window.back();
        const double prev_edge = unstable ? prev.front() : prev.back();
        gaps.push_back(std::abs(edge - prev_edge));
        if (gaps.back() < opts.tol) {
          cur = std::move(window);
          return std::make_tuple(cur, achieved, gaps);
        }
      }
      prev = std::move(window);
    }
    if (gaps.empty() || gaps.back() >= opts.tol)
      throw HopfError("hopf_limit: no Cauchy convergence within the schedule",
                      gaps);
    return std::make_tuple(prev, achieved, gaps);
  };

  std::tie(out.r_u, out.achieved_R_u, out.gaps_u) = run(true);
  std::tie(out.r_s, out.achieved_R_s, out.gaps_s) = run(false);
  return out;
}

AnosovReport anosov_conditions(const GeneratorSeries& gen,
                               const HopfSolutions& hopf, double ell) {
  AnosovReport rep;
  rep.expected_alternative = (ell >= 1.0) ? 1 : 2;
  rep.min_ru = 1e300;
  rep.max_rs = -1e300;
  rep.min_alt2_u = 1e300;
  rep.max_alt2_s = -1e300;
  for (int i = hopf.i0; i <= hopf.i1; i += 2) {
    const double ru = hopf.r_u_at(i), rs = hopf.r_s_at(i);
    const double p = gen.p[i], kp = gen.kappa_p[i], vl = gen.vlambda[i];
    rep.min_ru = std::min(rep.min_ru, ru);
    rep.max_rs = std::max(rep.max_rs, rs);
    rep.min_alt2_u = std::min(rep.min_alt2_u, vl - p - kp / (ru - p));
    rep.max_alt2_s = std::max(rep.max_alt2_s, vl - p - kp / (rs - p));
  }
  rep.alt1 = rep.min_ru > 0.0 && rep.max_rs < 0.0;
  rep.alt2 = rep.min_alt2_u > 0.0 && rep.max_alt2_s < 0.0;
  return rep;
}

DominationFit verify_domination(const GeneratorSeries& gen,
                                const HopfSolutions& hopf) {
  const MatrixSeries mat = thermostat_generator(gen);
  DominationFit fit;
  double logS = 0.0, logU = 0.0;
  std::vector<double>& ts = fit.times;
  std::vector<double>& lp = fit.log_products;
  for (int i = hopf.i0; i + 2 <= hopf.i1; i += 2) {
    const Eigen::Matrix2d S = cocycle_step(mat, i);
    const Eigen::Vector2d us =
        Eigen::Vector2d(1.0, hopf.r_s_at(i)).normalized();
    const Eigen::Vector2d uu =
        Eigen::Vector2d(1.0, hopf.r_u_at(i + 2)).normalized();
    logS += std::log((S * us).norm());
    logU += std::log((S.inverse() * uu).norm());
    ts.push_back(gen.time(i + 2) - gen.time(hopf.i0));
    lp.push_back(logS + logU);
  }
  // least-squares line log P = log C - mu t
  const int n = static_cast<int>(ts.size());
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (int k = 0; k < n; ++k) {
    st += ts[k];
    sy += lp[k];
    stt += ts[k] * ts[k];
    sty += ts[k] * lp[k];
  }
  const double denom = n * stt - st * st;
  const double slope = (n * sty - st * sy) / denom;
  const double intercept = (sy - slope * st) / n;
  fit.mu = -slope;
  double logC = intercept;
  double rss = 0.0;
  for (int k = 0; k < n; ++k) {
    const double d = lp[k] - (intercept + slope * ts[k]);
    rss += d * d;
    logC = std::max(logC, lp[k] + fit.mu * ts[k]);
  }
  fit.C = std::exp(logC);
  fit.fit_residual = std::sqrt(rss / n);
  fit.pass = fit.mu > 0.0;
  return fit;
}

LyapunovPair lyapunov_exponents(const GeneratorSeries& gen, int i0, int i1) {
  const MatrixSeries mat = thermostat_generator(gen);
  // spin-up window so the frame aligns before rates are accumulated
  const double total = (i1 - i0) * gen.dt_fine;
  int spin_fine = 2 * static_cast<int>(std::lround(
                          std::min(5.0, 0.1 * total) / gen.coarse_dt()));
  const int im = i0 + spin_fine;
  Eigen::Matrix2d Q = Eigen::Matrix2d::Identity();
  double l1 = 0.0, l2 = 0.0;
  for (int i = i0; i + 2 <= i1; i += 2) {
    const Eigen::Matrix2d B = cocycle_step(mat, i) * Q;
    // Gram-Schmidt QR of a 2x2
    const double r11 = B.col(0).norm();
    const Eigen::Vector2d q1 = B.col(0) / r11;
    const double r12 = q1.dot(B.col(1));
    const Eigen::Vector2d v2 = B.col(1) - r12 * q1;
    const double r22 = v2.norm();
    Q.col(0) = q1;
    Q.col(1) = v2 / r22;
    if (i >= im) {
      l1 += std::log(r11);
      l2 += std::log(r22);
    }
  }
  const double T = (i1 - im) * gen.dt_fine;
  LyapunovPair out;
  out.chi_plus = std::max(l1, l2) / T;
  out.chi_minus = std::min(l1, l2) / T;
  out.trace_integral = simpson(gen.vlambda, gen.dt_fine, im, i1) / T;
  return out;
}

double provider_consistency_defect(const GeneratorSeries& gen, int i0,
                                   int i1) {
  if (gen.p.empty() || gen.kappa_p.empty())
    throw std::invalid_argument("provider carries no p / kappa_p data");
  std::vector<double> integrand(gen.size());
  for (int k = 0; k < gen.size(); ++k)
    integrand[k] = gen.kappa_p[k] - gen.kappa[k] -
                   gen.p[k] * (gen.p[k] - gen.vlambda[k]);
  const double quad = simpson(integrand, gen.dt_fine, i0, i1);
  return std::abs(gen.p[i1] - gen.p[i0] - quad);
}

QuadraticFormCheck quadratic_form_check(const GeneratorSeries& gen,
                                        const HopfSolutions& hopf, double a0,
                                        double b0) {
  // gauge p = Vlambda/2; the trace-free system is a' = b, b' = -kappa_p a
  std::vector<double> p_fine(gen.size());
  for (int k = 0; k < gen.size(); ++k) p_fine[k] = 0.5 * gen.vlambda[k];
  const std::vector<double> kp = kappa_p_series(gen, p_fine);

  const double dt = gen.coarse_dt();
  const int n = (hopf.i1 - hopf.i0) / 2 + 1;
  std::vector<double> A(n), Bv(n), Q(n);
  double a = a0, b = b0;
  auto rhs = [&](double aa, double bb, int i) {
    return std::make_pair(bb, -kp[i] * aa);
  };
  for (int k = 0; k < n; ++k) {
    const int i = hopf.i0 + 2 * k;
    A[k] = a;
    Bv[k] = b;
    const double hu = hopf.r_u_at(i) - p_fine[i];
    const double hs = hopf.r_s_at(i) - p_fine[i];
    Q[k] = 2.0 * a * b - (hu + hs) * a * a;
    if (i + 2 > hopf.i1) break;
    auto [k1a, k1b] = rhs(a, b, i);
    auto [k2a, k2b] = rhs(a + 0.5 * dt * k1a, b + 0.5 * dt * k1b, i + 1);
    auto [k3a, k3b] = rhs(a + 0.5 * dt * k2a, b + 0.5 * dt * k2b, i + 1);
    auto [k4a, k4b] = rhs(a + dt * k3a, b + dt * k3b, i + 2);
    a += dt / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
    b += dt / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
  }

  QuadraticFormCheck out;
  out.min_qdot = 1e300;
  for (int k = 1; k + 1 < n; ++k) {
    const int i = hopf.i0 + 2 * k;
    const double qdot_fd = (Q[k + 1] - Q[k - 1]) / (2.0 * dt);
    const double hu = hopf.r_u_at(i) - p_fine[i];
    const double hs = hopf.r_s_at(i) - p_fine[i];
    const double predicted = (Bv[k] - hu * A[k]) * (Bv[k] - hu * A[k]) +
                             (Bv[k] - hs * A[k]) * (Bv[k] - hs * A[k]);
    const double scale = A[k] * A[k] + Bv[k] * Bv[k];
    if (scale < 1e-280) continue;  // the zero solution: Qdot = 0 identically
    out.max_identity_error =
        std::max(out.max_identity_error, std::abs(qdot_fd - predicted) / scale);
    out.min_qdot = std::min(out.min_qdot, qdot_fd / scale);
    if (qdot_fd <= 1e-8 * scale) out.positive = false;
  }
  return out;
}

}  // namespace vortexlab
