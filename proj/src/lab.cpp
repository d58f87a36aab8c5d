#include "vortexlab/lab.hpp"

#include <cmath>

namespace vortexlab {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

PhasePoint random_phase_point(const FuchsianGroup& group, std::mt19937_64& rng,
                              double rmax) {
  std::uniform_real_distribution<double> ur(0.0, 1.0);
  for (;;) {
    const cplx z = std::polar(rmax * std::sqrt(ur(rng)), 2.0 * kPi * ur(rng));
    const double phi = 2.0 * kPi * group.root_order() * ur(rng);
    if (group.domain().signed_side_clearance(z) > 0.05) return {z, phi};
  }
}

WeightedField combine_basis(const Background& bg,
                            const std::vector<WeightedField>& basis,
                            const std::vector<cplx>& coefficients) {
  if (basis.empty()) throw std::invalid_argument("empty basis");
  WeightedField out;
  out.weight = basis.front().weight;
  out.metric_tag = basis.front().metric_tag;
  out.amp.assign(bg.grid().size(), cplx(0.0, 0.0));
  for (std::size_t k = 0; k < basis.size() && k < coefficients.size(); ++k)
    for (std::size_t idx = 0; idx < out.amp.size(); ++idx)
      out.amp[idx] += coefficients[k] * basis[k].amp[idx];
  return out;
}

WeightedField seed_projected_A(const Background& bg,
                               const std::vector<WeightedField>& basis) {
  const Grid& g = bg.grid();
  const double w = basis.front().weight.value();
  CBuf seed(g.size(), cplx(0.0, 0.0));
  for (int idx = 0; idx < g.size(); ++idx) {
    if (!g.masked(idx)) continue;
    const cplx z = g.node(idx % g.nx(), idx / g.nx());
    seed[idx] = (cplx(0.8, 0.3) + cplx(1.1, -0.4) * z + 0.9 * z * z) *
                std::exp(-w * Background::sigma0(z));
  }
  return project_onto(bg, basis, seed);
}

void normalize_alpha_max(const Grid& grid, WeightedField& A, double ell,
                         double target) {
  double mx = 0.0;
  for (int idx : grid.domain_nodes()) mx = std::max(mx, std::norm(A.amp[idx]));
  if (mx <= 0.0) return;
  const double factor = std::sqrt(target / (ell * mx));
  for (auto& v : A.amp) v *= factor;
}

VortexData standard_solved_datum(std::shared_ptr<const FuchsianGroup> group,
                                 std::shared_ptr<const Grid> grid, Rational ell,
                                 double alpha_max, const SolveOptions& opts,
                                 std::vector<ConvergenceRow>* log) {
  Background bg0(group, grid);
  const Rational w = make_rational(ell.num + ell.den, ell.den);
  auto basis = holomorphic_projection(bg0, w, 2 * riemann_roch_kernel_dim(w));
  WeightedField A = seed_projected_A(bg0, basis);
  normalize_alpha_max(*grid, A, ell.value(), alpha_max);
  return solve_vortex(group, grid, A, ell, opts, log);
}

OrbitPipelineResult run_orbit_pipeline(const ThermostatField& thermo,
                                       const PhasePoint& start,
                                       const PipelineOptions& opts) {
  const Background& bg = thermo.background();
  LambdaFn lam = [&thermo](const PhasePoint& p) { return thermo.lambda(p); };

  OrbitPipelineResult out;
  out.trace = make_orbit(bg, lam, start, opts.hopf_guard,
                         opts.T + opts.hopf_guard, opts.dt);
  sample_orbit(thermo, out.trace);
  out.gen = GeneratorSeries::from_trace(out.trace);
  out.window_i0 = out.gen.index_of(0.0);
  out.window_i1 = out.gen.index_of(opts.T);
  out.hopf = hopf_limit(out.gen, out.window_i0, out.window_i1, opts.hopf);
  const AnosovReport an =
      anosov_conditions(out.gen, out.hopf, thermo.ell());
  out.fit = verify_domination(out.gen, out.hopf);
  const LyapunovPair lyap =
      lyapunov_exponents(out.gen, out.window_i0, out.window_i1);

  OrbitVerdict& v = out.verdict;
  v.ru_min = 1e300;
  v.rs_min = 1e300;
  v.ru_max = -1e300;
  v.rs_max = -1e300;
  v.kappa_p_min = 1e300;
  v.kappa_p_max = -1e300;
  for (int i = out.window_i0; i <= out.window_i1; i += 2) {
    v.ru_min = std::min(v.ru_min, out.hopf.r_u_at(i));
    v.ru_max = std::max(v.ru_max, out.hopf.r_u_at(i));
    v.rs_min = std::min(v.rs_min, out.hopf.r_s_at(i));
    v.rs_max = std::max(v.rs_max, out.hopf.r_s_at(i));
  }
  for (int i = out.window_i0; i <= out.window_i1; ++i) {
    v.kappa_p_min = std::min(v.kappa_p_min, out.gen.kappa_p[i]);
    v.kappa_p_max = std::max(v.kappa_p_max, out.gen.kappa_p[i]);
  }
  v.alt1_margin_u = an.min_ru;
  v.alt1_margin_s = -an.max_rs;
  v.alt2_margin_u = an.min_alt2_u;
  v.alt2_margin_s = -an.max_alt2_s;
  v.mu_fit = out.fit.mu;
  v.C_fit = out.fit.C;
  v.chi_plus = lyap.chi_plus;
  v.chi_minus = lyap.chi_minus;
  v.domination_pass = out.fit.pass;
  return out;
}

std::vector<OrbitVerdict> run_ensemble(const ThermostatField& thermo,
                                       int count, std::uint64_t seed,
                                       const PipelineOptions& opts) {
  auto verdicts = parallel_map(count, [&](int k) {
    std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ull * (k + 1)));
    const PhasePoint start = random_phase_point(thermo.background().group(), rng);
    OrbitPipelineResult r = run_orbit_pipeline(thermo, start, opts);
    r.verdict.orbit_id = k;
    return r.verdict;
  });
  return verdicts;
}

}  // namespace vortexlab
