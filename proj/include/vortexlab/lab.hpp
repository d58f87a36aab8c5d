#pragma once

#include <random>

#include "vortexlab/projection.hpp"
#include "vortexlab/report.hpp"

namespace vortexlab {

/// Deterministic random phase point with z well inside the octagon.
PhasePoint random_phase_point(const FuchsianGroup& group, std::mt19937_64& rng,
                              double rmax = 0.55);

/// Linear combination of basis fields (coefficients padded/truncated).
WeightedField combine_basis(const Background& bg,
                            const std::vector<WeightedField>& basis,
                            const std::vector<cplx>& coefficients);

/// Projection of a fixed smooth chart seed onto the kernel basis; used as
/// the reproducible default differential (independent of the basis phases
/// and stable under grid refinement).
WeightedField seed_projected_A(const Background& bg,
                               const std::vector<WeightedField>& basis);

/// Rescale so that max ell |A|^2_{g0} over the fundamental domain = target.
void normalize_alpha_max(const Grid& grid, WeightedField& A, double ell,
                         double target);

/// Basis + seed projection + normalization + conformal solve in one step.
VortexData standard_solved_datum(std::shared_ptr<const FuchsianGroup> group,
                                 std::shared_ptr<const Grid> grid, Rational ell,
                                 double alpha_max = 0.5,
                                 const SolveOptions& opts = {},
                                 std::vector<ConvergenceRow>* log = nullptr);

struct PipelineOptions {
  double T = 10.0;         // verification window
  double dt = 0.005;
  double hopf_guard = 45.0;  // orbit extension on both ends
  HopfOptions hopf{{5.0, 10.0, 20.0, 40.0}, 1e-9};
};

struct OrbitPipelineResult {
  OrbitVerdict verdict;
  OrbitTrace trace;
  GeneratorSeries gen;
  HopfSolutions hopf;
  DominationFit fit;
  int window_i0 = 0, window_i1 = 0;
};

/// Full single-orbit pipeline: integrate with Hopf guards, sample, Hopf
/// limits, alternatives, domination fit, Lyapunov exponents.
OrbitPipelineResult run_orbit_pipeline(const ThermostatField& thermo,
                                       const PhasePoint& start,
                                       const PipelineOptions& opts);

/// Ensemble-parallel verdicts with per-orbit seeding and ordered reduction.
std::vector<OrbitVerdict> run_ensemble(const ThermostatField& thermo,
                                       int count, std::uint64_t seed,
                                       const PipelineOptions& opts);

}  // namespace vortexlab
