#pragma once

#include <array>
#include <future>
#include <string>

#include "vortexlab/cocycle.hpp"

namespace vortexlab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Batch-run configuration (JSON, versioned schema).
struct ExperimentConfig {
  int schema = 1;
  int root_order = 1;
  std::array<int, 4> branch_offsets{0, 0, 0, 0};
  double grid_h = 0.02;
  Rational weight = make_rational(3, 1);  // fiber weight of the differential
  double solver_tol = 1e-10;
  int orbit_count = 8;
  double orbit_T = 20.0;
  double dt = 0.005;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::vector<cplx> coefficients;  // basis combination for solve

  Rational ell() const {  // weight = 1 + ell
    return make_rational(weight.num - weight.den, weight.den);
  }
  void validate() const;
  static ExperimentConfig from_json_file(const std::string& path);
};

// ---- field and manifest files ----------------------------------------------
// A field is a JSON header (weight, grid spec, metric tag, branch signs) next
// to a CSV of complex amplitudes in row-major node order (unmasked nodes 0 0).
void write_field(const std::string& dir, const std::string& name,
                 const Background& bg, const WeightedField& f);
WeightedField read_field(const std::string& json_path, const Background& bg);

void write_group_json(const std::string& path, const FuchsianGroup& g);

/// Manifest of a vortex datum: geometry spec plus references to field files
/// (A, optional theta, u as a weight-0 field).
void write_manifest(const std::string& dir, const std::string& name,
                    const VortexData& d);
VortexData read_manifest(const std::string& json_path);

// ---- CSV / JSON reports ----------------------------------------------------
void write_orbit_csv(const std::string& path, const OrbitTrace& trace);
void write_convergence_csv(const std::string& path,
                           const std::vector<ConvergenceRow>& log);

/// Per-orbit record of the verification pipeline.
struct OrbitVerdict {
  int orbit_id = 0;
  double ru_min = 0.0, ru_max = 0.0, rs_min = 0.0, rs_max = 0.0;
  double kappa_p_min = 0.0, kappa_p_max = 0.0;
  double alt1_margin_u = 0.0, alt1_margin_s = 0.0;
  double alt2_margin_u = 0.0, alt2_margin_s = 0.0;
  double mu_fit = 0.0, C_fit = 0.0;
  double chi_plus = 0.0, chi_minus = 0.0;
  bool domination_pass = false;
};
void write_verdicts_json(const std::string& path,
                         const std::vector<OrbitVerdict>& verdicts,
                         double ell, int expected_alternative);
void write_verdicts_csv(const std::string& path,
                        const std::vector<OrbitVerdict>& verdicts);

// ---- SVG plots ---------------------------------------------------------------
struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};
void write_svg_lines(const std::string& path, const std::string& title,
                     const std::vector<PlotSeries>& series);
void write_svg_histogram(const std::string& path, const std::string& title,
                         const std::vector<double>& values, int bins = 40);

/// Deterministic ordered parallel map over [0, count).
template <typename Fn>
auto parallel_map(int count, Fn&& fn)
    -> std::vector<decltype(fn(0))> {
  std::vector<std::future<decltype(fn(0))>> futures;
  futures.reserve(count);
  for (int k = 0; k < count; ++k)
    futures.push_back(std::async(std::launch::async, fn, k));
  std::vector<decltype(fn(0))> out;
  out.reserve(count);
  for (auto& f : futures) out.push_back(f.get());
  return out;
}

}  // namespace vortexlab
