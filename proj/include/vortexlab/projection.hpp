#pragma once

#include <cstdint>

#include "vortexlab/field.hpp"

namespace vortexlab {

struct KernelOptions {
  int taylor_degree = 200;     // truncation of the chart coefficient
  int points_per_side = 220;   // collocation points per paired side
  double kernel_tol = 2e-15;   // relative to the largest singular value
  double gap_min = 10.0;       // required ratio first-nonkernel / last-kernel
};

struct KernelReport {
  std::vector<double> singular_values;  // ascending, relative, the probed ones
  int kernel_dim = 0;
  double gap = 0.0;
  double basis_fd_residual = 0.0;  // max FD dbar residual over the basis
};

struct SpectralGapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Orthonormal basis (hyperbolic L2 over the fundamental domain) of the
/// numerical kernel of the dbar operator on weight-w sections: the
/// holomorphic chart coefficient is expanded in scaled monomials and the
/// side-pairing automorphy relations are imposed at collocation points;
/// kernel = right singular vectors below kernel_tol, guarded by the
/// spectral-gap requirement. seed_count bounds the number of probed
/// singular values (>= expected dimension + a few).
std::vector<WeightedField> holomorphic_projection(
    const Background& bg, Rational weight, int seed_count,
    const KernelOptions& opts = {}, KernelReport* report = nullptr);

/// L2(g0) inner product over the fundamental domain, sum f conj(g) dA.
cplx field_inner(const Grid& grid, const CBuf& f, const CBuf& g);

/// Orthogonal projection of an arbitrary amplitude onto the span of a basis.
WeightedField project_onto(const Background& bg,
                           const std::vector<WeightedField>& basis,
                           const CBuf& seed_amp);

/// Riemann-Roch count dim H^0(K^w) on genus 2 for deg K^w = 2w > 2g-2.
int riemann_roch_kernel_dim(Rational weight);

}  // namespace vortexlab
