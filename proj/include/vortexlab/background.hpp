#pragma once

#include <memory>

#include "vortexlab/grid.hpp"

namespace vortexlab {

/// Conformal geometry g = e^{2(sigma0 + u)} |dz|^2 on the quotient, where
/// sigma0 = log(2/(1-|z|^2)) is the hyperbolic background and u is an
/// automorphic conformal factor sampled on the grid (empty: u = 0). Provides
/// the data the frame calculus needs: sigma, its Wirtinger gradient and the
/// Gauss curvature, both at nodes and at arbitrary points.
class Background {
 public:
  Background(std::shared_ptr<const FuchsianGroup> group,
             std::shared_ptr<const Grid> grid);

  static double sigma0(cplx z) { return std::log(2.0 / (1.0 - std::norm(z))); }
  static cplx dsigma0(cplx z) { return std::conj(z) / (1.0 - std::norm(z)); }

  /// Install a conformal factor (margin is refilled; derived buffers rebuilt).
  void set_conformal_factor(RBuf u);
  bool has_u() const { return !u_.empty(); }
  const RBuf& u() const { return u_; }

  double sigma(cplx z) const;
  cplx grad_sigma(cplx z) const;         // d sigma / dz
  double conformal_factor(cplx z) const; // e^{sigma}
  double gauss_curvature(cplx z) const;

  double sigma_node(int idx) const;
  cplx dsigma_node(int idx) const;
  /// K_g at nodes; empty when u is not set (then K = -1 identically).
  const RBuf& curvature_buffer() const { return Kg_; }

  const FuchsianGroup& group() const { return *group_; }
  const Grid& grid() const { return *grid_; }
  std::shared_ptr<const Grid> grid_ptr() const { return grid_; }
  std::shared_ptr<const FuchsianGroup> group_ptr() const { return group_; }

  WrapResult wrap(const PhasePoint& p) const {
    return group_->wrap_to_domain(p, wrap_word_cap);
  }

  int wrap_word_cap = 6;

 private:
  std::shared_ptr<const FuchsianGroup> group_;
  std::shared_ptr<const Grid> grid_;
  RBuf u_, ux_, uy_, Kg_;
};

/// Smooth automorphic weight-0 field: sum over a word ball of Gaussians in
/// hyperbolic distance, exact on the quotient to machine precision.
RBuf automorphic_bump(const Grid& grid, cplx center, double width,
                      double amplitude = 1.0, int word_ball = 4);

}  // namespace vortexlab
