#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "vortexlab/bolza.hpp"

namespace vortexlab {

using RBuf = std::vector<double>;
using CBuf = std::vector<cplx>;

/// Cartesian lattice over the bounding box of the octagon, with a mask of
/// usable nodes. Nodes split into
///   core:   signed side clearance >= -CORE_BAND * h (unknowns of solvers),
///   margin: clearance in [-MASK_BAND * h, -CORE_BAND * h) (filled from core
///           values by the automorphy relation),
/// so that every bicubic stencil around a wrapped point, and two levels of
/// centered differences on top, stay inside the mask.
class Grid {
 public:
  static constexpr double CORE_BAND = 2.9;
  static constexpr double MASK_BAND = 6.5;

  enum class NodeKind : std::uint8_t { unused = 0, margin = 1, core = 2 };

  /// Bicubic gluing data for one margin node: value = phase * sum w_i v_i,
  /// phase = exp(i * weight * rotation) at the field's fiber weight.
  struct GlueEntry {
    int node = -1;
    std::array<int, 16> donors{};
    std::array<double, 16> weights{};
    double rotation = 0.0;
  };

  Grid(std::shared_ptr<const FuchsianGroup> group, double spacing);

  double h() const { return h_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int size() const { return nx_ * ny_; }
  int index(int i, int j) const { return j * nx_ + i; }
  cplx node(int i, int j) const { return {x0_ + i * h_, y0_ + j * h_}; }
  NodeKind kind(int idx) const { return kind_[idx]; }
  bool masked(int idx) const { return kind_[idx] != NodeKind::unused; }
  double clearance(int idx) const { return clearance_[idx]; }

  const FuchsianGroup& group() const { return *group_; }
  std::shared_ptr<const FuchsianGroup> group_ptr() const { return group_; }

  const std::vector<int>& core_nodes() const { return core_nodes_; }
  const std::vector<int>& margin_nodes() const { return margin_nodes_; }
  /// Core nodes lying in the closed octagon proper (quadrature sample set).
  const std::vector<int>& domain_nodes() const { return domain_nodes_; }
  const std::vector<GlueEntry>& glue() const { return glue_; }

  /// Hyperbolic area element weights (e^{2 sigma0} h^2) on domain_nodes.
  double area_weight(int idx) const;

  bool locate(cplx z, int& i0, int& j0, double& fx, double& fy) const;
  cplx interp(const CBuf& buf, cplx z) const;
  double interp(const RBuf& buf, cplx z) const;

  /// Overwrite margin values from core values through the glue relations.
  void fill_margin(CBuf& amp, double fiber_weight) const;
  void fill_margin(RBuf& values) const;

  /// Centered differences; NaN where the stencil leaves the mask.
  RBuf ddx(const RBuf& b) const;
  RBuf ddy(const RBuf& b) const;
  CBuf ddx(const CBuf& b) const;
  CBuf ddy(const CBuf& b) const;
  /// Flat 5-point Laplacian (not divided by the conformal factor).
  RBuf flat_laplacian(const RBuf& b) const;

  static void bicubic_weights(double f, double w[4]);

 private:
  template <typename Buf>
  typename Buf::value_type interp_impl(const Buf& buf, cplx z) const;

  std::shared_ptr<const FuchsianGroup> group_;
  double h_;
  double x0_, y0_;
  int nx_, ny_;
  std::vector<NodeKind> kind_;
  std::vector<double> clearance_;
  std::vector<int> core_nodes_, margin_nodes_, domain_nodes_;
  std::vector<GlueEntry> glue_;
};

}  // namespace vortexlab
