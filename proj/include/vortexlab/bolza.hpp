#pragma once

#include <array>
#include <complex>
#include <stdexcept>
#include <vector>

namespace vortexlab {

using cplx = std::complex<double>;

/// Unit-determinant Moebius transformation of the Poincare disk,
/// z -> (a z + b) / (conj(b) z + conj(a)) with |a|^2 - |b|^2 = 1.
struct DiskIsometry {
  cplx a{1.0, 0.0};
  cplx b{0.0, 0.0};

  static DiskIsometry identity() { return {}; }
  /// Elliptic element fixing the origin, z -> e^{i theta} z.
  static DiskIsometry rotation(double theta);

  DiskIsometry inverse() const { return {std::conj(a), -b}; }
  bool is_identity(double tol = 1e-12) const {
    return std::abs(a - 1.0) < tol && std::abs(b) < tol;
  }
  double unit_determinant_defect() const {
    return std::abs(std::norm(a) - std::norm(b) - 1.0);
  }
};

/// Composition: (g * h)(z) = g(h(z)).
DiskIsometry operator*(const DiskIsometry& g, const DiskIsometry& h);

cplx mobius_apply(const DiskIsometry& g, cplx z);

/// arg g'(z) = -2 arg(conj(b) z + conj(a)), principal branch. Continuous on
/// the disk as long as the image of conj(b) z + conj(a) avoids the negative
/// real axis, which holds for the Bolza generators and short words.
double mobius_frame_rotation(const DiskIsometry& g, cplx z);

/// d(z1, z2) = 2 artanh |z1 - z2| / |1 - conj(z2) z1|, curvature -1.
double hyperbolic_distance(cplx z1, cplx z2);

/// Point of SM^{1/n}: disk coordinate plus continuous fiber angle. phi is a
/// lift to the reals of the direction angle and is never reduced mod 2*pi;
/// the root sheet is carried implicitly by the lift.
struct PhasePoint {
  cplx z{0.0, 0.0};
  double phi = 0.0;
};

/// Regular hyperbolic octagon centered at 0, all vertices identified.
/// Sides are arcs of circles orthogonal to the unit circle; side k has
/// center C e^{i k pi/4} and radius rho, and the side-k geodesic is the
/// hyperbolic bisector between 0 and g_k(0).
struct FundamentalDomain {
  std::array<cplx, 8> vertices;      // radius 2^{-1/4}, angles (2k+1) pi/8
  std::array<cplx, 8> side_centers;  // C e^{i k pi/4}
  double side_radius = 0.0;
  double containment_tol = 1e-12;

  /// min over sides of |z - c_k| - rho; >= 0 iff z lies in the closed octagon.
  double signed_side_clearance(cplx z) const;
  bool contains(cplx z, double slack = 0.0) const {
    return signed_side_clearance(z) >= -containment_tol - slack;
  }
};

struct WrapResult {
  PhasePoint point;    // wrapped representative, z in the closed octagon
  DiskIsometry gamma;  // word with mobius_apply(gamma, input.z) = point.z
  double rotation = 0.0;  // accumulated continuous branch of arg gamma'(input.z)
  int word_length = 0;
};

struct WrapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bolza side-pairing group together with the chosen lift of its action to
/// the n-th root SM^{1/n}. maps[k] pairs side k+4 onto side k; maps[k+4] is
/// the inverse of maps[k]. branch_offsets (integers mod n, one per the four
/// base generators) select the root structure: the rotation branch of
/// generator k is shifted by 2 pi * branch_offsets[k].
class FuchsianGroup {
 public:
  explicit FuchsianGroup(int root_order = 1,
                         std::array<int, 4> branch_offsets = {0, 0, 0, 0});

  const std::array<DiskIsometry, 8>& maps() const { return maps_; }
  const FundamentalDomain& domain() const { return domain_; }
  int root_order() const { return root_order_; }
  const std::array<int, 4>& branch_offsets() const { return branch_offsets_; }

  /// Relator order: product maps[relator[0]] * ... * maps[relator[7]]
  /// (rightmost applied first) is the identity transformation.
  static const std::array<int, 8>& relator();

  /// Continuous-branch rotation of the lifted map with the chosen offsets.
  double map_rotation(int map_index, cplx z) const;

  /// Greedy wrap into the closed octagon; throws WrapError if no word of
  /// length <= max_word_length succeeds.
  WrapResult wrap_to_domain(const PhasePoint& p, int max_word_length = 6) const;

  /// Paired side index of the word step that undoes a crossing of side k.
  static int undo_map_index(int side) { return (side + 4) % 8; }

  /// Fiber rotation accumulated by the lifted relator at z; a multiple of
  /// 2 pi, equal to 2 pi chi(M) = -4 pi. Must vanish mod 2 pi n for the
  /// root lift to be consistent.
  double relator_rotation(cplx z) const;

 private:
  std::array<DiskIsometry, 8> maps_;
  FundamentalDomain domain_;
  int root_order_;
  std::array<int, 4> branch_offsets_;
};

}  // namespace vortexlab
