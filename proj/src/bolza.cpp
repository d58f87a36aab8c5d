#include "vortexlab/bolza.hpp"

#include <cmath>

namespace vortexlab {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kDegenerateTol = 1e-14;
}  // namespace

DiskIsometry DiskIsometry::rotation(double theta) {
  return {std::polar(1.0, theta / 2.0), cplx(0.0, 0.0)};
}

DiskIsometry operator*(const DiskIsometry& g, const DiskIsometry& h) {
  // SU(1,1) matrix product [[a,b],[conj b, conj a]].
  return {g.a * h.a + g.b * std::conj(h.b), g.a * h.b + g.b * std::conj(h.a)};
}

cplx mobius_apply(const DiskIsometry& g, cplx z) {
  const cplx den = std::conj(g.b) * z + std::conj(g.a);
  if (std::abs(den) < kDegenerateTol)
    throw std::domain_error("mobius_apply: degenerate transform");
  return (g.a * z + g.b) / den;
}

double mobius_frame_rotation(const DiskIsometry& g, cplx z) {
  const cplx den = std::conj(g.b) * z + std::conj(g.a);
  if (std::abs(den) < kDegenerateTol)
    throw std::domain_error("mobius_frame_rotation: degenerate transform");
  return -2.0 * std::arg(den);
}

double hyperbolic_distance(cplx z1, cplx z2) {
  const double q = std::abs(z1 - z2) / std::abs(1.0 - std::conj(z2) * z1);
  return 2.0 * std::atanh(q);
}

double FundamentalDomain::signed_side_clearance(cplx z) const {
  double s = 1e300;
  for (int k = 0; k < 8; ++k)
    s = std::min(s, std::abs(z - side_centers[k]) - side_radius);
  return s;
}

const std::array<int, 8>& FuchsianGroup::relator() {
  // Vertex cycle of the octagon: g0 g3 g6 g1 g4 g7 g2 g5 (rightmost first).
  static const std::array<int, 8> order = {0, 3, 6, 1, 4, 7, 2, 5};
  return order;
}

FuchsianGroup::FuchsianGroup(int root_order, std::array<int, 4> branch_offsets)
    : root_order_(root_order), branch_offsets_(branch_offsets) {
  if (root_order_ < 1) throw std::invalid_argument("root order must be >= 1");

  // Translation pairing opposite sides: cosh(t/2) = 1 + sqrt(2).
  const double ca = 1.0 + std::sqrt(2.0);
  const double sa = std::sqrt(2.0 + 2.0 * std::sqrt(2.0));
  for (int k = 0; k < 8; ++k)
    maps_[k] = {cplx(ca, 0.0), std::polar(sa, k * kPi / 4.0)};

  const double rv = std::pow(2.0, -0.25);
  for (int j = 0; j < 8; ++j)
    domain_.vertices[j] = std::polar(rv, (2 * j + 1) * kPi / 8.0);
  // Side-k geodesic: circle orthogonal to the unit circle through v_{k-1}, v_k.
  const double centre = std::sqrt((1.0 + std::sqrt(2.0)) / 2.0);
  for (int k = 0; k < 8; ++k)
    domain_.side_centers[k] = std::polar(centre, k * kPi / 4.0);
  domain_.side_radius = std::sqrt(centre * centre - 1.0);
}

double FuchsianGroup::map_rotation(int map_index, cplx z) const {
  if (map_index < 4) {
    return mobius_frame_rotation(maps_[map_index], z) +
           2.0 * kPi * branch_offsets_[map_index];
  }
  // Lift of an inverse: alpha_{g^{-1}}(z) = -alpha_g(g^{-1} z).
  const cplx image = mobius_apply(maps_[map_index], z);
  return -map_rotation(map_index - 4, image);
}

WrapResult FuchsianGroup::wrap_to_domain(const PhasePoint& p,
                                         int max_word_length) const {
  if (std::abs(p.z) >= 1.0)
    throw WrapError("wrap_to_domain: point outside the open disk");
  WrapResult out;
  out.point = p;
  out.gamma = DiskIsometry::identity();
  for (int step = 0; step <= max_word_length; ++step) {
    int worst = -1;
    double worst_clearance = -domain_.containment_tol;
    for (int k = 0; k < 8; ++k) {
      const double c =
          std::abs(out.point.z - domain_.side_centers[k]) - domain_.side_radius;
      if (c < worst_clearance) {
        worst_clearance = c;
        worst = k;
      }
    }
    if (worst < 0) return out;  // inside the closed octagon
    if (step == max_word_length) break;
    const int idx = undo_map_index(worst);
    const double rot = map_rotation(idx, out.point.z);
    out.rotation += rot;
    out.point.phi += rot;
    out.point.z = mobius_apply(maps_[idx], out.point.z);
    out.gamma = maps_[idx] * out.gamma;
    ++out.word_length;
  }
  throw WrapError("wrap_to_domain: no word of length <= " +
                  std::to_string(max_word_length) +
                  " brings the point into the fundamental domain");
}

double FuchsianGroup::relator_rotation(cplx z) const {
  double total = 0.0;
  cplx w = z;
  const auto& order = relator();
  for (int i = 7; i >= 0; --i) {
    total += map_rotation(order[i], w);
    w = mobius_apply(maps_[order[i]], w);
  }
  return total;
}

}  // namespace vortexlab
