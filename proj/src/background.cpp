#include "vortexlab/background.hpp"

#include <cmath>
#include <stdexcept>

namespace vortexlab {

Background::Background(std::shared_ptr<const FuchsianGroup> group,
                       std::shared_ptr<const Grid> grid)
    : group_(std::move(group)), grid_(std::move(grid)) {}

void Background::set_conformal_factor(RBuf u) {
  if (static_cast<int>(u.size()) != grid_->size())
    throw std::invalid_argument("conformal factor has wrong grid size");
  u_ = std::move(u);
  grid_->fill_margin(u_);
  ux_ = grid_->ddx(u_);
  uy_ = grid_->ddy(u_);
  const RBuf lap = grid_->flat_laplacian(u_);
  Kg_.assign(grid_->size(), std::numeric_limits<double>::quiet_NaN());
  for (int idx = 0; idx < grid_->size(); ++idx) {
    if (!grid_->masked(idx) || std::isnan(lap[idx])) continue;
    const cplx z = grid_->node(idx % grid_->nx(), idx / grid_->nx());
    const double s0 = sigma0(z);
    const double hyp_lap = std::exp(-2.0 * s0) * lap[idx];
    Kg_[idx] = std::exp(-2.0 * u_[idx]) * (-1.0 - hyp_lap);
  }
}

double Background::sigma(cplx z) const {
  double s = sigma0(z);
  if (has_u()) s += grid_->interp(u_, z);
  return s;
}

cplx Background::grad_sigma(cplx z) const {
  cplx d = dsigma0(z);
  if (has_u()) {
    const double px = grid_->interp(ux_, z);
    const double py = grid_->interp(uy_, z);
    d += 0.5 * cplx(px, -py);
  }
  return d;
}

double Background::conformal_factor(cplx z) const { return std::exp(sigma(z)); }

double Background::gauss_curvature(cplx z) const {
  if (!has_u()) return -1.0;
  return grid_->interp(Kg_, z);
}

double Background::sigma_node(int idx) const {
  const cplx z = grid_->node(idx % grid_->nx(), idx / grid_->nx());
  double s = sigma0(z);
  if (has_u()) s += u_[idx];
  return s;
}

cplx Background::dsigma_node(int idx) const {
  const cplx z = grid_->node(idx % grid_->nx(), idx / grid_->nx());
  cplx d = dsigma0(z);
  if (has_u()) d += 0.5 * cplx(ux_[idx], -uy_[idx]);
  return d;
}

RBuf automorphic_bump(const Grid& grid, cplx center, double width,
                      double amplitude, int word_ball) {
  const auto& maps = grid.group().maps();
  // Reduced words up to the given length; immediate backtracking pruned.
  std::vector<DiskIsometry> words{DiskIsometry::identity()};
  std::vector<int> last{-1};
  std::size_t begin = 0;
  for (int len = 0; len < word_ball; ++len) {
    const std::size_t end = words.size();
    for (std::size_t w = begin; w < end; ++w) {
      for (int k = 0; k < 8; ++k) {
        if (last[w] >= 0 && FuchsianGroup::undo_map_index(last[w]) == k)
          continue;
        words.push_back(maps[k] * words[w]);
        last.push_back(k);
      }
    }
    begin = end;
  }

  const double inv2w2 = 1.0 / (2.0 * width * width);
  RBuf out(grid.size(), std::numeric_limits<double>::quiet_NaN());
  for (int idx = 0; idx < grid.size(); ++idx) {
    if (!grid.masked(idx)) continue;
    // Wrap first so the word ball is always taken around an interior
    // representative; the sum is then invariant to machine precision.
    const cplx z =
        grid.group()
            .wrap_to_domain({grid.node(idx % grid.nx(), idx / grid.nx()), 0.0},
                            12)
            .point.z;
    double acc = 0.0;
    for (const auto& g : words) {
      const double d = hyperbolic_distance(mobius_apply(g, z), center);
      if (d * d * inv2w2 < 40.0) acc += std::exp(-d * d * inv2w2);
    }
    out[idx] = amplitude * acc;
  }
  return out;
}

}  // namespace vortexlab
