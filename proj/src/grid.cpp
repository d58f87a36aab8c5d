#include "vortexlab/grid.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace vortexlab {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

Grid::Grid(std::shared_ptr<const FuchsianGroup> group, double spacing)
    : group_(std::move(group)), h_(spacing) {
  if (h_ <= 0.0) throw std::invalid_argument("grid spacing must be positive");
  const auto& dom = group_->domain();
  const double rv = std::abs(dom.vertices[0]);
  const double extent = rv + (MASK_BAND + 2.0) * h_;
  // Slightly irrational offset so no node sits exactly on a side geodesic.
  x0_ = -extent + 0.2371 * h_;
  y0_ = -extent + 0.1783 * h_;
  nx_ = static_cast<int>(std::ceil(2.0 * extent / h_)) + 1;
  ny_ = nx_;

  kind_.assign(size(), NodeKind::unused);
  clearance_.assign(size(), kNaN);
  for (int j = 0; j < ny_; ++j) {
    for (int i = 0; i < nx_; ++i) {
      const int idx = index(i, j);
      const cplx z = node(i, j);
      if (std::abs(z) >= 0.997) continue;  // keep sigma0 finite on the mask
      // Combined clearance: side-circle distance and the radial cutoff.
      // Past a vertex the side circles alone underestimate the distance to
      // the octagon, which would let nodes near the unit circle into the
      // mask; both terms are 1-Lipschitz.
      const double s = std::min(dom.signed_side_clearance(z),
                                rv - std::abs(z));
      clearance_[idx] = s;
      if (s >= -CORE_BAND * h_) {
        kind_[idx] = NodeKind::core;
        if (s >= 0.0) domain_nodes_.push_back(idx);
      } else if (s >= -MASK_BAND * h_) {
        kind_[idx] = NodeKind::margin;
      }
    }
  }
  // At coarse spacing the band near a vertex can be clipped by the disk rim;
  // core nodes without a complete 5-point neighbourhood become glue nodes so
  // solver stencils never leave the mask. Fundamental-domain nodes are never
  // affected (their neighbourhoods sit well inside the rim).
  for (int j = 0; j < ny_; ++j) {
    for (int i = 0; i < nx_; ++i) {
      const int idx = index(i, j);
      if (kind_[idx] != NodeKind::core) continue;
      const bool interior = i > 0 && j > 0 && i + 1 < nx_ && j + 1 < ny_;
      if (!interior || kind_[idx - 1] == NodeKind::unused ||
          kind_[idx + 1] == NodeKind::unused ||
          kind_[idx - nx_] == NodeKind::unused ||
          kind_[idx + nx_] == NodeKind::unused)
        kind_[idx] = NodeKind::margin;
    }
  }
  // Glue: wrap each margin node and record the bicubic stencil of its image.
  // Donors are always inside dilate(D, 2.83h) and hence masked; at very
  // coarse spacing a rim-clipped margin node with no valid stencil is
  // dropped from the mask instead.
  for (int idx = 0; idx < size(); ++idx) {
    if (kind_[idx] != NodeKind::margin) continue;
    const int i = idx % nx_, j = idx / nx_;
    // outer margin corners can need longer wrap words than flow steps
    const WrapResult wr = group_->wrap_to_domain({node(i, j), 0.0}, 12);
    GlueEntry e;
    e.node = idx;
    e.rotation = wr.rotation;
    int i0, j0;
    double fx, fy;
    bool ok = locate(wr.point.z, i0, j0, fx, fy);
    if (ok) {
      double wx[4], wy[4];
      bicubic_weights(fx, wx);
      bicubic_weights(fy, wy);
      int s = 0;
      for (int dj = -1; dj <= 2 && ok; ++dj) {
        for (int di = -1; di <= 2 && ok; ++di, ++s) {
          const int d = index(i0 + di, j0 + dj);
          ok = kind_[d] != NodeKind::unused;
          e.donors[s] = d;
          e.weights[s] = wx[di + 1] * wy[dj + 1];
        }
      }
    }
    if (!ok) {
      kind_[idx] = NodeKind::unused;
      continue;
    }
    glue_.push_back(e);
  }
  for (int idx = 0; idx < size(); ++idx) {
    if (kind_[idx] == NodeKind::core) core_nodes_.push_back(idx);
    if (kind_[idx] == NodeKind::margin) margin_nodes_.push_back(idx);
  }
}

double Grid::area_weight(int idx) const {
  const int i = idx % nx_, j = idx / nx_;
  const double r2 = std::norm(node(i, j));
  const double conf = 2.0 / (1.0 - r2);
  return conf * conf * h_ * h_;
}

void Grid::bicubic_weights(double f, double w[4]) {
  // Cubic Lagrange on stencil offsets {-1, 0, 1, 2}.
  w[0] = -f * (f - 1.0) * (f - 2.0) / 6.0;
  w[1] = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0;
  w[2] = -(f + 1.0) * f * (f - 2.0) / 2.0;
  w[3] = (f + 1.0) * f * (f - 1.0) / 6.0;
}

bool Grid::locate(cplx z, int& i0, int& j0, double& fx, double& fy) const {
  const double gx = (z.real() - x0_) / h_;
  const double gy = (z.imag() - y0_) / h_;
  i0 = static_cast<int>(std::floor(gx));
  j0 = static_cast<int>(std::floor(gy));
  fx = gx - i0;
  fy = gy - j0;
  return i0 >= 1 && j0 >= 1 && i0 + 2 < nx_ && j0 + 2 < ny_;
}

template <typename Buf>
typename Buf::value_type Grid::interp_impl(const Buf& buf, cplx z) const {
  int i0, j0;
  double fx, fy;
  if (!locate(z, i0, j0, fx, fy))
    throw std::runtime_error("interp: point outside the lattice");
  double wx[4], wy[4];
  bicubic_weights(fx, wx);
  bicubic_weights(fy, wy);
  typename Buf::value_type acc{};
  for (int dj = 0; dj < 4; ++dj) {
    typename Buf::value_type row{};
    const int base = index(i0 - 1, j0 - 1 + dj);
    for (int di = 0; di < 4; ++di) row += wx[di] * buf[base + di];
    acc += wy[dj] * row;
  }
  return acc;
}

cplx Grid::interp(const CBuf& buf, cplx z) const { return interp_impl(buf, z); }
double Grid::interp(const RBuf& buf, cplx z) const { return interp_impl(buf, z); }

void Grid::fill_margin(CBuf& amp, double fiber_weight) const {
  // Donors are core except for a few rim-demoted nodes at coarse h; a few
  // sweeps settle those chains.
  for (int sweep = 0; sweep < 4; ++sweep) {
    for (const auto& e : glue_) {
      cplx acc = 0.0;
      for (int s = 0; s < 16; ++s) acc += e.weights[s] * amp[e.donors[s]];
      amp[e.node] = acc * std::polar(1.0, fiber_weight * e.rotation);
    }
  }
}

void Grid::fill_margin(RBuf& values) const {
  for (int sweep = 0; sweep < 4; ++sweep) {
    for (const auto& e : glue_) {
      double acc = 0.0;
      for (int s = 0; s < 16; ++s) acc += e.weights[s] * values[e.donors[s]];
      values[e.node] = acc;
    }
  }
}

namespace {

template <typename Buf>
Buf diff_x(const Grid& g, const Buf& b) {
  Buf out(b.size(), typename Buf::value_type(kNaN));
  const int nx = g.nx();
  for (int idx = 0; idx < g.size(); ++idx) {
    if (!g.masked(idx)) continue;
    const int i = idx % nx;
    if (i == 0 || i + 1 >= nx) continue;
    if (!g.masked(idx - 1) || !g.masked(idx + 1)) continue;
    out[idx] = (b[idx + 1] - b[idx - 1]) / (2.0 * g.h());
  }
  return out;
}

template <typename Buf>
Buf diff_y(const Grid& g, const Buf& b) {
  Buf out(b.size(), typename Buf::value_type(kNaN));
  const int nx = g.nx();
  for (int idx = 0; idx < g.size(); ++idx) {
    if (!g.masked(idx)) continue;
    const int j = idx / nx;
    if (j == 0 || j + 1 >= g.ny()) continue;
    if (!g.masked(idx - nx) || !g.masked(idx + nx)) continue;
    out[idx] = (b[idx + nx] - b[idx - nx]) / (2.0 * g.h());
  }
  return out;
}

}  // namespace

RBuf Grid::ddx(const RBuf& b) const { return diff_x(*this, b); }
RBuf Grid::ddy(const RBuf& b) const { return diff_y(*this, b); }
CBuf Grid::ddx(const CBuf& b) const { return diff_x(*this, b); }
CBuf Grid::ddy(const CBuf& b) const { return diff_y(*this, b); }

RBuf Grid::flat_laplacian(const RBuf& b) const {
  RBuf out(b.size(), kNaN);
  for (int idx = 0; idx < size(); ++idx) {
    if (!masked(idx)) continue;
    const int i = idx % nx_, j = idx / nx_;
    if (i == 0 || j == 0 || i + 1 >= nx_ || j + 1 >= ny_) continue;
    if (!masked(idx - 1) || !masked(idx + 1) || !masked(idx - nx_) ||
        !masked(idx + nx_))
      continue;
    out[idx] =
        (b[idx - 1] + b[idx + 1] + b[idx - nx_] + b[idx + nx_] - 4.0 * b[idx]) /
        (h_ * h_);
  }
  return out;
}

}  // namespace vortexlab
