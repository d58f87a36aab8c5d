#include "vortexlab/projection.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

namespace vortexlab {

namespace {
constexpr double kPi = 3.14159265358979323846;

/// Collocation matrix of the automorphy conditions
///   beta(g_k z) (g_k'(z))^w - beta(z) = 0,  k = 0..3,
/// for beta = sum c_j (z/Rc)^j, sampled along the four paired sides. A
/// truncated expansion of a weight-w form annihilates all rows up to the
/// Taylor tail, so the kernel of this matrix is H^0(K^w) to spectral
/// accuracy; everything non-automorphic responds at O(1).
Eigen::MatrixXcd assemble_collocation(const FuchsianGroup& group, double w,
                                      const KernelOptions& opts) {
  const auto& dom = group.domain();
  const auto& maps = group.maps();
  const double Rc = std::abs(dom.vertices[0]);
  const int K = opts.taylor_degree;
  const int n = opts.points_per_side;

  Eigen::MatrixXcd G(4 * n, K + 1);
  int row = 0;
  for (int k = 0; k < 4; ++k) {
    const int side = k + 4;  // g_k maps side k+4 onto side k
    const cplx c = dom.side_centers[side];
    const double r = dom.side_radius;
    const cplx v1 = dom.vertices[(side + 7) % 8];
    const cplx v2 = dom.vertices[side % 8];
    double a1 = std::arg(v1 - c), a2 = std::arg(v2 - c);
    if (a2 - a1 > kPi) a2 -= 2.0 * kPi;
    if (a1 - a2 > kPi) a1 -= 2.0 * kPi;
    for (int j = 0; j < n; ++j, ++row) {
      const double t = (j + 0.5) / n;
      const cplx z = c + std::polar(r, a1 + t * (a2 - a1));
      const cplx gz = mobius_apply(maps[k], z);
      const double alpha = group.map_rotation(k, z);
      const cplx den = std::conj(maps[k].b) * z + std::conj(maps[k].a);
      const double log_mod = -2.0 * std::log(std::abs(den));  // log|g'|
      const cplx factor = std::exp(cplx(w * log_mod, w * alpha));
      cplx p_img(1.0, 0.0), p_src(1.0, 0.0);
      for (int kk = 0; kk <= K; ++kk) {
        G(row, kk) = factor * p_img - p_src;
        p_img *= gz / Rc;
        p_src *= z / Rc;
      }
    }
  }
  return G;
}

}  // namespace

cplx field_inner(const Grid& grid, const CBuf& f, const CBuf& g) {
  cplx acc = 0.0;
  for (int idx : grid.domain_nodes())
    acc += f[idx] * std::conj(g[idx]) * grid.area_weight(idx);
  return acc;
}

int riemann_roch_kernel_dim(Rational weight) {
  // deg K^w = 2w on genus 2; for deg > 2g - 2 = 2 the cokernel vanishes and
  // h^0 = deg - g + 1.
  const double deg = 2.0 * weight.value();
  if (deg <= 2.0)
    throw std::invalid_argument("riemann_roch_kernel_dim needs weight > 1");
  return static_cast<int>(std::lround(deg)) - 1;
}

std::vector<WeightedField> holomorphic_projection(const Background& bg,
                                                  Rational weight,
                                                  int seed_count,
                                                  const KernelOptions& opts,
                                                  KernelReport* report) {
  if (weight.value() <= 1.0)
    throw std::invalid_argument("holomorphic_projection needs fiber weight > 1");
  if (weight.den > 1 && bg.group().root_order() % weight.den != 0)
    throw std::invalid_argument("fractional weight requires a matching root order");

  const Grid& g = bg.grid();
  const FuchsianGroup& group = bg.group();
  const double w = weight.value();
  const double Rc = std::abs(group.domain().vertices[0]);

  const Eigen::MatrixXcd G = assemble_collocation(group, w, opts);
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(G, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double smax = sv(0);
  const int cols = static_cast<int>(G.cols());

  const int probe = std::min(std::max(seed_count, 4), cols);
  std::vector<double> small(probe);
  for (int k = 0; k < probe; ++k) small[k] = sv(cols - 1 - k) / smax;

  int kdim = 0;
  while (kdim < probe && small[kdim] < opts.kernel_tol) ++kdim;
  const double gap = (kdim > 0 && kdim < probe)
                         ? small[kdim] / std::max(small[kdim - 1], 1e-300)
                         : 0.0;
  if (report != nullptr) {
    report->singular_values = small;
    report->kernel_dim = kdim;
    report->gap = gap;
  }
  if (kdim == 0 || kdim >= probe || gap < opts.gap_min)
    throw SpectralGapError(
        "dbar kernel: no spectral gap of factor >= " +
        std::to_string(opts.gap_min) +
        " below kernel_tol; raise taylor_degree/seed_count or refine");

  // Evaluate the kernel coefficient vectors on the grid; the resulting
  // amplitudes are automorphic to spectral accuracy on the whole mask.
  std::vector<WeightedField> basis(kdim);
  for (int v = 0; v < kdim; ++v) {
    const Eigen::VectorXcd coef = svd.matrixV().col(cols - 1 - v);
    WeightedField f;
    f.weight = weight;
    f.metric_tag = bg.has_u() ? "g" : "g0";
    f.amp.assign(g.size(), cplx(0.0, 0.0));
    for (int idx = 0; idx < g.size(); ++idx) {
      if (!g.masked(idx)) continue;
      const cplx z = g.node(idx % g.nx(), idx / g.nx());
      const cplx zs = z / Rc;
      cplx beta = coef(cols - 1);
      for (int kk = cols - 2; kk >= 0; --kk) beta = beta * zs + coef(kk);
      f.amp[idx] = beta * std::exp(-w * Background::sigma0(z));
    }
    basis[v] = std::move(f);
  }

  // Orthonormalize in L2(g0) and fix phases against a deterministic
  // reference so reruns and basis orientation are reproducible.
  for (int v = 0; v < kdim; ++v) {
    for (int u = 0; u < v; ++u) {
      const cplx proj = field_inner(g, basis[v].amp, basis[u].amp);
      for (std::size_t k = 0; k < basis[v].amp.size(); ++k)
        basis[v].amp[k] -= proj * basis[u].amp[k];
    }
    const double nrm =
        std::sqrt(std::abs(field_inner(g, basis[v].amp, basis[v].amp)));
    for (auto& val : basis[v].amp) val /= nrm;
  }
  std::mt19937_64 phase_rng(777);
  std::normal_distribution<double> pg(0.0, 1.0);
  CBuf ref(g.size(), cplx(0.0, 0.0));
  for (int idx : g.domain_nodes()) ref[idx] = cplx(pg(phase_rng), pg(phase_rng));
  for (auto& f : basis) {
    const cplx s = field_inner(g, f.amp, ref);
    const cplx rot = std::conj(s) / std::abs(s);
    for (auto& val : f.amp) val *= rot;
  }

  if (report != nullptr) {
    double fd = 0.0;
    for (const auto& f : basis)
      fd = std::max(fd, dbar_residual_sup(bg, f, nullptr, 0.0));
    report->basis_fd_residual = fd;
  }
  return basis;
}

WeightedField project_onto(const Background& bg,
                           const std::vector<WeightedField>& basis,
                           const CBuf& seed_amp) {
  if (basis.empty()) throw std::invalid_argument("empty projection basis");
  const Grid& g = bg.grid();
  WeightedField out;
  out.weight = basis.front().weight;
  out.metric_tag = basis.front().metric_tag;
  out.amp.assign(g.size(), cplx(0.0, 0.0));
  for (const auto& b : basis) {
    const cplx coef = field_inner(g, seed_amp, b.amp);
    for (std::size_t k = 0; k < out.amp.size(); ++k)
      out.amp[k] += coef * b.amp[k];
  }
  return out;
}

}  // namespace vortexlab
