#include <cmath>
#include <memory>
#include <random>

#include "doctest.h"
#include "vortexlab/field.hpp"
#include "vortexlab/projection.hpp"

using namespace vortexlab;

namespace {
constexpr double kPi = 3.14159265358979323846;

struct Setup {
  std::shared_ptr<FuchsianGroup> group;
  std::shared_ptr<Grid> grid;
  std::shared_ptr<Background> bg;
};

Setup make_setup(double h, int root_order = 1) {
  Setup s;
  s.group = std::make_shared<FuchsianGroup>(root_order);
  s.grid = std::make_shared<Grid>(s.group, h);
  s.bg = std::make_shared<Background>(s.group, s.grid);
  return s;
}

std::mt19937_64 rng(911);

PhasePoint random_interior_point(const Setup& s, double rmax = 0.55) {
  std::uniform_real_distribution<double> ur(0.0, 1.0);
  for (;;) {
    const cplx z = std::polar(rmax * std::sqrt(ur(rng)), 2.0 * kPi * ur(rng));
    if (s.group->domain().signed_side_clearance(z) > 0.05)
      return {z, 2.0 * kPi * ur(rng)};
  }
}

// Flows of the frame fields for the finite-difference oracles.
PhasePoint flow_step(const Background& bg, const PhasePoint& p, double eps,
                     bool along_h) {
  auto rhs = [&](const PhasePoint& q) {
    const double es = std::exp(-bg.sigma(q.z));
    const cplx ds = bg.grad_sigma(q.z);
    const double sx = 2.0 * ds.real(), sy = -2.0 * ds.imag();
    PhasePoint d;
    if (!along_h) {
      d.z = es * std::polar(1.0, q.phi);
      d.phi = es * (-sx * std::sin(q.phi) + sy * std::cos(q.phi));
    } else {
      d.z = es * cplx(0.0, 1.0) * std::polar(1.0, q.phi);
      d.phi = es * (-sx * std::cos(q.phi) - sy * std::sin(q.phi));
    }
    return d;
  };
  // one RK4 step of size eps
  const PhasePoint k1 = rhs(p);
  const PhasePoint p2{p.z + 0.5 * eps * k1.z, p.phi + 0.5 * eps * k1.phi};
  const PhasePoint k2 = rhs(p2);
  const PhasePoint p3{p.z + 0.5 * eps * k2.z, p.phi + 0.5 * eps * k2.phi};
  const PhasePoint k3 = rhs(p3);
  const PhasePoint p4{p.z + eps * k3.z, p.phi + eps * k3.phi};
  const PhasePoint k4 = rhs(p4);
  return {p.z + eps / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z),
          p.phi + eps / 6.0 * (k1.phi + 2.0 * k2.phi + 2.0 * k3.phi + k4.phi)};
}

using Fn = std::function<cplx(const PhasePoint&)>;

cplx fd_X(const Background& bg, const Fn& f, const PhasePoint& p, double eps) {
  return (f(flow_step(bg, p, eps, false)) - f(flow_step(bg, p, -eps, false))) /
         (2.0 * eps);
}
cplx fd_H(const Background& bg, const Fn& f, const PhasePoint& p, double eps) {
  return (f(flow_step(bg, p, eps, true)) - f(flow_step(bg, p, -eps, true))) /
         (2.0 * eps);
}
cplx fd_V(const Fn& f, const PhasePoint& p, double eps) {
  return (f({p.z, p.phi + eps}) - f({p.z, p.phi - eps})) / (2.0 * eps);
}

}  // namespace

TEST_CASE("grid masks and interpolation") {
  Setup s = make_setup(0.05);
  const Grid& g = *s.grid;
  CHECK(g.core_nodes().size() > 500);
  CHECK(g.margin_nodes().size() > 100);
  CHECK(g.glue().size() == g.margin_nodes().size());

  // bicubic reproduces smooth functions to O(h^4)
  CBuf smooth(g.size(), cplx(0.0, 0.0));
  auto fun = [](cplx z) {
    return std::exp(cplx(0.0, 2.0) * z) + 0.3 * z * z * std::conj(z);
  };
  for (int idx = 0; idx < g.size(); ++idx)
    if (g.masked(idx)) smooth[idx] = fun(g.node(idx % g.nx(), idx / g.nx()));
  double err = 0.0;
  for (int t = 0; t < 200; ++t) {
    const cplx z = random_interior_point(s).z;
    err = std::max(err, std::abs(g.interp(smooth, z) - fun(z)));
  }
  CHECK(err < 5e-5);
}

TEST_CASE("margin fill matches the automorphic continuation") {
  Setup s = make_setup(0.05);
  const Grid& g = *s.grid;
  RBuf bump = automorphic_bump(g, cplx(0.12, -0.2), 0.45);
  RBuf filled = bump;
  g.fill_margin(filled);
  double err = 0.0;
  for (int idx : g.margin_nodes())
    err = std::max(err, std::abs(filled[idx] - bump[idx]));
  CHECK(err < 1e-3);  // bicubic donor error, hyperbolic gradients at the rim
}

TEST_CASE("real pair reconstruction is exact") {
  std::uniform_real_distribution<double> ur(-2.0, 2.0);
  for (int t = 0; t < 20; ++t) {
    const double wplus = 2.5;
    const cplx A(ur(rng), ur(rng));
    const RealPair pr = RealPair::split(A, wplus);
    CHECK(pr.a == A.imag());
    CHECK(pr.va == wplus * A.real());
    CHECK(std::abs(pr.reconstruct(wplus) - A) < 1e-15);
  }
}

TEST_CASE("fiber equivariance and vertical derivative") {
  Setup s = make_setup(0.06);
  WeightedField f = chart_field(*s.bg, make_rational(3, 2), [](cplx z) {
    return std::exp(cplx(0.0, 1.0) * z) +z * z;
  });
  for (int t = 0; t < 20; ++t) {
    const PhasePoint p = random_interior_point(s);
    const double delta = 1.3;
    const cplx lhs = evaluate(*s.bg, f, {p.z, p.phi + delta});
    const cplx rhs =
        std::polar(1.0, 1.5 * delta) * evaluate(*s.bg, f, p);
    CHECK(std::abs(lhs - rhs) < 1e-12 * std::abs(rhs));

    // period 2 pi n on the n-th root (w = m/n with n = 2)
    const cplx same = evaluate(*s.bg, f, {p.z, p.phi + 4.0 * kPi});
    CHECK(std::abs(same - evaluate(*s.bg, f, p)) < 1e-12);

    const cplx vd = vertical_derivative(*s.bg, f, p);
    CHECK(std::abs(vd - cplx(0.0, 1.5) * evaluate(*s.bg, f, p)) < 1e-13);
    // V V a = -(w)^2 a for the scalar parts
    const cplx vv = fd_V([&](const PhasePoint& q) {
      return cplx(FieldSum::imag_part(f).evaluate(*s.bg, q).real(), 0.0);
    }, p, 1e-4);
    const cplx vfd = fd_V([&](const PhasePoint& q) {
      return cplx(FieldSum::imag_part(f).vderiv().evaluate(*s.bg, q).real(), 0.0);
    }, p, 1e-4);
    (void)vv;
    const double a = FieldSum::imag_part(f).evaluate(*s.bg, p).real();
    const double vva =
        FieldSum::imag_part(f).vderiv().vderiv().evaluate(*s.bg, p).real();
    CHECK(vva == doctest::Approx(-1.5 * 1.5 * a).epsilon(1e-10));
    CHECK(std::abs(vfd.real() - vva) < 1e-5);
  }
}

TEST_CASE("horizontal derivatives against flow finite differences") {
  Setup s = make_setup(0.04);
  WeightedField f = chart_field(*s.bg, make_rational(2, 1), [](cplx z) {
    return std::exp(cplx(0.0, 1.0) * z) + 0.5 * z * z * z;
  });
  const FieldJet jet = build_jet(*s.bg, f);
  Fn eval = [&](const PhasePoint& q) { return evaluate(*s.bg, f, q); };

  double errx = 0.0, errh = 0.0;
  for (int t = 0; t < 15; ++t) {
    const PhasePoint p = random_interior_point(s, 0.45);
    const auto [xb, hb] = horizontal_derivatives(*s.bg, jet, p);
    errx = std::max(errx, std::abs(xb - fd_X(*s.bg, eval, p, 2e-4)));
    errh = std::max(errh, std::abs(hb - fd_H(*s.bg, eval, p, 2e-4)));
  }
  CHECK(errx < 2e-3);
  CHECK(errh < 2e-3);

  // constant weight-0 field has vanishing first derivatives
  WeightedField cst = chart_field(*s.bg, make_rational(0, 1),
                                  [](cplx) { return cplx(1.0, 0.0); });
  const auto [xc, hc] =
      horizontal_derivatives(*s.bg, cst, random_interior_point(s));
  CHECK(std::abs(xc) < 1e-10);
  CHECK(std::abs(hc) < 1e-10);
}

TEST_CASE("commutator relations via finite-difference oracle") {
  // [V,X] = H, [V,H] = -X, [X,H] = K V with K = -1 on the hyperbolic disk.
  Setup s = make_setup(0.04);
  WeightedField f = chart_field(*s.bg, make_rational(3, 1), [](cplx z) {
    return cplx(1.0, 0.0) + 0.7 * z + cplx(0.0, 0.4) * z * z;
  });
  Fn eval = [&](const PhasePoint& q) { return evaluate(*s.bg, f, q); };
  const double eps = 4e-3;

  Fn Xf = [&](const PhasePoint& q) { return fd_X(*s.bg, eval, q, eps); };
  Fn Hf = [&](const PhasePoint& q) { return fd_H(*s.bg, eval, q, eps); };
  Fn Vf = [&](const PhasePoint& q) { return fd_V(eval, q, eps); };

  double e1 = 0.0, e2 = 0.0, e3 = 0.0;
  for (int t = 0; t < 8; ++t) {
    const PhasePoint p = random_interior_point(s, 0.4);
    const cplx vx = fd_V(Xf, p, eps) - fd_X(*s.bg, Vf, p, eps);
    const cplx vh = fd_V(Hf, p, eps) - fd_H(*s.bg, Vf, p, eps);
    const cplx xh = fd_X(*s.bg, Hf, p, eps) - fd_H(*s.bg, Xf, p, eps);
    e1 = std::max(e1, std::abs(vx - Hf(p)));
    e2 = std::max(e2, std::abs(vh + Xf(p)));
    e3 = std::max(e3, std::abs(xh - (-1.0) * Vf(p)));
  }
  CHECK(e1 < 5e-3);
  CHECK(e2 < 5e-3);
  CHECK(e3 < 5e-3);
}

TEST_CASE("ladder amplitudes converge at second order") {
  // implemented X B against the closed form, at h and h/2
  auto run = [](double h) {
    Setup s = make_setup(h);
    WeightedField f = chart_field(*s.bg, make_rational(2, 1), [](cplx z) {
      return std::exp(cplx(0.0, 1.0) * z);
    });
    const FieldJet jet = build_jet(*s.bg, f);
    double err = 0.0;
    std::mt19937_64 local(7);
    std::uniform_real_distribution<double> ur(0.0, 1.0);
    for (int t = 0; t < 40; ++t) {
      const cplx z =
          std::polar(0.45 * std::sqrt(ur(local)), 2.0 * kPi * ur(local));
      const PhasePoint p{z, 0.37};
      const auto [xb, hb] = horizontal_derivatives(*s.bg, jet, p);
      // closed form: W+ amplitude (beta' - 2 w beta dsigma) e^{-w sigma - sigma},
      // W- amplitude 0 for holomorphic beta
      const double w = 2.0;
      const cplx beta = std::exp(cplx(0.0, 1.0) * z);
      const cplx betap = cplx(0.0, 1.0) * beta;
      const cplx up = (betap - 2.0 * w * beta * Background::dsigma0(z)) *
                      std::exp(-(w + 1.0) * Background::sigma0(z));
      const cplx xtrue = up * std::polar(1.0, (w + 1.0) * p.phi);
      const cplx htrue = cplx(0.0, 1.0) * xtrue;
      err = std::max(err, std::abs(xb - xtrue) + std::abs(hb - htrue));
    }
    return err;
  };
  const double e1 = run(0.05), e2 = run(0.025);
  CHECK(e2 < e1);
  CHECK(e1 / e2 > 3.0);  // second order
}

TEST_CASE("dbar residual: holomorphic, generic, and gauge covariance") {
  Setup s = make_setup(0.04);
  const Background& bg = *s.bg;

  WeightedField hol = chart_field(bg, make_rational(2, 1), [](cplx z) {
    return std::exp(cplx(0.0, 1.0) * z) + z;
  });
  WeightedField gen = chart_field(bg, make_rational(2, 1), [](cplx z) {
    return std::exp(cplx(0.0, 1.0) * z) + 0.45 * std::conj(z);
  });

  // zero field -> zero residual
  WeightedField zero = hol;
  for (auto& v : zero.amp) v = 0.0;
  CHECK(dbar_residual_sup(bg, zero, nullptr, 1.0) == doctest::Approx(0.0));

  double sup_hol = 0.0, sup_gen = 0.0;
  for (int t = 0; t < 30; ++t) {
    const PhasePoint p = random_interior_point(s, 0.45);
    sup_hol = std::max(sup_hol,
                       std::abs(dbar_residual(bg, hol, nullptr, 1.0, p)));
    sup_gen = std::max(sup_gen,
                       std::abs(dbar_residual(bg, gen, nullptr, 1.0, p)));
  }
  CHECK(sup_hol < 2e-3);
  CHECK(sup_gen > 0.05);

  // fiber-sup of the scalar residual equals 2 w |defect|
  const CBuf defect = dbar_defect(bg, gen, nullptr, 1.0);
  const PhasePoint p0 = random_interior_point(s, 0.4);
  double fiber_max = 0.0;
  for (int k = 0; k < 64; ++k)
    fiber_max = std::max(fiber_max, std::abs(dbar_residual(
                                       bg, gen, nullptr, 1.0,
                                       {p0.z, 2.0 * kPi * k / 64.0})));
  const double pred = 2.0 * 2.0 * std::abs(s.grid->interp(defect, p0.z));
  CHECK(fiber_max == doctest::Approx(pred).epsilon(2e-3));

  SUBCASE("gauge covariance to O(h^2)") {
    const double ell = 1.5;
    RBuf w = automorphic_bump(*s.grid, cplx(-0.1, 0.15), 0.5, 0.4);

    // transformed pair (e^{-w} A, theta - dw/ell)
    WeightedField A2 = gen;
    for (int idx = 0; idx < s.grid->size(); ++idx)
      if (s.grid->masked(idx)) A2.amp[idx] = gen.amp[idx] * std::exp(-w[idx]);
    const RBuf wx = s.grid->ddx(w), wy = s.grid->ddy(w);
    WeightedField th;
    th.weight = make_rational(1, 1);
    th.amp.assign(s.grid->size(), cplx(0.0, 0.0));
    for (int idx = 0; idx < s.grid->size(); ++idx) {
      if (!s.grid->masked(idx) || std::isnan(wx[idx]) || std::isnan(wy[idx]))
        continue;
      const cplx dw = 0.5 * cplx(wx[idx], -wy[idx]);
      th.amp[idx] = cplx(0.0, -2.0 / ell) *
                    std::exp(-bg.sigma_node(idx)) * dw;
    }

    const CBuf d0 = dbar_defect(bg, gen, nullptr, ell);
    const CBuf d1 = dbar_defect(bg, A2, &th, ell);
    double err = 0.0;
    for (int idx : s.grid->domain_nodes()) {
      if (std::isnan(d1[idx].real()) || std::isnan(d0[idx].real())) continue;
      err = std::max(err,
                     std::abs(d1[idx] - std::exp(-w[idx]) * d0[idx]));
    }
    CHECK(err < 5e-3);  // O(h^2) at h = 0.04
  }
}

TEST_CASE("holomorphic projection kernels (Riemann-Roch dimensions)") {
  KernelReport rep;

  SUBCASE("cubic differentials, dim 5") {
    Setup s = make_setup(0.05);
    auto basis =
        holomorphic_projection(*s.bg, make_rational(3, 1), 9, {}, &rep);
    CHECK(static_cast<int>(basis.size()) == 5);
    CHECK(riemann_roch_kernel_dim(make_rational(3, 1)) == 5);
    CHECK(rep.gap > 10.0);
    // returned fields nearly satisfy the dbar equation, pointwise in FD form
    for (const auto& b : basis)
      CHECK(dbar_residual_sup(*s.bg, b, nullptr, 0.0) <
            10.0 * rep.basis_fd_residual + 1e-12);
    CHECK(rep.basis_fd_residual < 2.0);  // outer-annulus derivative scale
    // orthonormal in L2(g0)
    for (std::size_t i = 0; i < basis.size(); ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        const cplx ip = field_inner(*s.grid, basis[i].amp, basis[j].amp);
        CHECK(std::abs(ip - (i == j ? 1.0 : 0.0)) < 5e-7);
      }
  }

  SUBCASE("weight 3/2 on the square root, dim 2") {
    Setup s = make_setup(0.05, 2);
    auto basis =
        holomorphic_projection(*s.bg, make_rational(3, 2), 6, {}, &rep);
    CHECK(static_cast<int>(basis.size()) == 2);
    CHECK(riemann_roch_kernel_dim(make_rational(3, 2)) == 2);
    CHECK(rep.gap > 10.0);
  }

  SUBCASE("quadratic differentials, dim 3") {
    Setup s = make_setup(0.05);
    auto basis =
        holomorphic_projection(*s.bg, make_rational(2, 1), 7, {}, &rep);
    CHECK(static_cast<int>(basis.size()) == 3);
  }
}

TEST_CASE("kernel extraction guards") {
  Setup s = make_setup(0.06);
  SUBCASE("unattainable gap requirement raises the resolution error") {
    KernelOptions opts;
    opts.gap_min = 1e300;
    CHECK_THROWS_AS(
        (void)holomorphic_projection(*s.bg, make_rational(3, 1), 9, opts),
        SpectralGapError);
  }
  SUBCASE("weight at or below 1 is rejected") {
    CHECK_THROWS_AS(
        (void)holomorphic_projection(*s.bg, make_rational(1, 1), 4),
        std::invalid_argument);
  }
  SUBCASE("fractional weight needs the matching root") {
    CHECK_THROWS_AS(
        (void)holomorphic_projection(*s.bg, make_rational(3, 2), 4),
        std::invalid_argument);
  }
}

TEST_CASE("double-wrap consistency of projected fields") {
  Setup s = make_setup(0.05);
  auto basis = holomorphic_projection(*s.bg, make_rational(3, 1), 9);
  const WeightedField& f = basis.front();
  const auto& maps = s.group->maps();

  double err = 0.0;
  for (int t = 0; t < 40; ++t) {
    const PhasePoint p = random_interior_point(s, 0.6);
    const cplx base = evaluate(*s.bg, f, p);
    // push the point out by a deck word and evaluate the same surface point
    int k1 = static_cast<int>(rng() % 8), k2 = static_cast<int>(rng() % 8);
    PhasePoint q = p;
    for (int k : {k1, k2}) {
      const double rot = s.group->map_rotation(k, q.z);
      q = PhasePoint{mobius_apply(maps[k], q.z), q.phi + rot};
    }
    err = std::max(err, std::abs(evaluate(*s.bg, f, q) - base));
  }
  CHECK(err < 1e-8);

  // |A|^2 is fiber independent
  const PhasePoint p = random_interior_point(s);
  double mn = 1e300, mx = 0.0;
  for (int k = 0; k < 32; ++k) {
    const double v = std::norm(evaluate(*s.bg, f, {p.z, k * 0.3}));
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  CHECK(mx - mn < 1e-10);
}
