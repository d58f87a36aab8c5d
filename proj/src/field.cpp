#include "vortexlab/field.hpp"

#include <cmath>
#include <stdexcept>

namespace vortexlab {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool valid(cplx v) { return !std::isnan(v.real()) && !std::isnan(v.imag()); }

/// Raising/lowering amplitudes of one component.
void ladder_amps(const Background& bg, double w, const CBuf& b, CBuf& up,
                 CBuf& down) {
  const Grid& g = bg.grid();
  const CBuf bx = g.ddx(b);
  const CBuf by = g.ddy(b);
  up.assign(b.size(), cplx(kNaN, kNaN));
  down.assign(b.size(), cplx(kNaN, kNaN));
  for (int idx = 0; idx < g.size(); ++idx) {
    if (!g.masked(idx) || !valid(bx[idx]) || !valid(by[idx]) || !valid(b[idx]))
      continue;
    const cplx del = 0.5 * (bx[idx] - cplx(0.0, 1.0) * by[idx]);
    const cplx dbar = 0.5 * (bx[idx] + cplx(0.0, 1.0) * by[idx]);
    const cplx ds = bg.dsigma_node(idx);
    const double esig = std::exp(-bg.sigma_node(idx));
    up[idx] = esig * (del - w * b[idx] * ds);
    down[idx] = esig * (dbar + w * b[idx] * std::conj(ds));
  }
}

}  // namespace

Rational make_rational(int num, int den) {
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const int g = std::gcd(std::abs(num), den);
  return {g ? num / g : num, g ? den / g : den};
}

FieldSum FieldSum::of(const WeightedField& f) {
  return FieldSum({{f.weight.value(), f.amp}});
}

FieldSum FieldSum::imag_part(const WeightedField& f) {
  // Im F = (F - conj F) / 2i.
  const double w = f.weight.value();
  CBuf plus(f.amp.size()), minus(f.amp.size());
  const cplx half_over_i(0.0, -0.5);
  for (std::size_t k = 0; k < f.amp.size(); ++k) {
    plus[k] = half_over_i * f.amp[k];
    minus[k] = -half_over_i * std::conj(f.amp[k]);
  }
  return FieldSum({{w, std::move(plus)}, {-w, std::move(minus)}});
}

FieldSum FieldSum::real_part(const WeightedField& f) {
  const double w = f.weight.value();
  CBuf plus(f.amp.size()), minus(f.amp.size());
  for (std::size_t k = 0; k < f.amp.size(); ++k) {
    plus[k] = 0.5 * f.amp[k];
    minus[k] = 0.5 * std::conj(f.amp[k]);
  }
  return FieldSum({{w, std::move(plus)}, {-w, std::move(minus)}});
}

FieldSum FieldSum::scalar(const RBuf& values) {
  CBuf amp(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) amp[k] = values[k];
  return FieldSum({{0.0, std::move(amp)}});
}

FieldSum FieldSum::vderiv() const {
  FieldSum out(*this);
  for (auto& c : out.comps_) {
    const cplx iw(0.0, c.weight);
    for (auto& v : c.amp) v *= iw;
  }
  return out;
}

FieldSum FieldSum::xderiv(const Background& bg) const {
  std::vector<Component> out;
  out.reserve(2 * comps_.size());
  for (const auto& c : comps_) {
    CBuf up, down;
    ladder_amps(bg, c.weight, c.amp, up, down);
    out.push_back({c.weight + 1.0, std::move(up)});
    out.push_back({c.weight - 1.0, std::move(down)});
  }
  return FieldSum(std::move(out));
}

FieldSum FieldSum::hderiv(const Background& bg) const {
  std::vector<Component> out;
  out.reserve(2 * comps_.size());
  const cplx i(0.0, 1.0);
  for (const auto& c : comps_) {
    CBuf up, down;
    ladder_amps(bg, c.weight, c.amp, up, down);
    for (auto& v : up) v *= i;
    for (auto& v : down) v *= -i;
    out.push_back({c.weight + 1.0, std::move(up)});
    out.push_back({c.weight - 1.0, std::move(down)});
  }
  return FieldSum(std::move(out));
}

FieldSum& FieldSum::operator+=(const FieldSum& other) {
  for (const auto& c : other.comps_) comps_.push_back(c);
  return *this;
}

FieldSum& FieldSum::scale(cplx factor) {
  for (auto& c : comps_)
    for (auto& v : c.amp) v *= factor;
  return *this;
}

FieldSum& FieldSum::multiply_scalar_field(const RBuf& factor) {
  for (auto& c : comps_)
    for (std::size_t k = 0; k < c.amp.size(); ++k) c.amp[k] *= factor[k];
  return *this;
}

cplx FieldSum::evaluate(const Background& bg, const PhasePoint& p) const {
  const WrapResult wr = bg.wrap(p);
  return evaluate_wrapped(bg, wr.point);
}

cplx FieldSum::evaluate_wrapped(const Background& bg,
                                const PhasePoint& p) const {
  cplx acc = 0.0;
  for (const auto& c : comps_) {
    const cplx v = bg.grid().interp(c.amp, p.z);
    acc += v * std::polar(1.0, c.weight * p.phi);
  }
  return acc;
}

FieldJet build_jet(const Background& bg, const WeightedField& f) {
  FieldJet jet;
  jet.weight = f.weight.value();
  jet.amp = f.amp;
  ladder_amps(bg, jet.weight, f.amp, jet.wplus, jet.wminus);
  return jet;
}

cplx evaluate(const Background& bg, const WeightedField& f,
              const PhasePoint& p) {
  const WrapResult wr = bg.wrap(p);
  const cplx b = bg.grid().interp(f.amp, wr.point.z);
  return b * std::polar(1.0, f.weight.value() * wr.point.phi);
}

cplx vertical_derivative(const Background& bg, const WeightedField& f,
                         const PhasePoint& p) {
  return cplx(0.0, f.weight.value()) * evaluate(bg, f, p);
}

std::pair<cplx, cplx> horizontal_derivatives(const Background& bg,
                                             const FieldJet& jet,
                                             const PhasePoint& p) {
  const WrapResult wr = bg.wrap(p);
  const Grid& g = bg.grid();
  const cplx up =
      g.interp(jet.wplus, wr.point.z) *
      std::polar(1.0, (jet.weight + 1.0) * wr.point.phi);
  const cplx down =
      g.interp(jet.wminus, wr.point.z) *
      std::polar(1.0, (jet.weight - 1.0) * wr.point.phi);
  const cplx i(0.0, 1.0);
  return {up + down, i * (up - down)};
}

std::pair<cplx, cplx> horizontal_derivatives(const Background& bg,
                                             const WeightedField& f,
                                             const PhasePoint& p) {
  return horizontal_derivatives(bg, build_jet(bg, f), p);
}

CBuf dbar_defect(const Background& bg, const WeightedField& A,
                 const WeightedField* theta, double coupling) {
  const Grid& g = bg.grid();
  const double w = A.weight.value();
  const CBuf ax = g.ddx(A.amp);
  const CBuf ay = g.ddy(A.amp);
  CBuf out(A.amp.size(), cplx(kNaN, kNaN));
  for (int idx = 0; idx < g.size(); ++idx) {
    if (!g.masked(idx) || !valid(ax[idx]) || !valid(ay[idx])) continue;
    const cplx dbar = 0.5 * (ax[idx] + cplx(0.0, 1.0) * ay[idx]);
    const cplx ds = std::conj(bg.dsigma_node(idx));
    cplx d = std::exp(-bg.sigma_node(idx)) * (dbar + w * A.amp[idx] * ds);
    if (theta != nullptr && !theta->amp.empty())
      d -= cplx(0.0, 0.5 * coupling) * std::conj(theta->amp[idx]) * A.amp[idx];
    out[idx] = d;
  }
  return out;
}

double dbar_residual(const Background& bg, const WeightedField& A,
                     const WeightedField* theta, double coupling,
                     const PhasePoint& p) {
  const CBuf defect = dbar_defect(bg, A, theta, coupling);
  const WrapResult wr = bg.wrap(p);
  const double w = A.weight.value();
  const cplx d = bg.grid().interp(defect, wr.point.z);
  return 2.0 * w * (d * std::polar(1.0, (w - 1.0) * wr.point.phi)).real();
}

double dbar_residual_sup(const Background& bg, const WeightedField& A,
                         const WeightedField* theta, double coupling) {
  const CBuf defect = dbar_defect(bg, A, theta, coupling);
  const Grid& g = bg.grid();
  double sup = 0.0;
  for (int idx : g.domain_nodes())
    if (valid(defect[idx])) sup = std::max(sup, std::abs(defect[idx]));
  return 2.0 * A.weight.value() * sup;
}

WeightedField chart_field(const Background& bg, Rational weight,
                          const std::function<cplx(cplx)>& beta) {
  const Grid& g = bg.grid();
  WeightedField f;
  f.weight = weight;
  f.metric_tag = bg.has_u() ? "g" : "g0";
  f.amp.assign(g.size(), cplx(kNaN, kNaN));
  const double w = weight.value();
  for (int idx = 0; idx < g.size(); ++idx) {
    if (!g.masked(idx)) continue;
    const cplx z = g.node(idx % g.nx(), idx / g.nx());
    f.amp[idx] = beta(z) * std::exp(-w * bg.sigma_node(idx));
  }
  return f;
}

}  // namespace vortexlab
