#pragma once

#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "vortexlab/background.hpp"

namespace vortexlab {

/// Fiber weight m/n in lowest terms.
struct Rational {
  int num = 0;
  int den = 1;
  double value() const { return static_cast<double>(num) / den; }
};
Rational make_rational(int num, int den);

/// Section of K^{m/n} stored as a complex amplitude b on the grid, in the
/// trivialization B(z, phi) = b(z) e^{i w phi} against the w-th power of the
/// orthonormal coframe of the metric named by metric_tag. Margin values obey
/// the automorphy relation b(gamma z) = b(z) e^{-i w rot(gamma, z)}.
struct WeightedField {
  Rational weight;
  std::string metric_tag = "g0";
  CBuf amp;
};

/// Real evaluation pair (a, Va) of a weighted function A = Va/(1+l) + i a.
struct RealPair {
  double a = 0.0;
  double va = 0.0;
  cplx reconstruct(double wplus) const { return {va / wplus, a}; }
  static RealPair split(cplx A, double wplus) {
    return {A.imag(), wplus * A.real()};
  }
};

/// Finite sum of weighted components sum_c amp_c(z) e^{i w_c phi}. Closed
/// under the frame derivatives: V acts by i w_c per component, X and H send
/// weight w to w +- 1 through the raising/lowering amplitudes
///   W+ : e^{-sigma} (d/dz b - w b d sigma),
///   W- : e^{-sigma} (dbar b + w b dbar sigma).
class FieldSum {
 public:
  struct Component {
    double weight;
    CBuf amp;
  };

  FieldSum() = default;
  explicit FieldSum(std::vector<Component> comps) : comps_(std::move(comps)) {}

  static FieldSum of(const WeightedField& f);
  /// Im F and Re F as the conjugate-symmetric two-component sums.
  static FieldSum imag_part(const WeightedField& f);
  static FieldSum real_part(const WeightedField& f);
  static FieldSum scalar(const RBuf& values);

  FieldSum vderiv() const;
  FieldSum xderiv(const Background& bg) const;
  FieldSum hderiv(const Background& bg) const;

  FieldSum& operator+=(const FieldSum& other);
  FieldSum& scale(cplx factor);
  /// Multiply every component amplitude by a weight-0 nodal factor.
  FieldSum& multiply_scalar_field(const RBuf& factor);

  cplx evaluate(const Background& bg, const PhasePoint& p) const;
  /// Same, for a point already wrapped into the closed domain.
  cplx evaluate_wrapped(const Background& bg, const PhasePoint& p) const;

  const std::vector<Component>& components() const { return comps_; }
  bool empty() const { return comps_.empty(); }

 private:
  std::vector<Component> comps_;
};

/// Cached amplitude and first-level raising/lowering amplitudes of a field.
struct FieldJet {
  double weight = 0.0;
  CBuf amp, wplus, wminus;
};
FieldJet build_jet(const Background& bg, const WeightedField& f);

/// B(p), V B = i w B(p), and (X B, H B)(p).
cplx evaluate(const Background& bg, const WeightedField& f, const PhasePoint& p);
cplx vertical_derivative(const Background& bg, const WeightedField& f,
                         const PhasePoint& p);
std::pair<cplx, cplx> horizontal_derivatives(const Background& bg,
                                             const FieldJet& jet,
                                             const PhasePoint& p);
std::pair<cplx, cplx> horizontal_derivatives(const Background& bg,
                                             const WeightedField& f,
                                             const PhasePoint& p);

/// Holomorphicity defect amplitude of a weight-w field against coupling k:
///   D A = e^{-sigma} (dbar A + w A dbar sigma) - (i k / 2) conj(T) A,
/// where T is the weight-1 amplitude of theta (empty: theta = 0). The scalar
/// residual X Va - w H a - k theta Va + k w a V theta equals
/// 2 w Re(D A e^{i (w-1) phi}).
CBuf dbar_defect(const Background& bg, const WeightedField& A,
                 const WeightedField* theta, double coupling);
double dbar_residual(const Background& bg, const WeightedField& A,
                     const WeightedField* theta, double coupling,
                     const PhasePoint& p);
/// Sup over fiber and domain nodes of the scalar residual: 2 w max |D A|.
double dbar_residual_sup(const Background& bg, const WeightedField& A,
                         const WeightedField* theta, double coupling);

/// Chart field b = beta e^{-w sigma} from a holomorphic-chart coefficient
/// beta; not automorphic, for local differential tests only.
WeightedField chart_field(const Background& bg, Rational weight,
                          const std::function<cplx(cplx)>& beta);

}  // namespace vortexlab
