#pragma once

// Decay-rate analysis for the reduced block operator: the closed-form
// spectral bound under scalar damping, the explicit Lyapunov solution for
// B = -alpha I with its two-sided quadratic-form envelope, imaginary-axis
// resolvent bounds, and growth-bound certificates from the inverse norm.

#include <optional>
#include <string>
#include <vector>

#include "sdwave/operators.hpp"

namespace sdwave {

// Largest real part over the mode quadratics mu^2 - beta mu + lambda = 0:
//   beta/2 + sqrt(beta^2/4 + omega_s(-A))  when the argument is >= 0,
//   beta/2                                 otherwise,
// with omega_s(-A) = -lambda_min < 0 required.
double spectral_bound_scalar_damping(double beta, double omega_s_minus_a);

// Explicit solution P of <Lambda y, P y> + <P y, Lambda y> = -|y|^2 for
// B = -alpha I, diagonal over modes with 2x2 blocks
//   [[1/alpha + alpha/(2 lambda), 1/(2 sqrt(lambda))],
//    [1/(2 sqrt(lambda)),         1/alpha            ]].
struct LyapunovOperator {
  double alpha = 0;
  Eigen::VectorXd lambdas;

  int modes() const { return static_cast<int>(lambdas.size()); }
  Eigen::Matrix2d mode_block(int k) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& y) const;
  double quad_form(const Eigen::VectorXd& y) const;  // <P y, y>
};

// Builds P and cross-checks each mode block against an independent linear
// solve of the 2x2 Lyapunov system (throws on mismatch > 1e-10).
LyapunovOperator lyapunov_solution(double alpha, const SpectralOperator& a);

// | <Lambda y, P y> + <P y, Lambda y> + |y|^2 | / |y|^2 with B = -alpha I.
double lyapunov_residual(const LyapunovOperator& p, const Eigen::VectorXd& y);

// theta = 4 |omega_s(-A)| / alpha^2; the extreme values of <P y, y>/|y|^2:
//   gamma_minus = (1/alpha) sqrt(1+theta) / (1 + sqrt(1+theta))   (increasing)
//   gamma_plus  = (1/alpha) (1 + (1 + sqrt(1+theta)) / theta)     (decreasing)
// Both tend to 1/alpha as theta -> infinity.
struct GammaBounds {
  double theta = 0;
  double gamma_minus = 0;
  double gamma_plus = 0;
};
GammaBounds gamma_bounds(double alpha, double omega_s_minus_a);

// ||e^{t Lambda}|| <= amplitude * e^{-rate t} with amplitude =
// sqrt(gamma_plus/gamma_minus), rate = 1/(2 gamma_plus).
struct DecayEnvelope {
  double amplitude = 1;
  double rate = 0;
  double eval(double t) const { return amplitude * std::exp(-rate * t); }
};
DecayEnvelope decay_envelope(double alpha, double omega_s_minus_a);

// ||(z - Lambda)^{-1}||; throws std::domain_error within 1e-12 (relative) of
// the spectrum.
double resolvent_norm(const BlockOperator& op, Cx z);

// Approximate-point-spectrum exclusion: if the resolvent norm at a + ib
// exceeds 1/delta (0 < delta < alpha, delta - alpha < a <= 0) then
// |b| < alpha (3 delta + (delta - a) gamma) / (alpha - delta + a). Used as
// the b-grid cutoff: beyond it ||R(a+ib)|| <= 1/delta.
double lemma_b_cutoff(double alpha, double gamma, double delta, double a);

// Two-branch imaginary-axis bound, 0 < c < 1:
//   |b| <= c/||Lambda^{-1}||: ||R(ib)|| <= ||Lambda^{-1}||/(1-c)
//   |b| >  c/||Lambda^{-1}||: ||R(ib)|| <= ((3+gamma) alpha ||Lambda^{-1}|| + c)/(alpha c)
struct ImagAxisBound {
  double c = 0.5;
  double split = 0;  // c / inv_norm
  double inner = 0;
  double outer = 0;
  double eval(double b) const { return std::abs(b) <= split ? inner : outer; }
};
ImagAxisBound resolvent_bound_imag_axis(double alpha, double gamma,
                                        double inv_norm, double c);

// b-independent form: ||R(ib)|| <= (2 alpha (3+gamma)/kappa + 1)/alpha for any
// lower bound kappa of Lambda (kappa <= 1/||Lambda^{-1}||); the c = 1/2 case.
double resolvent_bound_uniform(double alpha, double gamma, double kappa);

// Exact max real part of the truncation's eigenvalues.
double spectral_abscissa(const BlockOperator& op);

// Growth-bound certificate from the inverse norm: for gamma > 0 the unique
// root nu in (-alpha, 0) of nu^2 + (nu gamma alpha/(alpha+nu))^2 =
// ||Lambda^{-1}||^{-2} (left side decreasing), found by bisection to 1e-12
// and returned from the sound side (never below the root); for gamma = 0,
// max(-alpha, -1/||Lambda^{-1}||).
double growth_bound_root(double alpha, double gamma, double inv_norm);
double growth_bound_estimate(const BlockOperator& op);
// Same root with ||Lambda^{-1}|| replaced by the computable surrogate
// ||A^{-1/2} B A^{-1/2}|| + 2 ||A^{-1/2}|| (an upper bound, so the
// certificate only weakens).
double growth_bound_from_operator_norms(const BlockOperator& op);

// Grid scan for the abscissa of uniform resolvent boundedness: smallest grid
// a such that every vertical line to its right has sup_b ||R(a+ib)|| <= cap
// on a logarithmic b-grid with cutoff 1e3 * (alpha + sqrt(lambda_max)).
struct GpgScan {
  double bound = 0;
  double cap = 0;
  bool found = false;
  std::vector<double> a_grid;
  std::vector<double> sup_norm;  // +inf where the line meets the spectrum
};
GpgScan gpg_numeric_growth_bound(const BlockOperator& op,
                                 const std::vector<double>& a_grid,
                                 int b_points, double cap);

struct BoundRow {
  std::string method;
  double value = 0;
  double amplitude = std::numeric_limits<double>::quiet_NaN();
  std::string detail;
};
struct BoundReport {
  std::vector<BoundRow> rows;
};
// Aggregates every applicable growth estimate for the instance.
BoundReport collect_bounds(const BlockOperator& op);

}  // namespace sdwave
