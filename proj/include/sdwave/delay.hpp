#pragma once

// Delayed drift acting on the reduced state y = (A^{1/2} u, u'): the velocity
// equation gains a Stieltjes convolution over the window [-r, 0] with one
// measure acting on positions u and one on velocities u'. In reduced
// coordinates every contribution lands in the bottom block row as
// [W_pos S^{-1}, W_vel], so the perturbation norm is the largest singular
// value of that row.

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "sdwave/operators.hpp"

namespace sdwave {

// Matrix point mass at a strictly negative lag; the weight acts on mode
// coefficients of its channel (position weights multiply u = S^{-1} w).
struct KernelAtom {
  double lag = 0;
  Eigen::MatrixXd weight;
};

// Piecewise-constant matrix density: value(theta) = values[i] on
// [breaks[i], breaks[i+1]), zero outside the covered range.
struct KernelDensity {
  Eigen::VectorXd breaks;               // ascending, size m + 1
  std::vector<Eigen::MatrixXd> values;  // size m
  Eigen::MatrixXd value(double theta) const;
};

struct DelayKernel {
  double horizon = 0;  // r > 0
  std::vector<KernelAtom> position_atoms;
  std::vector<KernelAtom> velocity_atoms;
  std::vector<KernelDensity> position_densities;
  std::vector<KernelDensity> velocity_densities;

  bool empty() const;
};

// Lags must lie in [-horizon, 0), densities inside [-horizon, 0], and every
// weight must be modes x modes. Throws std::invalid_argument otherwise.
void validate_kernel(const DelayKernel& k, int modes);

// All weights and densities multiplied by a constant factor.
DelayKernel scale_kernel(const DelayKernel& k, double factor);

// Atoms of the combined measure in reduced coordinates; equal-lag position
// and velocity atoms are merged into one block row [p v]. Zero blocks are
// materialized so both members are always modes x modes.
struct ReducedAtom {
  double lag = 0;
  Eigen::MatrixXd p;
  Eigen::MatrixXd v;
};
std::vector<ReducedAtom> reduced_atoms(const DelayKernel& k,
                                       const Eigen::VectorXd& s);

// Variation of the combined measure in reduced coordinates: spectral norms of
// merged atom rows plus integrated density norms. Equals transfer_cap at 0.
double total_variation(const DelayKernel& k, const Eigen::VectorXd& s);

// Kernel image of the exponential segment theta -> e^{lambda theta} x. Only
// the bottom block row [X Y] is nonzero; norm is its largest singular value.
struct TransferMatrix {
  Eigen::MatrixXcd x, y;
  double norm = 0;
};
TransferMatrix delay_transfer(const DelayKernel& k, const Eigen::VectorXd& s,
                              Cx lambda);

// Upper bound for sup over Re lambda >= a of the transfer norm: triangle
// inequality over merged atoms and densities with |e^{lambda theta}| <=
// e^{a theta} on the window.
double transfer_cap(const DelayKernel& k, const Eigen::VectorXd& s, double a);

// Certified bound for sup_b ||R(a + ib, Lambda)|| on a vertical line inside
// the dissipativity strip. Beyond the sector-lemma cutoff b_star the norm is
// at most 1/delta with delta = (alpha + a)/2; on the remaining segment grid
// values are inflated to a rigorous bound through the Neumann estimate
// ||R(z)|| <= ||R(z0)|| / (1 - |z - z0| ||R(z0)||).
struct LineResolventCap {
  double a = 0;
  double delta = 0;
  double b_star = 0;
  double segment_cap = 0;  // certified sup over |b| <= b_star
  double cap = 0;          // max(segment_cap, 1/delta)
  double grid_max = 0;     // raw grid maximum, diagnostic only
};
LineResolventCap resolvent_line_cap(const BlockOperator& op, double a,
                                    int grid_points = 512);

// Line criterion: when the transfer and resolvent caps multiply below one on
// Re lambda = a, the delayed generator keeps its growth bound below a. The
// verdict uses only the certified caps; grid maxima are reported alongside.
struct StabilityVerdict {
  double a = 0;
  double transfer_bound = 0;
  double resolvent_bound = 0;
  double product = 0;
  bool certified = false;
  double transfer_grid_max = 0;
  double resolvent_grid_max = 0;
};
StabilityVerdict stability_criterion(const BlockOperator& op,
                                     const DelayKernel& k, double a,
                                     int grid_points = 512);

// Geometric-series variant with the cruder window bound e^{|a| r} Var for the
// transfer factor. q < 1 makes the perturbation series converge with ratio q;
// partial_sums[m] = sum_{j <= m} q^j.
struct SeriesVerdict {
  double a = 0;
  double q = 0;
  bool certified = false;
  std::vector<double> partial_sums;
  double limit = 0;  // 1 / (1 - q) when certified
};
SeriesVerdict series_criterion(const BlockOperator& op, const DelayKernel& k,
                               double a, int terms = 8, int grid_points = 512);

// Fundamental matrix solution of the delayed system: G(t) = 0 for t < 0,
// G(0) = I, G' = Lambda G + convolution with the kernel.
class GreenOperator {
 public:
  GreenOperator() = default;
  GreenOperator(double step, std::vector<Eigen::MatrixXd> samples);

  double step() const { return step_; }
  int count() const { return static_cast<int>(samples_.size()); }
  double horizon() const { return step_ * (count() - 1); }
  const Eigen::MatrixXd& sample(int j) const { return samples_[j]; }
  // Zero for t < 0, linear interpolation between samples otherwise; arguments
  // beyond the stored horizon clamp to the last sample.
  Eigen::MatrixXd value(double t) const;

 private:
  double step_ = 0;
  std::vector<Eigen::MatrixXd> samples_;
};

// Method of steps with classical Runge-Kutta stages. Delayed arguments are
// read from stored samples via linear interpolation, so every atom lag must
// span at least one step. Density lookups reaching into the current step are
// clamped to the newest sample, an O(step^2) effect confined to densities.
GreenOperator green_operator(const BlockOperator& op, const DelayKernel& k,
                             double t_max, double step);

// Direct integration from (value, history) by the same scheme; history is
// consulted for arguments below zero. Samples at 0, step, 2 step, ...
std::vector<Eigen::VectorXd> integrate_delayed(
    const BlockOperator& op, const DelayKernel& k, const Eigen::VectorXd& value,
    const std::function<Eigen::VectorXd(double)>& history, double t_max,
    double step);

// Envelope ||G(t)|| <= amplitude * e^{-rate t} at the sample points: the rate
// comes from a least-squares fit of log ||G|| over the tail half, and the
// amplitude is then raised until every sample sits below the envelope.
struct DecayFit {
  double amplitude = 1;
  double rate = 0;
  bool decaying = false;
};
DecayFit delay_semigroup_decay(const GreenOperator& g);

// Structure operator of the kernel on a history segment:
//   (S phi)(theta) = integral over [-r, theta] of dK(sigma) phi(sigma - theta).
// Returns one column per grid theta; the top block vanishes identically
// because the measure feeds only the velocity equation.
Eigen::MatrixXd structure_operator_apply(
    const DelayKernel& k, const Eigen::VectorXd& s,
    const std::function<Eigen::VectorXd(double)>& phi,
    const Eigen::VectorXd& theta_grid, int quad_points = 256);

// Consistency of the two solution representations started from (value,
// history): direct integration against
//   y(t) = G(t) value + integral_{-r}^{0} G(t + theta) (S history)(theta) dtheta,
// the quadrature split at theta = -t where G drops to zero.
struct VocReport {
  double max_rel_error = 0;
  double tolerance = 0;
  bool pass = false;
};
VocReport variation_of_constants_check(
    const BlockOperator& op, const DelayKernel& k, const Eigen::VectorXd& value,
    const std::function<Eigen::VectorXd(double)>& history, double t_max,
    double step, double tolerance);

}  // namespace sdwave
