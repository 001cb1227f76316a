#pragma once

// Exponential Euler-Maruyama integration of the delayed second-order system
// driven by Levy noise: the stiff linear block flow is propagated exactly
// while delayed drift and noise enter as left-point Euler increments, so the
// scheme has no step restriction from high modes and keeps strong order one.
// Noise enters the velocity equation only, so diffusion coefficients produce
// the bottom block of the increment. Gaussian parts use the left-point
// coefficient; jumps inside a step are applied sequentially at step end, each
// evaluated on the running pre-jump state.

#include <Eigen/Dense>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "sdwave/delay.hpp"
#include "sdwave/operators.hpp"

namespace sdwave {

// Ring buffer of the last depth+1 states on the step grid; index j holds the
// state at t - j step.
class CircularHistory {
 public:
  CircularHistory() = default;
  CircularHistory(int dim, int depth, double step);

  int dim() const { return dim_; }
  int depth() const { return depth_; }
  double step() const { return step_; }

  // Columns of init are the states at theta = -depth step, ..., -step, 0.
  void reset(const Eigen::MatrixXd& init);
  void push(const Eigen::VectorXd& y);
  // State at t - lag_steps * step, 0 <= lag_steps <= depth.
  const Eigen::VectorXd& at(int lag_steps) const;

  // Quadrature embedding of the segment: [y(0); sqrt(step) y(-r); ...;
  // sqrt(step) y(-step)], the history block ascending in theta. Squared norm
  // approximates |y|^2 + integral of |y(theta)|^2 with left-endpoint weights.
  Eigen::VectorXd flatten() const;

 private:
  int dim_ = 0, depth_ = 0, head_ = 0;
  double step_ = 0;
  std::vector<Eigen::VectorXd> slots_;
};

// View of the running segment handed to diffusion coefficients: the current
// state plus grid history. at() clamps theta to the nearest stored sample.
struct SegmentContext {
  const Eigen::VectorXd* y = nullptr;
  const CircularHistory* hist = nullptr;
  double time = 0;

  const Eigen::VectorXd& current() const { return *y; }
  const Eigen::VectorXd& at(double theta) const;
};

enum class JumpLaw { FixedVector, UniformSphere, Gaussian, ParetoRadial };

// Square-integrable Wiener part plus compound-Poisson jumps in the noise
// space R^m. Moment helpers return +inf where the law has none.
struct NoiseSpec {
  Eigen::VectorXd wiener_variances;  // q_j; empty means no Gaussian part
  double jump_rate = 0;
  JumpLaw law = JumpLaw::FixedVector;
  Eigen::VectorXd jump_vector;  // FixedVector
  double jump_scale = 1;        // UniformSphere / Gaussian / ParetoRadial
  double pareto_alpha = 3;      // radial tail index, x_min = 1
  bool compensate = false;      // subtract the small-jump drift

  double trace_q() const { return wiener_variances.sum(); }
  bool has_jumps() const { return jump_rate > 0; }
  double jump_second_moment(int dim) const;      // E |z|^2
  double jump_tail_first_moment(int dim) const;  // E |z| 1_{|z| > 1}
  Eigen::VectorXd jump_mean_small(int dim) const;  // E z 1_{|z| <= 1}
  // trace Q plus rate * E|z|^2: the noise mass entering moment conditions
  double second_moment_mass(int dim) const;
};

void validate_noise(const NoiseSpec& noise, int dim);

// One step of the driving noise: the Gaussian part is already scaled by
// sqrt(q_j h); jumps are time-ordered within the step.
struct LevyIncrement {
  Eigen::VectorXd gaussian;
  std::vector<Eigen::VectorXd> jumps;
};
LevyIncrement sample_levy_increment(const NoiseSpec& noise, int dim, double h,
                                    std::mt19937_64& rng);

// Point mass of the delay-dependence measure in the declared growth bound.
struct KappaAtom {
  double lag = 0;     // in [-horizon, 0]
  double weight = 0;  // >= 0
};

// Diffusion coefficient producing the velocity-block matrix (modes x
// noise_dim). The declared bound
//   |sigma(phi)|_HS^2 <= alpha1 |phi(0)|^2 + alpha2 sum_k w_k |phi(theta_k)|^2
// is metadata consumed by the moment conditions and audited by probes.
struct DiffusionSpec {
  int modes = 0;
  int noise_dim = 1;
  bool additive = false;
  Eigen::MatrixXd additive_bottom;  // used when additive
  std::function<Eigen::MatrixXd(const SegmentContext&)> bottom;
  double alpha1 = 0, alpha2 = 0;
  std::vector<KappaAtom> kappa;
  double lipschitz = 0;  // declared constant w.r.t. the flattened segment norm
};

void validate_diffusion(const DiffusionSpec& d);
Eigen::MatrixXd diffusion_bottom(const DiffusionSpec& d,
                                 const SegmentContext& ctx);
// Total mass of the kappa measure.
double kappa_mass(const DiffusionSpec& d);

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(double time, double norm);
  double time() const { return time_; }
  double norm() const { return norm_; }

 private:
  double time_, norm_;
};

struct SdeOptions {
  double t_max = 1;
  double step = 1e-2;
  double divergence_norm = 1e8;  // throw DivergenceError beyond this
};

// Called after initialization (index 0) and after every step.
using SampleHook = std::function<void(int step_index, double time,
                                      const SegmentContext& ctx)>;

CircularHistory simulate_path(
    const BlockOperator& op, const DelayKernel& kernel,
    const DiffusionSpec& diffusion, const NoiseSpec& noise,
    const std::function<Eigen::VectorXd(double)>& initial_history,
    const SdeOptions& opt, std::mt19937_64& rng, const SampleHook& hook = {});

// Two initial segments driven by the identical increment stream, the
// synchronous coupling. With additive noise the difference of the two paths
// follows the deterministic delayed flow exactly.
struct PairedResult {
  CircularHistory first, second;
};
PairedResult simulate_paired(
    const BlockOperator& op, const DelayKernel& kernel,
    const DiffusionSpec& diffusion, const NoiseSpec& noise,
    const std::function<Eigen::VectorXd(double)>& history_a,
    const std::function<Eigen::VectorXd(double)>& history_b,
    const SdeOptions& opt, std::mt19937_64& rng, const SampleHook& hook_a = {},
    const SampleHook& hook_b = {});

// Probe audit of the declared diffusion bounds on random segments at several
// amplitudes. declared_ok fails when a probe exceeds a declared bound beyond
// rounding slack.
struct LipschitzReport {
  double max_growth_ratio = 0;      // |sigma|_HS^2 over the declared bound
  double max_difference_ratio = 0;  // |sigma(a)-sigma(b)|_HS over L |a-b|
  bool declared_ok = false;
};
LipschitzReport lipschitz_check(const DiffusionSpec& d, double horizon,
                                double step, int probes, std::mt19937_64& rng);

// Consistency of the Euler path with the convolution representation
//   y(t) = G(t) y(0) + int G(t+theta) (S phi)(theta) dtheta
//          + sum_j G(t - t_j) sigma dW_j
// built from the same Gaussian increments (additive diffusion, no jumps).
struct StochasticVocReport {
  double rel_error = 0;
  double tolerance = 0;
  bool pass = false;
};
StochasticVocReport stochastic_voc_check(
    const BlockOperator& op, const DelayKernel& kernel,
    const DiffusionSpec& diffusion, const NoiseSpec& noise,
    const std::function<Eigen::VectorXd(double)>& initial_history, double t_max,
    double step, double tolerance, std::mt19937_64& rng);

}  // namespace sdwave
