#include "sdwave/sde.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "sdwave/mat2.hpp"

namespace sdwave {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// E[ u 1_{u > c} ] under the chi distribution with m degrees of freedom,
// composite Simpson far into the Gaussian tail.
double chi_tail_mean(int m, double c) {
  const double lo = std::max(c, 0.0);
  const double hi = std::max(lo * 1.5 + 5.0, std::sqrt(static_cast<double>(m)) + 15.0);
  const int intervals = 8192;
  const double dh = (hi - lo) / intervals;
  const double log_norm =
      (1 - 0.5 * m) * std::log(2.0) - std::lgamma(0.5 * m);
  auto f = [&](double u) {
    if (u <= 0) return 0.0;
    return std::exp(log_norm + m * std::log(u) - 0.5 * u * u);
  };
  double sum = f(lo) + f(hi);
  for (int i = 1; i < intervals; ++i)
    sum += f(lo + i * dh) * (i % 2 == 1 ? 4.0 : 2.0);
  return sum * dh / 3.0;
}

Eigen::VectorXd sphere_direction(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Eigen::VectorXd g(dim);
  double norm = 0;
  do {
    for (int i = 0; i < dim; ++i) g(i) = gauss(rng);
    norm = g.norm();
  } while (norm < 1e-12);
  return g / norm;
}

Eigen::VectorXd sample_jump(const NoiseSpec& noise, int dim,
                            std::mt19937_64& rng) {
  switch (noise.law) {
    case JumpLaw::FixedVector:
      return noise.jump_vector;
    case JumpLaw::UniformSphere:
      return noise.jump_scale * sphere_direction(dim, rng);
    case JumpLaw::Gaussian: {
      std::normal_distribution<double> gauss;
      Eigen::VectorXd g(dim);
      for (int i = 0; i < dim; ++i) g(i) = gauss(rng);
      return noise.jump_scale * g;
    }
    case JumpLaw::ParetoRadial: {
      std::uniform_real_distribution<double> uni(0.0, 1.0);
      const double radius =
          std::pow(1.0 - uni(rng), -1.0 / noise.pareto_alpha);
      return (noise.jump_scale * radius) * sphere_direction(dim, rng);
    }
  }
  return Eigen::VectorXd::Zero(dim);
}

struct GridAtom {
  int lag_steps = 0;
  Eigen::MatrixXd p, v;
  bool has_p = false, has_v = false;
};

struct GridDensity {
  int lag_steps = 0;
  Eigen::MatrixXd w;
  bool top = false;  // reads the position block
};

int aligned_steps(double lag, double h) {
  const double exact = -lag / h;
  const int steps = static_cast<int>(std::llround(exact));
  if (std::abs(exact - steps) > 1e-6 * std::max(1.0, exact))
    throw std::invalid_argument("delay lag is not aligned with the step grid");
  return steps;
}

// Precomputed step kernel of one exponential Euler-Maruyama run. The linear
// block flow e^{h Lambda} is applied exactly (per-mode 2x2 exponentials, or
// one dense exponential for dense damping); delayed drift, diffusion, and
// jumps enter as left-point Euler increments before the propagation. Exact
// linear propagation removes the explicit-scheme step limit h < 2|Re z|/|z|^2,
// which high modes (|z|^2 = lambda_n) would otherwise violate at any
// practical step.
struct Stepper {
  const BlockOperator* op = nullptr;
  const DiffusionSpec* diff = nullptr;
  const NoiseSpec* noise = nullptr;
  double h = 0;
  int n = 0, m = 0, depth = 0;
  double divergence_norm = 0;
  std::vector<GridAtom> atoms;
  std::vector<GridDensity> dens;
  Eigen::VectorXd comp_drift;  // h rate E[z 1_{|z|<=1}], zero when off
  std::vector<Eigen::Matrix2d> mode_prop;  // e^{h Lambda_k} per mode
  Eigen::MatrixXd dense_prop;              // e^{h Lambda}, dense damping only

  static Stepper build(const BlockOperator& op, const DelayKernel& kernel,
                       const DiffusionSpec& diff, const NoiseSpec& noise,
                       const SdeOptions& opt) {
    validate_diffusion(diff);
    if (diff.modes != op.modes())
      throw std::invalid_argument("diffusion modes mismatch");
    validate_noise(noise, diff.noise_dim);
    validate_kernel(kernel, op.modes());
    if (!op.is_real())
      throw std::invalid_argument("simulation requires a real operator");
    if (!(opt.step > 0) || !(opt.t_max >= opt.step))
      throw std::invalid_argument("need 0 < step <= t_max");

    Stepper st;
    st.op = &op;
    st.diff = &diff;
    st.noise = &noise;
    st.h = opt.step;
    st.n = op.modes();
    st.m = diff.noise_dim;
    st.divergence_norm = opt.divergence_norm;

    const Eigen::VectorXd sinv = op.s.cwiseInverse();
    std::map<int, GridAtom> merged;
    auto add_atom = [&](const KernelAtom& a, bool position) {
      const int steps = aligned_steps(a.lag, st.h);
      if (steps < 1)
        throw std::invalid_argument("atom lag shorter than one step");
      GridAtom& g = merged[steps];
      g.lag_steps = steps;
      if (position) {
        Eigen::MatrixXd w = a.weight * sinv.asDiagonal();
        if (g.has_p)
          g.p += w;
        else
          g.p = std::move(w);
        g.has_p = true;
      } else {
        if (g.has_v)
          g.v += a.weight;
        else
          g.v = a.weight;
        g.has_v = true;
      }
    };
    for (const auto& a : kernel.position_atoms) add_atom(a, true);
    for (const auto& a : kernel.velocity_atoms) add_atom(a, false);
    for (auto& [steps, g] : merged) {
      st.depth = std::max(st.depth, steps);
      st.atoms.push_back(std::move(g));
    }

    const bool has_density = !kernel.position_densities.empty() ||
                             !kernel.velocity_densities.empty();
    if (has_density) {
      const int ddepth = static_cast<int>(
          std::llround(std::ceil(kernel.horizon / st.h - 1e-9)));
      st.depth = std::max(st.depth, ddepth);
      auto add_density = [&](const KernelDensity& d, bool position) {
        for (int j = 1; j <= ddepth; ++j) {
          Eigen::MatrixXd w = d.value(-j * st.h);
          if (w.size() == 0 || w.squaredNorm() == 0) continue;
          if (position) w = w * sinv.asDiagonal();
          st.dens.push_back({j, std::move(w), position});
        }
      };
      for (const auto& d : kernel.position_densities) add_density(d, true);
      for (const auto& d : kernel.velocity_densities) add_density(d, false);
    }
    for (const auto& ka : diff.kappa)
      st.depth = std::max(
          st.depth,
          static_cast<int>(std::llround(std::ceil(-ka.lag / st.h - 1e-9))));

    st.comp_drift = Eigen::VectorXd::Zero(st.m);
    if (noise.compensate && noise.has_jumps())
      st.comp_drift = st.h * noise.jump_rate * noise.jump_mean_small(st.m);

    if (op.mode_diagonal()) {
      st.mode_prop.reserve(st.n);
      for (int k = 0; k < st.n; ++k)
        st.mode_prop.push_back(expm2(op.mode_block_real(k), st.h));
    } else {
      st.dense_prop = (st.h * op.dense_matrix_real()).exp();
    }
    return st;
  }

  void propagate(Eigen::VectorXd& y) const {
    if (!mode_prop.empty()) {
      for (int k = 0; k < n; ++k) {
        const Eigen::Matrix2d& f = mode_prop[k];
        const double w = y(k), v = y(n + k);
        y(k) = f(0, 0) * w + f(0, 1) * v;
        y(n + k) = f(1, 0) * w + f(1, 1) * v;
      }
    } else {
      y = dense_prop * y;
    }
  }

  CircularHistory init(
      const std::function<Eigen::VectorXd(double)>& history) const {
    CircularHistory hist(op->dim(), depth, h);
    Eigen::MatrixXd cols(op->dim(), depth + 1);
    for (int c = 0; c <= depth; ++c) {
      Eigen::VectorXd v = history((c - depth) * h);
      if (v.size() != op->dim())
        throw std::invalid_argument("history dimension mismatch");
      cols.col(c) = v;
    }
    hist.reset(cols);
    return hist;
  }

  void advance(CircularHistory& hist, const LevyIncrement& inc,
               double t) const {
    const Eigen::VectorXd& cur = hist.at(0);
    Eigen::VectorXd delay_drift = Eigen::VectorXd::Zero(n);
    for (const auto& a : atoms) {
      const Eigen::VectorXd& g = hist.at(a.lag_steps);
      if (a.has_p) delay_drift.noalias() += a.p * g.head(n);
      if (a.has_v) delay_drift.noalias() += a.v * g.tail(n);
    }
    for (const auto& d : dens) {
      const Eigen::VectorXd& g = hist.at(d.lag_steps);
      delay_drift.noalias() += h * (d.w * (d.top ? g.head(n) : g.tail(n)));
    }

    Eigen::VectorXd ynext = cur;
    ynext.tail(n) += h * delay_drift;
    const bool gaussian_active =
        noise->wiener_variances.size() > 0 || comp_drift.squaredNorm() > 0;
    if (gaussian_active) {
      SegmentContext pre{&cur, &hist, t};
      ynext.tail(n).noalias() +=
          diffusion_bottom(*diff, pre) * (inc.gaussian - comp_drift);
    }
    if (!inc.jumps.empty()) {
      SegmentContext running{&ynext, &hist, t};
      for (const auto& z : inc.jumps)
        ynext.tail(n) += diffusion_bottom(*diff, running) * z;
    }
    propagate(ynext);
    if (!ynext.allFinite() || ynext.norm() > divergence_norm)
      throw DivergenceError(t + h, ynext.allFinite() ? ynext.norm() : kInf);
    hist.push(ynext);
  }
};

}  // namespace

CircularHistory::CircularHistory(int dim, int depth, double step)
    : dim_(dim), depth_(depth), step_(step) {
  if (dim <= 0 || depth < 0 || !(step > 0))
    throw std::invalid_argument("bad history shape");
  slots_.assign(depth_ + 1, Eigen::VectorXd::Zero(dim_));
}

void CircularHistory::reset(const Eigen::MatrixXd& init) {
  if (init.rows() != dim_ || init.cols() != depth_ + 1)
    throw std::invalid_argument("history init must be dim x (depth + 1)");
  head_ = 0;
  for (int j = 0; j <= depth_; ++j) slots_[j] = init.col(depth_ - j);
}

void CircularHistory::push(const Eigen::VectorXd& y) {
  if (y.size() != dim_) throw std::invalid_argument("state dimension mismatch");
  const int size = depth_ + 1;
  head_ = (head_ + size - 1) % size;
  slots_[head_] = y;
}

const Eigen::VectorXd& CircularHistory::at(int lag_steps) const {
  if (lag_steps < 0 || lag_steps > depth_)
    throw std::out_of_range("history lag outside the stored window");
  return slots_[(head_ + lag_steps) % (depth_ + 1)];
}

Eigen::VectorXd CircularHistory::flatten() const {
  Eigen::VectorXd out(dim_ * (depth_ + 1));
  out.head(dim_) = at(0);
  const double w = std::sqrt(step_);
  for (int j = depth_; j >= 1; --j)
    out.segment(dim_ * (depth_ + 1 - j), dim_) = w * at(j);
  return out;
}

const Eigen::VectorXd& SegmentContext::at(double theta) const {
  const int depth = hist ? hist->depth() : 0;
  const double h = hist ? hist->step() : 1.0;
  int j = static_cast<int>(std::llround(-theta / h));
  j = std::max(0, std::min(j, depth));
  if (j == 0) return *y;
  return hist->at(j);
}

double NoiseSpec::jump_second_moment(int dim) const {
  switch (law) {
    case JumpLaw::FixedVector:
      return jump_vector.squaredNorm();
    case JumpLaw::UniformSphere:
      return jump_scale * jump_scale;
    case JumpLaw::Gaussian:
      return dim * jump_scale * jump_scale;
    case JumpLaw::ParetoRadial:
      if (pareto_alpha <= 2) return kInf;
      return jump_scale * jump_scale * pareto_alpha / (pareto_alpha - 2);
  }
  return 0;
}

double NoiseSpec::jump_tail_first_moment(int dim) const {
  switch (law) {
    case JumpLaw::FixedVector: {
      const double norm = jump_vector.norm();
      return norm > 1 ? norm : 0.0;
    }
    case JumpLaw::UniformSphere:
      return jump_scale > 1 ? jump_scale : 0.0;
    case JumpLaw::Gaussian:
      return jump_scale * chi_tail_mean(dim, 1.0 / jump_scale);
    case JumpLaw::ParetoRadial: {
      if (pareto_alpha <= 1) return kInf;
      const double c = std::max(1.0, 1.0 / jump_scale);
      return jump_scale * pareto_alpha / (pareto_alpha - 1) *
             std::pow(c, 1.0 - pareto_alpha);
    }
  }
  return 0;
}

Eigen::VectorXd NoiseSpec::jump_mean_small(int dim) const {
  if (law == JumpLaw::FixedVector && jump_vector.norm() <= 1)
    return jump_vector;
  return Eigen::VectorXd::Zero(dim);  // the other laws are isotropic
}

double NoiseSpec::second_moment_mass(int dim) const {
  double mass = trace_q();
  if (has_jumps()) mass += jump_rate * jump_second_moment(dim);
  return mass;
}

void validate_noise(const NoiseSpec& noise, int dim) {
  if (noise.wiener_variances.size() != 0 &&
      noise.wiener_variances.size() != dim)
    throw std::invalid_argument("wiener variances must match the noise dim");
  if ((noise.wiener_variances.array() < 0).any())
    throw std::invalid_argument("wiener variances must be nonnegative");
  if (noise.jump_rate < 0)
    throw std::invalid_argument("jump rate must be nonnegative");
  if (noise.has_jumps()) {
    if (noise.law == JumpLaw::FixedVector) {
      if (noise.jump_vector.size() != dim)
        throw std::invalid_argument("jump vector must match the noise dim");
    } else if (!(noise.jump_scale > 0)) {
      throw std::invalid_argument("jump scale must be positive");
    }
    if (noise.law == JumpLaw::ParetoRadial && !(noise.pareto_alpha > 0))
      throw std::invalid_argument("pareto tail index must be positive");
  }
}

LevyIncrement sample_levy_increment(const NoiseSpec& noise, int dim, double h,
                                    std::mt19937_64& rng) {
  LevyIncrement inc;
  inc.gaussian = Eigen::VectorXd::Zero(dim);
  if (noise.wiener_variances.size() > 0) {
    std::normal_distribution<double> gauss;
    for (int j = 0; j < dim; ++j)
      inc.gaussian(j) = std::sqrt(noise.wiener_variances(j) * h) * gauss(rng);
  }
  if (noise.has_jumps()) {
    std::poisson_distribution<int> poisson(noise.jump_rate * h);
    const int count = poisson(rng);
    if (count > 0) {
      std::uniform_real_distribution<double> uni(0.0, 1.0);
      std::vector<double> times(count);
      for (auto& t : times) t = uni(rng);
      std::sort(times.begin(), times.end());
      inc.jumps.reserve(count);
      for (int i = 0; i < count; ++i)
        inc.jumps.push_back(sample_jump(noise, dim, rng));
    }
  }
  return inc;
}

void validate_diffusion(const DiffusionSpec& d) {
  if (d.modes <= 0 || d.noise_dim <= 0)
    throw std::invalid_argument("diffusion needs positive dimensions");
  if (d.additive) {
    if (d.additive_bottom.rows() != d.modes ||
        d.additive_bottom.cols() != d.noise_dim)
      throw std::invalid_argument("additive block must be modes x noise_dim");
  } else if (!d.bottom) {
    throw std::invalid_argument("state-dependent diffusion needs a coefficient");
  }
  if (d.alpha1 < 0 || d.alpha2 < 0)
    throw std::invalid_argument("growth constants must be nonnegative");
  for (const auto& ka : d.kappa)
    if (ka.lag > 0 || ka.weight < 0)
      throw std::invalid_argument("kappa atoms need lag <= 0 and weight >= 0");
}

Eigen::MatrixXd diffusion_bottom(const DiffusionSpec& d,
                                 const SegmentContext& ctx) {
  Eigen::MatrixXd out = d.additive ? d.additive_bottom : d.bottom(ctx);
  if (out.rows() != d.modes || out.cols() != d.noise_dim)
    throw std::runtime_error("diffusion coefficient has the wrong shape");
  return out;
}

double kappa_mass(const DiffusionSpec& d) {
  double mass = 0;
  for (const auto& ka : d.kappa) mass += ka.weight;
  return mass;
}

DivergenceError::DivergenceError(double time, double norm)
    : std::runtime_error("trajectory diverged at t = " + std::to_string(time) +
                         ", |y| = " + std::to_string(norm)),
      time_(time),
      norm_(norm) {}

CircularHistory simulate_path(
    const BlockOperator& op, const DelayKernel& kernel,
    const DiffusionSpec& diffusion, const NoiseSpec& noise,
    const std::function<Eigen::VectorXd(double)>& initial_history,
    const SdeOptions& opt, std::mt19937_64& rng, const SampleHook& hook) {
  const Stepper st = Stepper::build(op, kernel, diffusion, noise, opt);
  CircularHistory hist = st.init(initial_history);
  const int steps =
      static_cast<int>(std::llround(std::ceil(opt.t_max / opt.step - 1e-9)));
  if (hook) hook(0, 0.0, SegmentContext{&hist.at(0), &hist, 0.0});
  for (int j = 0; j < steps; ++j) {
    const LevyIncrement inc =
        sample_levy_increment(noise, st.m, opt.step, rng);
    st.advance(hist, inc, j * opt.step);
    if (hook)
      hook(j + 1, (j + 1) * opt.step,
           SegmentContext{&hist.at(0), &hist, (j + 1) * opt.step});
  }
  return hist;
}

PairedResult simulate_paired(
    const BlockOperator& op, const DelayKernel& kernel,
    const DiffusionSpec& diffusion, const NoiseSpec& noise,
    const std::function<Eigen::VectorXd(double)>& history_a,
    const std::function<Eigen::VectorXd(double)>& history_b,
    const SdeOptions& opt, std::mt19937_64& rng, const SampleHook& hook_a,
    const SampleHook& hook_b) {
  const Stepper st = Stepper::build(op, kernel, diffusion, noise, opt);
  PairedResult out{st.init(history_a), st.init(history_b)};
  const int steps =
      static_cast<int>(std::llround(std::ceil(opt.t_max / opt.step - 1e-9)));
  if (hook_a) hook_a(0, 0.0, SegmentContext{&out.first.at(0), &out.first, 0.0});
  if (hook_b)
    hook_b(0, 0.0, SegmentContext{&out.second.at(0), &out.second, 0.0});
  for (int j = 0; j < steps; ++j) {
    const LevyIncrement inc =
        sample_levy_increment(noise, st.m, opt.step, rng);
    const double t_next = (j + 1) * opt.step;
    st.advance(out.first, inc, j * opt.step);
    st.advance(out.second, inc, j * opt.step);
    if (hook_a)
      hook_a(j + 1, t_next, SegmentContext{&out.first.at(0), &out.first, t_next});
    if (hook_b)
      hook_b(j + 1, t_next,
             SegmentContext{&out.second.at(0), &out.second, t_next});
  }
  return out;
}

LipschitzReport lipschitz_check(const DiffusionSpec& d, double horizon,
                                double step, int probes,
                                std::mt19937_64& rng) {
  validate_diffusion(d);
  const int dim = 2 * d.modes;
  const int depth =
      std::max(1, static_cast<int>(std::llround(horizon / step)));
  std::normal_distribution<double> gauss;
  auto random_history = [&](double amplitude) {
    CircularHistory hist(dim, depth, step);
    Eigen::MatrixXd cols(dim, depth + 1);
    for (int c = 0; c <= depth; ++c)
      for (int i = 0; i < dim; ++i) cols(i, c) = amplitude * gauss(rng);
    hist.reset(cols);
    return hist;
  };

  LipschitzReport rep;
  bool ok = true;
  const double scales[] = {0.25, 0.5, 1.0};
  for (int p = 0; p < probes; ++p) {
    for (double scale : scales) {
      CircularHistory ha = random_history(scale);
      CircularHistory hb = random_history(scale);
      SegmentContext ca{&ha.at(0), &ha, 0.0}, cb{&hb.at(0), &hb, 0.0};
      const Eigen::MatrixXd sa = diffusion_bottom(d, ca);
      const Eigen::MatrixXd sb = diffusion_bottom(d, cb);
      if (!d.additive) {
        double bound = d.alpha1 * ca.current().squaredNorm();
        for (const auto& ka : d.kappa)
          bound += d.alpha2 * ka.weight * ca.at(ka.lag).squaredNorm();
        if (bound > 1e-300) {
          const double ratio = sa.squaredNorm() / bound;
          rep.max_growth_ratio = std::max(rep.max_growth_ratio, ratio);
          if (ratio > 1 + 1e-6) ok = false;
        }
      }
      if (d.lipschitz > 0) {
        const double dist = (ha.flatten() - hb.flatten()).norm();
        if (dist > 1e-12) {
          const double ratio = (sa - sb).norm() / (d.lipschitz * dist);
          rep.max_difference_ratio = std::max(rep.max_difference_ratio, ratio);
          if (ratio > 1 + 1e-6) ok = false;
        }
      }
    }
  }
  rep.declared_ok = ok;
  return rep;
}

StochasticVocReport stochastic_voc_check(
    const BlockOperator& op, const DelayKernel& kernel,
    const DiffusionSpec& diffusion, const NoiseSpec& noise,
    const std::function<Eigen::VectorXd(double)>& initial_history, double t_max,
    double step, double tolerance, std::mt19937_64& rng) {
  if (!diffusion.additive || noise.has_jumps())
    throw std::invalid_argument(
        "convolution comparison needs additive diffusion without jumps");

  std::mt19937_64 replay = rng;  // the path below re-reads the same stream
  const int steps =
      static_cast<int>(std::llround(std::ceil(t_max / step - 1e-9)));
  std::vector<Eigen::VectorXd> gaussians;
  gaussians.reserve(steps);
  for (int j = 0; j < steps; ++j)
    gaussians.push_back(
        sample_levy_increment(noise, diffusion.noise_dim, step, rng).gaussian);

  SdeOptions opt;
  opt.t_max = t_max;
  opt.step = step;
  const CircularHistory path = simulate_path(op, kernel, diffusion, noise,
                                             initial_history, opt, replay);
  const Eigen::VectorXd& final_state = path.at(0);

  const GreenOperator g = green_operator(op, kernel, t_max, step);
  const double t = steps * step;
  const int n = op.modes();

  Eigen::VectorXd voc = g.value(t) * initial_history(0.0);
  const double r = kernel.horizon;
  if (!kernel.empty() && r > 0) {
    const double lo = std::max(-r, -t);
    int m = 2 * std::max(1, static_cast<int>(std::ceil((0 - lo) / step / 2)));
    const double dth = (0 - lo) / m;
    Eigen::VectorXd nodes(m + 1);
    for (int i = 0; i <= m; ++i) nodes(i) = lo + i * dth;
    const Eigen::MatrixXd sphi =
        structure_operator_apply(kernel, op.s, initial_history, nodes);
    for (int i = 0; i <= m; ++i) {
      const double w = (i == 0 || i == m) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      voc += (w * dth / 3.0) * (g.value(t + nodes(i)) * sphi.col(i));
    }
  }
  for (int j = 0; j < steps; ++j) {
    const Eigen::VectorXd kick = diffusion.additive_bottom * gaussians[j];
    Eigen::VectorXd full = Eigen::VectorXd::Zero(2 * n);
    full.tail(n) = kick;
    voc += g.value(t - j * step) * full;
  }

  StochasticVocReport rep;
  rep.tolerance = tolerance;
  rep.rel_error = (final_state - voc).norm() / std::max(1.0, voc.norm());
  rep.pass = rep.rel_error <= tolerance;
  return rep;
}

}  // namespace sdwave
