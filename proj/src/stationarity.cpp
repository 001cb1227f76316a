#include "sdwave/stationarity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <stdexcept>

#include "sdwave/rng.hpp"

namespace sdwave {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_envelope(double m, double gamma) {
  if (!(m >= 1.0)) throw std::invalid_argument("envelope amplitude M must be >= 1");
  if (!(gamma > 0) || !std::isfinite(gamma))
    throw std::invalid_argument("decay exponent gamma must be positive");
}

void check_growth(double alpha1, double alpha2, double horizon,
                  double kappa_mass) {
  if (alpha1 < 0 || alpha2 < 0)
    throw std::invalid_argument("growth constants must be nonnegative");
  if (horizon < 0) throw std::invalid_argument("horizon must be nonnegative");
  if (kappa_mass < 0)
    throw std::invalid_argument("kappa mass must be nonnegative");
}

std::uint64_t block_master(std::uint64_t seed, std::uint64_t block) {
  return splitmix64(seed) + block * kGoldenGamma;
}

// Least-squares slope of log(values) against times over entries with
// t >= t_start and value > 0; returns 0 when underdetermined.
double log_linear_slope(const Eigen::VectorXd& times,
                        const Eigen::VectorXd& values, double t_start) {
  double st = 0, sy = 0, stt = 0, sty = 0;
  int n = 0;
  for (int i = 0; i < times.size(); ++i) {
    if (times(i) < t_start || !(values(i) > 0)) continue;
    const double y = std::log(values(i));
    st += times(i);
    sy += y;
    stt += times(i) * times(i);
    sty += times(i) * y;
    ++n;
  }
  if (n < 2) return 0;
  const double denom = n * stt - st * st;
  if (denom <= 0) return 0;
  return (n * sty - st * sy) / denom;
}

}  // namespace

StationarityVerdict sufficient_condition_wiener(double m, double gamma,
                                                double alpha1, double alpha2,
                                                double horizon,
                                                double kappa_mass,
                                                std::string envelope_source) {
  check_envelope(m, gamma);
  check_growth(alpha1, alpha2, horizon, kappa_mass);
  StationarityVerdict v;
  v.condition = "wiener";
  v.envelope_source = std::move(envelope_source);
  v.m = m;
  v.gamma = gamma;
  v.alpha1 = alpha1;
  v.alpha2 = alpha2;
  v.horizon = horizon;
  v.kappa_mass = kappa_mass;
  v.lhs = 2 * gamma;
  v.rhs = 3 * m * m *
          (alpha1 + alpha2 * std::exp(2 * gamma * horizon) * kappa_mass);
  v.holds = v.lhs > v.rhs;
  return v;
}

StationarityVerdict sufficient_condition_levy(double m, double gamma,
                                              double alpha1, double alpha2,
                                              double horizon, double kappa_mass,
                                              double trace_q,
                                              double second_moment_nu,
                                              std::string envelope_source) {
  check_envelope(m, gamma);
  check_growth(alpha1, alpha2, horizon, kappa_mass);
  if (trace_q < 0)
    throw std::invalid_argument("trace of Q must be nonnegative");
  if (!(second_moment_nu >= 0) || !std::isfinite(second_moment_nu))
    throw std::invalid_argument(
        "jump measure lacks a finite second moment; this condition does not "
        "apply - use the additive large-jump condition instead");
  StationarityVerdict v;
  v.condition = "levy_square";
  v.envelope_source = std::move(envelope_source);
  v.m = m;
  v.gamma = gamma;
  v.alpha1 = alpha1;
  v.alpha2 = alpha2;
  v.horizon = horizon;
  v.kappa_mass = kappa_mass;
  v.trace_q = trace_q;
  v.second_moment = second_moment_nu;
  v.lhs = 2 * gamma;
  v.rhs = 3 * m * m * (trace_q + second_moment_nu) *
          (alpha1 + alpha2 * std::exp(2 * gamma * horizon) * kappa_mass);
  v.holds = v.lhs > v.rhs;
  return v;
}

StationarityVerdict levy_additive_condition(const NoiseSpec& noise,
                                            int noise_dim, double m,
                                            double gamma,
                                            std::string envelope_source) {
  if (!(m >= 1.0)) throw std::invalid_argument("envelope amplitude M must be >= 1");
  if (noise.trace_q() > 0)
    throw std::invalid_argument(
        "noise has a Gaussian part; this condition covers the pure-jump "
        "triple only - use the square-integrable condition instead");
  StationarityVerdict v;
  v.condition = "levy_additive";
  v.envelope_source = std::move(envelope_source);
  v.m = m;
  v.gamma = gamma;
  v.tail_first_moment =
      noise.has_jumps() ? noise.jump_rate * noise.jump_tail_first_moment(noise_dim)
                        : 0.0;
  v.lhs = v.tail_first_moment;
  v.rhs = kInf;
  v.holds = std::isfinite(v.lhs) && gamma > 0;
  if (!std::isfinite(v.lhs))
    v.note = "large jumps lack a first moment";
  else if (!(gamma > 0))
    v.note = "Green operator not certified exponentially stable";
  return v;
}

double bl_metric_estimate(const EmpiricalMeasure& mu1,
                          const EmpiricalMeasure& mu2, int dictionary_size,
                          std::uint64_t seed) {
  const Eigen::MatrixXd& a = mu1.samples;
  const Eigen::MatrixXd& b = mu2.samples;
  if (a.cols() == 0 || b.cols() == 0)
    throw std::invalid_argument("empty sample set");
  if (a.rows() != b.rows())
    throw std::invalid_argument("sample dimension mismatch");
  if (dictionary_size < 1)
    throw std::invalid_argument("dictionary size must be positive");

  const int dim = static_cast<int>(a.rows());
  const Eigen::VectorXd mean1 = a.rowwise().mean();
  const Eigen::VectorXd mean2 = b.rowwise().mean();
  const Eigen::VectorXd mid = 0.5 * (mean1 + mean2);
  const double pooled_norm =
      0.5 * (a.colwise().norm().mean() + b.colwise().norm().mean());
  const double spread = 1.0 + pooled_norm;

  auto clipped_mean = [](const auto& values) {
    return values.cwiseMin(1.0).cwiseMax(-1.0).mean();
  };
  auto projection_gap = [&](const Eigen::VectorXd& v, double offset) {
    const double fa = clipped_mean((v.transpose() * a).array() + offset);
    const double fb = clipped_mean((v.transpose() * b).array() + offset);
    return std::abs(fa - fb);
  };
  auto norm_gap = [&](double offset) {
    const double fa = clipped_mean(a.colwise().norm().array() + offset);
    const double fb = clipped_mean(b.colwise().norm().array() + offset);
    return std::abs(fa - fb);
  };

  std::mt19937_64 rng(splitmix64(seed));
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  auto random_direction = [&] {
    Eigen::VectorXd v(dim);
    double norm = 0;
    do {
      for (int i = 0; i < dim; ++i) v(i) = gauss(rng);
      norm = v.norm();
    } while (norm < 1e-12);
    return (v / norm).eval();
  };

  // The first functional separates the empirical means; the rest sweep
  // random directions and radial offsets around symmetric statistics, so the
  // estimate is invariant under swapping the two measures.
  double best = 0;
  Eigen::VectorXd sep = mean1 - mean2;
  const Eigen::VectorXd v0 =
      sep.norm() > 1e-14 ? (sep / sep.norm()).eval() : random_direction();
  best = std::max(best, projection_gap(v0, -v0.dot(mid)));
  for (int k = 1; k < dictionary_size; ++k) {
    if (k % 4 == 3) {
      best = std::max(best, norm_gap(-pooled_norm + uni(rng) * spread));
    } else {
      const Eigen::VectorXd v = random_direction();
      best = std::max(best, projection_gap(v, -v.dot(mid) + uni(rng) * spread));
    }
  }
  return best;
}

EmpiricalMeasure empirical_law(
    const BlockOperator& op, const DelayKernel& kernel,
    const DiffusionSpec& diffusion, const NoiseSpec& noise,
    const std::function<Eigen::VectorXd(double)>& history, double step,
    double time, int paths, std::uint64_t seed, std::uint64_t block) {
  if (paths < 1) throw std::invalid_argument("need at least one path");
  SdeOptions opt;
  opt.t_max = time;
  opt.step = step;
  const std::uint64_t master = block_master(seed, block);

  EmpiricalMeasure out;
  out.time_label = time;
  for (int p = 0; p < paths; ++p) {
    std::mt19937_64 rng = path_rng(master, p);
    const CircularHistory hist =
        simulate_path(op, kernel, diffusion, noise, history, opt, rng);
    const Eigen::VectorXd flat = hist.flatten();
    if (out.samples.size() == 0) out.samples.resize(flat.size(), paths);
    out.samples.col(p) = flat;
  }
  return out;
}

ContractionReport paired_contraction(
    const BlockOperator& op, const DelayKernel& kernel,
    const DiffusionSpec& diffusion, const NoiseSpec& noise,
    const std::function<Eigen::VectorXd(double)>& history_a,
    const std::function<Eigen::VectorXd(double)>& history_b, double t_max,
    double step, int pairs, int stride, std::uint64_t seed) {
  if (pairs < 1) throw std::invalid_argument("need at least one pair");
  if (stride < 1) throw std::invalid_argument("stride must be positive");
  const int steps =
      static_cast<int>(std::llround(std::ceil(t_max / step - 1e-9)));
  std::vector<int> sampled;
  for (int j = 0; j <= steps; j += stride) sampled.push_back(j);
  if (sampled.back() != steps) sampled.push_back(steps);

  const int slots = static_cast<int>(sampled.size());
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(slots);
  SdeOptions opt;
  opt.t_max = t_max;
  opt.step = step;

  Eigen::VectorXd cur_a;
  int slot = 0;
  auto is_sampled = [&](int idx) {
    return slot < slots && sampled[slot] == idx;
  };
  for (int p = 0; p < pairs; ++p) {
    std::mt19937_64 rng = path_rng(seed, p);
    slot = 0;
    simulate_paired(
        op, kernel, diffusion, noise, history_a, history_b, opt, rng,
        [&](int idx, double, const SegmentContext& ctx) {
          if (is_sampled(idx)) cur_a = ctx.current();
        },
        [&](int idx, double, const SegmentContext& ctx) {
          if (is_sampled(idx)) {
            acc(slot) += (cur_a - ctx.current()).squaredNorm();
            ++slot;
          }
        });
  }

  ContractionReport rep;
  rep.times.resize(slots);
  for (int i = 0; i < slots; ++i) rep.times(i) = sampled[i] * step;
  rep.mean_sq = acc / pairs;
  rep.rate = -log_linear_slope(rep.times, rep.mean_sq, t_max / 4);
  return rep;
}

MomentProxy moment_proxy(const BlockOperator& op, const DelayKernel& kernel,
                         const DiffusionSpec& diffusion,
                         const NoiseSpec& noise,
                         const std::function<Eigen::VectorXd(double)>& history,
                         double t_max, double step, int paths, int stride,
                         std::uint64_t seed, MomentNorm norm) {
  if (paths < 1) throw std::invalid_argument("need at least one path");
  if (stride < 1) throw std::invalid_argument("stride must be positive");
  const int steps =
      static_cast<int>(std::llround(std::ceil(t_max / step - 1e-9)));
  std::vector<int> sampled;
  for (int j = 0; j <= steps; j += stride) sampled.push_back(j);
  if (sampled.back() != steps) sampled.push_back(steps);

  const int slots = static_cast<int>(sampled.size());
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(slots);
  SdeOptions opt;
  opt.t_max = t_max;
  opt.step = step;

  auto segment_value = [&](const SegmentContext& ctx) {
    const CircularHistory& h = *ctx.hist;
    if (norm == MomentNorm::SquaredSegment) {
      double v = ctx.current().squaredNorm();
      for (int j = 1; j <= h.depth(); ++j)
        v += h.step() * h.at(j).squaredNorm();
      return v;
    }
    double v = ctx.current().norm();
    for (int j = 1; j <= h.depth(); ++j) v += h.step() * h.at(j).norm();
    return v;
  };

  int slot = 0;
  for (int p = 0; p < paths; ++p) {
    std::mt19937_64 rng = path_rng(seed, p);
    slot = 0;
    simulate_path(op, kernel, diffusion, noise, history, opt, rng,
                  [&](int idx, double, const SegmentContext& ctx) {
                    if (slot < slots && sampled[slot] == idx) {
                      acc(slot) += segment_value(ctx);
                      ++slot;
                    }
                  });
  }

  MomentProxy rep;
  rep.times.resize(slots);
  for (int i = 0; i < slots; ++i) rep.times(i) = sampled[i] * step;
  rep.mean_value = acc / paths;
  rep.running_sup.resize(slots);
  double sup = 0;
  for (int i = 0; i < slots; ++i) {
    sup = std::max(sup, rep.mean_value(i));
    rep.running_sup(i) = sup;
  }
  rep.sup = sup;
  const int half = std::max(1, slots / 2);
  const int quarter = std::max(1, slots / 4);
  rep.last_half_mean = rep.running_sup.tail(half).mean();
  rep.last_quarter_mean = rep.running_sup.tail(quarter).mean();
  return rep;
}

CauchyDiagnostic cauchy_diagnostic(
    const BlockOperator& op, const DelayKernel& kernel,
    const DiffusionSpec& diffusion, const NoiseSpec& noise,
    const std::function<Eigen::VectorXd(double)>& history_a,
    const std::function<Eigen::VectorXd(double)>& history_b, double step,
    const std::vector<double>& checkpoints, double offset, int paths_per_block,
    int dictionary_size, std::uint64_t seed, bool condition_holds) {
  if (checkpoints.empty()) throw std::invalid_argument("no checkpoints");
  if (!(offset > 0)) throw std::invalid_argument("offset must be positive");

  std::set<double> label_set;
  for (double t : checkpoints) {
    if (!(t > 0)) throw std::invalid_argument("checkpoints must be positive");
    label_set.insert(t);
    label_set.insert(t + offset);
  }
  CauchyDiagnostic diag;
  diag.condition_warned = !condition_holds;
  diag.labels.assign(label_set.begin(), label_set.end());

  std::vector<EmpiricalMeasure> laws;
  laws.reserve(diag.labels.size());
  for (std::size_t i = 0; i < diag.labels.size(); ++i) {
    laws.push_back(empirical_law(op, kernel, diffusion, noise, history_a, step,
                                 diag.labels[i], paths_per_block, seed,
                                 static_cast<std::uint64_t>(i)));
    diag.label_moment.push_back(
        laws.back().samples.colwise().squaredNorm().mean());
    diag.moment_sup = std::max(diag.moment_sup, diag.label_moment.back());
  }

  auto law_at = [&](double t) -> const EmpiricalMeasure& {
    const auto it =
        std::lower_bound(diag.labels.begin(), diag.labels.end(), t);
    return laws[static_cast<std::size_t>(it - diag.labels.begin())];
  };
  std::size_t pair_index = 0;
  for (double t : checkpoints) {
    const double dhat =
        bl_metric_estimate(law_at(t), law_at(t + offset), dictionary_size,
                           splitmix64(seed ^ (0xA24BAED4963EE407ull + pair_index)));
    diag.pairs.push_back({t, offset, dhat});
    ++pair_index;
  }

  const double t_end = diag.labels.back();
  const int steps =
      static_cast<int>(std::llround(std::ceil(t_end / step - 1e-9)));
  const int stride = std::max(1, steps / 128);
  const ContractionReport contraction = paired_contraction(
      op, kernel, diffusion, noise, history_a, history_b, t_end, step,
      paths_per_block, stride, splitmix64(seed ^ 0x94D049BB133111EBull));
  diag.contraction_rate = contraction.rate;
  return diag;
}

ScenarioThresholds scenario_thresholds(double alpha, double c1, double c2) {
  if (!(alpha > 0)) throw std::invalid_argument("alpha must be positive");
  constexpr double pi = std::numbers::pi;
  ScenarioThresholds t;
  t.alpha = alpha;
  t.c1 = c1;
  t.c2 = c2;
  t.delay_bound = alpha * pi / (36 * alpha + pi);
  t.kappa_nominal = pi / (4 * alpha + 2);
  t.kappa_direct = pi * pi / (2 * alpha + 2 * pi);
  const double mass = std::abs(c1) + std::abs(c2);
  if (mass == 0) {
    t.note = "no delay feedback (c1 = c2 = 0): decay exponent undefined";
  } else if (mass >= t.delay_bound) {
    t.note = "feedback mass reaches the decay threshold: no exponent available";
  } else {
    t.gamma = std::log(alpha * pi / (mass * (36 * alpha + pi)));
    t.beta_max = (2.0 / 3.0) * *t.gamma * std::exp(-2.0 * *t.gamma);
  }
  return t;
}

}  // namespace sdwave
