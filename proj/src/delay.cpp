#include "sdwave/delay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "sdwave/spectral.hpp"

namespace sdwave {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double spectral_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0;
  return m.jacobiSvd().singularValues()(0);
}

// integral of e^{a theta} over [lo, hi]
double exp_weight(double a, double lo, double hi) {
  if (a == 0) return hi - lo;
  return (std::exp(a * hi) - std::exp(a * lo)) / a;
}

// Flattened density piece with the position scaling folded in.
struct DensityPiece {
  double lo = 0, hi = 0;
  Eigen::MatrixXd w;  // acts on the selected half of the state
  bool position = false;
};

std::vector<DensityPiece> density_pieces(const DelayKernel& k,
                                         const Eigen::VectorXd& s) {
  std::vector<DensityPiece> out;
  const Eigen::VectorXd sinv = s.cwiseInverse();
  auto add = [&](const std::vector<KernelDensity>& ds, bool position) {
    for (const auto& d : ds) {
      const int m = static_cast<int>(d.values.size());
      for (int i = 0; i < m; ++i) {
        DensityPiece p;
        p.lo = d.breaks(i);
        p.hi = d.breaks(i + 1);
        p.position = position;
        p.w = position ? Eigen::MatrixXd(d.values[i] * sinv.asDiagonal())
                       : d.values[i];
        if (p.hi > p.lo && p.w.squaredNorm() > 0) out.push_back(std::move(p));
      }
    }
  };
  add(k.position_densities, true);
  add(k.velocity_densities, false);
  return out;
}

// Samples on a uniform grid starting at 0 plus a history rule for negative
// arguments. Arguments within a sliver below zero snap to the first sample so
// lag arithmetic landing on the jump reads the intended value. Interior
// lookups use cubic Hermite interpolation from the stored derivative samples,
// which keeps the Runge-Kutta order through the delayed terms; intervals
// whose right derivative is not yet available fall back to linear.
template <class State>
struct HistoryTable {
  double h = 0;
  const std::vector<State>* samples = nullptr;
  const std::vector<State>* derivs = nullptr;
  const std::function<State(double)>* history = nullptr;  // null: zero
  State zero;

  // left_limit resolves arguments landing exactly on the jump at zero to the
  // pre-jump side; stage values at the end of a step must be one-sided with
  // respect to the interval being integrated.
  State at(double t, bool left_limit = false) const {
    if (t < -1e-9 * h || (left_limit && t <= 1e-9 * h))
      return history ? (*history)(std::min(t, 0.0)) : zero;
    const double pos = std::max(t, 0.0) / h;
    const int last = static_cast<int>(samples->size()) - 1;
    int j = static_cast<int>(std::floor(pos));
    if (j >= last) return (*samples)[last];  // right-edge clamp
    const double u = pos - j;
    if (u <= 1e-12) return (*samples)[j];
    if (derivs && derivs->size() > static_cast<size_t>(j + 1)) {
      const double u2 = u * u, u3 = u2 * u;
      return (2 * u3 - 3 * u2 + 1) * (*samples)[j] +
             (h * (u3 - 2 * u2 + u)) * (*derivs)[j] +
             (-2 * u3 + 3 * u2) * (*samples)[j + 1] +
             (h * (u3 - u2)) * (*derivs)[j + 1];
    }
    return (1 - u) * (*samples)[j] + u * (*samples)[j + 1];
  }
};

struct AtomTerm {
  double lag = 0;
  Eigen::MatrixXd p, v;
  bool has_p = false, has_v = false;
};

std::vector<AtomTerm> atom_terms(const DelayKernel& k,
                                 const Eigen::VectorXd& s) {
  std::map<double, AtomTerm> merged;
  const Eigen::VectorXd sinv = s.cwiseInverse();
  for (const auto& a : k.position_atoms) {
    AtomTerm& t = merged[a.lag];
    t.lag = a.lag;
    if (t.has_p)
      t.p += a.weight * sinv.asDiagonal();
    else
      t.p = a.weight * sinv.asDiagonal();
    t.has_p = true;
  }
  for (const auto& a : k.velocity_atoms) {
    AtomTerm& t = merged[a.lag];
    t.lag = a.lag;
    if (t.has_v)
      t.v += a.weight;
    else
      t.v = a.weight;
    t.has_v = true;
  }
  std::vector<AtomTerm> out;
  out.reserve(merged.size());
  for (auto& [lag, t] : merged) out.push_back(std::move(t));
  return out;
}

// Convolution of the kernel with the tabulated trajectory at time tau; only
// the bottom block row is populated.
template <class State>
void delay_term(const std::vector<AtomTerm>& atoms,
                const std::vector<DensityPiece>& pieces, double grid_h, int n,
                const HistoryTable<State>& tab, double tau, State& out,
                bool left_limit = false) {
  out.setZero();
  auto bottom = out.bottomRows(n);
  for (const auto& a : atoms) {
    const State g = tab.at(tau + a.lag, left_limit);
    if (a.has_p) bottom.noalias() += a.p * g.topRows(n);
    if (a.has_v) bottom.noalias() += a.v * g.bottomRows(n);
  }
  for (const auto& p : pieces) {
    const int m = std::max(1, static_cast<int>(std::ceil((p.hi - p.lo) / grid_h)));
    const double dx = (p.hi - p.lo) / m;
    State acc = tab.zero;
    auto half = [&](const State& g) {
      return p.position ? g.topRows(n).eval() : g.bottomRows(n).eval();
    };
    acc.topRows(n) = 0.5 * (half(tab.at(tau + p.lo)) + half(tab.at(tau + p.hi)));
    for (int i = 1; i < m; ++i)
      acc.topRows(n) += half(tab.at(tau + p.lo + i * dx));
    bottom.noalias() += dx * (p.w * acc.topRows(n));
  }
}

void apply_generator(const BlockOperator& op, const Eigen::MatrixXd& y,
                     Eigen::MatrixXd& out) {
  op.apply_real_into(y, out);
}
void apply_generator(const BlockOperator& op, const Eigen::VectorXd& y,
                     Eigen::VectorXd& out) {
  out = op.apply_real(y);
}

template <class State>
std::vector<State> run_delay_scheme(const BlockOperator& op,
                                    const DelayKernel& k, State y0,
                                    const std::function<State(double)>* history,
                                    double t_max, double h) {
  if (!op.is_real())
    throw std::invalid_argument("delay integration requires a real operator");
  if (!(h > 0) || !(t_max >= h))
    throw std::invalid_argument("need 0 < step <= t_max");
  validate_kernel(k, op.modes());
  for (const auto& a : k.position_atoms)
    if (-a.lag < h * (1 - 1e-12))
      throw std::invalid_argument("step exceeds an atom lag");
  for (const auto& a : k.velocity_atoms)
    if (-a.lag < h * (1 - 1e-12))
      throw std::invalid_argument("step exceeds an atom lag");

  const int n = op.modes();
  const auto atoms = atom_terms(k, op.s);
  const auto pieces = density_pieces(k, op.s);
  const int steps = static_cast<int>(std::llround(std::ceil(t_max / h - 1e-9)));

  std::vector<State> samples, derivs;
  samples.reserve(steps + 1);
  derivs.reserve(steps + 1);
  samples.push_back(y0);
  State zero = y0;
  zero.setZero();
  HistoryTable<State> tab{h, &samples, &derivs, history, zero};

  State d1 = zero, d2 = zero, d3 = zero;
  State k1 = zero, k2 = zero, k3 = zero, k4 = zero, tmp = zero;
  for (int j = 0; j < steps; ++j) {
    const double t = j * h;
    delay_term(atoms, pieces, h, n, tab, t, d1);
    delay_term(atoms, pieces, h, n, tab, t + h / 2, d2);
    delay_term(atoms, pieces, h, n, tab, t + h, d3, /*left_limit=*/true);
    apply_generator(op, samples[j], k1);
    k1 += d1;
    derivs.push_back(k1);
    tmp = samples[j] + (h / 2) * k1;
    apply_generator(op, tmp, k2);
    k2 += d2;
    tmp = samples[j] + (h / 2) * k2;
    apply_generator(op, tmp, k3);
    k3 += d2;
    tmp = samples[j] + h * k3;
    apply_generator(op, tmp, k4);
    k4 += d3;
    samples.push_back(samples[j] + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4));
  }
  return samples;
}

}  // namespace

Eigen::MatrixXd KernelDensity::value(double theta) const {
  const int m = static_cast<int>(values.size());
  for (int i = 0; i < m; ++i)
    if (theta >= breaks(i) && theta < breaks(i + 1)) return values[i];
  if (m > 0) return Eigen::MatrixXd::Zero(values[0].rows(), values[0].cols());
  return {};
}

bool DelayKernel::empty() const {
  return position_atoms.empty() && velocity_atoms.empty() &&
         position_densities.empty() && velocity_densities.empty();
}

void validate_kernel(const DelayKernel& k, int modes) {
  if (!(k.horizon > 0) && !k.empty())
    throw std::invalid_argument("kernel horizon must be positive");
  auto check_atoms = [&](const std::vector<KernelAtom>& atoms) {
    for (const auto& a : atoms) {
      if (!(a.lag < 0) || a.lag < -k.horizon - 1e-12)
        throw std::invalid_argument("atom lag must lie in [-horizon, 0)");
      if (a.weight.rows() != modes || a.weight.cols() != modes)
        throw std::invalid_argument("atom weight must be modes x modes");
    }
  };
  auto check_densities = [&](const std::vector<KernelDensity>& ds) {
    for (const auto& d : ds) {
      if (d.breaks.size() != static_cast<Eigen::Index>(d.values.size()) + 1)
        throw std::invalid_argument("density needs one more break than value");
      for (int i = 0; i + 1 < d.breaks.size(); ++i)
        if (!(d.breaks(i) < d.breaks(i + 1)))
          throw std::invalid_argument("density breaks must ascend");
      if (d.breaks(0) < -k.horizon - 1e-12 ||
          d.breaks(d.breaks.size() - 1) > 1e-12)
        throw std::invalid_argument("density support must lie in [-horizon, 0]");
      for (const auto& v : d.values)
        if (v.rows() != modes || v.cols() != modes)
          throw std::invalid_argument("density value must be modes x modes");
    }
  };
  check_atoms(k.position_atoms);
  check_atoms(k.velocity_atoms);
  check_densities(k.position_densities);
  check_densities(k.velocity_densities);
}

DelayKernel scale_kernel(const DelayKernel& k, double factor) {
  DelayKernel out = k;
  for (auto& a : out.position_atoms) a.weight *= factor;
  for (auto& a : out.velocity_atoms) a.weight *= factor;
  for (auto& d : out.position_densities)
    for (auto& v : d.values) v *= factor;
  for (auto& d : out.velocity_densities)
    for (auto& v : d.values) v *= factor;
  return out;
}

std::vector<ReducedAtom> reduced_atoms(const DelayKernel& k,
                                       const Eigen::VectorXd& s) {
  const int n = static_cast<int>(s.size());
  std::vector<ReducedAtom> out;
  for (const auto& t : atom_terms(k, s)) {
    ReducedAtom r;
    r.lag = t.lag;
    r.p = t.has_p ? t.p : Eigen::MatrixXd::Zero(n, n).eval();
    r.v = t.has_v ? t.v : Eigen::MatrixXd::Zero(n, n).eval();
    out.push_back(std::move(r));
  }
  return out;
}

double total_variation(const DelayKernel& k, const Eigen::VectorXd& s) {
  return transfer_cap(k, s, 0.0);
}

TransferMatrix delay_transfer(const DelayKernel& k, const Eigen::VectorXd& s,
                              Cx lambda) {
  const int n = static_cast<int>(s.size());
  validate_kernel(k, n);
  TransferMatrix t;
  t.x = Eigen::MatrixXcd::Zero(n, n);
  t.y = Eigen::MatrixXcd::Zero(n, n);
  const Eigen::VectorXd sinv = s.cwiseInverse();
  for (const auto& a : k.position_atoms)
    t.x += std::exp(lambda * a.lag) *
           (a.weight * sinv.asDiagonal()).cast<Cx>();
  for (const auto& a : k.velocity_atoms)
    t.y += std::exp(lambda * a.lag) * a.weight.cast<Cx>();
  auto piece_factor = [&](double lo, double hi) -> Cx {
    if (std::abs(lambda) < 1e-300) return Cx(hi - lo, 0);
    return (std::exp(lambda * hi) - std::exp(lambda * lo)) / lambda;
  };
  for (const auto& d : k.position_densities)
    for (size_t i = 0; i < d.values.size(); ++i)
      t.x += piece_factor(d.breaks(i), d.breaks(i + 1)) *
             (d.values[i] * sinv.asDiagonal()).cast<Cx>();
  for (const auto& d : k.velocity_densities)
    for (size_t i = 0; i < d.values.size(); ++i)
      t.y += piece_factor(d.breaks(i), d.breaks(i + 1)) * d.values[i].cast<Cx>();
  Eigen::MatrixXcd row(n, 2 * n);
  row << t.x, t.y;
  t.norm = row.jacobiSvd().singularValues()(0);
  return t;
}

double transfer_cap(const DelayKernel& k, const Eigen::VectorXd& s, double a) {
  validate_kernel(k, static_cast<int>(s.size()));
  double cap = 0;
  const int n = static_cast<int>(s.size());
  for (const auto& t : atom_terms(k, s)) {
    Eigen::MatrixXd row = Eigen::MatrixXd::Zero(n, 2 * n);
    if (t.has_p) row.leftCols(n) = t.p;
    if (t.has_v) row.rightCols(n) = t.v;
    cap += std::exp(a * t.lag) * spectral_norm(row);
  }
  for (const auto& p : density_pieces(k, s))
    cap += exp_weight(a, p.lo, p.hi) * spectral_norm(p.w);
  return cap;
}

LineResolventCap resolvent_line_cap(const BlockOperator& op, double a,
                                    int grid_points) {
  const double alpha = op.b.alpha_strict();
  if (!(alpha > 0))
    throw std::invalid_argument("line cap needs strictly dissipative damping");
  if (a > 0 || a <= -alpha)
    throw std::invalid_argument("line must satisfy -alpha < a <= 0");
  const double gamma = op.b.gamma_sector();
  if (!std::isfinite(gamma))
    throw std::invalid_argument("line cap needs sectorial damping");

  LineResolventCap out;
  out.a = a;
  out.delta = 0.5 * (alpha + a);
  out.b_star = lemma_b_cutoff(alpha, gamma, out.delta, a);

  const double lo = op.is_real() ? 0.0 : -out.b_star;
  const double hi = out.b_star;
  int pts = std::max(grid_points, 16);
  out.segment_cap = kInf;
  for (int attempt = 0; attempt < 6; ++attempt) {
    const double h = (hi - lo) / (pts - 1);
    double cap = 0, raw = 0;
    bool certified = true;
    for (int i = 0; i < pts; ++i) {
      double norm;
      try {
        norm = resolvent_norm(op, Cx(a, lo + i * h));
      } catch (const std::domain_error&) {
        certified = false;
        break;
      }
      raw = std::max(raw, norm);
      const double margin = 1 - 0.5 * h * norm;
      if (margin < 0.75) {
        certified = false;
        break;
      }
      cap = std::max(cap, norm / margin);
    }
    if (certified) {
      out.segment_cap = cap;
      out.grid_max = raw;
      break;
    }
    pts *= 4;
  }
  out.cap = std::max(out.segment_cap, 1.0 / out.delta);
  return out;
}

StabilityVerdict stability_criterion(const BlockOperator& op,
                                     const DelayKernel& k, double a,
                                     int grid_points) {
  validate_kernel(k, op.modes());
  StabilityVerdict v;
  v.a = a;
  LineResolventCap rc = resolvent_line_cap(op, a, grid_points);
  v.resolvent_bound = rc.cap;
  v.resolvent_grid_max = rc.grid_max;
  v.transfer_bound = transfer_cap(k, op.s, a);
  const int probes = std::max(2, std::min(grid_points, 128));
  for (int i = 0; i < probes; ++i) {
    const double b = -rc.b_star + 2 * rc.b_star * i / (probes - 1);
    v.transfer_grid_max =
        std::max(v.transfer_grid_max, delay_transfer(k, op.s, Cx(a, b)).norm);
  }
  v.product = v.transfer_bound * v.resolvent_bound;
  v.certified = std::isfinite(v.product) && v.product < 1;
  return v;
}

SeriesVerdict series_criterion(const BlockOperator& op, const DelayKernel& k,
                               double a, int terms, int grid_points) {
  validate_kernel(k, op.modes());
  SeriesVerdict v;
  v.a = a;
  LineResolventCap rc = resolvent_line_cap(op, a, grid_points);
  v.q = std::exp(std::abs(a) * k.horizon) * total_variation(k, op.s) * rc.cap;
  v.certified = std::isfinite(v.q) && v.q < 1;
  double sum = 0, pow = 1;
  for (int m = 0; m <= terms; ++m) {
    sum += pow;
    pow *= v.q;
    v.partial_sums.push_back(sum);
  }
  v.limit = v.certified ? 1.0 / (1.0 - v.q) : kInf;
  return v;
}

GreenOperator::GreenOperator(double step, std::vector<Eigen::MatrixXd> samples)
    : step_(step), samples_(std::move(samples)) {
  if (!(step_ > 0) || samples_.size() < 2)
    throw std::invalid_argument("green operator needs step > 0 and samples");
}

Eigen::MatrixXd GreenOperator::value(double t) const {
  const int dim = static_cast<int>(samples_[0].rows());
  if (t < -1e-9 * step_) return Eigen::MatrixXd::Zero(dim, dim);
  const double pos = std::max(t, 0.0) / step_;
  const int last = count() - 1;
  int j = static_cast<int>(std::floor(pos));
  if (j >= last) return samples_[last];
  const double w = pos - j;
  return (1 - w) * samples_[j] + w * samples_[j + 1];
}

GreenOperator green_operator(const BlockOperator& op, const DelayKernel& k,
                             double t_max, double step) {
  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(op.dim(), op.dim());
  auto samples =
      run_delay_scheme<Eigen::MatrixXd>(op, k, eye, nullptr, t_max, step);
  return GreenOperator(step, std::move(samples));
}

std::vector<Eigen::VectorXd> integrate_delayed(
    const BlockOperator& op, const DelayKernel& k, const Eigen::VectorXd& value,
    const std::function<Eigen::VectorXd(double)>& history, double t_max,
    double step) {
  if (value.size() != op.dim())
    throw std::invalid_argument("state dimension mismatch");
  return run_delay_scheme<Eigen::VectorXd>(op, k, value, &history, t_max, step);
}

DecayFit delay_semigroup_decay(const GreenOperator& g) {
  const int m = g.count();
  std::vector<double> norms(m);
  for (int j = 0; j < m; ++j) norms[j] = spectral_norm(g.sample(j));

  DecayFit fit;
  // least squares on log norms over the tail half
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (int j = m / 2; j < m; ++j) {
    if (norms[j] < 1e-300) continue;
    const double t = j * g.step(), y = std::log(norms[j]);
    sx += t;
    sy += y;
    sxx += t * t;
    sxy += t * y;
    ++cnt;
  }
  if (cnt >= 2 && sxx * cnt - sx * sx > 0) {
    const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    fit.rate = -slope;
  }
  fit.decaying = fit.rate > 0;
  fit.amplitude = 1;
  for (int j = 0; j < m; ++j)
    fit.amplitude =
        std::max(fit.amplitude, norms[j] * std::exp(fit.rate * j * g.step()));
  return fit;
}

Eigen::MatrixXd structure_operator_apply(
    const DelayKernel& k, const Eigen::VectorXd& s,
    const std::function<Eigen::VectorXd(double)>& phi,
    const Eigen::VectorXd& theta_grid, int quad_points) {
  const int n = static_cast<int>(s.size());
  validate_kernel(k, n);
  const auto atoms = atom_terms(k, s);
  const auto pieces = density_pieces(k, s);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2 * n, theta_grid.size());
  for (int j = 0; j < theta_grid.size(); ++j) {
    const double theta = theta_grid(j);
    auto bottom = out.col(j).tail(n);
    for (const auto& a : atoms) {
      if (a.lag > theta + 1e-12) continue;
      const Eigen::VectorXd ph =
          phi(std::min(0.0, std::max(a.lag - theta, -k.horizon)));
      if (a.has_p) bottom.noalias() += a.p * ph.head(n);
      if (a.has_v) bottom.noalias() += a.v * ph.tail(n);
    }
    for (const auto& p : pieces) {
      const double lo = std::max(p.lo, -k.horizon);
      const double hi = std::min(p.hi, theta);
      if (hi <= lo) continue;
      const int m = std::max(
          2, static_cast<int>(std::ceil((hi - lo) / k.horizon * quad_points)));
      const double dx = (hi - lo) / m;
      auto half = [&](double sigma) {
        const Eigen::VectorXd ph = phi(sigma - theta);
        return p.position ? ph.head(n).eval() : ph.tail(n).eval();
      };
      Eigen::VectorXd acc = 0.5 * (half(lo) + half(hi));
      for (int i = 1; i < m; ++i) acc += half(lo + i * dx);
      bottom.noalias() += dx * (p.w * acc);
    }
  }
  return out;
}

VocReport variation_of_constants_check(
    const BlockOperator& op, const DelayKernel& k, const Eigen::VectorXd& value,
    const std::function<Eigen::VectorXd(double)>& history, double t_max,
    double step, double tolerance) {
  const auto direct = integrate_delayed(op, k, value, history, t_max, step);
  const GreenOperator g = green_operator(op, k, t_max, step);
  const double r = k.horizon;

  VocReport rep;
  rep.tolerance = tolerance;
  const int count = static_cast<int>(direct.size()) - 1;
  for (int probe = 1; probe <= 8; ++probe) {
    const int idx = probe * count / 8;
    if (idx < 1) continue;
    const double t = idx * step;
    // quadrature window [max(-r, -t), 0]; G vanishes left of it
    const double lo = std::max(-r, -t);
    int m = 2 * std::max(1, static_cast<int>(std::ceil((0 - lo) / step / 2)));
    const double dth = (0 - lo) / m;
    Eigen::VectorXd nodes(m + 1);
    for (int i = 0; i <= m; ++i) nodes(i) = lo + i * dth;
    const Eigen::MatrixXd sphi =
        structure_operator_apply(k, op.s, history, nodes);
    Eigen::VectorXd voc = g.value(t) * value;
    for (int i = 0; i <= m; ++i) {
      const double w = (i == 0 || i == m) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      voc += (w * dth / 3.0) * (g.value(t + nodes(i)) * sphi.col(i));
    }
    const double scale = std::max(1.0, direct[idx].norm());
    rep.max_rel_error =
        std::max(rep.max_rel_error, (direct[idx] - voc).norm() / scale);
  }
  rep.pass = rep.max_rel_error <= tolerance;
  return rep;
}

}  // namespace sdwave
