#include "sdwave/operators.hpp"

#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace sdwave {

SpectralOperator dirichlet_laplacian_1d(int n_modes) {
  if (n_modes < 1) throw std::invalid_argument("dirichlet_laplacian_1d: need n >= 1");
  Eigen::VectorXd l(n_modes);
  for (int k = 0; k < n_modes; ++k) {
    const double kpi = (k + 1) * EIGEN_PI;
    l(k) = kpi * kpi;
  }
  SpectralOperator op;
  op.eigenvalues = std::move(l);
  op.basis = "dirichlet_sine_1d";
  return op;
}

SpectralOperator explicit_spectrum(Eigen::VectorXd lambdas) {
  if (lambdas.size() == 0) throw std::invalid_argument("explicit_spectrum: empty");
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas(i) > 0))
      throw std::invalid_argument("explicit_spectrum: eigenvalues must be > 0");
    if (i > 0 && lambdas(i) < lambdas(i - 1))
      throw std::invalid_argument("explicit_spectrum: eigenvalues must ascend");
  }
  SpectralOperator op;
  op.eigenvalues = std::move(lambdas);
  return op;
}

int DampingSpec::size() const {
  switch (kind) {
    case DampingKind::Scalar: return -1;
    case DampingKind::Diagonal: return static_cast<int>(diagonal.size());
    case DampingKind::Dense: return static_cast<int>(dense.rows());
  }
  return -1;
}

bool DampingSpec::is_real() const {
  switch (kind) {
    case DampingKind::Scalar: return beta.imag() == 0;
    case DampingKind::Diagonal: return diagonal.imag().isZero(0);
    case DampingKind::Dense: return dense.imag().isZero(0);
  }
  return false;
}

namespace {

// Eigenvalues of the Hermitian part (B + B^H)/2.
Eigen::VectorXd hermitian_part_eigs(const Eigen::MatrixXcd& m) {
  Eigen::MatrixXcd h = (m + m.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  return es.eigenvalues();
}

}  // namespace

bool DampingSpec::dissipative() const {
  switch (kind) {
    case DampingKind::Scalar: return beta.real() <= 0;
    case DampingKind::Diagonal: return (diagonal.real().array() <= 0).all();
    case DampingKind::Dense: return hermitian_part_eigs(dense).maxCoeff() <= 0;
  }
  return false;
}

double DampingSpec::alpha_strict() const {
  switch (kind) {
    case DampingKind::Scalar: return std::max(0.0, -beta.real() / 2.0);
    case DampingKind::Diagonal:
      return std::max(0.0, -diagonal.real().maxCoeff() / 2.0);
    case DampingKind::Dense:
      return std::max(0.0, -hermitian_part_eigs(dense).maxCoeff() / 2.0);
  }
  return 0;
}

double DampingSpec::gamma_sector() const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  auto ratio = [](double im, double re) {
    if (im == 0) return 0.0;
    if (re >= 0) return std::numeric_limits<double>::infinity();
    return std::abs(im) / (-re);
  };
  switch (kind) {
    case DampingKind::Scalar:
      return ratio(beta.imag(), beta.real());
    case DampingKind::Diagonal: {
      double g = 0;
      for (Eigen::Index i = 0; i < diagonal.size(); ++i)
        g = std::max(g, ratio(diagonal(i).imag(), diagonal(i).real()));
      return g;
    }
    case DampingKind::Dense: {
      Eigen::MatrixXcd re = (dense + dense.adjoint()) / 2.0;
      Eigen::MatrixXcd im = (dense - dense.adjoint()) / Cx(0, 2);
      if (im.isZero(0)) return 0.0;
      // Smallest g with g * v^H(-Re)v >= |v^H Im v|: the extreme generalized
      // eigenvalue of (Im, -Re); needs -Re positive definite.
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> chk(-re);
      if (chk.eigenvalues().minCoeff() <= 0) return inf;
      Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXcd> ges(im, -re);
      return ges.eigenvalues().cwiseAbs().maxCoeff();
    }
  }
  return inf;
}

Cx DampingSpec::entry(int k) const {
  switch (kind) {
    case DampingKind::Scalar: return beta;
    case DampingKind::Diagonal: return diagonal(k);
    case DampingKind::Dense:
      throw std::logic_error("DampingSpec::entry: dense damping has no mode entry");
  }
  return {};
}

DampingSpec scalar_damping(Cx beta) {
  DampingSpec d;
  d.kind = DampingKind::Scalar;
  d.beta = beta;
  return d;
}

DampingSpec diagonal_damping(Eigen::VectorXcd v) {
  DampingSpec d;
  d.kind = DampingKind::Diagonal;
  d.diagonal = std::move(v);
  return d;
}

DampingSpec dense_damping(Eigen::MatrixXcd m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("dense_damping: square matrix required");
  DampingSpec d;
  d.kind = DampingKind::Dense;
  d.dense = std::move(m);
  return d;
}

Eigen::Matrix2cd BlockOperator::mode_block(int k) const {
  Eigen::Matrix2cd m;
  m << Cx(0), Cx(s(k)), Cx(-s(k)), b.entry(k);
  return m;
}

Eigen::Matrix2d BlockOperator::mode_block_real(int k) const {
  Eigen::Matrix2d m;
  m << 0, s(k), -s(k), b.entry(k).real();
  return m;
}

Eigen::MatrixXcd BlockOperator::dense_matrix() const {
  const int n = modes();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  for (int k = 0; k < n; ++k) {
    m(k, n + k) = s(k);
    m(n + k, k) = -s(k);
  }
  if (b.kind == DampingKind::Dense) {
    m.bottomRightCorner(n, n) = b.dense;
  } else {
    for (int k = 0; k < n; ++k) m(n + k, n + k) = b.entry(k);
  }
  return m;
}

Eigen::MatrixXd BlockOperator::dense_matrix_real() const {
  if (!is_real())
    throw std::logic_error("dense_matrix_real: damping has imaginary part");
  return dense_matrix().real();
}

Eigen::VectorXcd BlockOperator::apply(const Eigen::VectorXcd& y) const {
  const int n = modes();
  if (y.size() != 2 * n) throw std::invalid_argument("apply: state size mismatch");
  Eigen::VectorXcd out(2 * n);
  out.head(n) = s.cast<Cx>().cwiseProduct(y.tail(n));
  if (b.kind == DampingKind::Dense)
    out.tail(n) = b.dense * y.tail(n);
  else if (b.kind == DampingKind::Diagonal)
    out.tail(n) = b.diagonal.cwiseProduct(y.tail(n));
  else
    out.tail(n) = b.beta * y.tail(n);
  out.tail(n) -= s.cast<Cx>().cwiseProduct(y.head(n));
  return out;
}

Eigen::VectorXd BlockOperator::apply_real(const Eigen::VectorXd& y) const {
  const int n = modes();
  Eigen::VectorXd out(2 * n);
  Eigen::Map<Eigen::MatrixXd> om(out.data(), 2 * n, 1);
  apply_real_into(Eigen::Map<const Eigen::MatrixXd>(y.data(), 2 * n, 1), om);
  return out;
}

void BlockOperator::apply_real_into(const Eigen::Ref<const Eigen::MatrixXd>& y,
                                    Eigen::Ref<Eigen::MatrixXd> out) const {
  const int n = modes();
  if (!is_real()) throw std::logic_error("apply_real_into: complex damping");
  if (y.rows() != 2 * n) throw std::invalid_argument("apply_real_into: size");
  out.topRows(n) = s.asDiagonal() * y.bottomRows(n);
  if (b.kind == DampingKind::Dense)
    out.bottomRows(n) = b.dense.real() * y.bottomRows(n);
  else if (b.kind == DampingKind::Diagonal)
    out.bottomRows(n) = b.diagonal.real().asDiagonal() * y.bottomRows(n);
  else
    out.bottomRows(n) = b.beta.real() * y.bottomRows(n);
  out.bottomRows(n) -= s.asDiagonal() * y.topRows(n);
}

BlockOperator build_reduction(const SpectralOperator& a, const DampingSpec& b) {
  explicit_spectrum(a.eigenvalues);  // re-validate spectrum
  if (b.size() >= 0 && b.size() != a.modes())
    throw std::invalid_argument("build_reduction: damping size != mode count");
  if (!b.dissipative())
    throw std::invalid_argument("build_reduction: damping is not dissipative");
  BlockOperator op;
  op.a = a;
  op.b = b;
  op.s = a.sqrt_eigenvalues();
  return op;
}

GenerationReport check_generation_conditions(const SpectralOperator& a,
                                             const DampingSpec& b) {
  GenerationReport r;
  r.dissipative = b.dissipative();
  r.alpha_strict = b.alpha_strict();
  r.gamma_sector = b.gamma_sector();
  const Eigen::VectorXd s = a.sqrt_eigenvalues();
  switch (b.kind) {
    case DampingKind::Scalar:
      // max_n |beta| / lambda_n = |beta| / lambda_1
      r.conjugate_norm = std::abs(b.beta) / a.eigenvalues(0);
      break;
    case DampingKind::Diagonal: {
      double m = 0;
      for (int k = 0; k < a.modes(); ++k)
        m = std::max(m, std::abs(b.diagonal(k)) / a.eigenvalues(k));
      r.conjugate_norm = m;
      break;
    }
    case DampingKind::Dense: {
      Eigen::MatrixXcd c =
          s.cwiseInverse().asDiagonal() * b.dense * s.cwiseInverse().asDiagonal();
      r.conjugate_norm = c.jacobiSvd().singularValues()(0);
      break;
    }
  }
  r.conjugate_bounded = std::isfinite(r.conjugate_norm);
  return r;
}

Eigen::VectorXcd InverseBlocks::apply(const Eigen::VectorXcd& y) const {
  if (diagonal) {
    const int n = static_cast<int>(s.size());
    Eigen::VectorXcd out(2 * n);
    for (int k = 0; k < n; ++k) {
      Eigen::Vector2cd p(y(k), y(n + k));
      Eigen::Vector2cd q = mode_inv[k] * p;
      out(k) = q(0);
      out(n + k) = q(1);
    }
    return out;
  }
  return dense_inv * y;
}

InverseBlocks inverse_block(const BlockOperator& op) {
  InverseBlocks inv;
  inv.s = op.s;
  const int n = op.modes();
  if (op.mode_diagonal()) {
    inv.diagonal = true;
    inv.mode_inv.reserve(n);
    double norm = 0;
    for (int k = 0; k < n; ++k) {
      // [[b/lambda, -1/s], [1/s, 0]] per mode
      Eigen::Matrix2cd m;
      const double sk = op.s(k);
      m << op.b.entry(k) / (sk * sk), Cx(-1.0 / sk), Cx(1.0 / sk), Cx(0);
      norm = std::max(norm, spectral_norm2(m));
      inv.mode_inv.push_back(m);
    }
    inv.norm = norm;
  } else {
    inv.diagonal = false;
    Eigen::VectorXd si = op.s.cwiseInverse();
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
    m.topLeftCorner(n, n) = si.asDiagonal() * op.b.dense * si.asDiagonal();
    m.topRightCorner(n, n) = (-si).cast<Cx>().asDiagonal();
    m.bottomLeftCorner(n, n) = si.cast<Cx>().asDiagonal();
    inv.dense_inv = std::move(m);
    inv.norm = inv.dense_inv.jacobiSvd().singularValues()(0);
  }
  return inv;
}

Eigen::VectorXcd apply_semigroup(const BlockOperator& op, double t,
                                 const Eigen::VectorXcd& y) {
  if (t < 0) throw std::invalid_argument("apply_semigroup: t >= 0 required");
  const int n = op.modes();
  if (op.mode_diagonal()) {
    Eigen::VectorXcd out(2 * n);
    for (int k = 0; k < n; ++k) {
      Eigen::Matrix2cd e = expm2<Cx>(op.mode_block(k), t);
      Eigen::Vector2cd p(y(k), y(n + k));
      Eigen::Vector2cd q = e * p;
      out(k) = q(0);
      out(n + k) = q(1);
    }
    return out;
  }
  Eigen::MatrixXcd e = (t * op.dense_matrix()).exp();
  return e * y;
}

Eigen::VectorXd apply_semigroup_real(const BlockOperator& op, double t,
                                     const Eigen::VectorXd& y) {
  if (!op.is_real()) throw std::logic_error("apply_semigroup_real: complex damping");
  if (t < 0) throw std::invalid_argument("apply_semigroup_real: t >= 0 required");
  const int n = op.modes();
  if (op.mode_diagonal()) {
    Eigen::VectorXd out(2 * n);
    for (int k = 0; k < n; ++k) {
      Eigen::Matrix2d e = expm2<double>(op.mode_block_real(k), t);
      out(k) = e(0, 0) * y(k) + e(0, 1) * y(n + k);
      out(n + k) = e(1, 0) * y(k) + e(1, 1) * y(n + k);
    }
    return out;
  }
  Eigen::MatrixXd e = (t * op.dense_matrix_real()).exp();
  return e * y;
}

double semigroup_norm(const BlockOperator& op, double t) {
  if (t < 0) throw std::invalid_argument("semigroup_norm: t >= 0 required");
  if (op.mode_diagonal()) {
    double m = 0;
    for (int k = 0; k < op.modes(); ++k)
      m = std::max(m, spectral_norm2(expm2<Cx>(op.mode_block(k), t)));
    return m;
  }
  Eigen::MatrixXcd e = (t * op.dense_matrix()).exp();
  return e.jacobiSvd().singularValues()(0);
}

}  // namespace sdwave
