#include "qmsd/estimation.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "qmsd/quadrature.hpp"

namespace qmsd {

namespace {

Matrix hermitized(const Matrix& a) { return 0.5 * (a + a.adjoint()); }

double quadratic_form(const Matrix& a, const Vector& v) {
  return std::real(v.dot(a * v));
}

}  // namespace

const FockSpace& Povm::space() const {
  if (elements.empty()) {
    throw ValidationError("POVM has no elements");
  }
  return elements.front().space;
}

void validate(const Povm& povm, double tol) {
  const FockSpace& space = povm.space();
  Matrix sum = Matrix::Zero(space.dim(), space.dim());
  for (const Operator& el : povm.elements) {
    if (el.space != space) {
      throw DimensionError("POVM elements live on different spaces");
    }
    if (!is_hermitian(el, 1e-8) || !is_positive_semidefinite(el, 1e-8)) {
      throw ValidationError("POVM element is not positive semidefinite");
    }
    sum += el.mat;
  }
  const int block = std::min(10, space.cutoff - 1);
  const double deviation = block_deviation_from_identity(sum, space, block);
  if (deviation > tol) {
    throw ValidationError("POVM completeness deviation " +
                          std::to_string(deviation) +
                          " on the low-photon block exceeds tolerance");
  }
}

void validate(const Estimator& est) {
  validate(est.povm);
  const auto k = static_cast<Eigen::Index>(est.povm.n_outcomes());
  if (est.x_values.size() != k || est.p_values.size() != k) {
    throw ValidationError("estimator value lists must match the outcome count");
  }
  if (!est.x_values.allFinite() || !est.p_values.allFinite()) {
    throw ValidationError("estimator values must be finite");
  }
}

SimDiag simultaneous_diagonalize(const Operator& m, const Operator& n,
                                 double tol) {
  if (m.space != n.space) {
    throw DimensionError("observables to diagonalize live on different spaces");
  }
  if (!is_hermitian(m, 1e-8) || !is_hermitian(n, 1e-8)) {
    throw ValidationError("simultaneous diagonalization needs Hermitian inputs");
  }
  const double comm_norm = (m.mat * n.mat - n.mat * m.mat).norm();
  if (!(comm_norm < tol)) {
    throw ValidationError("observables do not commute: ||[M, N]|| = " +
                          std::to_string(comm_norm));
  }

  Eigen::SelfAdjointEigenSolver<Matrix> es(m.mat);
  Matrix basis = es.eigenvectors();
  RealVector a = es.eigenvalues();
  const Eigen::Index dim = a.size();
  RealVector b(dim);
  const double cluster_gap = 1e-9 * std::max(1.0, a.cwiseAbs().maxCoeff());

  Eigen::Index lo = 0;
  while (lo < dim) {
    Eigen::Index hi = lo + 1;
    while (hi < dim && a(hi) - a(hi - 1) <= cluster_gap) ++hi;
    const Eigen::Index size = hi - lo;
    if (size == 1) {
      b(lo) = std::real(basis.col(lo).dot(n.mat * basis.col(lo)));
    } else {
      const Matrix block = basis.middleCols(lo, size);
      Eigen::SelfAdjointEigenSolver<Matrix> en(
          Matrix(block.adjoint() * n.mat * block));
      basis.middleCols(lo, size) = block * en.eigenvectors();
      b.segment(lo, size) = en.eigenvalues();
    }
    lo = hi;
  }
  return {std::move(basis), std::move(a), std::move(b)};
}

MeasurementModel estimator_to_model(const Estimator& est) {
  validate(est);
  const int k = est.povm.n_outcomes();
  const int reg = std::max(2, k);
  if (static_cast<long long>(reg) * reg > 4096) {
    throw DimensionError(
        "estimator register would need dimension " +
        std::to_string(static_cast<long long>(reg) * reg) +
        "; cap is 4096 (coarsen the outcome grid or use mse_pair directly)");
  }
  const FockSpace& in = est.povm.space();
  const FockSpace out(reg, 2);

  // One Kraus column per retained eigenvector of each element; the register
  // side of every column is the basis state |i>|i> of its outcome.
  std::vector<Vector> meas_cols;
  std::vector<int> owners;
  for (int i = 0; i < k; ++i) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(est.povm.elements[i].mat);
    const double floor =
        1e-12 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    for (Eigen::Index l = 0; l < es.eigenvalues().size(); ++l) {
      if (es.eigenvalues()(l) > floor) {
        meas_cols.push_back(std::sqrt(es.eigenvalues()(l)) *
                            es.eigenvectors().col(l));
        owners.push_back(i);
      }
    }
  }

  KrausChannel ch;
  ch.in = in;
  ch.out = out;
  ch.label = "estimator-register";
  const auto n_cols = static_cast<Eigen::Index>(meas_cols.size());
  ch.prepared = Matrix::Zero(out.dim(), n_cols);
  ch.measured = Matrix(in.dim(), n_cols);
  for (Eigen::Index c = 0; c < n_cols; ++c) {
    ch.measured.col(c) = meas_cols[c];
    ch.prepared(owners[c] * reg + owners[c], c) = 1.0;
  }

  Matrix mmat = Matrix::Zero(out.dim(), out.dim());
  Matrix nmat = Matrix::Zero(out.dim(), out.dim());
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < reg; ++j) {
      mmat(i * reg + j, i * reg + j) = est.x_values(i);
      nmat(j * reg + i, j * reg + i) = est.p_values(i);
    }
  }
  return {std::move(ch), Operator(out, std::move(mmat)),
          Operator(out, std::move(nmat))};
}

Estimator model_to_estimator(const MeasurementModel& model) {
  const KrausChannel& ch = model.channel;
  if (model.m.space != ch.out || model.n.space != ch.out) {
    throw DimensionError("readouts do not live on the channel output");
  }
  SimDiag sd = simultaneous_diagonalize(model.m, model.n);

  const Eigen::Index n_out = ch.out.dim();
  const Eigen::Index d_in = ch.in.dim();
  std::vector<Operator> elements;
  elements.reserve(n_out);
  if (ch.factored()) {
    const Matrix overlap = ch.prepared.adjoint() * sd.basis;
    for (Eigen::Index i = 0; i < n_out; ++i) {
      const RealVector weights = overlap.col(i).cwiseAbs2();
      Matrix scaled = ch.measured;
      for (Eigen::Index c = 0; c < scaled.cols(); ++c) {
        scaled.col(c) *= weights(c);
      }
      elements.emplace_back(ch.in,
                            hermitized(scaled * ch.measured.adjoint()));
    }
  } else {
    for (Eigen::Index i = 0; i < n_out; ++i) {
      Matrix acc = Matrix::Zero(d_in, d_in);
      for (const Matrix& kr : ch.kraus) {
        const Vector v = kr.adjoint() * sd.basis.col(i);
        acc.noalias() += v * v.adjoint();
      }
      elements.emplace_back(ch.in, std::move(acc));
    }
  }

  Matrix sum = Matrix::Zero(d_in, d_in);
  for (const Operator& el : elements) sum += el.mat;
  const double deviation =
      (sum - Matrix::Identity(d_in, d_in)).cwiseAbs().maxCoeff();
  if (deviation > 1e-7) {
    throw ValidationError(
        "pulled-back POVM misses completeness by " +
        std::to_string(deviation) +
        "; the channel is not trace-preserving on its input space");
  }
  return {Povm{std::move(elements)}, std::move(sd.a_values),
          std::move(sd.b_values)};
}

Povm random_povm(int dim, int n_outcomes, std::uint64_t seed) {
  if (dim < 2) {
    throw ValidationError("random POVM dimension must be at least 2");
  }
  if (n_outcomes < 1) {
    throw ValidationError("random POVM needs at least one outcome");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const FockSpace space(dim, 1);

  std::vector<Matrix> raw;
  raw.reserve(n_outcomes);
  Matrix total = Matrix::Zero(dim, dim);
  for (int i = 0; i < n_outcomes; ++i) {
    Matrix g(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r) {
      for (Eigen::Index c = 0; c < dim; ++c) {
        g(r, c) = Complex(gauss(rng), gauss(rng));
      }
    }
    Matrix factor = g * g.adjoint() / static_cast<double>(dim);
    total += factor;
    raw.push_back(std::move(factor));
  }

  Eigen::SelfAdjointEigenSolver<Matrix> es(total);
  const Matrix norm = es.operatorInverseSqrt();
  Povm povm;
  povm.elements.reserve(n_outcomes);
  for (const Matrix& factor : raw) {
    povm.elements.emplace_back(space, hermitized(norm * factor * norm));
  }
  validate(povm);
  return povm;
}

std::pair<double, double> mse_pair(const Estimator& est, double big_g,
                                   double r, const GaussianPrior& prior,
                                   int order) {
  validate(est);
  const FockSpace& space = est.povm.space();
  if (space.modes != 1) {
    throw ValidationError("the coherent ensemble is single-mode");
  }
  if (!(prior.lambda > 0.0)) {
    throw ValidationError(
        "mse_pair needs lambda > 0; the uniform-prior limit is served by "
        "closed-form bounds only");
  }
  const GainSpec gain = GainSpec::from_gr(big_g, r);

  const Eigen::Index d = space.dim();
  Matrix a2x = Matrix::Zero(d, d), a1x = Matrix::Zero(d, d);
  Matrix a2p = Matrix::Zero(d, d), a1p = Matrix::Zero(d, d);
  for (int i = 0; i < est.povm.n_outcomes(); ++i) {
    const Matrix& el = est.povm.elements[i].mat;
    a2x += est.x_values(i) * est.x_values(i) * el;
    a1x += est.x_values(i) * el;
    a2p += est.p_values(i) * est.p_values(i) * el;
    a1p += est.p_values(i) * el;
  }

  const GaussHermiteRule rule = gauss_hermite(order);
  const double scale = std::sqrt(1.0 / prior.lambda);
  const double root_x = std::sqrt(gain.eta_x);
  const double root_p = std::sqrt(gain.eta_p);
  double vx = 0.0, vp = 0.0;
  for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
    for (Eigen::Index j = 0; j < rule.nodes.size(); ++j) {
      const double weight =
          rule.weights(i) * rule.weights(j) / std::numbers::pi;
      const CoherentAmplitude amp{
          Complex(scale * rule.nodes(i), scale * rule.nodes(j))};
      const Vector v = coherent_vector(amp.alpha, space, 1.0).amps;
      vx += weight * (quadratic_form(a2x, v) -
                      2.0 * root_x * amp.x() * quadratic_form(a1x, v) +
                      gain.eta_x * amp.x() * amp.x());
      vp += weight * (quadratic_form(a2p, v) -
                      2.0 * root_p * amp.p() * quadratic_form(a1p, v) +
                      gain.eta_p * amp.p() * amp.p());
    }
  }
  return {vx, vp};
}

}  // namespace qmsd
