#include "qmsd/fock.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace qmsd {

namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
    }
  }
  return out;
}

Operator embed_single_mode(const Matrix& op, const FockSpace& space,
                           int mode) {
  if (mode < 0 || mode >= space.modes) {
    throw DimensionError("mode index " + std::to_string(mode) +
                         " out of range for " + std::to_string(space.modes) +
                         "-mode space");
  }
  const Eigen::Index d = space.cutoff;
  Eigen::Index left = 1, right = 1;
  for (int j = 0; j < mode; ++j) left *= d;
  for (int j = mode + 1; j < space.modes; ++j) right *= d;
  Matrix full = op;
  if (left > 1) {
    full = kron(Matrix::Identity(left, left), full);
  }
  if (right > 1) {
    full = kron(full, Matrix::Identity(right, right));
  }
  return Operator(space, std::move(full));
}

}  // namespace

FockSpace::FockSpace(int cutoff_, int modes_) : cutoff(cutoff_), modes(modes_) {
  if (cutoff < 2) {
    throw DimensionError("FockSpace cutoff must be >= 2, got " +
                         std::to_string(cutoff));
  }
  if (modes < 1) {
    throw DimensionError("FockSpace modes must be >= 1, got " +
                         std::to_string(modes));
  }
  double approx = std::pow(static_cast<double>(cutoff), modes);
  if (approx > 1e8) {
    throw DimensionError("FockSpace dimension too large for dense storage");
  }
}

Eigen::Index FockSpace::dim() const {
  Eigen::Index n = 1;
  for (int j = 0; j < modes; ++j) n *= cutoff;
  return n;
}

Operator::Operator(FockSpace space_, Matrix mat_)
    : space(space_), mat(std::move(mat_)) {
  if (mat.rows() != mat.cols() || mat.rows() != space.dim()) {
    throw DimensionError("Operator matrix is " + std::to_string(mat.rows()) +
                         "x" + std::to_string(mat.cols()) +
                         ", space dimension is " + std::to_string(space.dim()));
  }
}

Matrix annihilation_matrix(int cutoff) {
  if (cutoff < 2) {
    throw DimensionError("annihilation cutoff must be >= 2");
  }
  Matrix a = Matrix::Zero(cutoff, cutoff);
  for (int n = 1; n < cutoff; ++n) {
    a(n - 1, n) = std::sqrt(static_cast<double>(n));
  }
  return a;
}

Operator annihilation(const FockSpace& space, int mode) {
  return embed_single_mode(annihilation_matrix(space.cutoff), space, mode);
}

QuadraturePair quadratures(const FockSpace& space, int mode) {
  const Matrix a = annihilation_matrix(space.cutoff);
  const Matrix ad = a.adjoint();
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  const Matrix x = inv_sqrt2 * (a + ad);
  const Matrix p = Complex(0.0, -inv_sqrt2) * (a - ad);
  return {embed_single_mode(x, space, mode), embed_single_mode(p, space, mode)};
}

Operator number_op(const FockSpace& space, int mode) {
  const Eigen::Index d = space.cutoff;
  Matrix n = Matrix::Zero(d, d);
  for (Eigen::Index k = 0; k < d; ++k) n(k, k) = static_cast<double>(k);
  return embed_single_mode(n, space, mode);
}

int recommended_cutoff(Complex alpha) {
  const double r = std::abs(alpha);
  return static_cast<int>(std::ceil(r * r + 8.0 * r + 10.0));
}

Vector coherent_vector_raw(Complex alpha, int cutoff) {
  if (cutoff < 2) {
    throw DimensionError("coherent_vector cutoff must be >= 2");
  }
  Vector c(cutoff);
  c(0) = std::exp(-0.5 * std::norm(alpha));
  for (int n = 1; n < cutoff; ++n) {
    c(n) = c(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  }
  return c;
}

PreparedVector coherent_vector(Complex alpha, const FockSpace& space,
                               double max_tail) {
  if (space.modes != 1) {
    throw DimensionError("coherent_vector expects a single-mode space");
  }
  Vector c = coherent_vector_raw(alpha, space.cutoff);
  const double kept = c.squaredNorm();
  const double tail = std::clamp(1.0 - kept, 0.0, 1.0);
  if (tail > max_tail) {
    throw TruncationError(
        "coherent state |alpha|=" + std::to_string(std::abs(alpha)) +
        " discards tail mass " + std::to_string(tail) + " at cutoff " +
        std::to_string(space.cutoff) + " (recommended cutoff " +
        std::to_string(recommended_cutoff(alpha)) + ")");
  }
  if (kept <= 0.0) {
    // The entire state lies beyond the cutoff; the best in-space stand-in is
    // the vacuum, and tail_mass = 1 tells the caller how bad that is.
    Vector v = Vector::Zero(space.cutoff);
    v(0) = 1.0;
    return {space, std::move(v), 1.0};
  }
  c /= std::sqrt(kept);
  return {space, std::move(c), tail};
}

PreparedState coherent_state(CoherentAmplitude amp, const FockSpace& space,
                             double max_tail) {
  PreparedVector v = coherent_vector(amp.alpha, space, max_tail);
  Matrix rho = v.amps * v.amps.adjoint();
  return {Operator(space, std::move(rho)), v.tail_mass};
}

PreparedVector two_mode_squeezed_vector(double lambda, const FockSpace& space,
                                        double max_tail) {
  if (space.modes != 2) {
    throw DimensionError("two_mode_squeezed expects a two-mode space");
  }
  if (!(lambda > 0.0)) {
    throw ValidationError(
        "two_mode_squeezed requires lambda > 0 (the state is not normalizable "
        "at lambda = 0)");
  }
  const int d = space.cutoff;
  const double q = 1.0 / (1.0 + lambda);  // |n,n> weight ratio
  const double tail = std::pow(q, d);
  if (tail > max_tail) {
    throw TruncationError("two-mode squeezed state at lambda=" +
                          std::to_string(lambda) + " discards tail mass " +
                          std::to_string(tail) + " at cutoff " +
                          std::to_string(d));
  }
  Vector amps = Vector::Zero(space.dim());
  double coeff = std::sqrt(lambda / (1.0 + lambda));
  const double step = std::sqrt(q);
  for (int n = 0; n < d; ++n) {
    amps(static_cast<Eigen::Index>(n) * d + n) = coeff;
    coeff *= step;
  }
  amps /= amps.norm();
  return {space, std::move(amps), tail};
}

PreparedState two_mode_squeezed(double lambda, const FockSpace& space,
                                double max_tail) {
  PreparedVector v = two_mode_squeezed_vector(lambda, space, max_tail);
  Matrix rho = v.amps * v.amps.adjoint();
  return {Operator(space, std::move(rho)), v.tail_mass};
}

PreparedState thermal_state(double mean_photons, const FockSpace& space,
                            double max_tail) {
  if (space.modes != 1) {
    throw DimensionError("thermal_state expects a single-mode space");
  }
  if (mean_photons < 0.0) {
    throw ValidationError("thermal_state mean photon number must be >= 0");
  }
  const int d = space.cutoff;
  const double q = mean_photons / (1.0 + mean_photons);
  const double tail = std::pow(q, d);
  if (tail > max_tail) {
    throw TruncationError("thermal state with mean " +
                          std::to_string(mean_photons) +
                          " discards tail mass " + std::to_string(tail) +
                          " at cutoff " + std::to_string(d));
  }
  Matrix rho = Matrix::Zero(d, d);
  double p = 1.0 - q;
  for (int n = 0; n < d; ++n) {
    rho(n, n) = p;
    p *= q;
  }
  rho /= rho.trace().real();
  return {Operator(space, std::move(rho)), tail};
}

Operator beam_splitter(double transmittance, const FockSpace& space) {
  if (space.modes != 2) {
    throw DimensionError("beam_splitter expects a two-mode space");
  }
  if (!(transmittance >= 0.0 && transmittance <= 1.0)) {
    throw ValidationError("beam_splitter transmittance must lie in [0, 1]");
  }
  const int d = space.cutoff;
  const Eigen::Index dim = space.dim();
  const double theta = std::acos(std::sqrt(transmittance));
  Matrix u = Matrix::Zero(dim, dim);

  // The generator a b^dag - a^dag b conserves total photon number, so the
  // unitary factors into blocks over N = n1 + n2; each block exponential is
  // computed from the eigendecomposition of the (Hermitian) i * generator.
  for (int total = 0; total <= 2 * (d - 1); ++total) {
    const int kmin = std::max(0, total - d + 1);
    const int kmax = std::min(d - 1, total);
    const int n = kmax - kmin + 1;
    if (n == 1) {
      u(static_cast<Eigen::Index>(kmin) * d + (total - kmin),
        static_cast<Eigen::Index>(kmin) * d + (total - kmin)) = 1.0;
      continue;
    }
    Matrix h = Matrix::Zero(n, n);
    for (int k = kmin + 1; k <= kmax; ++k) {
      const double g = std::sqrt(static_cast<double>(k) *
                                 static_cast<double>(total - k + 1));
      h(k - 1 - kmin, k - kmin) = Complex(0.0, g);
      h(k - kmin, k - 1 - kmin) = Complex(0.0, -g);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
    Vector phases(n);
    for (int i = 0; i < n; ++i) {
      phases(i) = std::exp(Complex(0.0, -theta * solver.eigenvalues()(i)));
    }
    Matrix block = solver.eigenvectors() * phases.asDiagonal() *
                   solver.eigenvectors().adjoint();
    for (int i = 0; i < n; ++i) {
      const Eigen::Index gi =
          static_cast<Eigen::Index>(kmin + i) * d + (total - kmin - i);
      for (int j = 0; j < n; ++j) {
        const Eigen::Index gj =
            static_cast<Eigen::Index>(kmin + j) * d + (total - kmin - j);
        u(gi, gj) = block(i, j);
      }
    }
  }
  return Operator(space, std::move(u));
}

Operator tensor(const Operator& a, const Operator& b) {
  if (a.space.cutoff != b.space.cutoff) {
    throw DimensionError("tensor factors must share the per-mode cutoff");
  }
  FockSpace joint(a.space.cutoff, a.space.modes + b.space.modes);
  return Operator(joint, kron(a.mat, b.mat));
}

Operator partial_trace(const Operator& op, std::span<const int> keep) {
  const int m = op.space.modes;
  const int d = op.space.cutoff;
  if (keep.empty()) {
    throw DimensionError("partial_trace must keep at least one mode");
  }
  std::vector<int> kept(keep.begin(), keep.end());
  if (!std::is_sorted(kept.begin(), kept.end()) ||
      std::adjacent_find(kept.begin(), kept.end()) != kept.end() ||
      kept.front() < 0 || kept.back() >= m) {
    throw DimensionError("partial_trace keep list must be sorted, unique and "
                         "within the mode range");
  }
  std::vector<int> traced;
  for (int j = 0; j < m; ++j) {
    if (!std::binary_search(kept.begin(), kept.end(), j)) traced.push_back(j);
  }
  std::vector<Eigen::Index> stride(m);
  {
    Eigen::Index s = 1;
    for (int j = m - 1; j >= 0; --j) {
      stride[j] = s;
      s *= d;
    }
  }
  auto offsets = [&](const std::vector<int>& modes) {
    Eigen::Index count = 1;
    for (size_t i = 0; i < modes.size(); ++i) count *= d;
    std::vector<Eigen::Index> table(count, 0);
    for (Eigen::Index idx = 0; idx < count; ++idx) {
      Eigen::Index rest = idx;
      for (size_t i = modes.size(); i-- > 0;) {
        table[idx] += (rest % d) * stride[modes[i]];
        rest /= d;
      }
    }
    return table;
  };
  const std::vector<Eigen::Index> koff = offsets(kept);
  const std::vector<Eigen::Index> toff = offsets(traced);

  const Eigen::Index kd = static_cast<Eigen::Index>(koff.size());
  Matrix out = Matrix::Zero(kd, kd);
  for (Eigen::Index r = 0; r < kd; ++r) {
    for (Eigen::Index c = 0; c < kd; ++c) {
      Complex sum = 0.0;
      for (Eigen::Index t : toff) {
        sum += op.mat(koff[r] + t, koff[c] + t);
      }
      out(r, c) = sum;
    }
  }
  return Operator(FockSpace(d, static_cast<int>(kept.size())),
                  std::move(out));
}

bool is_hermitian(const Operator& op, double tol) {
  return (op.mat - op.mat.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool is_positive_semidefinite(const Operator& op, double tol) {
  if (!is_hermitian(op, tol)) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(
      ((op.mat + op.mat.adjoint()) / 2.0).eval(),
      Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff() >= -tol;
}

bool is_density(const Operator& op, double tol) {
  if (std::abs(op.mat.trace() - Complex(1.0)) > tol) return false;
  return is_positive_semidefinite(op, tol);
}

Complex trace_product(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows() || a.rows() != b.cols()) {
    throw DimensionError("trace_product shape mismatch");
  }
  return a.cwiseProduct(b.transpose()).sum();
}

Complex expectation(const Operator& obs, const Operator& rho) {
  if (obs.space != rho.space) {
    throw DimensionError("expectation: operator spaces differ");
  }
  return trace_product(obs.mat, rho.mat);
}

std::vector<Eigen::Index> low_photon_indices(const FockSpace& space,
                                             int max_total) {
  std::vector<Eigen::Index> out;
  const int d = space.cutoff;
  const Eigen::Index dim = space.dim();
  for (Eigen::Index idx = 0; idx < dim; ++idx) {
    Eigen::Index rest = idx;
    int total = 0;
    for (int j = 0; j < space.modes; ++j) {
      total += static_cast<int>(rest % d);
      rest /= d;
    }
    if (total <= max_total) out.push_back(idx);
  }
  return out;
}

double block_deviation_from_identity(const Matrix& a, const FockSpace& space,
                                     int max_total) {
  if (a.rows() != space.dim() || a.cols() != space.dim()) {
    throw DimensionError("block_deviation_from_identity: shape mismatch");
  }
  const std::vector<Eigen::Index> idx = low_photon_indices(space, max_total);
  const Eigen::Index n = static_cast<Eigen::Index>(idx.size());
  Matrix block(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      block(r, c) = a(idx[r], idx[c]) - (r == c ? 1.0 : 0.0);
    }
  }
  return block.jacobiSvd().singularValues()(0);
}

}  // namespace qmsd
