#include "qfound/algebra.hpp"

#include "qfound/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>

namespace qfound {

AlgebraDescriptor::AlgebraDescriptor(std::vector<std::size_t> block_sizes)
    : block_sizes_(std::move(block_sizes)) {
  if (block_sizes_.empty()) throw InvalidArgument("algebra needs at least one block");
  offsets_.reserve(block_sizes_.size());
  for (std::size_t b : block_sizes_) {
    if (b == 0) throw InvalidArgument("block sizes must be positive");
    offsets_.push_back(dimension_);
    dimension_ += b;
  }
}

std::size_t AlgebraDescriptor::block_of(std::size_t row) const {
  auto it = std::upper_bound(offsets_.begin(), offsets_.end(), row);
  return static_cast<std::size_t>(std::distance(offsets_.begin(), it)) - 1;
}

std::size_t AlgebraDescriptor::linear_dimension() const {
  return std::accumulate(block_sizes_.begin(), block_sizes_.end(), std::size_t{0},
                         [](std::size_t acc, std::size_t b) { return acc + b * b; });
}

bool AlgebraDescriptor::is_classical() const {
  return std::all_of(block_sizes_.begin(), block_sizes_.end(),
                     [](std::size_t b) { return b == 1; });
}

AlgebraPtr make_algebra(std::vector<std::size_t> block_sizes) {
  return std::make_shared<const AlgebraDescriptor>(std::move(block_sizes));
}
AlgebraPtr make_full_algebra(std::size_t n) { return make_algebra({n}); }
AlgebraPtr make_classical_algebra(std::size_t n) {
  return make_algebra(std::vector<std::size_t>(n, 1));
}

AlgebraElement::AlgebraElement(AlgebraPtr algebra, Matrix m)
    : algebra_(std::move(algebra)), matrix_(std::move(m)) {
  if (!algebra_) throw InvalidArgument("element without algebra");
  const auto n = static_cast<Eigen::Index>(algebra_->dimension());
  if (matrix_.rows() != n || matrix_.cols() != n) {
    throw DimensionMismatch("matrix is " + std::to_string(matrix_.rows()) + "x" +
                            std::to_string(matrix_.cols()) + ", algebra dimension is " +
                            std::to_string(n));
  }
  if (algebra_->block_count() == 1) return;
  const double cutoff = 1e-12 * std::max(1.0, max_abs());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (algebra_->same_block(static_cast<std::size_t>(i), static_cast<std::size_t>(j))) continue;
      if (std::abs(matrix_(i, j)) > cutoff) {
        throw InvalidArgument("matrix entry (" + std::to_string(i) + "," + std::to_string(j) +
                              ") lies outside the block structure");
      }
      matrix_(i, j) = 0.0;
    }
  }
}

AlgebraElement AlgebraElement::zero(const AlgebraPtr& algebra) {
  const auto n = static_cast<Eigen::Index>(algebra->dimension());
  return AlgebraElement(algebra, Matrix::Zero(n, n));
}

AlgebraElement AlgebraElement::identity(const AlgebraPtr& algebra) {
  const auto n = static_cast<Eigen::Index>(algebra->dimension());
  return AlgebraElement(algebra, Matrix::Identity(n, n));
}

bool AlgebraElement::is_hermitian(double tolerance) const {
  const double scale = std::max(1.0, max_abs());
  return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() <= tolerance * scale;
}

double AlgebraElement::max_abs() const {
  return matrix_.size() == 0 ? 0.0 : matrix_.cwiseAbs().maxCoeff();
}

void require_same_algebra(const AlgebraElement& a, const AlgebraElement& b, const char* where) {
  if (a.algebra() != b.algebra() && !(*a.algebra() == *b.algebra())) {
    throw DimensionMismatch(std::string(where) + ": elements belong to different algebras");
  }
}

AlgebraElement& AlgebraElement::operator+=(const AlgebraElement& other) {
  require_same_algebra(*this, other, "operator+");
  matrix_ += other.matrix_;
  return *this;
}

AlgebraElement& AlgebraElement::operator-=(const AlgebraElement& other) {
  require_same_algebra(*this, other, "operator-");
  matrix_ -= other.matrix_;
  return *this;
}

AlgebraElement& AlgebraElement::operator*=(Complex scalar) {
  matrix_ *= scalar;
  return *this;
}

AlgebraElement operator*(const AlgebraElement& a, const AlgebraElement& b) {
  require_same_algebra(a, b, "operator*");
  return AlgebraElement(a.algebra(), a.matrix() * b.matrix());
}

AlgebraElement adjoint(const AlgebraElement& r) {
  return AlgebraElement(r.algebra(), r.matrix().adjoint());
}

AlgebraElement commutator(const AlgebraElement& a, const AlgebraElement& b) {
  require_same_algebra(a, b, "commutator");
  return AlgebraElement(a.algebra(), a.matrix() * b.matrix() - b.matrix() * a.matrix());
}

namespace {

void require_hermitian(const AlgebraElement& a, double tolerance, const char* where) {
  if (!a.is_hermitian(std::max(tolerance, 1e-12))) {
    throw NotHermitian(std::string(where) + ": element is not Hermitian");
  }
}

// Groups of indices into the ascending list `values` whose neighbours differ
// by at most `threshold`.
std::vector<std::vector<std::size_t>> group_sorted(const std::vector<double>& values,
                                                   const std::vector<std::size_t>& order,
                                                   double threshold) {
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const std::size_t idx = order[pos];
    if (groups.empty() || values[idx] - values[groups.back().back()] > threshold) {
      groups.push_back({idx});
    } else {
      groups.back().push_back(idx);
    }
  }
  return groups;
}

struct GroupedSpectrum {
  BlockEigensystem eig;
  std::vector<std::vector<std::size_t>> groups;  // ascending eigenvalue
};

GroupedSpectrum grouped_spectrum(const AlgebraElement& a, double tolerance) {
  GroupedSpectrum out{block_eigensystem(a), {}};
  const auto& ev = out.eig.eigenvalues;
  double largest = 0.0;
  for (double v : ev) largest = std::max(largest, std::abs(v));
  std::vector<std::size_t> order(ev.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return ev[i] < ev[j]; });
  out.groups = group_sorted(ev, order, tolerance * largest);
  return out;
}

double group_mean(const std::vector<double>& values, const std::vector<std::size_t>& group) {
  double sum = 0.0;
  for (std::size_t i : group) sum += values[i];
  return sum / static_cast<double>(group.size());
}

}  // namespace

BlockEigensystem block_eigensystem(const AlgebraElement& hermitian) {
  const auto& alg = *hermitian.algebra();
  const auto n = static_cast<Eigen::Index>(alg.dimension());
  BlockEigensystem out;
  out.eigenvectors = Matrix::Zero(n, n);
  out.eigenvalues.reserve(alg.dimension());
  out.block.reserve(alg.dimension());
  for (std::size_t b = 0; b < alg.block_count(); ++b) {
    const auto off = static_cast<Eigen::Index>(alg.block_offset(b));
    const auto size = static_cast<Eigen::Index>(alg.block_sizes()[b]);
    const Matrix sub = hermitian.matrix().block(off, off, size, size);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (sub + sub.adjoint()));
    out.eigenvectors.block(off, off, size, size) = solver.eigenvectors();
    for (Eigen::Index k = 0; k < size; ++k) {
      out.eigenvalues.push_back(solver.eigenvalues()(k));
      out.block.push_back(b);
    }
  }
  return out;
}

std::vector<double> spectrum(const AlgebraElement& a, double tolerance) {
  require_hermitian(a, tolerance, "spectrum");
  const auto gs = grouped_spectrum(a, tolerance);
  std::vector<double> out;
  out.reserve(gs.groups.size());
  for (const auto& g : gs.groups) out.push_back(group_mean(gs.eig.eigenvalues, g));
  return out;
}

SpectralDecomposition spectral_decomposition(const AlgebraElement& a, double tolerance) {
  require_hermitian(a, tolerance, "spectral_decomposition");
  const auto gs = grouped_spectrum(a, tolerance);
  const auto& alg = *a.algebra();
  const auto n = static_cast<Eigen::Index>(alg.dimension());
  SpectralDecomposition out{{}, tolerance};
  for (const auto& g : gs.groups) {
    Matrix proj = Matrix::Zero(n, n);
    // Re-orthogonalize the eigenvectors of the group block by block.
    for (std::size_t b = 0; b < alg.block_count(); ++b) {
      std::vector<std::size_t> cols;
      for (std::size_t i : g) {
        if (gs.eig.block[i] == b) cols.push_back(i);
      }
      if (cols.empty()) continue;
      const auto off = static_cast<Eigen::Index>(alg.block_offset(b));
      const auto size = static_cast<Eigen::Index>(alg.block_sizes()[b]);
      Matrix v(size, static_cast<Eigen::Index>(cols.size()));
      for (std::size_t c = 0; c < cols.size(); ++c) {
        v.col(static_cast<Eigen::Index>(c)) =
            gs.eig.eigenvectors.block(off, static_cast<Eigen::Index>(cols[c]), size, 1);
      }
      Eigen::HouseholderQR<Matrix> qr(v);
      const Matrix q = qr.householderQ() * Matrix::Identity(size, v.cols());
      proj.block(off, off, size, size) = q * q.adjoint();
    }
    out.pairs.push_back({group_mean(gs.eig.eigenvalues, g), AlgebraElement(a.algebra(), proj)});
  }
  return out;
}

AlgebraElement SpectralDecomposition::reconstruct() const {
  AlgebraElement sum = AlgebraElement::zero(pairs.front().projector.algebra());
  for (const auto& p : pairs) sum += p.eigenvalue * p.projector;
  return sum;
}

AlgebraElement SpectralDecomposition::projector_sum() const {
  AlgebraElement sum = AlgebraElement::zero(pairs.front().projector.algebra());
  for (const auto& p : pairs) sum += p.projector;
  return sum;
}

double norm(const AlgebraElement& r) {
  const AlgebraElement gram = adjoint(r) * r;
  const auto eig = block_eigensystem(gram);
  double top = 0.0;
  for (double v : eig.eigenvalues) top = std::max(top, v);
  return std::sqrt(top);
}

double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

bool is_one_dim_projector(const AlgebraElement& p, double tolerance) {
  const Matrix& m = p.matrix();
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > tolerance) return false;
  if ((m * m - m).cwiseAbs().maxCoeff() > tolerance) return false;
  return std::abs(m.trace() - Complex(1.0)) <= tolerance;
}

PositivityStructure check_positivity_structure(const AlgebraElement& r, double tolerance) {
  AlgebraElement gram = adjoint(r) * r;
  const auto eig = block_eigensystem(gram);
  double min_ev = eig.eigenvalues.empty() ? 0.0 : eig.eigenvalues.front();
  double max_ev = 0.0;
  for (double v : eig.eigenvalues) {
    min_ev = std::min(min_ev, v);
    max_ev = std::max(max_ev, v);
  }
  // Principal square root from the clamped eigenvalues.
  Eigen::VectorXd roots(static_cast<Eigen::Index>(eig.eigenvalues.size()));
  for (std::size_t k = 0; k < eig.eigenvalues.size(); ++k) {
    roots(static_cast<Eigen::Index>(k)) = std::sqrt(std::max(0.0, eig.eigenvalues[k]));
  }
  const Matrix& v = eig.eigenvectors;
  Matrix root = v * roots.cast<Complex>().asDiagonal() * v.adjoint();
  root = 0.5 * (root + root.adjoint());
  AlgebraElement square_root(r.algebra(), root);
  const double residual = (root * root - gram.matrix()).cwiseAbs().maxCoeff();

  const double scale = std::max(1.0, max_ev);
  const bool gram_hermitian = gram.is_hermitian(tolerance);
  const bool psd = min_ev >= -tolerance * scale;
  // norm(R*R) == 0 must force R == 0.
  const bool gram_null = std::sqrt(std::max(0.0, max_ev)) <= tolerance;
  const bool null_implies_zero = !gram_null || r.max_abs() <= tolerance;

  return PositivityStructure{gram_hermitian && psd && residual <= tolerance * scale &&
                                 null_implies_zero,
                             min_ev,
                             std::move(gram),
                             std::move(square_root),
                             residual,
                             null_implies_zero};
}

std::string fingerprint(const AlgebraElement& a) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int byte = 0; byte < 8; ++byte) {
      h ^= (v >> (8 * byte)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  for (std::size_t b : a.algebra()->block_sizes()) mix(b);
  const Matrix& m = a.matrix();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      mix(static_cast<std::uint64_t>(std::llround(m(i, j).real() * 1e9)));
      mix(static_cast<std::uint64_t>(std::llround(m(i, j).imag() * 1e9)));
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace qfound
