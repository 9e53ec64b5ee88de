#include "qfound/context.hpp"

#include "qfound/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <random>
#include <unordered_map>

namespace qfound {

AlgebraElement Context::basis_projector(std::size_t k) const {
  const Vector v = vector(k);
  return AlgebraElement(algebra, v * v.adjoint());
}

AlgebraElement Context::diagonal_element(std::span<const double> values) const {
  if (values.size() != dimension()) {
    throw DimensionMismatch("diagonal_element: expected " + std::to_string(dimension()) +
                            " values");
  }
  Eigen::VectorXcd d(static_cast<Eigen::Index>(values.size()));
  for (std::size_t k = 0; k < values.size(); ++k) d(static_cast<Eigen::Index>(k)) = values[k];
  return AlgebraElement(algebra, basis * d.asDiagonal() * basis.adjoint());
}

namespace {

constexpr double kPhaseThreshold = 1e-10;

bool lexicographic_less(const Matrix& b, Eigen::Index i, Eigen::Index j) {
  for (Eigen::Index r = 0; r < b.rows(); ++r) {
    if (b(r, i).real() != b(r, j).real()) return b(r, i).real() < b(r, j).real();
  }
  for (Eigen::Index r = 0; r < b.rows(); ++r) {
    if (b(r, i).imag() != b(r, j).imag()) return b(r, i).imag() < b(r, j).imag();
  }
  return false;
}

// Fixed generic unitary per dimension; built from raw engine output so that it
// does not depend on the standard library's distribution implementations.
const Matrix& reference_frame(std::size_t n) {
  static std::mutex mutex;
  static std::unordered_map<std::size_t, Matrix> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::mt19937_64 engine(0x5eedf00dULL + n);
  auto unit = [&engine] { return static_cast<double>(engine() >> 11) * 0x1.0p-53 - 0.5; };
  const auto dim = static_cast<Eigen::Index>(n);
  Matrix m(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) m(i, j) = Complex(unit(), unit());
  }
  Eigen::HouseholderQR<Matrix> qr(m);
  Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
  return cache.emplace(n, std::move(q)).first->second;
}

bool fingerprints_match(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  std::vector<bool> used(static_cast<std::size_t>(b.cols()), false);
  for (Eigen::Index i = 0; i < a.cols(); ++i) {
    bool matched = false;
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      if ((a.col(i) - b.col(j)).cwiseAbs().maxCoeff() <= tol) {
        used[static_cast<std::size_t>(j)] = true;
        matched = true;
        break;
      }
    }
    if (!matched) return false;
  }
  return true;
}

void require_hermitian_member(const AlgebraElement& a, const char* where) {
  if (!a.is_hermitian(1e-10)) throw NotHermitian(std::string(where) + ": observable is not Hermitian");
}

// Splits the sorted values into runs whose neighbours differ by at most threshold.
std::vector<std::vector<Eigen::Index>> cluster(const Eigen::VectorXd& ascending, double threshold) {
  std::vector<std::vector<Eigen::Index>> runs;
  for (Eigen::Index k = 0; k < ascending.size(); ++k) {
    if (runs.empty() || ascending(k) - ascending(runs.back().back()) > threshold) {
      runs.push_back({k});
    } else {
      runs.back().push_back(k);
    }
  }
  return runs;
}

}  // namespace

Matrix canonicalize_basis(const Matrix& basis, const Matrix& generator,
                          std::vector<double>* generator_values) {
  Matrix b = basis;
  const Eigen::Index n = b.cols();
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index r = 0; r < b.rows(); ++r) {
      const Complex z = b(r, c);
      const double mag = std::abs(z);
      if (mag <= kPhaseThreshold) continue;
      if (z.imag() != 0.0 || z.real() <= 0.0) {
        b.col(c) *= std::conj(z) / mag;
        b(r, c) = Complex(mag, 0.0);
      }
      break;
    }
  }

  std::vector<double> keys(static_cast<std::size_t>(n));
  double largest = 0.0;
  for (Eigen::Index c = 0; c < n; ++c) {
    keys[static_cast<std::size_t>(c)] = (b.col(c).adjoint() * generator * b.col(c))(0, 0).real();
    largest = std::max(largest, std::abs(keys[static_cast<std::size_t>(c)]));
  }

  // Rank vectors by clusters of descending generator value.
  std::vector<Eigen::Index> by_key(static_cast<std::size_t>(n));
  std::iota(by_key.begin(), by_key.end(), Eigen::Index{0});
  std::sort(by_key.begin(), by_key.end(), [&](Eigen::Index i, Eigen::Index j) {
    const double ki = keys[static_cast<std::size_t>(i)];
    const double kj = keys[static_cast<std::size_t>(j)];
    if (ki != kj) return ki > kj;
    return lexicographic_less(b, i, j);
  });
  const double tie = kMembershipTolerance * std::max(1.0, largest);
  std::vector<std::size_t> rank(static_cast<std::size_t>(n), 0);
  for (std::size_t pos = 1; pos < by_key.size(); ++pos) {
    const auto prev = static_cast<std::size_t>(by_key[pos - 1]);
    const auto cur = static_cast<std::size_t>(by_key[pos]);
    rank[cur] = rank[prev] + (keys[prev] - keys[cur] > tie ? 1 : 0);
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    const auto ri = rank[static_cast<std::size_t>(i)];
    const auto rj = rank[static_cast<std::size_t>(j)];
    if (ri != rj) return ri < rj;
    return lexicographic_less(b, i, j);
  });

  Matrix out(b.rows(), n);
  if (generator_values) generator_values->assign(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index c = 0; c < n; ++c) {
    out.col(c) = b.col(order[static_cast<std::size_t>(c)]);
    if (generator_values) {
      (*generator_values)[static_cast<std::size_t>(c)] =
          keys[static_cast<std::size_t>(order[static_cast<std::size_t>(c)])];
    }
  }
  return out;
}

Eigen::MatrixXd basis_fingerprint(const Matrix& basis) {
  const Matrix& frame = reference_frame(static_cast<std::size_t>(basis.rows()));
  const Eigen::MatrixXd overlaps = (frame.adjoint() * basis).cwiseAbs();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(overlaps.cols()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    for (Eigen::Index r = 0; r < overlaps.rows(); ++r) {
      if (overlaps(r, i) != overlaps(r, j)) return overlaps(r, i) < overlaps(r, j);
    }
    return false;
  });
  Eigen::MatrixXd out(overlaps.rows(), overlaps.cols());
  for (std::size_t c = 0; c < order.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = overlaps.col(order[c]);
  return out;
}

ContextPtr ContextRegistry::find_locked(const AlgebraDescriptor& algebra,
                                        const Eigen::MatrixXd& fp) const {
  for (const auto& [id, ctx] : contexts_) {
    if (!(*ctx->algebra == algebra)) continue;
    if (fingerprints_match(ctx->fingerprint, fp, tolerance_)) return ctx;
  }
  return nullptr;
}

ContextPtr ContextRegistry::register_basis(const AlgebraPtr& algebra, const Matrix& basis,
                                           const Matrix& generator) {
  const auto n = static_cast<Eigen::Index>(algebra->dimension());
  if (basis.rows() != n || basis.cols() != n || generator.rows() != n || generator.cols() != n) {
    throw DimensionMismatch("register_basis: basis and generator must be " + std::to_string(n) +
                            "x" + std::to_string(n));
  }
  const double defect = (basis.adjoint() * basis - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
  if (defect > 1e-10) {
    throw InvalidArgument("register_basis: basis is not orthonormal (defect " +
                          std::to_string(defect) + ")");
  }
  auto ctx = std::make_shared<Context>();
  ctx->algebra = algebra;
  ctx->basis = canonicalize_basis(basis, generator, &ctx->generator_values);
  ctx->fingerprint = basis_fingerprint(ctx->basis);

  std::unique_lock lock(mutex_);
  if (auto existing = find_locked(*algebra, ctx->fingerprint)) return existing;
  ctx->id = contexts_.size();
  contexts_.emplace(ctx->id, ctx);
  return ctx;
}

ContextPtr ContextRegistry::get(ContextId id) const {
  std::shared_lock lock(mutex_);
  auto it = contexts_.find(id);
  if (it == contexts_.end()) throw UnknownContext("no context with id " + std::to_string(id));
  return it->second;
}

ContextPtr ContextRegistry::find(const AlgebraPtr& algebra, const Matrix& basis) const {
  const auto fp = basis_fingerprint(basis);
  std::shared_lock lock(mutex_);
  return find_locked(*algebra, fp);
}

std::size_t ContextRegistry::size() const {
  std::shared_lock lock(mutex_);
  return contexts_.size();
}

ContextPtr context_from_observable(const AlgebraElement& a, ContextRegistry& registry) {
  require_hermitian_member(a, "context_from_observable");
  const auto eig = block_eigensystem(a);
  double largest = 0.0;
  for (double v : eig.eigenvalues) largest = std::max(largest, std::abs(v));
  const double threshold = kDefaultGroupingTolerance * largest;
  for (std::size_t k = 1; k < eig.eigenvalues.size(); ++k) {
    if (eig.block[k] != eig.block[k - 1]) continue;
    if (eig.eigenvalues[k] - eig.eigenvalues[k - 1] <= threshold) {
      throw DegenerateSpectrum(
          "context_from_observable: degenerate eigenvalue " +
          std::to_string(eig.eigenvalues[k]) +
          "; supply a completing commuting family to select a maximal context");
    }
  }
  return registry.register_basis(a.algebra(), eig.eigenvectors, a.matrix());
}

ContextPtr context_from_family(std::span<const AlgebraElement> family, ContextRegistry& registry) {
  if (family.empty()) throw InvalidArgument("context_from_family: empty family");
  for (const auto& f : family) {
    require_same_algebra(family.front(), f, "context_from_family");
    require_hermitian_member(f, "context_from_family");
  }
  for (std::size_t i = 0; i < family.size(); ++i) {
    for (std::size_t j = i + 1; j < family.size(); ++j) {
      const double scale = std::max(1.0, family[i].max_abs() * family[j].max_abs());
      const double c = operator_norm(commutator(family[i], family[j]).matrix());
      if (c > 1e-10 * scale) {
        throw NonCommutingFamily("context_from_family: members " + std::to_string(i) + " and " +
                                 std::to_string(j) + " do not commute (|[A,B]| = " +
                                 std::to_string(c) + ")");
      }
    }
  }

  const AlgebraPtr& algebra = family.front().algebra();
  const auto n = static_cast<Eigen::Index>(algebra->dimension());
  Matrix basis = Matrix::Zero(n, n);
  for (std::size_t b = 0; b < algebra->block_count(); ++b) {
    const auto off = static_cast<Eigen::Index>(algebra->block_offset(b));
    const auto size = static_cast<Eigen::Index>(algebra->block_sizes()[b]);
    Matrix v = Matrix::Identity(size, size);
    std::vector<std::vector<Eigen::Index>> groups(1);
    for (Eigen::Index k = 0; k < size; ++k) groups.front().push_back(k);

    for (const auto& f : family) {
      const Matrix fb = f.matrix().block(off, off, size, size);
      const double threshold = kDefaultGroupingTolerance * std::max(1.0, f.max_abs());
      std::vector<std::vector<Eigen::Index>> refined;
      for (const auto& g : groups) {
        if (g.size() == 1) {
          refined.push_back(g);
          continue;
        }
        const auto gs = static_cast<Eigen::Index>(g.size());
        Matrix vg(size, gs);
        for (Eigen::Index c = 0; c < gs; ++c) vg.col(c) = v.col(g[static_cast<std::size_t>(c)]);
        Matrix sub = vg.adjoint() * fb * vg;
        Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (sub + sub.adjoint()));
        const Matrix rotated = vg * solver.eigenvectors();
        for (Eigen::Index c = 0; c < gs; ++c) v.col(g[static_cast<std::size_t>(c)]) = rotated.col(c);
        for (const auto& run : cluster(solver.eigenvalues(), threshold)) {
          std::vector<Eigen::Index> sub_group;
          for (Eigen::Index r : run) sub_group.push_back(g[static_cast<std::size_t>(r)]);
          refined.push_back(std::move(sub_group));
        }
      }
      groups = std::move(refined);
    }
    for (const auto& g : groups) {
      if (g.size() > 1) {
        throw DegenerateSpectrum("context_from_family: family is jointly degenerate (" +
                                 std::to_string(g.size()) +
                                 "-dimensional joint eigenspace); add a completing observable");
      }
    }
    basis.block(off, off, size, size) = v;
  }
  return registry.register_basis(algebra, basis, family.front().matrix());
}

bool contains(const Context& ctx, const AlgebraElement& a) {
  if (a.dimension() != ctx.dimension()) {
    throw DimensionMismatch("contains: observable and context dimensions differ");
  }
  Matrix d = ctx.basis.adjoint() * a.matrix() * ctx.basis;
  d.diagonal().setZero();
  const double off = d.size() == 0 ? 0.0 : d.cwiseAbs().maxCoeff();
  return off <= kMembershipTolerance * std::max(1.0, a.max_abs());
}

AlgebraElement interpolated_generator(const AlgebraElement& a1, const AlgebraElement& a2,
                                      double alpha) {
  require_same_algebra(a1, a2, "interpolated_generator");
  return std::cos(alpha) * a1 + Complex(std::sin(alpha)) * a2;
}

OverlapComponents overlap_components(const Context& from, const Context& to) {
  const std::size_t n = from.dimension();
  if (to.dimension() != n) throw DimensionMismatch("overlap_components: dimensions differ");
  std::vector<std::size_t> parent(2 * n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto root = [&parent](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  const Eigen::MatrixXd overlaps = (from.basis.adjoint() * to.basis).cwiseAbs();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (overlaps(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > kContextTolerance) {
        parent[root(i)] = root(n + j);
      }
    }
  }
  OverlapComponents out;
  out.from_label.resize(n);
  out.to_label.resize(n);
  std::unordered_map<std::size_t, std::size_t> label;
  auto label_of = [&](std::size_t node) {
    auto [it, inserted] = label.emplace(root(node), label.size());
    return it->second;
  };
  for (std::size_t i = 0; i < n; ++i) out.from_label[i] = label_of(i);
  for (std::size_t j = 0; j < n; ++j) out.to_label[j] = label_of(n + j);
  out.count = label.size();
  return out;
}

}  // namespace qfound
