#include "qfound/oscillator.hpp"

#include "qfound/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qfound {

namespace {

void require_positive_omega(double omega) {
  if (!(omega > 0.0) || !std::isfinite(omega)) {
    throw InvalidArgument("oscillator frequency must be positive, got " + std::to_string(omega));
  }
}

}  // namespace

FockTruncation FockTruncation::make(std::size_t cutoff, double omega) {
  require_positive_omega(omega);
  if (cutoff < 2) throw InvalidArgument("Fock cutoff must be at least 2");
  const auto n = static_cast<Eigen::Index>(cutoff);
  FockTruncation f;
  f.cutoff = cutoff;
  f.omega = omega;
  f.lowering = Matrix::Zero(n, n);
  for (Eigen::Index k = 1; k < n; ++k) f.lowering(k - 1, k) = std::sqrt(static_cast<double>(k));
  f.raising = f.lowering.adjoint();
  f.number = f.raising * f.lowering;
  f.position = (f.lowering + f.raising) / std::sqrt(2.0 * omega);
  f.momentum = Complex(0.0, std::sqrt(omega / 2.0)) * (f.raising - f.lowering);
  f.hamiltonian = omega * (f.number + 0.5 * Matrix::Identity(n, n));
  return f;
}

Complex feynman_propagator(double t, double omega) {
  require_positive_omega(omega);
  return Complex(0.0, 1.0) * std::exp(Complex(0.0, -omega * std::abs(t))) / (2.0 * omega);
}

Complex two_point(double t1, double t2, double omega) {
  require_positive_omega(omega);
  return std::exp(Complex(0.0, -omega * std::abs(t1 - t2))) / (2.0 * omega);
}

std::size_t matching_count(std::size_t n) {
  if (n % 2 == 1) return 0;
  std::size_t c = 1;
  for (std::size_t k = n; k > 1; k -= 2) c *= k - 1;
  return c;
}

namespace {

void enumerate_matchings(std::vector<std::size_t>& free, std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                         const std::function<void(std::span<const std::pair<std::size_t, std::size_t>>)>& visit,
                         std::size_t& count) {
  if (free.empty()) {
    ++count;
    visit(pairs);
    return;
  }
  const std::size_t first = free.front();
  for (std::size_t m = 1; m < free.size(); ++m) {
    const std::size_t partner = free[m];
    std::vector<std::size_t> rest;
    rest.reserve(free.size() - 2);
    for (std::size_t q = 1; q < free.size(); ++q) {
      if (q != m) rest.push_back(free[q]);
    }
    pairs.emplace_back(first, partner);
    enumerate_matchings(rest, pairs, visit, count);
    pairs.pop_back();
  }
}

}  // namespace

std::size_t for_each_perfect_matching(
    std::size_t n, const std::function<void(std::span<const std::pair<std::size_t, std::size_t>>)>& visit) {
  if (n % 2 == 1) return 0;
  std::vector<std::size_t> free(n);
  std::iota(free.begin(), free.end(), std::size_t{0});
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::size_t count = 0;
  enumerate_matchings(free, pairs, visit, count);
  return count;
}

Complex wick_green(std::span<const double> times, double omega) {
  require_positive_omega(omega);
  if (times.size() > kMaxGreenOrder) {
    throw InvalidArgument("Green's function order " + std::to_string(times.size()) + " exceeds " +
                          std::to_string(kMaxGreenOrder));
  }
  if (times.size() % 2 == 1) return Complex(0.0);
  Complex total(0.0);
  for_each_perfect_matching(times.size(), [&](std::span<const std::pair<std::size_t, std::size_t>> pairs) {
    Complex term(1.0);
    for (const auto& [a, b] : pairs) term *= two_point(times[a], times[b], omega);
    total += term;
  });
  return total;
}

Complex fock_oracle_green(std::span<const double> times, double omega, std::size_t cutoff) {
  require_positive_omega(omega);
  if (cutoff < times.size() + 2) {
    throw InvalidArgument("Fock cutoff " + std::to_string(cutoff) + " is below n + 2 = " +
                          std::to_string(times.size() + 2));
  }
  const auto f = FockTruncation::make(cutoff, omega);
  std::vector<double> order(times.begin(), times.end());
  std::sort(order.begin(), order.end(), std::greater<>());
  // T Q(t_1)...Q(t_n)|0> with the latest time leftmost: apply the earliest first.
  Vector state = Vector::Zero(static_cast<Eigen::Index>(cutoff));
  state(0) = 1.0;
  const double scale = 1.0 / std::sqrt(2.0 * omega);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const Complex down = std::exp(Complex(0.0, -omega * *it)) * scale;
    const Complex up = std::exp(Complex(0.0, omega * *it)) * scale;
    state = down * (f.lowering * state) + up * (f.raising * state);
  }
  return state(0);
}

Complex fock_oracle_green(std::span<const double> times, double omega) {
  return fock_oracle_green(times, omega, times.size() + 6);
}

ProjectorLimit ground_projector_limit(double r, std::size_t cutoff) {
  if (!(r >= 0.0)) throw InvalidArgument("projector limit parameter must be nonnegative");
  if (cutoff < 2) throw InvalidArgument("Fock cutoff must be at least 2");
  const auto n = static_cast<Eigen::Index>(cutoff);
  ProjectorLimit out;
  out.approximation = Matrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) out.approximation(k, k) = std::exp(-r * static_cast<double>(k));
  Matrix p0 = Matrix::Zero(n, n);
  p0(0, 0) = 1.0;
  out.deviation = operator_norm(out.approximation - p0);
  return out;
}

double sandwich_residual(double r, std::size_t cutoff, double omega) {
  const auto f = FockTruncation::make(cutoff, omega);
  const Matrix e1 = ground_projector_limit(r, cutoff).approximation;
  const Matrix e2 = ground_projector_limit(2.0 * r, cutoff).approximation;
  return operator_norm(e1 * f.hamiltonian * e1 - (omega / 2.0) * e2);
}

AuxiliaryLimit auxiliary_limit_check(std::size_t k, std::size_t l, double r1, double r2,
                                     std::size_t cutoff, const StateFunctional& psi) {
  if (k == 0 && l == 0) throw InvalidArgument("auxiliary limit needs k + l > 0");
  const auto& alg = psi.algebra();
  if (alg->block_count() != 1 || alg->dimension() != cutoff) {
    throw InvalidArgument("functional must live on the full cutoff x cutoff algebra");
  }
  const auto f = FockTruncation::make(cutoff, 1.0);
  const auto n = static_cast<Eigen::Index>(cutoff);
  Matrix m = Matrix::Identity(n, n);
  for (std::size_t q = 0; q < k; ++q) m = m * f.raising;
  for (std::size_t q = 0; q < l; ++q) m = m * f.lowering;
  const Matrix e = ground_projector_limit(r1, cutoff).approximation * m *
                   ground_projector_limit(r2, cutoff).approximation;
  AuxiliaryLimit out;
  out.magnitude = std::abs(psi(AlgebraElement(alg, e)));
  out.constant = operator_norm(m);
  out.bound = out.constant * std::exp(-r1 * static_cast<double>(k) - r2 * static_cast<double>(l));
  return out;
}

void TimeGrid::validate() const {
  if (points < 2) throw InvalidArgument("time grid needs at least 2 points");
  if (!(t_max > t_min) || !std::isfinite(t_min) || !std::isfinite(t_max)) {
    throw InvalidArgument("time grid must be strictly increasing");
  }
}

double TimeGrid::weight(std::size_t k) const {
  return (k == 0 || k + 1 == points) ? 0.5 * step() : step();
}

std::size_t TimeGrid::index_of(double t) const {
  validate();
  const double x = (t - t_min) / step();
  const double nearest = std::round(x);
  if (nearest < 0.0 || nearest > static_cast<double>(points - 1) || std::abs(x - nearest) > 1e-9) {
    throw InvalidArgument("time " + std::to_string(t) + " is not a grid node");
  }
  return static_cast<std::size_t>(nearest);
}

Complex generating_exponent(const SourceFunction& j, double omega) {
  require_positive_omega(omega);
  j.grid.validate();
  if (j.samples.size() != j.grid.points) {
    throw DimensionMismatch("source has " + std::to_string(j.samples.size()) + " samples for " +
                            std::to_string(j.grid.points) + " grid points");
  }
  const double h = j.grid.step();
  if (h > 0.1 / omega) {
    throw GridTooCoarse("grid step " + std::to_string(h) + " exceeds 0.1 / omega = " +
                        std::to_string(0.1 / omega));
  }
  std::vector<std::size_t> support;
  std::vector<double> mass;
  for (std::size_t a = 0; a < j.samples.size(); ++a) {
    if (j.samples[a] != 0.0) {
      support.push_back(a);
      mass.push_back(j.grid.weight(a) * j.samples[a]);
    }
  }
  // D^c depends on |t_a - t_b| = h |a - b| only.
  const std::size_t span = support.empty() ? 0 : support.back() - support.front() + 1;
  std::vector<Complex> kernel(span);
  for (std::size_t d = 0; d < span; ++d) kernel[d] = feynman_propagator(h * static_cast<double>(d), omega);
  Complex acc(0.0);
  for (std::size_t a = 0; a < support.size(); ++a) {
    acc += mass[a] * mass[a] * kernel[0];
    for (std::size_t b = a + 1; b < support.size(); ++b) {
      acc += 2.0 * mass[a] * mass[b] * kernel[support[b] - support[a]];
    }
  }
  return Complex(0.0, 0.5) * acc;
}

Complex generating_functional(const SourceFunction& j, double omega) {
  return std::exp(generating_exponent(j, omega));
}

Complex functional_derivative_green(const TimeGrid& grid, std::span<const double> times, double omega,
                                    double h) {
  require_positive_omega(omega);
  grid.validate();
  if (!(h > 0.0)) throw InvalidArgument("finite-difference step must be positive");
  if (times.size() > kMaxGreenOrder) throw InvalidArgument("Green's function order exceeds 12");
  std::vector<std::size_t> nodes;
  for (double t : times) nodes.push_back(grid.index_of(t));
  const std::size_t n = times.size();
  SourceFunction j{grid, std::vector<double>(grid.points, 0.0)};
  Complex sum(0.0);
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::fill(j.samples.begin(), j.samples.end(), 0.0);
    double sign = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double s = (mask >> k) & 1U ? -1.0 : 1.0;
      sign *= s;
      j.samples[nodes[k]] += s * h / grid.weight(nodes[k]);
    }
    sum += sign * generating_functional(j, omega);
  }
  const Complex derivative = sum / std::pow(2.0 * h, static_cast<double>(n));
  return derivative * std::pow(Complex(0.0, -1.0), static_cast<double>(n));
}

}  // namespace qfound
