#pragma once

// Harmonic oscillator on a truncated Fock space and its vacuum Green's
// functions, computed three ways: Wick pairing of the closed-form propagator,
// direct time-ordered products on the truncation, and derivatives of the
// generating functional Z(j).

#include "qfound/algebra.hpp"
#include "qfound/gns.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace qfound {

inline constexpr std::size_t kMaxGreenOrder = 12;

struct FockTruncation {
  std::size_t cutoff = 0;
  double omega = 0.0;
  Matrix lowering;     // a-
  Matrix raising;      // a+
  Matrix number;       // a+ a-
  Matrix position;     // (a- + a+) / sqrt(2 omega)
  Matrix momentum;     // i sqrt(omega / 2) (a+ - a-)
  Matrix hamiltonian;  // omega (a+ a- + 1/2)

  /// Throws InvalidArgument for cutoff < 2 or omega <= 0.
  static FockTruncation make(std::size_t cutoff, double omega);
};

/// D^c(t) = i exp(-i omega |t|) / (2 omega). Throws InvalidArgument for omega <= 0.
Complex feynman_propagator(double t, double omega);

/// G(t1, t2) = exp(-i omega |t1 - t2|) / (2 omega). Throws InvalidArgument for omega <= 0.
Complex two_point(double t1, double t2, double omega);

/// (n-1)!! for even n, 0 for odd n.
std::size_t matching_count(std::size_t n);

/// Calls `visit` with every perfect matching of {0..n-1}, pairing the smallest
/// unmatched index first. Returns the number of matchings visited.
std::size_t for_each_perfect_matching(
    std::size_t n, const std::function<void(std::span<const std::pair<std::size_t, std::size_t>>)>& visit);

/// Sum over perfect matchings of products of two_point. Zero for odd n.
/// Throws InvalidArgument for n > 12 or omega <= 0.
Complex wick_green(std::span<const double> times, double omega);

/// <0| T Q(t_1) ... Q(t_n) |0> on the truncation. Throws InvalidArgument if
/// cutoff < n + 2.
Complex fock_oracle_green(std::span<const double> times, double omega, std::size_t cutoff);
Complex fock_oracle_green(std::span<const double> times, double omega);

struct ProjectorLimit {
  Matrix approximation;   // exp(-r a+ a-)
  double deviation = 0.0; // |approximation - p_0|, equal to exp(-r)
};

/// Throws InvalidArgument for r < 0 or cutoff < 2.
ProjectorLimit ground_projector_limit(double r, std::size_t cutoff);

/// |exp(-r N) H exp(-r N) - (omega / 2) exp(-2 r N)| on the truncation.
double sandwich_residual(double r, std::size_t cutoff, double omega);

struct AuxiliaryLimit {
  double magnitude = 0.0;  // |Psi(exp(-r1 N) (a+)^k (a-)^l exp(-r2 N))|
  double constant = 0.0;   // |(a+)^k (a-)^l| on the truncation
  double bound = 0.0;      // constant * exp(-r1 k - r2 l)
};

/// Throws InvalidArgument when k = l = 0 or psi is not on the cutoff x cutoff
/// full algebra.
AuxiliaryLimit auxiliary_limit_check(std::size_t k, std::size_t l, double r1, double r2,
                                     std::size_t cutoff, const StateFunctional& psi);

struct TimeGrid {
  double t_min = 0.0;
  double t_max = 0.0;
  std::size_t points = 0;

  /// Throws InvalidArgument unless points >= 2 and t_max > t_min.
  void validate() const;
  double step() const { return (t_max - t_min) / static_cast<double>(points - 1); }
  double time(std::size_t k) const { return t_min + step() * static_cast<double>(k); }
  /// Trapezoid weight of node k.
  double weight(std::size_t k) const;
  /// Index of the node at t. Throws InvalidArgument when t is off the grid.
  std::size_t index_of(double t) const;
};

struct SourceFunction {
  TimeGrid grid;
  std::vector<double> samples;  // j(t_k)
};

/// Exponent W of Z(j) = exp(W), W = (i/2) sum_ab w_a w_b j_a D^c(t_a - t_b) j_b.
/// Throws GridTooCoarse when step > 0.1 / omega.
Complex generating_exponent(const SourceFunction& j, double omega);
Complex generating_functional(const SourceFunction& j, double omega);

/// (1/i)^n d^n Z / ds_1 ... ds_n at s = 0 for point sources s_k delta(t - times[k]),
/// by mixed central differences with step h on every strength.
Complex functional_derivative_green(const TimeGrid& grid, std::span<const double> times, double omega,
                                    double h);

}  // namespace qfound
