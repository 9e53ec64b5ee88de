#pragma once

// Context-independent {0,1} value assignments for squared spin-1 projections
// along a set of rays. Along every orthogonal triad the squares sum to 2, so
// exactly one ray of each triad carries 0; two orthogonal rays belong to a
// common triad (complete it with their cross product), so they are never both 0.

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qfound {

using Ray = Eigen::Vector3d;

inline constexpr double kOrthogonalityTolerance = 1e-9;

struct RaySetStructure {
  std::vector<std::array<std::size_t, 3>> triads;               // i < j < k
  std::vector<std::pair<std::size_t, std::size_t>> orthogonal;  // i < j
};

/// Throws MalformedRaySet on an empty set, zero or parallel rays, or a set
/// without any complete orthogonal triad.
RaySetStructure analyze_rays(std::span<const Ray> rays);

struct KsSearchResult {
  std::optional<std::vector<int>> assignment;  // value of S_n^2 per ray
  std::uint64_t nodes = 0;
  std::size_t ray_count = 0;
  std::size_t triad_count = 0;
  std::size_t pair_count = 0;

  bool exhausted() const { return !assignment.has_value(); }
};

/// Exhaustive backtracking search. An empty assignment in the result certifies
/// that no admissible assignment exists.
KsSearchResult ks_noncontextual_search(std::span<const Ray> rays);

/// True iff `values` satisfies every triad and orthogonal-pair constraint.
bool satisfies_ks_constraints(const RaySetStructure& structure, std::span<const int> values);

/// Parses "x,y,z" lines; '#' starts a comment. Rays are normalized.
std::vector<Ray> parse_rays_csv(std::istream& in);
std::vector<Ray> load_rays_csv(const std::filesystem::path& path);

/// FNV-1a 64-bit digest as 16 lowercase hex digits.
std::string fnv1a64_hex(std::string_view bytes);
std::string file_checksum(const std::filesystem::path& path);

}  // namespace qfound
