#include "qfound/ks_search.hpp"

#include "qfound/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace qfound {

RaySetStructure analyze_rays(std::span<const Ray> rays) {
  if (rays.empty()) throw MalformedRaySet("ray set is empty");
  const std::size_t n = rays.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(rays[i].norm() - 1.0) > 1e-9) {
      throw MalformedRaySet("ray " + std::to_string(i) + " is not a unit vector");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (rays[i].cross(rays[j]).norm() < kOrthogonalityTolerance) {
        throw MalformedRaySet("rays " + std::to_string(j) + " and " + std::to_string(i) +
                              " are parallel");
      }
    }
  }
  RaySetStructure s;
  std::vector<std::vector<bool>> orth(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(rays[i].dot(rays[j])) < kOrthogonalityTolerance) {
        orth[i][j] = orth[j][i] = true;
        s.orthogonal.emplace_back(i, j);
      }
    }
  }
  for (const auto& [i, j] : s.orthogonal) {
    for (std::size_t k = j + 1; k < n; ++k) {
      if (orth[i][k] && orth[j][k]) s.triads.push_back({i, j, k});
    }
  }
  if (s.triads.empty()) throw MalformedRaySet("ray set contains no complete orthogonal triad");
  return s;
}

bool satisfies_ks_constraints(const RaySetStructure& structure, std::span<const int> values) {
  for (const auto& t : structure.triads) {
    int zeros = 0;
    for (std::size_t r : t) zeros += values[r] == 0;
    if (zeros != 1) return false;
  }
  for (const auto& [i, j] : structure.orthogonal) {
    if (values[i] == 0 && values[j] == 0) return false;
  }
  return std::all_of(values.begin(), values.end(), [](int v) { return v == 0 || v == 1; });
}

namespace {

class Backtracker {
 public:
  Backtracker(std::size_t n, const RaySetStructure& s) : values_(n, -1), triads_of_(n), partners_(n) {
    for (std::size_t t = 0; t < s.triads.size(); ++t) {
      for (std::size_t r : s.triads[t]) triads_of_[r].push_back(s.triads[t]);
    }
    for (const auto& [i, j] : s.orthogonal) {
      partners_[i].push_back(j);
      partners_[j].push_back(i);
    }
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    // Most constrained rays first.
    std::stable_sort(order_.begin(), order_.end(), [this](std::size_t a, std::size_t b) {
      return triads_of_[a].size() + partners_[a].size() > triads_of_[b].size() + partners_[b].size();
    });
  }

  bool run(std::size_t depth) {
    if (depth == order_.size()) return true;
    const std::size_t r = order_[depth];
    for (int v : {0, 1}) {
      ++nodes_;
      values_[r] = v;
      if (consistent(r) && run(depth + 1)) return true;
    }
    values_[r] = -1;
    return false;
  }

  std::uint64_t nodes() const { return nodes_; }
  const std::vector<int>& values() const { return values_; }

 private:
  bool consistent(std::size_t r) const {
    if (values_[r] == 0) {
      for (std::size_t p : partners_[r]) {
        if (values_[p] == 0) return false;
      }
    }
    for (const auto& t : triads_of_[r]) {
      int zeros = 0;
      int unknown = 0;
      for (std::size_t q : t) {
        zeros += values_[q] == 0;
        unknown += values_[q] < 0;
      }
      if (zeros > 1 || (unknown == 0 && zeros == 0)) return false;
    }
    return true;
  }

  std::vector<int> values_;
  std::vector<std::vector<std::array<std::size_t, 3>>> triads_of_;
  std::vector<std::vector<std::size_t>> partners_;
  std::vector<std::size_t> order_;
  std::uint64_t nodes_ = 0;
};

}  // namespace

KsSearchResult ks_noncontextual_search(std::span<const Ray> rays) {
  const RaySetStructure s = analyze_rays(rays);
  KsSearchResult out;
  out.ray_count = rays.size();
  out.triad_count = s.triads.size();
  out.pair_count = s.orthogonal.size();
  Backtracker bt(rays.size(), s);
  if (bt.run(0)) out.assignment = bt.values();
  out.nodes = bt.nodes();
  return out;
}

std::vector<Ray> parse_rays_csv(std::istream& in) {
  std::vector<Ray> rays;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    Ray r;
    std::string extra;
    if (!(fields >> r.x() >> r.y() >> r.z()) || (fields >> extra)) {
      throw MalformedRaySet("line " + std::to_string(line_no) + ": expected three numbers x,y,z");
    }
    const double len = r.norm();
    if (!(len > 0.0) || !std::isfinite(len)) {
      throw MalformedRaySet("line " + std::to_string(line_no) + ": zero or non-finite ray");
    }
    rays.push_back(r / len);
  }
  return rays;
}

std::vector<Ray> load_rays_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open ray file " + path.string());
  return parse_rays_csv(in);
}

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return fnv1a64_hex(buf.str());
}

}  // namespace qfound
