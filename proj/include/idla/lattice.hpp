#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "idla/core.hpp"

namespace idla {

/// A point of the lattice Z^D. Ordering is lexicographic on coordinates,
/// which fixes the deterministic iteration order used throughout.
template <int D>
struct Site {
  static_assert(D >= 2, "lattice dimension must be at least 2");
  std::array<std::int32_t, D> c{};

  std::int32_t& operator[](int i) noexcept { return c[static_cast<std::size_t>(i)]; }
  std::int32_t operator[](int i) const noexcept { return c[static_cast<std::size_t>(i)]; }

  friend auto operator<=>(const Site&, const Site&) = default;

  Site operator+(const Site& o) const noexcept {
    Site r;
    for (int i = 0; i < D; ++i) r.c[i] = c[i] + o.c[i];
    return r;
  }
  Site operator-(const Site& o) const noexcept {
    Site r;
    for (int i = 0; i < D; ++i) r.c[i] = c[i] - o.c[i];
    return r;
  }
};

template <int D>
std::int64_t norm2(const Site<D>& s) noexcept {
  std::int64_t q = 0;
  for (int i = 0; i < D; ++i) q += std::int64_t(s.c[i]) * s.c[i];
  return q;
}

template <int D>
std::int64_t dist2(const Site<D>& a, const Site<D>& b) noexcept {
  std::int64_t q = 0;
  for (int i = 0; i < D; ++i) {
    const std::int64_t d = std::int64_t(a.c[i]) - b.c[i];
    q += d * d;
  }
  return q;
}

template <int D>
double norm(const Site<D>& s) noexcept {
  return std::sqrt(static_cast<double>(norm2(s)));
}

template <int D>
struct SiteHash {
  std::size_t operator()(const Site<D>& s) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ull;
    for (int i = 0; i < D; ++i) {
      std::uint64_t z = static_cast<std::uint64_t>(static_cast<std::uint32_t>(s.c[i]));
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
      h = (h ^ z) * 0x94d049bb133111ebull;
    }
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

template <int D>
using SiteSet = std::unordered_set<Site<D>, SiteHash<D>>;

template <int D>
std::string to_string(const Site<D>& s) {
  std::string out = "(";
  for (int i = 0; i < D; ++i) {
    if (i) out += ",";
    out += std::to_string(s.c[i]);
  }
  return out + ")";
}

/// Strict open-ball membership test against a real radius. Squared integer
/// norms are compared with the squared radius; when the radius is an exact
/// integer the comparison is done in 64-bit integer arithmetic so that sites
/// at exactly the boundary norm are never misclassified by rounding.
class StrictRadius {
public:
  explicit StrictRadius(double r) noexcept : r_(r) {
    if (r > 0.0 && r < 3.0e9 && r == std::floor(r)) {
      integral_ = true;
      const std::int64_t ri = static_cast<std::int64_t>(r);
      r2_int_ = ri * ri;
    }
    r2_ = r * r;
  }

  /// Radius sqrt(q) for integer q, compared exactly in squared form.
  static StrictRadius from_squared_norm(std::int64_t q) noexcept {
    StrictRadius r(std::sqrt(static_cast<double>(std::max<std::int64_t>(q, 0))));
    r.integral_ = true;
    r.r2_int_ = std::max<std::int64_t>(q, 0);
    r.r2_ = static_cast<double>(r.r2_int_);
    return r;
  }

  double value() const noexcept { return r_; }
  double squared() const noexcept { return r2_; }

  /// true iff a site with this squared norm lies in the open ball.
  bool contains_norm2(std::int64_t q) const noexcept {
    if (r_ <= 0.0) return false;
    if (integral_) return q < r2_int_;
    return static_cast<double>(q) < r2_;
  }

private:
  double r_;
  double r2_ = 0.0;
  std::int64_t r2_int_ = 0;
  bool integral_ = false;
};

template <int D>
bool in_ball(const Site<D>& y, const Site<D>& center, const StrictRadius& r) noexcept {
  return r.contains_norm2(dist2(y, center));
}

template <int D>
bool in_ball(const Site<D>& y, const Site<D>& center, double r) noexcept {
  return in_ball(y, center, StrictRadius(r));
}

/// Largest coordinate magnitude a site in the open ball of radius r may have.
inline std::int32_t ball_coord_bound(double r) noexcept {
  if (r <= 0.0) return -1;
  const double m = std::ceil(r) - 1.0;
  return static_cast<std::int32_t>(std::max(0.0, m));
}

namespace detail {

template <int D, class Fn>
void ball_visit_rec(const Site<D>& center, const StrictRadius& r, int axis,
                    Site<D>& offset, std::int64_t partial, Fn&& fn) {
  const double rem = r.squared() - static_cast<double>(partial);
  if (rem <= 0.0) return;
  std::int32_t m = static_cast<std::int32_t>(std::ceil(std::sqrt(rem)));
  if (axis == D - 1) {
    for (std::int32_t c = -m; c <= m; ++c) {
      const std::int64_t q = partial + std::int64_t(c) * c;
      if (r.contains_norm2(q)) {
        offset[axis] = c;
        fn(center + offset, q);
      }
    }
    return;
  }
  for (std::int32_t c = -m; c <= m; ++c) {
    const std::int64_t q = partial + std::int64_t(c) * c;
    if (static_cast<double>(q) >= r.squared() + 1.0) continue;
    offset[axis] = c;
    ball_visit_rec(center, r, axis + 1, offset, q, fn);
  }
}

}  // namespace detail

/// Visits every lattice site of the open ball B(center, r) in lexicographic
/// order of coordinates; fn(site, squared_distance_to_center).
template <int D, class Fn>
void visit_ball(const Site<D>& center, const StrictRadius& r, Fn&& fn) {
  if (r.value() <= 0.0) return;
  Site<D> offset{};
  detail::ball_visit_rec(center, r, 0, offset, 0, fn);
}

template <int D, class Fn>
void visit_ball(const Site<D>& center, double radius, Fn&& fn) {
  visit_ball<D>(center, StrictRadius(radius), fn);
}

/// B(center, r) ∩ Z^D as a lexicographically sorted list.
template <int D>
std::vector<Site<D>> ball_sites(const Site<D>& center, double radius) {
  std::vector<Site<D>> out;
  visit_ball<D>(center, radius, [&](const Site<D>& s, std::int64_t) { out.push_back(s); });
  return out;
}

template <int D>
std::int64_t ball_site_count(double radius) {
  std::int64_t n = 0;
  visit_ball<D>(Site<D>{}, radius, [&](const Site<D>&, std::int64_t) { ++n; });
  return n;
}

/// External boundary: sites outside the region with a unit neighbor inside.
template <int D>
std::vector<Site<D>> boundary(const std::vector<Site<D>>& region) {
  SiteSet<D> inside(region.begin(), region.end());
  SiteSet<D> out;
  for (const auto& s : region) {
    for (int a = 0; a < D; ++a) {
      for (int sign : {-1, +1}) {
        Site<D> nb = s;
        nb[a] += sign;
        if (!inside.count(nb)) out.insert(nb);
      }
    }
  }
  std::vector<Site<D>> v(out.begin(), out.end());
  std::sort(v.begin(), v.end());
  return v;
}

/// Membership test for ∂B(center, r) without materializing the set: the site
/// is outside the open ball and its norm-minimizing unit neighbor is inside.
template <int D>
bool on_ball_boundary(const Site<D>& y, const Site<D>& center, const StrictRadius& r) noexcept {
  const std::int64_t q = dist2(y, center);
  if (r.contains_norm2(q)) return false;
  std::int64_t maxabs = 0;
  for (int i = 0; i < D; ++i)
    maxabs = std::max(maxabs, std::int64_t(std::abs(std::int64_t(y.c[i]) - center.c[i])));
  if (maxabs == 0) return false;  // y == center and the ball is empty
  return r.contains_norm2(q - 2 * maxabs + 1);
}

/// ∂B(center, r) as a sorted list (the discretization used for all spheres
/// Σ: the external boundary of the open lattice ball).
template <int D>
std::vector<Site<D>> sphere_sites(const Site<D>& center, double radius) {
  const StrictRadius r(radius);
  std::vector<Site<D>> out;
  // every boundary site has norm < radius + 1 (it has a neighbor inside)
  visit_ball<D>(center, radius + 1.0, [&](const Site<D>& s, std::int64_t) {
    if (on_ball_boundary(s, center, r)) out.push_back(s);
  });
  return out;
}

enum class ShellMode { inner, outward, inward };

/// Concentric shell partitions. Three layouts are used:
///   inner   — S_0 = B(0,h), S_k = B(0,(k+1)h) \ B(0,kh), Σ_k = ∂B(0,kh);
///   outward — S_k = B(0,n+2(k+1)h) \ B(0,n+2kh),  Σ_k = ∂B(0,n+(2k+1)h);
///   inward  — S_k = B(0,2R-2(k-1)h) \ B(0,2R-2kh), Σ_k = ∂B(0,2R-(2k-1)h),
///             k = 1..R/2h with h adjusted upward so R/2h is an integer.
template <int D>
struct ShellPartition {
  ShellMode mode;
  double base = 0.0;    // n for inner/outward, R for inward
  double height = 0.0;  // adjusted height
  int shell_count = 0;  // inward: R/2h; otherwise a configured cap

  static ShellPartition inner(double n, double h, int shells) {
    require_height(h);
    return {ShellMode::inner, n, h, shells};
  }
  static ShellPartition outward(double n, double h, int shells) {
    require_height(h);
    return {ShellMode::outward, n, h, shells};
  }
  static ShellPartition inward(double R, double h_request) {
    require_height(h_request);
    const int m = static_cast<int>(std::floor(R / (2.0 * h_request)));
    if (m < 1)
      throw_precondition("PreconditionViolated: inward partition needs h <= R/2 (R=" +
                         std::to_string(R) + ", h=" + std::to_string(h_request) + ")");
    const double h = R / (2.0 * m);
    return {ShellMode::inward, R, h, m};
  }

  int first_shell() const noexcept { return mode == ShellMode::inward ? 1 : 0; }

  double shell_outer_radius(int k) const {
    switch (mode) {
      case ShellMode::inner: return (k + 1) * height;
      case ShellMode::outward: return base + 2.0 * (k + 1) * height;
      case ShellMode::inward: return 2.0 * base - 2.0 * (k - 1) * height;
    }
    return 0.0;
  }
  double shell_inner_radius(int k) const {
    switch (mode) {
      case ShellMode::inner: return k == 0 ? 0.0 : k * height;
      case ShellMode::outward: return base + 2.0 * k * height;
      case ShellMode::inward: return 2.0 * base - 2.0 * k * height;
    }
    return 0.0;
  }
  double sphere_radius(int k) const {
    switch (mode) {
      case ShellMode::inner: return k * height;
      case ShellMode::outward: return base + (2.0 * k + 1.0) * height;
      case ShellMode::inward: return 2.0 * base - (2.0 * k - 1.0) * height;
    }
    return 0.0;
  }

  std::vector<Site<D>> shell(int k) const {
    const StrictRadius inner_r(shell_inner_radius(k));
    std::vector<Site<D>> out;
    visit_ball<D>(Site<D>{}, shell_outer_radius(k), [&](const Site<D>& s, std::int64_t q) {
      if (!inner_r.contains_norm2(q)) out.push_back(s);
    });
    return out;
  }

  std::vector<Site<D>> sphere(int k) const { return sphere_sites<D>(Site<D>{}, sphere_radius(k)); }

  /// Tile T(z) = B(z, h/2) ∩ Σ_k for a tile center z on Σ_k.
  std::vector<Site<D>> tile(int k, const Site<D>& z) const {
    const StrictRadius sig(sphere_radius(k));
    std::vector<Site<D>> out;
    visit_ball<D>(z, height / 2.0, [&](const Site<D>& s, std::int64_t) {
      if (on_ball_boundary(s, Site<D>{}, sig)) out.push_back(s);
    });
    return out;
  }

  /// Cell C(z) = B(z, h) ∩ S_k.
  std::vector<Site<D>> cell(int k, const Site<D>& z) const {
    const StrictRadius inner_r(shell_inner_radius(k));
    const StrictRadius outer_r(shell_outer_radius(k));
    std::vector<Site<D>> out;
    visit_ball<D>(z, height, [&](const Site<D>& s, std::int64_t) {
      const std::int64_t q = norm2(s);
      if (outer_r.contains_norm2(q) && !inner_r.contains_norm2(q)) out.push_back(s);
    });
    return out;
  }

private:
  static void require_height(double h) {
    if (!(h >= 1.0))
      throw_precondition("PreconditionViolated: shell height must be >= 1, got " +
                         std::to_string(h));
  }
};

/// Greedy lexicographic thinning of tile centers to a maximal subset with
/// pairwise distance >= min_sep.
template <int D>
std::vector<Site<D>> thin_centers(const std::vector<Site<D>>& sites, double min_sep) {
  std::vector<Site<D>> sorted = sites;
  std::sort(sorted.begin(), sorted.end());
  const double sep2 = min_sep * min_sep;
  std::vector<Site<D>> kept;
  for (const auto& s : sorted) {
    bool ok = true;
    for (const auto& k : kept) {
      if (static_cast<double>(dist2(s, k)) < sep2) {
        ok = false;
        break;
      }
    }
    if (ok) kept.push_back(s);
  }
  return kept;
}

/// Dense, auto-growing occupancy flags over a bounding box. The growth inner
/// loop is an occupancy test per step, so this is a byte array addressed by
/// box coordinates rather than a hash set.
template <int D>
class OccupancyGrid {
public:
  explicit OccupancyGrid(std::int32_t half_extent = 8) {
    for (int i = 0; i < D; ++i) {
      lo_[i] = -half_extent;
      hi_[i] = half_extent;
    }
    allocate();
  }

  bool contains(const Site<D>& s) const noexcept {
    const std::int64_t idx = index_of(s);
    return idx >= 0 && cells_[static_cast<std::size_t>(idx)] != 0;
  }

  /// Inserts the site, growing the box as needed. Returns false if already set.
  bool insert(const Site<D>& s) {
    std::int64_t idx = index_of(s);
    if (idx < 0) {
      grow_to(s);
      idx = index_of(s);
    }
    auto& cell = cells_[static_cast<std::size_t>(idx)];
    if (cell) return false;
    cell = 1;
    ++count_;
    return true;
  }

  std::int64_t size() const noexcept { return count_; }

private:
  std::int64_t index_of(const Site<D>& s) const noexcept {
    std::int64_t idx = 0;
    for (int i = 0; i < D; ++i) {
      const std::int32_t c = s.c[i];
      if (c < lo_[i] || c > hi_[i]) return -1;
      idx = idx * (std::int64_t(hi_[i]) - lo_[i] + 1) + (c - lo_[i]);
    }
    return idx;
  }

  void allocate() {
    std::int64_t n = 1;
    for (int i = 0; i < D; ++i) n *= std::int64_t(hi_[i]) - lo_[i] + 1;
    cells_.assign(static_cast<std::size_t>(n), 0);
  }

  void grow_to(const Site<D>& s) {
    std::array<std::int32_t, D> lo = lo_, hi = hi_;
    for (int i = 0; i < D; ++i) {
      const std::int32_t span = hi_[i] - lo_[i] + 1;
      while (s.c[i] < lo[i]) lo[i] -= span;
      while (s.c[i] > hi[i]) hi[i] += span;
    }
    OccupancyGrid bigger;
    bigger.lo_ = lo;
    bigger.hi_ = hi;
    bigger.allocate();
    // re-map existing cells
    Site<D> p;
    remap_rec(bigger, p, 0);
    lo_ = lo;
    hi_ = hi;
    cells_ = std::move(bigger.cells_);
  }

  void remap_rec(OccupancyGrid& dst, Site<D>& p, int axis) {
    if (axis == D) {
      const std::int64_t idx = dst.index_of(p);
      if (idx >= 0 && contains(p)) dst.cells_[static_cast<std::size_t>(idx)] = 1;
      return;
    }
    for (std::int32_t c = lo_[axis]; c <= hi_[axis]; ++c) {
      p.c[axis] = c;
      remap_rec(dst, p, axis + 1);
    }
  }

  std::array<std::int32_t, D> lo_{};
  std::array<std::int32_t, D> hi_{};
  std::vector<std::uint8_t> cells_;
  std::int64_t count_ = 0;
};

}  // namespace idla
