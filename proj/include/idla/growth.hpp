#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "idla/lattice.hpp"
#include "idla/rng.hpp"
#include "idla/walk.hpp"

namespace idla {

/// A finite multiset of explorer starting positions (an element of N^{Z^d}).
template <int D>
class Configuration {
public:
  Configuration() = default;

  static Configuration point_mass(const Site<D>& z, std::int64_t count) {
    Configuration c;
    if (count > 0) c.entries_.push_back({z, count});
    return c;
  }

  /// `total` explorers spread evenly over `sites` (lexicographic order), the
  /// division remainder going to the first site unless `remainder_at_origin`.
  static Configuration spread(std::vector<Site<D>> sites, std::int64_t total,
                              bool remainder_at_origin = true) {
    std::sort(sites.begin(), sites.end());
    Configuration c;
    if (sites.empty() || total <= 0) return c;
    const std::int64_t base = total / static_cast<std::int64_t>(sites.size());
    std::int64_t rem = total % static_cast<std::int64_t>(sites.size());
    std::map<Site<D>, std::int64_t> counts;
    for (const auto& s : sites)
      if (base > 0) counts[s] = base;
    if (rem > 0) {
      if (remainder_at_origin) {
        counts[Site<D>{}] += rem;
      } else {
        for (const auto& s : sites) {
          if (rem-- <= 0) break;
          counts[s] += 1;
        }
      }
    }
    for (const auto& [s, k] : counts) c.entries_.push_back({s, k});
    return c;
  }

  void add(const Site<D>& z, std::int64_t count) {
    if (count <= 0) return;
    entries_.push_back({z, count});
    normalize();
  }

  std::int64_t total() const noexcept {
    std::int64_t t = 0;
    for (const auto& e : entries_) t += e.second;
    return t;
  }

  /// Lexicographically sorted (site, multiplicity) pairs.
  const std::vector<std::pair<Site<D>, std::int64_t>>& entries() const noexcept {
    return entries_;
  }

  bool supported_in_ball(const StrictRadius& r) const noexcept {
    for (const auto& e : entries_)
      if (!r.contains_norm2(norm2(e.first))) return false;
    return true;
  }

private:
  void normalize() {
    std::sort(entries_.begin(), entries_.end());
    std::vector<std::pair<Site<D>, std::int64_t>> merged;
    for (const auto& e : entries_) {
      if (!merged.empty() && merged.back().first == e.first)
        merged.back().second += e.second;
      else
        merged.push_back(e);
    }
    entries_ = std::move(merged);
  }

  std::vector<std::pair<Site<D>, std::int64_t>> entries_;
};

template <int D>
struct Settle {
  std::int64_t explorer = 0;
  Site<D> site{};
  std::int64_t tau = 0;
};

/// Result of an aggregation run. Every explorer either settled (one per
/// occupied site) or, in stopped runs, was frozen on the stopping sphere.
template <int D>
struct Cluster {
  std::vector<Settle<D>> settle_order;                       // chronological
  std::vector<std::pair<Site<D>, std::int64_t>> stopped_on_boundary;  // sorted
  OccupancyGrid<D> occupied;
  std::int64_t stopped_total = 0;

  std::int64_t settled_total() const noexcept {
    return static_cast<std::int64_t>(settle_order.size());
  }
  bool contains(const Site<D>& s) const noexcept { return occupied.contains(s); }
};

struct GrowthOptions {
  std::int64_t step_cap = kDefaultStepCap;
};

namespace detail {

template <int D, class VisitFn>
Cluster<D> grow_impl(const Configuration<D>& eta, std::optional<double> stop_radius,
                     std::uint64_t seed, const GrowthOptions& opt, VisitFn&& visit) {
  Cluster<D> cluster;
  std::optional<StrictRadius> stop;
  if (stop_radius) {
    stop.emplace(*stop_radius);
    if (!eta.supported_in_ball(*stop))
      throw_precondition("ConfigOutsideDomain: explorer mass outside B(0,R) with R=" +
                         std::to_string(*stop_radius));
  }
  std::map<Site<D>, std::int64_t> stopped;
  std::int64_t k = 0;
  for (const auto& [start, count] : eta.entries()) {
    for (std::int64_t m = 0; m < count; ++m, ++k) {
      RandomSource rng(seed, static_cast<std::uint64_t>(k));
      Site<D> pos = start;
      std::int64_t t = 0;
      for (;;) {
        visit(k, pos, t);
        if (stop && !stop->contains_norm2(norm2(pos))) {
          ++stopped[pos];
          ++cluster.stopped_total;
          break;
        }
        if (!cluster.occupied.contains(pos)) {
          cluster.occupied.insert(pos);
          cluster.settle_order.push_back({k, pos, t});
          break;
        }
        if (t >= opt.step_cap)
          throw_budget("StepCapExceeded: explorer " + std::to_string(k) + " exceeded " +
                       std::to_string(opt.step_cap) + " steps");
        step_site(pos, rng);
        ++t;
      }
    }
  }
  cluster.stopped_on_boundary.assign(stopped.begin(), stopped.end());
  return cluster;
}

}  // namespace detail

/// Internal DLA: explorers walk from eta (processed in lexicographic site
/// order, stream id = explorer index) and settle on the first unoccupied
/// site. tau is the step count along the explorer's own trajectory.
template <int D>
Cluster<D> grow(const Configuration<D>& eta, std::uint64_t seed, const GrowthOptions& opt = {}) {
  return detail::grow_impl<D>(eta, std::nullopt, seed, opt,
                              [](std::int64_t, const Site<D>&, std::int64_t) {});
}

/// Stopped growth: explorers are frozen on the first site outside B(0,R).
template <int D>
Cluster<D> grow_stopped(const Configuration<D>& eta, double R, std::uint64_t seed,
                        const GrowthOptions& opt = {}) {
  return detail::grow_impl<D>(eta, R, seed, opt,
                              [](std::int64_t, const Site<D>&, std::int64_t) {});
}

/// Smallest squared norm among unoccupied sites (the exact form of the inner
/// error: n - delta_I is the norm of the closest hole).
template <int D>
std::int64_t min_missing_norm2(const Cluster<D>& cluster, double scan_radius) {
  std::int64_t best = -1;
  for (;;) {
    visit_ball<D>(Site<D>{}, scan_radius, [&](const Site<D>& s, std::int64_t q) {
      if ((best < 0 || q < best) && !cluster.contains(s)) best = q;
    });
    if (best >= 0) return best;
    scan_radius = scan_radius * 2.0 + 2.0;
  }
}

/// Error radii in exact squared-norm form plus the real-valued view; the
/// exact form avoids float ties at ball boundaries.
struct ErrorRadii {
  double inner = 0.0;               // delta_I(n), clamped to [0, n]
  double outer = 0.0;               // delta_O(n), clamped at 0
  std::int64_t inner_norm2 = 0;     // squared norm of the closest hole
  std::int64_t outer_norm2 = 0;     // squared norm of the farthest occupied site
};

template <int D>
ErrorRadii error_radii(const Cluster<D>& cluster, double n) {
  ErrorRadii e;
  e.inner_norm2 = min_missing_norm2(cluster, n + 2.0);
  for (const auto& s : cluster.settle_order) e.outer_norm2 = std::max(e.outer_norm2, norm2(s.site));
  e.inner = std::clamp(n - std::sqrt(static_cast<double>(e.inner_norm2)), 0.0, n);
  e.outer = std::max(0.0, std::sqrt(static_cast<double>(e.outer_norm2)) - n);
  return e;
}

/// delta_I(n) = n - sup{ r >= 0 : B(0,r) subset of cluster }, clamped to [0, n].
template <int D>
double inner_error(const Cluster<D>& cluster, double n) {
  return error_radii(cluster, n).inner;
}

/// delta_O(n) = inf{ r : cluster subset of B(0,r) } - n, clamped at 0.
template <int D>
double outer_error(const Cluster<D>& cluster, double n) {
  return error_radii(cluster, n).outer;
}

enum class HitMode { walkers_M, explorers_W };

template <int D>
struct HitCountResult {
  std::vector<std::int64_t> counts;  // parallel to the target list
  Cluster<D> cluster;                // populated in explorer mode
};

/// W/M observables: the number of walks (mode M) or explorers of a stopped
/// aggregation (mode W) started from eta that hit each target when or before
/// exiting B(0,R). Each trajectory counts at most once per target; for
/// boundary targets this is the exit-site law.
template <int D>
HitCountResult<D> count_hits(const Configuration<D>& eta, double R,
                             const std::vector<Site<D>>& targets, HitMode mode,
                             std::uint64_t seed, const GrowthOptions& opt = {}) {
  const StrictRadius ball(R);
  std::unordered_map<Site<D>, int, SiteHash<D>> index;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto& z = targets[i];
    if (!ball.contains_norm2(norm2(z)) && !on_ball_boundary(z, Site<D>{}, ball))
      throw_precondition("PreconditionViolated: target " + to_string(z) +
                         " outside B(0,R) and its boundary");
    index.emplace(z, static_cast<int>(i));
  }
  HitCountResult<D> result;
  result.counts.assign(targets.size(), 0);
  std::vector<std::int64_t> last_hit(targets.size(), -1);
  auto record = [&](std::int64_t walk_id, const Site<D>& s) {
    auto it = index.find(s);
    if (it == index.end()) return;
    auto& seen = last_hit[static_cast<std::size_t>(it->second)];
    if (seen != walk_id) {
      seen = walk_id;
      ++result.counts[static_cast<std::size_t>(it->second)];
    }
  };

  if (mode == HitMode::explorers_W) {
    result.cluster = detail::grow_impl<D>(
        eta, R, seed, opt,
        [&](std::int64_t k, const Site<D>& s, std::int64_t) { record(k, s); });
    return result;
  }

  std::int64_t k = 0;
  for (const auto& [start, count] : eta.entries()) {
    for (std::int64_t m = 0; m < count; ++m, ++k) {
      RandomSource rng(seed, static_cast<std::uint64_t>(k));
      Site<D> pos = start;
      std::int64_t t = 0;
      for (;;) {
        record(k, pos);
        if (!ball.contains_norm2(norm2(pos))) break;  // exit site reached
        if (t >= opt.step_cap)
          throw_budget("StepCapExceeded: walker " + std::to_string(k) + " exceeded " +
                       std::to_string(opt.step_cap) + " steps");
        step_site(pos, rng);
        ++t;
      }
    }
  }
  return result;
}

}  // namespace idla
