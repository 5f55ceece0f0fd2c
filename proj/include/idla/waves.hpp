#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "idla/greens.hpp"
#include "idla/stats.hpp"
#include "idla/growth.hpp"
#include "idla/lattice.hpp"

namespace idla {

/// Default shell height of the wave realization: sqrt(log n) for d >= 3 and
/// log n for d = 2, floored at 1 so shells are never degenerate.
inline double wave_height(int dim, double n) {
  const double l = std::log(std::max(n, 1.0));
  return std::max(1.0, dim == 2 ? l : std::sqrt(l));
}

/// Unsettled explorers paused on the sphere Σ_k = ∂B(0, k·h) after the
/// previous shell was explored.
template <int D>
struct WaveState {
  int k = 0;
  double sphere_radius = 0.0;
  std::vector<std::pair<Site<D>, std::int64_t>> paused;  // site -> count, sorted
  std::int64_t settled_so_far = 0;

  std::int64_t paused_total() const noexcept {
    std::int64_t t = 0;
    for (const auto& e : paused) t += e.second;
    return t;
  }
};

template <int D>
struct WaveRun {
  Cluster<D> cluster;
  std::vector<WaveState<D>> waves;
  double height = 0.0;
  std::int64_t explorer_total = 0;
};

/// Internal DLA realized as an exploration wave process: N = |B(0,n)|
/// explorers start at the origin; during wave w each unsettled explorer
/// walks with the aggregation rule and is paused on its first exit from
/// B(0,(w+1)h), i.e. on Σ_{w+1}. Settling happens strictly inside the
/// current ball. Explorers keep their stream (stream id = explorer index)
/// and their trajectory clock across waves, so a run whose height exceeds
/// the final cluster radius reproduces grow() bit for bit.
template <int D>
WaveRun<D> grow_by_waves(double n, std::uint64_t seed,
                         std::optional<double> height_override = std::nullopt,
                         const GrowthOptions& opt = {}) {
  WaveRun<D> run;
  run.height = height_override.value_or(wave_height(D, n));
  if (run.height < 1.0)
    throw_precondition("PreconditionViolated: wave height must be >= 1, got " +
                       std::to_string(run.height));
  const std::int64_t N = ball_site_count<D>(n);
  run.explorer_total = N;

  struct Explorer {
    Site<D> pos{};
    RandomSource rng;
    std::int64_t t = 0;
  };
  std::vector<Explorer> active;
  active.reserve(static_cast<std::size_t>(N));
  std::vector<std::int64_t> active_ids(static_cast<std::size_t>(N));
  for (std::int64_t k = 0; k < N; ++k) {
    active.push_back({Site<D>{}, RandomSource(seed, static_cast<std::uint64_t>(k)), 0});
    active_ids[static_cast<std::size_t>(k)] = k;
  }

  for (int wave = 0; !active.empty(); ++wave) {
    const StrictRadius ball((wave + 1) * run.height);
    std::vector<Explorer> still;
    std::vector<std::int64_t> still_ids;
    for (std::size_t i = 0; i < active.size(); ++i) {
      Explorer e = active[i];
      const std::int64_t id = active_ids[i];
      for (;;) {
        if (!ball.contains_norm2(norm2(e.pos))) {  // paused on Σ_{wave+1}
          still.push_back(e);
          still_ids.push_back(id);
          break;
        }
        if (!run.cluster.occupied.contains(e.pos)) {
          run.cluster.occupied.insert(e.pos);
          run.cluster.settle_order.push_back({id, e.pos, e.t});
          break;
        }
        if (e.t >= opt.step_cap)
          throw_budget("StepCapExceeded: explorer " + std::to_string(id) + " exceeded " +
                       std::to_string(opt.step_cap) + " steps");
        step_site(e.pos, e.rng);
        ++e.t;
      }
    }
    active = std::move(still);
    active_ids = std::move(still_ids);
    if (!active.empty()) {
      WaveState<D> state;
      state.k = wave + 1;
      state.sphere_radius = (wave + 1) * run.height;
      state.settled_so_far = run.cluster.settled_total();
      std::map<Site<D>, std::int64_t> counts;
      for (const auto& e : active) ++counts[e.pos];
      state.paused.assign(counts.begin(), counts.end());
      run.waves.push_back(std::move(state));
    }
  }
  return run;
}

/// Paused-explorer count per tile; an explorer paused on y is counted by
/// every tile that contains y.
template <int D>
std::vector<std::int64_t> tile_W_counts(const WaveState<D>& wave,
                                        const std::vector<std::vector<Site<D>>>& tiles) {
  std::map<Site<D>, std::int64_t> paused(wave.paused.begin(), wave.paused.end());
  std::vector<std::int64_t> counts(tiles.size(), 0);
  for (std::size_t t = 0; t < tiles.size(); ++t) {
    for (const auto& s : tiles[t]) {
      auto it = paused.find(s);
      if (it != paused.end()) counts[t] += it->second;
    }
  }
  return counts;
}

template <int D>
struct TileMu {
  double value = 0.0;
  double halfwidth = 0.0;  // 0 for exact solves
  bool exact = true;
};

namespace detail {

/// Exit-into-target probabilities u(y) = P_y(S(H(∂B(0,r))) ∈ tile) on the
/// ball B(0,r), solved exactly; the tile must consist of ∂B(0,r) sites.
template <int D>
std::pair<greens::Domain<D>, std::vector<double>> exit_probability_solve(
    double r, const std::vector<Site<D>>& tile, std::int64_t budget) {
  const StrictRadius sphere(r);
  for (const auto& z : tile)
    if (!on_ball_boundary(z, Site<D>{}, sphere))
      throw_precondition("PreconditionViolated: tile site " + to_string(z) + " is not on ∂B(0," +
                         std::to_string(r) + ")");
  auto domain = greens::Domain<D>::ball(r, budget);
  SiteSet<D> tile_set(tile.begin(), tile.end());
  std::vector<double> b(static_cast<std::size_t>(domain.size()), 0.0);
  const double w = 1.0 / (2.0 * D);
  domain.for_each_outside_neighbor([&](std::int32_t i, const Site<D>& nb) {
    if (tile_set.count(nb)) b[static_cast<std::size_t>(i)] += w;
  });
  std::vector<double> u;
  greens::cg_solve(domain, b, u);
  return {std::move(domain), std::move(u)};
}

/// Mask of domain sites within distance < range of the tile (the excluded
/// neighborhood B̃ of the mean-crossing functional).
template <int D>
std::vector<char> near_tile_mask(const greens::Domain<D>& domain,
                                 const std::vector<Site<D>>& tile, double range) {
  std::vector<char> mask(static_cast<std::size_t>(domain.size()), 0);
  const double range2 = range * range;
  for (std::int32_t i = 0; i < domain.size(); ++i) {
    const Site<D>& y = domain.site(i);
    for (const auto& z : tile) {
      if (static_cast<double>(dist2(y, z)) < range2) {
        mask[static_cast<std::size_t>(i)] = 1;
        break;
      }
    }
  }
  return mask;
}

}  // namespace detail

/// μ(T) for a tile T on Σ_k: the mean number of free walks from N·1_0
/// hitting T upon exiting B(0,kh), minus the same count for one walk from
/// every site of B(0,kh) outside the L·h neighborhood of T. Solved exactly
/// when the ball fits the budget; otherwise estimated by Monte Carlo with a
/// reported half-width (mc_trials > 0), or rejected.
template <int D>
TileMu<D> mu_tile(double n, double h, int k, const std::vector<Site<D>>& tile, double L,
                  std::int64_t budget = greens::kDefaultSolveBudget, std::int64_t mc_trials = 0,
                  std::uint64_t mc_seed = 1) {
  const double r = k * h;
  const std::int64_t N = ball_site_count<D>(n);
  const std::int64_t domain_size = ball_site_count<D>(r);
  TileMu<D> out;
  if (domain_size <= budget) {
    auto [domain, u] = detail::exit_probability_solve<D>(r, tile, budget);
    const auto mask = detail::near_tile_mask(domain, tile, L * h);
    const std::int32_t oi = domain.index_of(Site<D>{});
    const double u0 = oi < 0 ? 0.0 : u[static_cast<std::size_t>(oi)];
    double far_sum = 0.0;
    for (std::int32_t i = 0; i < domain.size(); ++i)
      if (!mask[static_cast<std::size_t>(i)]) far_sum += u[static_cast<std::size_t>(i)];
    out.value = static_cast<double>(N) * u0 - far_sum;
    return out;
  }
  if (mc_trials <= 0)
    throw_budget("DomainTooLarge: B(0," + std::to_string(r) + ") has " +
                 std::to_string(domain_size) + " sites (budget " + std::to_string(budget) +
                 ") and no Monte Carlo budget was given");
  // Monte Carlo: both expectations share the exit-into-tile walk kernel
  const StrictRadius ball(r);
  SiteSet<D> tile_set(tile.begin(), tile.end());
  const double range2 = (L * h) * (L * h);
  std::vector<Site<D>> far_sites;
  visit_ball<D>(Site<D>{}, r, [&](const Site<D>& y, std::int64_t) {
    for (const auto& z : tile)
      if (static_cast<double>(dist2(y, z)) < range2) return;
    far_sites.push_back(y);
  });
  auto walk_exit_hits = [&](const Site<D>& from, std::uint64_t stream) {
    RandomSource rng(mc_seed, stream);
    Site<D> pos = from;
    while (ball.contains_norm2(norm2(pos))) step_site(pos, rng);
    return tile_set.count(pos) != 0;
  };
  std::int64_t origin_hits = 0;
  for (std::int64_t t = 0; t < mc_trials; ++t) origin_hits += walk_exit_hits(Site<D>{}, t);
  const double p0 = static_cast<double>(origin_hits) / mc_trials;
  std::int64_t far_hits = 0;
  for (std::int64_t t = 0; t < mc_trials; ++t) {
    RandomSource pick(mc_seed, 1'000'000 + t);
    const auto& y = far_sites[static_cast<std::size_t>(pick.below(far_sites.size()))];
    far_hits += walk_exit_hits(y, 2'000'000 + t);
  }
  const double pf = static_cast<double>(far_hits) / mc_trials;
  const double m = static_cast<double>(far_sites.size());
  out.exact = false;
  out.value = static_cast<double>(N) * p0 - m * pf;
  const double se0 = static_cast<double>(N) * stats::binomial_se(p0, mc_trials);
  const double sef = m * stats::binomial_se(pf, mc_trials);
  out.halfwidth = 1.96 * std::sqrt(se0 * se0 + sef * sef);
  return out;
}

/// sup over y in B(0,kh) \ B̃(Lh) of P_y(exit through T): the supremal
/// per-walk tile-exit probability once the L·h neighborhood is excluded.
template <int D>
double check_h1(double h, int k, const std::vector<Site<D>>& tile, double L,
                std::int64_t budget = greens::kDefaultSolveBudget) {
  const double r = k * h;
  auto [domain, u] = detail::exit_probability_solve<D>(r, tile, budget);
  const auto mask = detail::near_tile_mask(domain, tile, L * h);
  double sup = 0.0;
  for (std::int32_t i = 0; i < domain.size(); ++i)
    if (!mask[static_cast<std::size_t>(i)]) sup = std::max(sup, u[static_cast<std::size_t>(i)]);
  return sup;
}

}  // namespace idla
