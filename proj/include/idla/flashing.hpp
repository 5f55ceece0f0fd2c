#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "idla/growth.hpp"
#include "idla/lattice.hpp"
#include "idla/rng.hpp"
#include "idla/walk.hpp"

namespace idla {

/// Radius of a flashing probe: density r -> d r^{d-1} / h^d on [0, h], i.e.
/// h * U^{1/d} by inverse CDF. The probe site is the exit site of the walk
/// from the ball of this radius around the sphere-hit point, which spreads
/// it almost uniformly over the surrounding cell.
template <int D>
double flash_radius(double h, RandomSource& rng) {
  return h * std::pow(rng.real01(), 1.0 / D);
}

struct FlashingOptions {
  double cap_height_mult = 6.0;  // flashing domain ends at B(0, n + mult*h)
  std::int64_t step_cap = kDefaultStepCap;
};

/// One explorer of a coupled plain/flashing run.
template <int D>
struct CoupledExplorer {
  Site<D> plain_site{};
  std::int64_t plain_tau = 0;
  Site<D> flash_site{};        // settle site, or stop site when stopped
  std::int64_t flash_tau = 0;  // meaningful when !flash_stopped
  bool flash_stopped = false;  // reached the outermost sphere unsettled
};

/// Plain internal DLA and the flashing process built on shared trajectories.
///
/// Both processes read the same walk S_i; the plain explorer settles on the
/// first site vacant in the plain cluster, while the flashing explorer may
/// settle only inside B(0,n) (plain aggregation) or at its one probe site
/// per shell, and only on sites vacant in BOTH clusters. Treating
/// plain-occupied sites as blocked for flashing settles is what makes the
/// settling-time domination T*(i) >= T(i) hold on every path: whenever the
/// flashing explorer settles on s, s is plain-vacant, so a still-unsettled
/// plain explorer standing on s settles at that same instant.
template <int D>
struct CoupledRun {
  double n = 0.0;
  double h = 0.0;
  std::uint64_t seed = 0;
  std::vector<CoupledExplorer<D>> explorers;
  std::int64_t flash_stopped_total = 0;

  std::int64_t plain_outside_count() const {
    const StrictRadius ball(n);
    std::int64_t c = 0;
    for (const auto& e : explorers)
      if (!ball.contains_norm2(norm2(e.plain_site))) ++c;
    return c;
  }
  std::int64_t flash_outside_count() const {
    const StrictRadius ball(n);
    std::int64_t c = 0;
    for (const auto& e : explorers)
      if (!e.flash_stopped && !ball.contains_norm2(norm2(e.flash_site))) ++c;
    return c;
  }
  /// min_i (T*(i) - T(i)); stopped flashing explorers count as +infinity.
  std::int64_t min_settling_gap() const {
    std::int64_t m = std::numeric_limits<std::int64_t>::max();
    for (const auto& e : explorers)
      if (!e.flash_stopped) m = std::min(m, e.flash_tau - e.plain_tau);
    return m;
  }
};

template <int D>
CoupledRun<D> flashing_grow(double n, double h, std::uint64_t seed,
                            const FlashingOptions& opt = {}) {
  if (h < 1.0)
    throw_precondition("PreconditionViolated: flashing shell height must be >= 1, got " +
                       std::to_string(h));
  CoupledRun<D> run;
  run.n = n;
  run.h = h;
  run.seed = seed;
  const std::int64_t N = ball_site_count<D>(n);
  run.explorers.resize(static_cast<std::size_t>(N));

  const StrictRadius inner(n);
  const StrictRadius preflash(n + h);
  const StrictRadius cap(n + opt.cap_height_mult * h);
  // spheres Σ_k = ∂B(0, n+(2k+1)h) up to the cap
  std::vector<StrictRadius> sigma;
  for (int k = 0;; ++k) {
    const double r = n + (2.0 * k + 1.0) * h;
    if (r > n + opt.cap_height_mult * h + 1e-9) break;
    sigma.emplace_back(r);
  }

  OccupancyGrid<D> plain_occ;
  OccupancyGrid<D> flash_occ;

  enum class Phase { plain_zone, pre_flash, ball_exit, march };

  for (std::int64_t i = 0; i < N; ++i) {
    RandomSource rng(seed, static_cast<std::uint64_t>(i));
    auto& rec = run.explorers[static_cast<std::size_t>(i)];
    Site<D> pos{};
    std::int64_t t = 0;
    bool plain_done = false;
    bool flash_done = false;
    Phase phase = Phase::plain_zone;
    std::size_t shell = 0;  // flashing shell index
    Site<D> anchor{};
    StrictRadius probe_ball(0.0);

    while (!plain_done || !flash_done) {
      // both settle decisions read the occupancy state as of this arrival,
      // so a site the plain explorer takes right now is still vacant for the
      // flashing side (they settle together; this is what makes T* >= T)
      const bool plain_vacant_here = !plain_occ.contains(pos);
      const bool flash_vacant_here = plain_vacant_here && !flash_occ.contains(pos);
      if (!plain_done && plain_vacant_here) {
        plain_occ.insert(pos);
        rec.plain_site = pos;
        rec.plain_tau = t;
        plain_done = true;
      }
      if (!flash_done) {
        if (!cap.contains_norm2(norm2(pos))) {  // stopped on the outermost sphere
          rec.flash_site = pos;
          rec.flash_tau = t;
          rec.flash_stopped = true;
          ++run.flash_stopped_total;
          flash_done = true;
        }
      }
      while (!flash_done) {  // fall through same-arrival phase changes
        const std::int64_t q = norm2(pos);
        if (phase == Phase::plain_zone) {
          if (inner.contains_norm2(q)) {
            if (flash_vacant_here) {
              flash_occ.insert(pos);
              rec.flash_site = pos;
              rec.flash_tau = t;
              flash_done = true;
            }
            break;
          }
          phase = Phase::pre_flash;
          continue;
        }
        if (phase == Phase::pre_flash) {
          if (inner.contains_norm2(q)) {  // re-entered before Σ_0: resume plain aggregation
            phase = Phase::plain_zone;
            continue;
          }
          if (!preflash.contains_norm2(q)) {  // hit Σ_0
            if (shell >= sigma.size()) break;  // cap sphere handles the rest
            anchor = pos;
            probe_ball = StrictRadius(flash_radius<D>(h, rng));
            phase = Phase::ball_exit;
            continue;
          }
          break;
        }
        if (phase == Phase::ball_exit) {
          if (!probe_ball.contains_norm2(dist2(pos, anchor))) {  // probe site reached
            if (flash_vacant_here) {
              flash_occ.insert(pos);
              rec.flash_site = pos;
              rec.flash_tau = t;
              flash_done = true;
              break;
            }
            ++shell;  // cannot settle in this shell anymore; walk to the next sphere
            phase = Phase::march;
            continue;
          }
          break;
        }
        // march: free walk until the next sphere Σ_shell
        if (shell < sigma.size() && !sigma[shell].contains_norm2(q)) {
          anchor = pos;
          probe_ball = StrictRadius(flash_radius<D>(h, rng));
          phase = Phase::ball_exit;
          continue;
        }
        break;
      }
      if (plain_done && flash_done) break;
      if (t >= opt.step_cap)
        throw_budget("StepCapExceeded: coupled explorer " + std::to_string(i) + " exceeded " +
                     std::to_string(opt.step_cap) + " steps");
      step_site(pos, rng);
      ++t;
    }
  }
  return run;
}

enum class TrapOutcome { crossed, settled, escaped };

template <int D>
struct FlashProbeRecord {
  int shell = 0;
  Site<D> site{};
  bool in_annulus = false;
  bool in_trap_free = false;  // site lies in V
};

template <int D>
struct TrapResult {
  TrapOutcome flashing = TrapOutcome::escaped;
  bool plain_crossed = false;  // ground truth: hit B(0,R) before any annulus site outside V
  double adjusted_height = 0.0;
  int shell_count = 0;
  std::vector<FlashProbeRecord<D>> probes;
  std::int64_t steps = 0;
};

struct TrapOptions {
  double escape_mult = 4.0;  // abort once the walk leaves B(0, escape_mult*R)
  std::int64_t step_cap = kDefaultStepCap;
};

/// One flashing explorer dropped on ∂B(0,2R) against trap-free set V inside
/// the annulus B(0,2R)\B(0,R). The inward partition has R/2h shells of
/// height 2h (h adjusted so the count is an integer); the explorer draws one
/// probe site per sphere Σ_k and settles on the first probe lying in the
/// annulus but outside V. It has crossed when every probe was harmless down
/// through the last shell. The same trajectory also reports the plain
/// crossing event, which is contained in the flashing one path by path.
template <int D>
TrapResult<D> trap_crossing(const Site<D>& start, double R, const SiteSet<D>& trap_free,
                            double h_request, RandomSource& rng, const TrapOptions& opt = {}) {
  const auto partition = ShellPartition<D>::inward(R, h_request);
  TrapResult<D> out;
  out.adjusted_height = partition.height;
  out.shell_count = partition.shell_count;

  const StrictRadius inner(R);
  const StrictRadius outer(2.0 * R);
  const StrictRadius escape(opt.escape_mult * R);
  std::vector<StrictRadius> sigma;
  for (int k = 1; k <= partition.shell_count; ++k)
    sigma.emplace_back(partition.sphere_radius(k));

  auto in_annulus = [&](std::int64_t q) {
    return !inner.contains_norm2(q) && outer.contains_norm2(q);
  };

  Site<D> pos = start;
  std::int64_t t = 0;
  bool plain_decided = false;
  bool flash_decided = false;
  int k = 0;  // shells completed
  enum class Phase { seek, ball_exit } phase = Phase::seek;
  Site<D> anchor{};
  StrictRadius probe_ball(0.0);

  while (!plain_decided || !flash_decided) {
    const std::int64_t q = norm2(pos);
    if (!plain_decided) {
      if (inner.contains_norm2(q)) {
        out.plain_crossed = true;
        plain_decided = true;
      } else if (in_annulus(q) && !trap_free.count(pos)) {
        out.plain_crossed = false;
        plain_decided = true;
      }
    }
    while (!flash_decided) {
      if (phase == Phase::seek) {
        if (on_ball_boundary(pos, Site<D>{}, sigma[static_cast<std::size_t>(k)])) {
          anchor = pos;
          probe_ball = StrictRadius(flash_radius<D>(partition.height, rng));
          phase = Phase::ball_exit;
          continue;
        }
        break;
      }
      if (!probe_ball.contains_norm2(dist2(pos, anchor))) {
        FlashProbeRecord<D> rec;
        rec.shell = k + 1;
        rec.site = pos;
        rec.in_annulus = in_annulus(norm2(pos));
        rec.in_trap_free = trap_free.count(pos) != 0;
        out.probes.push_back(rec);
        if (rec.in_annulus && !rec.in_trap_free) {
          out.flashing = TrapOutcome::settled;
          flash_decided = true;
          break;
        }
        ++k;
        if (k >= partition.shell_count) {
          out.flashing = TrapOutcome::crossed;
          flash_decided = true;
          break;
        }
        phase = Phase::seek;
        continue;
      }
      break;
    }
    if (plain_decided && flash_decided) break;
    if (!escape.contains_norm2(norm2(pos)) || t >= opt.step_cap) {
      if (!plain_decided) out.plain_crossed = false;
      if (!flash_decided) out.flashing = TrapOutcome::escaped;
      break;
    }
    step_site(pos, rng);
    ++t;
  }
  out.steps = t;
  return out;
}

/// Sites of a sphere whose h-ball holds at least beta * h^d trap-free sites.
template <int D>
std::vector<Site<D>> dense_neighborhoods(const std::vector<Site<D>>& sphere,
                                         const SiteSet<D>& trap_free, double beta, double h) {
  if (!(beta > 0.0 && beta < 1.0))
    throw_precondition("PreconditionViolated: beta must lie in (0,1), got " +
                       std::to_string(beta));
  const auto offsets = ball_sites<D>(Site<D>{}, h);
  const double threshold = beta * std::pow(h, D);
  std::vector<Site<D>> dense;
  for (const auto& y : sphere) {
    std::int64_t count = 0;
    for (const auto& off : offsets)
      if (trap_free.count(y + off)) ++count;
    if (static_cast<double>(count) >= threshold) dense.push_back(y);
  }
  return dense;
}

}  // namespace idla
