#pragma once

#include <cstdint>
#include <string>

#include "idla/lattice.hpp"
#include "idla/rng.hpp"

namespace idla {

inline constexpr std::int64_t kDefaultStepCap = 1'000'000'000;

template <int D>
struct WalkState {
  Site<D> position{};
  std::int64_t step_count = 0;
};

/// One nearest-neighbor move, uniform over the 2D directions.
template <int D>
inline void step_site(Site<D>& s, RandomSource& rng) noexcept {
  const std::uint64_t dir = rng.below(2 * D);
  const int axis = static_cast<int>(dir >> 1);
  s.c[axis] += (dir & 1) ? 1 : -1;
}

template <int D>
inline void step(WalkState<D>& w, RandomSource& rng) noexcept {
  step_site(w.position, rng);
  ++w.step_count;
}

enum class HitKind { target, absorbing };

template <int D>
struct HitResult {
  Site<D> first_hit{};
  HitKind kind = HitKind::target;
  std::int64_t steps = 0;
};

/// Runs until the walk stands on a site satisfying `is_target` or
/// `is_absorbing` (checked in that order, so target wins ties; time 0 counts).
/// Throws StepCapExceeded after step_cap moves.
template <int D, class TargetFn, class AbsorbFn>
HitResult<D> run_until_hit_if(WalkState<D> w, TargetFn&& is_target, AbsorbFn&& is_absorbing,
                              RandomSource& rng, std::int64_t step_cap = kDefaultStepCap) {
  std::int64_t taken = 0;
  for (;;) {
    if (is_target(w.position)) return {w.position, HitKind::target, w.step_count};
    if (is_absorbing(w.position)) return {w.position, HitKind::absorbing, w.step_count};
    if (taken >= step_cap)
      throw_budget("StepCapExceeded: walk exceeded " + std::to_string(step_cap) + " steps");
    step(w, rng);
    ++taken;
  }
}

template <int D>
HitResult<D> run_until_hit(const WalkState<D>& start, const SiteSet<D>& target,
                           const SiteSet<D>& absorbing, RandomSource& rng,
                           std::int64_t step_cap = kDefaultStepCap) {
  return run_until_hit_if<D>(
      start, [&](const Site<D>& s) { return target.count(s) != 0; },
      [&](const Site<D>& s) { return absorbing.count(s) != 0; }, rng, step_cap);
}

}  // namespace idla
