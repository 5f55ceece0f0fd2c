#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "idla/flashing.hpp"
#include "idla/growth.hpp"
#include "idla/parallel.hpp"
#include "idla/rng.hpp"
#include "idla/stats.hpp"

namespace idla::experiments {

struct ProbeResult {
  std::int64_t trials = 0;
  std::int64_t successes = 0;
  double frequency = 0.0;
  double wilson_halfwidth = 0.0;

  static ProbeResult from_counts(std::int64_t successes, std::int64_t trials) {
    ProbeResult r;
    r.trials = trials;
    r.successes = successes;
    r.frequency = trials > 0 ? static_cast<double>(successes) / trials : 0.0;
    r.wilson_halfwidth = stats::wilson_halfwidth(successes, trials);
    return r;
  }
};

/// Add-one adjusted log frequency for decay fits; exponential tails produce
/// empty cells at desk scale, which the adjustment keeps finite (flagged).
inline double log_freq_adjusted(std::int64_t successes, std::int64_t trials) {
  return std::log((static_cast<double>(successes) + 1.0) / (static_cast<double>(trials) + 2.0));
}

struct DecayFit {
  stats::LinearFit fit;      // log frequency vs the abscissa
  bool adjusted = false;     // some cell had zero successes (add-one applied)
};

/// Least-squares decay rate of log frequency against xs, with the add-one
/// adjustment for empty cells.
inline DecayFit fit_decay(const std::vector<double>& xs, const std::vector<ProbeResult>& cells) {
  DecayFit out;
  std::vector<double> ys;
  for (const auto& c : cells) {
    ys.push_back(log_freq_adjusted(c.successes, c.trials));
    out.adjusted = out.adjusted || c.successes == 0;
  }
  out.fit = stats::linear_fit(xs, ys);
  return out;
}

struct CoveringOptions {
  double alpha = 4.0;  // explorers stop on ∂B(0, alpha*R)
  int threads = 0;
  GrowthOptions growth{};
};

/// Covering probe: floor(A R^d) explorers spread uniformly over B(0,R/2)
/// (remainder at the origin), grown stopped at alpha*R; success means
/// B(0,R) was NOT fully covered.
template <int D>
ProbeResult probe_covering(double R, double A, std::int64_t trials, std::uint64_t seed,
                           const CoveringOptions& opt = {}) {
  if (!(A >= 1.0))
    throw_precondition("PreconditionViolated: covering probe needs A >= 1, got " +
                       std::to_string(A));
  const std::int64_t count = static_cast<std::int64_t>(std::floor(A * std::pow(R, D)));
  const auto eta =
      Configuration<D>::spread(ball_sites<D>(Site<D>{}, R / 2.0), count, true);
  const auto target = ball_sites<D>(Site<D>{}, R);
  std::atomic<std::int64_t> failures{0};
  for_each_index(
      trials,
      [&](std::int64_t t) {
        const auto cluster = grow_stopped<D>(eta, opt.alpha * R, derive_seed(seed, t), opt.growth);
        for (const auto& s : target) {
          if (!cluster.contains(s)) {
            failures.fetch_add(1);
            return;
          }
        }
      },
      opt.threads);
  return ProbeResult::from_counts(failures.load(), trials);
}

struct OriginHitOptions {
  int threads = 0;
  GrowthOptions growth{};
};

/// Origin-hit probe: floor(beta R^d) explorers spread round-robin over
/// ∂B(0,R); success means the origin ends up in the cluster.
template <int D>
ProbeResult probe_origin_hit(double R, double beta, std::int64_t trials, std::uint64_t seed,
                             const OriginHitOptions& opt = {}) {
  const std::int64_t count = static_cast<std::int64_t>(std::floor(beta * std::pow(R, D)));
  const auto eta =
      Configuration<D>::spread(sphere_sites<D>(Site<D>{}, R), count, false);
  if (count == 0) return ProbeResult::from_counts(0, trials);
  std::atomic<std::int64_t> hits{0};
  const Site<D> origin{};
  for_each_index(
      trials,
      [&](std::int64_t t) {
        const auto cluster = grow<D>(eta, derive_seed(seed, t), opt.growth);
        if (cluster.contains(origin)) hits.fetch_add(1);
      },
      opt.threads);
  return ProbeResult::from_counts(hits.load(), trials);
}

struct TrapProbeOptions {
  double height_request = 2.0;
  TrapOptions trap{};
  int threads = 0;
};

template <int D>
struct TrapProbeResult {
  ProbeResult flashing;       // crossing frequency of the flashing explorer
  ProbeResult plain;          // ground-truth walk crossing frequency
  std::int64_t containment_violations = 0;  // plain crossed but flashing did not
  double adjusted_height = 0.0;
  int shell_count = 0;
};

/// Trap probe: V is resampled per trial at the given trap-free density in
/// the annulus B(0,2R)\B(0,R); the start site is uniform on ∂B(0,2R). Both
/// the flashing crossing and the plain crossing of the shared trajectory are
/// reported; the plain event is contained in the flashing one per path.
template <int D>
TrapProbeResult<D> probe_traps(double R, double density, std::int64_t trials, std::uint64_t seed,
                               const TrapProbeOptions& opt = {}) {
  if (!(density >= 0.0 && density <= 1.0))
    throw_precondition("PreconditionViolated: density must lie in [0,1], got " +
                       std::to_string(density));
  const StrictRadius inner(R);
  std::vector<Site<D>> annulus;
  visit_ball<D>(Site<D>{}, 2.0 * R, [&](const Site<D>& s, std::int64_t q) {
    if (!inner.contains_norm2(q)) annulus.push_back(s);
  });
  const auto sphere = sphere_sites<D>(Site<D>{}, 2.0 * R);
  std::atomic<std::int64_t> flash_crossed{0}, plain_crossed{0}, violations{0};
  std::atomic<double> height{0.0};
  std::atomic<int> shells{0};
  for_each_index(
      trials,
      [&](std::int64_t t) {
        RandomSource rng(derive_seed(seed, t), 0);
        SiteSet<D> V;
        if (density >= 1.0) {
          V.insert(annulus.begin(), annulus.end());
        } else if (density > 0.0) {
          for (const auto& s : annulus)
            if (rng.bernoulli(density)) V.insert(s);
        }
        const Site<D> z = sphere[static_cast<std::size_t>(rng.below(sphere.size()))];
        const auto res = trap_crossing<D>(z, R, V, opt.height_request, rng, opt.trap);
        if (res.flashing == TrapOutcome::crossed) flash_crossed.fetch_add(1);
        if (res.plain_crossed) plain_crossed.fetch_add(1);
        if (res.plain_crossed && res.flashing != TrapOutcome::crossed) violations.fetch_add(1);
        height.store(res.adjusted_height);
        shells.store(res.shell_count);
      },
      opt.threads);
  TrapProbeResult<D> out;
  out.flashing = ProbeResult::from_counts(flash_crossed.load(), trials);
  out.plain = ProbeResult::from_counts(plain_crossed.load(), trials);
  out.containment_violations = violations.load();
  out.adjusted_height = height.load();
  out.shell_count = shells.load();
  return out;
}

struct ScanOptions {
  int threads = 0;
  GrowthOptions growth{};
};

struct ErrorSample {
  double delta_i = 0.0;
  double delta_o = 0.0;
};

struct ScanRow {
  double n = 0.0;
  std::int64_t explorers = 0;
  std::int64_t trials = 0;
  double normalizer = 0.0;  // sqrt(log n) for d>=3, log n for d=2
  bool degenerate_normalizer = false;
  std::vector<ErrorSample> samples;

  double mean_inner() const {
    double s = 0.0;
    for (const auto& e : samples) s += e.delta_i;
    return samples.empty() ? 0.0 : s / static_cast<double>(samples.size());
  }
  double mean_outer() const {
    double s = 0.0;
    for (const auto& e : samples) s += e.delta_o;
    return samples.empty() ? 0.0 : s / static_cast<double>(samples.size());
  }
  double inner_ratio() const {
    return degenerate_normalizer ? mean_inner() : mean_inner() / normalizer;
  }
  double outer_ratio() const {
    return degenerate_normalizer ? mean_outer() : mean_outer() / normalizer;
  }
};

struct ScalingScan {
  int dim = 0;
  std::vector<ScanRow> rows;
  double alpha_hat = 0.0;  // max over n of mean delta_I / normalizer
  double beta_hat = 0.0;   // same for delta_O
};

/// Fluctuation scan: for each n, grow |B(0,n)| explorers from the origin
/// `trials` times and record the error radii and their normalized ratios.
template <int D>
ScalingScan scan_fluctuations(const std::vector<double>& n_list, std::int64_t trials,
                              std::uint64_t seed, const ScanOptions& opt = {}) {
  ScalingScan scan;
  scan.dim = D;
  for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
    const double n = n_list[ni];
    ScanRow row;
    row.n = n;
    row.explorers = ball_site_count<D>(n);
    row.trials = trials;
    const double l = std::log(n);
    row.normalizer = D == 2 ? l : std::sqrt(std::max(0.0, l));
    row.degenerate_normalizer = !(row.normalizer > 0.0);
    row.samples.resize(static_cast<std::size_t>(trials));
    const auto eta = Configuration<D>::point_mass(Site<D>{}, row.explorers);
    const std::uint64_t row_seed = derive_seed(seed, 1000 + ni);
    for_each_index(
        trials,
        [&](std::int64_t t) {
          const auto cluster = grow<D>(eta, derive_seed(row_seed, t), opt.growth);
          row.samples[static_cast<std::size_t>(t)] = {inner_error(cluster, n),
                                                      outer_error(cluster, n)};
        },
        opt.threads);
    scan.rows.push_back(std::move(row));
  }
  for (const auto& row : scan.rows) {
    scan.alpha_hat = std::max(scan.alpha_hat, row.inner_ratio());
    scan.beta_hat = std::max(scan.beta_hat, row.outer_ratio());
  }
  return scan;
}

/// A random shell subdivision of B(z,R): h_0 = R/4, h_{k+1} = (gamma N_k)^{1/d},
/// stopped at the first index where h_k >= 1 and sum h_i < R/2 fails.
struct Subdivision {
  double R = 0.0;
  double gamma = 1.0;
  std::vector<double> heights;         // h_0 .. h_{L+1}
  std::vector<std::int64_t> counts;    // N_0 .. N_{L-1}
  int L = 0;
  bool invariants_ok = false;
  std::string violation;

  double interior_height_sum() const {  // sum of h_1..h_L
    double s = 0.0;
    for (int i = 1; i <= L; ++i) s += heights[static_cast<std::size_t>(i)];
    return s;
  }
};

/// counts_fn(k, inner_radius, outer_radius) must return the number of
/// settled explorers N_k in shell k (synthetic sources just ignore the
/// radii). Requires gamma >= 1 and gamma * eta_total <= (R/4)^d.
template <int D>
Subdivision subdivide(double R, double gamma, std::int64_t eta_total,
                      const std::function<std::int64_t(int, double, double)>& counts_fn) {
  if (!(gamma >= 1.0))
    throw_precondition("PreconditionViolated: gamma must be >= 1, got " + std::to_string(gamma));
  const double h0 = R / 4.0;
  if (!(h0 >= 1.0))
    throw_precondition("PreconditionViolated: need R/4 >= 1, got R = " + std::to_string(R));
  if (!(gamma * static_cast<double>(eta_total) <= std::pow(h0, D)))
    throw_precondition("PreconditionViolated: need gamma*|eta| <= (R/4)^d (gamma=" +
                       std::to_string(gamma) + ", |eta|=" + std::to_string(eta_total) + ")");
  Subdivision out;
  out.R = R;
  out.gamma = gamma;
  out.heights.push_back(h0);
  double interior_sum = 0.0;  // h_1 + ... + h_k
  double depth = h0;          // h_0 + ... + h_k measured inward from radius R
  for (int k = 0;; ++k) {
    const std::int64_t nk = counts_fn(k, R - depth, R - depth + out.heights.back());
    if (nk < 0 || nk > eta_total)
      throw_precondition("InvalidInput: shell count N_" + std::to_string(k) +
                         " out of range [0, |eta|]");
    out.counts.push_back(nk);
    const double h = std::pow(gamma * static_cast<double>(nk), 1.0 / D);
    out.heights.push_back(h);
    interior_sum += h;
    depth += h;
    out.L = k + 1;
    if (!(h >= 1.0 && interior_sum < R / 2.0)) break;  // recursion condition violated: stop
  }
  out.heights.push_back(R - depth);  // h_{L+1}
  // invariant audit
  out.invariants_ok = true;
  for (int i = 1; i <= out.L; ++i)
    if (!(out.heights[static_cast<std::size_t>(i)] >= 1.0)) {
      out.invariants_ok = false;
      out.violation = "h_" + std::to_string(i) + " < 1";
    }
  const double s = out.interior_height_sum();
  if (!(s >= R / 2.0 && s <= 3.0 * R / 4.0 + 1e-9)) {
    out.invariants_ok = false;
    out.violation = "sum h_1..h_L outside [R/2, 3R/4]";
  }
  if (!(out.heights.back() >= -1e-9)) {
    out.invariants_ok = false;
    out.violation = "h_{L+1} < 0";
  }
  return out;
}

}  // namespace idla::experiments
