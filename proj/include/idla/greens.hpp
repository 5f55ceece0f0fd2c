#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <fstream>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "idla/core.hpp"
#include "idla/lattice.hpp"

namespace idla::greens {

inline constexpr std::int64_t kDefaultSolveBudget = 200'000;
inline constexpr double kDefaultResidual = 1e-10;
inline constexpr double kEulerGamma = 0.57721566490153286061;

/// A finite set of lattice sites with absorbing complement, prepared for
/// matrix-free application of (I - P) where P is the simple random walk
/// kernel restricted to the set.
template <int D>
class Domain {
public:
  static Domain from_sites(std::vector<Site<D>> sites, std::int64_t budget = kDefaultSolveBudget) {
    if (static_cast<std::int64_t>(sites.size()) > budget)
      throw_budget("DomainTooLarge: " + std::to_string(sites.size()) + " sites exceeds budget " +
                   std::to_string(budget));
    std::sort(sites.begin(), sites.end());
    Domain d;
    d.sites_ = std::move(sites);
    if (d.sites_.empty()) return d;
    for (int i = 0; i < D; ++i) {
      d.lo_[i] = d.sites_.front().c[i];
      d.hi_[i] = d.sites_.front().c[i];
    }
    for (const auto& s : d.sites_)
      for (int i = 0; i < D; ++i) {
        d.lo_[i] = std::min(d.lo_[i], s.c[i]);
        d.hi_[i] = std::max(d.hi_[i], s.c[i]);
      }
    std::int64_t cells = 1;
    for (int i = 0; i < D; ++i) cells *= std::int64_t(d.hi_[i]) - d.lo_[i] + 1;
    d.grid_.assign(static_cast<std::size_t>(cells), -1);
    for (std::size_t i = 0; i < d.sites_.size(); ++i)
      d.grid_[static_cast<std::size_t>(d.cell_of(d.sites_[i]))] = static_cast<std::int32_t>(i);
    d.neighbors_.assign(d.sites_.size() * 2 * D, -1);
    for (std::size_t i = 0; i < d.sites_.size(); ++i) {
      int slot = 0;
      for (int a = 0; a < D; ++a)
        for (int sign : {-1, +1}) {
          Site<D> nb = d.sites_[i];
          nb[a] += sign;
          d.neighbors_[i * 2 * D + slot++] = d.index_of(nb);
        }
    }
    return d;
  }

  static Domain ball(double radius, std::int64_t budget = kDefaultSolveBudget) {
    return from_sites(ball_sites<D>(Site<D>{}, radius), budget);
  }

  std::int64_t size() const noexcept { return static_cast<std::int64_t>(sites_.size()); }
  const std::vector<Site<D>>& sites() const noexcept { return sites_; }
  const Site<D>& site(std::int32_t i) const noexcept { return sites_[static_cast<std::size_t>(i)]; }

  std::int32_t index_of(const Site<D>& s) const noexcept {
    const std::int64_t c = cell_of(s);
    return c < 0 ? -1 : grid_[static_cast<std::size_t>(c)];
  }

  /// y = (I - P) x restricted to the domain.
  void apply(const std::vector<double>& x, std::vector<double>& y) const {
    const double w = 1.0 / (2.0 * D);
    for (std::size_t i = 0; i < sites_.size(); ++i) {
      double acc = 0.0;
      const std::int32_t* nb = &neighbors_[i * 2 * D];
      for (int k = 0; k < 2 * D; ++k)
        if (nb[k] >= 0) acc += x[static_cast<std::size_t>(nb[k])];
      y[i] = x[i] - w * acc;
    }
  }

  template <class Fn>
  void for_each_outside_neighbor(Fn&& fn) const {
    for (std::size_t i = 0; i < sites_.size(); ++i) {
      for (int a = 0; a < D; ++a)
        for (int sign : {-1, +1}) {
          Site<D> nb = sites_[i];
          nb[a] += sign;
          if (index_of(nb) < 0) fn(static_cast<std::int32_t>(i), nb);
        }
    }
  }

private:
  std::int64_t cell_of(const Site<D>& s) const noexcept {
    std::int64_t idx = 0;
    for (int i = 0; i < D; ++i) {
      if (s.c[i] < lo_[i] || s.c[i] > hi_[i]) return -1;
      idx = idx * (std::int64_t(hi_[i]) - lo_[i] + 1) + (s.c[i] - lo_[i]);
    }
    return idx;
  }

  std::vector<Site<D>> sites_;
  std::array<std::int32_t, D> lo_{};
  std::array<std::int32_t, D> hi_{};
  std::vector<std::int32_t> grid_;
  std::vector<std::int32_t> neighbors_;
};

struct SolveInfo {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Conjugate gradients on the SPD operator (I - P). Solves to a relative
/// residual of `tol`, which matters because downstream checks take
/// differences of large sums of the solution.
template <int D>
SolveInfo cg_solve(const Domain<D>& domain, const std::vector<double>& b, std::vector<double>& x,
                   double tol = kDefaultResidual, int max_iter = 0) {
  const std::size_t n = static_cast<std::size_t>(domain.size());
  x.assign(n, 0.0);
  if (n == 0) return {};
  auto dot = [](const std::vector<double>& a, const std::vector<double>& c) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * c[i];
    return s;
  };
  std::vector<double> r = b, p = b, ap(n);
  const double b2 = dot(b, b);
  if (b2 == 0.0) return {};
  double rs = b2;
  if (max_iter <= 0) max_iter = static_cast<int>(std::max<std::size_t>(2000, 40 * n));
  SolveInfo info;
  for (int it = 0; it < max_iter; ++it) {
    domain.apply(p, ap);
    const double alpha = rs / dot(p, ap);
    for (std::size_t i = 0; i < n; ++i) x[i] += alpha * p[i];
    for (std::size_t i = 0; i < n; ++i) r[i] -= alpha * ap[i];
    const double rs_new = dot(r, r);
    info.iterations = it + 1;
    info.relative_residual = std::sqrt(rs_new / b2);
    if (info.relative_residual <= tol) return info;
    const double beta = rs_new / rs;
    rs = rs_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
  }
  throw_budget("DomainTooLarge: CG failed to reach residual " + std::to_string(tol) + " in " +
               std::to_string(max_iter) + " iterations");
}

/// One column of the Green function of B(0,n): values[x] = G_n(z, x), the
/// expected number of visits to x before exiting, for a walk started at z.
/// By reversibility this equals G_n(x, z).
template <int D>
struct GreenColumn {
  Domain<D> domain;
  std::vector<double> values;
  SolveInfo info;
};

template <int D>
GreenColumn<D> green_column(double n, const Site<D>& z,
                            std::int64_t budget = kDefaultSolveBudget,
                            double tol = kDefaultResidual) {
  GreenColumn<D> col;
  col.domain = Domain<D>::ball(n, budget);
  const std::int32_t zi = col.domain.index_of(z);
  if (zi < 0) {
    col.values.assign(static_cast<std::size_t>(col.domain.size()), 0.0);
    return col;
  }
  std::vector<double> b(static_cast<std::size_t>(col.domain.size()), 0.0);
  b[static_cast<std::size_t>(zi)] = 1.0;
  col.info = cg_solve(col.domain, b, col.values, tol);
  return col;
}

template <int D>
double green_function(double n, const Site<D>& y, const Site<D>& z,
                      std::int64_t budget = kDefaultSolveBudget,
                      double tol = kDefaultResidual) {
  const auto col = green_column<D>(n, z, budget, tol);
  const std::int32_t yi = col.domain.index_of(y);
  return yi < 0 ? 0.0 : col.values[static_cast<std::size_t>(yi)];
}

/// P_y(H_z < H_{∂B(0,R)}) = G_R(y,z) / G_R(z,z).
template <int D>
double hitting_probability(const Site<D>& y, const Site<D>& z, double R,
                           std::int64_t budget = kDefaultSolveBudget,
                           double tol = kDefaultResidual) {
  if (y == z) return 1.0;
  const auto col = green_column<D>(R, z, budget, tol);
  const std::int32_t yi = col.domain.index_of(y);
  const std::int32_t zi = col.domain.index_of(z);
  if (yi < 0 || zi < 0) return 0.0;
  const double gzz = col.values[static_cast<std::size_t>(zi)];
  return gzz > 0.0 ? col.values[static_cast<std::size_t>(yi)] / gzz : 0.0;
}

/// | |B(0,R)| G_n(0,z) - sum_{y in B(0,R)} G_n(y,z) |, the ball mean value
/// gap of the Green function.
template <int D>
double mean_value_gap(double n, double R, const Site<D>& z,
                      std::int64_t budget = kDefaultSolveBudget,
                      double tol = kDefaultResidual) {
  const double zn = norm<D>(z);
  if (!(R <= n && R >= n - std::cbrt(n)))
    throw_precondition("PreconditionViolated: need n - n^(1/3) <= R <= n (n=" +
                       std::to_string(n) + ", R=" + std::to_string(R) + ")");
  if (!(n - zn <= 1.0))
    throw_precondition("PreconditionViolated: need n - |z| <= 1, got |z|=" + std::to_string(zn));
  if (!StrictRadius(R).contains_norm2(norm2(z)))
    throw_precondition("PreconditionViolated: z must lie in B(0,R)");
  const auto col = green_column<D>(n, z, budget, tol);
  const std::int32_t oi = col.domain.index_of(Site<D>{});
  const double g0 = oi < 0 ? 0.0 : col.values[static_cast<std::size_t>(oi)];
  double sum = 0.0;
  std::int64_t ball_count = 0;
  const StrictRadius rr(R);
  for (std::int32_t i = 0; i < col.domain.size(); ++i) {
    if (rr.contains_norm2(norm2(col.domain.site(i)))) {
      sum += col.values[static_cast<std::size_t>(i)];
      ++ball_count;
    }
  }
  return std::abs(static_cast<double>(ball_count) * g0 - sum);
}

/// Exit distribution of the walk from y absorbed on `absorbing`: BFS the
/// finite component of y, solve one Green column, and push mass across the
/// boundary edges. Returns (site, probability) pairs, lexicographically
/// sorted; probabilities sum to 1.
template <int D>
std::vector<std::pair<Site<D>, double>> harmonic_measure(
    const Site<D>& y, const std::vector<Site<D>>& absorbing,
    std::int64_t budget = kDefaultSolveBudget, double tol = kDefaultResidual) {
  SiteSet<D> absorb(absorbing.begin(), absorbing.end());
  if (absorb.count(y)) return {{y, 1.0}};
  SiteSet<D> seen;
  std::deque<Site<D>> queue;
  seen.insert(y);
  queue.push_back(y);
  std::vector<Site<D>> component;
  while (!queue.empty()) {
    const Site<D> s = queue.front();
    queue.pop_front();
    component.push_back(s);
    if (static_cast<std::int64_t>(component.size()) > budget)
      throw_budget("DomainTooLarge: component of y exceeds budget " + std::to_string(budget));
    for (int a = 0; a < D; ++a)
      for (int sign : {-1, +1}) {
        Site<D> nb = s;
        nb[a] += sign;
        if (absorb.count(nb) || seen.count(nb)) continue;
        seen.insert(nb);
        queue.push_back(nb);
      }
  }
  auto domain = Domain<D>::from_sites(std::move(component), budget);
  std::vector<double> b(static_cast<std::size_t>(domain.size()), 0.0);
  b[static_cast<std::size_t>(domain.index_of(y))] = 1.0;
  std::vector<double> g;
  cg_solve(domain, b, g, tol);
  std::map<Site<D>, double> mass;
  const double w = 1.0 / (2.0 * D);
  domain.for_each_outside_neighbor([&](std::int32_t i, const Site<D>& nb) {
    mass[nb] += w * g[static_cast<std::size_t>(i)];
  });
  return {mass.begin(), mass.end()};
}

/// The d=2 potential kernel a(0,z), normalized by a(0,0) = 0. Exact values
/// come from a Poisson solve on a square box whose boundary is pinned to the
/// logarithmic asymptote; beyond the box the asymptote itself is returned.
class PotentialKernel2D {
public:
  static double asymptotic(const Site<2>& z) {
    const double r = norm<2>(z);
    return (2.0 / M_PI) * std::log(r) + (2.0 * kEulerGamma + std::log(8.0)) / M_PI;
  }

  static PotentialKernel2D compute(int box_half = 200, double tol = kDefaultResidual) {
    PotentialKernel2D k;
    k.box_half_ = box_half;
    std::vector<Site<2>> sites;
    sites.reserve(static_cast<std::size_t>(2 * box_half + 1) * (2 * box_half + 1));
    for (std::int32_t x = -box_half; x <= box_half; ++x)
      for (std::int32_t y = -box_half; y <= box_half; ++y) sites.push_back(Site<2>{{x, y}});
    const std::int64_t budget = static_cast<std::int64_t>(sites.size());
    auto domain = Domain<2>::from_sites(std::move(sites), budget);
    std::vector<double> b(static_cast<std::size_t>(domain.size()), 0.0);
    // (I - P) a = -e_0 with Dirichlet data from the asymptote outside the box
    domain.for_each_outside_neighbor([&](std::int32_t i, const Site<2>& nb) {
      b[static_cast<std::size_t>(i)] += 0.25 * asymptotic(nb);
    });
    b[static_cast<std::size_t>(domain.index_of(Site<2>{}))] -= 1.0;
    std::vector<double> a;
    const SolveInfo info = cg_solve(domain, b, a, tol);
    k.residual_ = info.relative_residual;
    k.table_.assign(a.size(), 0.0);
    const double shift = a[static_cast<std::size_t>(domain.index_of(Site<2>{}))];
    for (std::int32_t i = 0; i < domain.size(); ++i) {
      const Site<2>& s = domain.site(i);
      k.table_[k.slot(s)] = a[static_cast<std::size_t>(i)] - shift;
    }
    return k;
  }

  int box_half() const noexcept { return box_half_; }
  double residual() const noexcept { return residual_; }

  /// Largest norm up to which table values (rather than the asymptote) are
  /// served with full box-interior accuracy.
  double exact_range() const noexcept { return static_cast<double>(box_half_) / 2.0; }

  double value(const Site<2>& z) const {
    if (z == Site<2>{}) return 0.0;
    if (std::abs(z.c[0]) <= box_half_ && std::abs(z.c[1]) <= box_half_) return table_[slot(z)];
    return asymptotic(z);
  }

  bool save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) return false;
    out << "# idla potential-kernel d=2 box_half=" << box_half_ << " residual=" << residual_
        << " version=1\n";
    char buf[40];
    for (double v : table_) {
      std::snprintf(buf, sizeof buf, "%.17g\n", v);
      out << buf;
    }
    return static_cast<bool>(out);
  }

  static bool load(const std::string& path, PotentialKernel2D& k, int expected_box_half) {
    std::ifstream in(path);
    if (!in) return false;
    std::string header;
    std::getline(in, header);
    const std::string want = "box_half=" + std::to_string(expected_box_half);
    if (header.find("idla potential-kernel") == std::string::npos ||
        header.find(want) == std::string::npos)
      return false;
    k.box_half_ = expected_box_half;
    const std::size_t n =
        static_cast<std::size_t>(2 * expected_box_half + 1) * (2 * expected_box_half + 1);
    k.table_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      if (!(in >> k.table_[i])) return false;
    const auto pos = header.find("residual=");
    if (pos != std::string::npos) k.residual_ = std::atof(header.c_str() + pos + 9);
    return true;
  }

  /// Loads the cached table if present and compatible, else computes and
  /// saves it. The box size is part of the file contract.
  static PotentialKernel2D cached(const std::string& path, int box_half = 200,
                                  double tol = kDefaultResidual) {
    PotentialKernel2D k;
    if (load(path, k, box_half)) return k;
    k = compute(box_half, tol);
    k.save(path);
    return k;
  }

private:
  std::size_t slot(const Site<2>& s) const noexcept {
    const std::size_t w = static_cast<std::size_t>(2 * box_half_ + 1);
    return static_cast<std::size_t>(s.c[0] + box_half_) * w +
           static_cast<std::size_t>(s.c[1] + box_half_);
  }

  int box_half_ = 0;
  double residual_ = 0.0;
  std::vector<double> table_;
};

}  // namespace idla::greens
