#include <catch2/catch_amalgamated.hpp>

#include "idla/stats.hpp"
#include "idla/waves.hpp"

using namespace idla;

TEST_CASE("default heights") {
  CHECK(wave_height(2, 20.0) == Catch::Approx(std::log(20.0)));
  CHECK(wave_height(3, 20.0) == Catch::Approx(std::sqrt(std::log(20.0))));
  CHECK(wave_height(3, 1.0) == 1.0);  // floored
}

TEST_CASE("a single wave reproduces grow bit for bit") {
  const double n = 4.0;
  const auto plain = grow<2>(Configuration<2>::point_mass(Site<2>{}, ball_site_count<2>(n)), 33);
  const auto waved = grow_by_waves<2>(n, 33, 100.0);  // height beyond any cluster radius
  CHECK(waved.waves.empty());
  REQUIRE(waved.cluster.settle_order.size() == plain.settle_order.size());
  for (std::size_t i = 0; i < plain.settle_order.size(); ++i) {
    CHECK(waved.cluster.settle_order[i].explorer == plain.settle_order[i].explorer);
    CHECK(waved.cluster.settle_order[i].site == plain.settle_order[i].site);
    CHECK(waved.cluster.settle_order[i].tau == plain.settle_order[i].tau);
  }
}

TEST_CASE("explorers are conserved across waves") {
  const double n = 9.0;
  const auto run = grow_by_waves<2>(n, 5, 2.0);
  const std::int64_t N = run.explorer_total;
  CHECK(run.cluster.settled_total() == N);
  for (const auto& wave : run.waves) {
    CHECK(wave.settled_so_far + wave.paused_total() == N);
    // paused explorers sit exactly on Σ_k
    const StrictRadius sphere(wave.sphere_radius);
    for (const auto& [site, count] : wave.paused) {
      CHECK(count > 0);
      CHECK(on_ball_boundary(site, Site<2>{}, sphere));
    }
  }
  // settled region of wave k stays inside B(0, k h): audited via the final
  // cluster by replay of the wave radii
  for (std::size_t w = 0; w + 1 < run.waves.size(); ++w)
    CHECK(run.waves[w].settled_so_far <= run.waves[w + 1].settled_so_far);
}

TEST_CASE("wave realization matches plain growth in distribution") {
  // two-sample KS on delta_I at a reduced size; the acceptance suite runs
  // the full d=2, n=12 comparison
  const double n = 7.0;
  const std::int64_t N = ball_site_count<2>(n);
  const int trials = 400;
  std::vector<double> plain, waved;
  for (int t = 0; t < trials; ++t) {
    plain.push_back(
        inner_error(grow<2>(Configuration<2>::point_mass(Site<2>{}, N), derive_seed(71, t)), n));
    waved.push_back(inner_error(grow_by_waves<2>(n, derive_seed(72, t)).cluster, n));
  }
  const double d = stats::ks_statistic(plain, waved);
  CHECK(stats::ks_pvalue(d, plain.size(), waved.size()) > 1e-3);
}

TEST_CASE("tile W counts") {
  const double n = 9.0;
  const auto run = grow_by_waves<2>(n, 11, 3.0);
  REQUIRE(!run.waves.empty());
  const auto& wave = run.waves[0];
  const auto part = ShellPartition<2>::inner(n, run.height, wave.k + 1);

  SECTION("a paused explorer is counted by every tile containing it") {
    const auto& [site, count] = wave.paused.front();
    const auto tile = part.tile(wave.k, site);  // tile centered on the paused site
    const auto counts = tile_W_counts(wave, {tile});
    CHECK(counts[0] >= count);
  }
  SECTION("a disjoint tile family never counts more than the paused total") {
    auto centers = thin_centers<2>(sphere_sites<2>(Site<2>{}, wave.sphere_radius), run.height);
    std::vector<std::vector<Site<2>>> tiles;
    for (const auto& z : centers) tiles.push_back(part.tile(wave.k, z));
    // height-separated centers give pairwise disjoint half-height tiles
    SiteSet<2> seen;
    for (const auto& tile : tiles)
      for (const auto& s : tile) REQUIRE(seen.insert(s).second);
    std::int64_t total = 0;
    for (auto c : tile_W_counts(wave, tiles)) total += c;
    CHECK(total <= wave.paused_total());
  }
}

TEST_CASE("tile crossing mean mu") {
  const double n = 8.0;
  const double h = 2.0;
  const int k = 2;  // sphere radius 4
  const auto part = ShellPartition<2>::inner(n, h, k + 1);
  const auto sigma = part.sphere(k);

  SECTION("tile covering the whole sphere with everything excluded gives N") {
    const auto mu = mu_tile<2>(n, h, k, sigma, 100.0);
    CHECK(mu.exact);
    CHECK(mu.value == Catch::Approx(double(ball_site_count<2>(n))).epsilon(1e-8));
  }
  SECTION("empty tile gives 0") {
    const auto mu = mu_tile<2>(n, h, k, {}, 2.0);
    CHECK(mu.value == Catch::Approx(0.0).margin(1e-12));
  }
  SECTION("exact value agrees with Monte Carlo estimation") {
    const auto tile = part.tile(k, sigma.front());
    const double L = 1.0;
    const auto mu = mu_tile<2>(n, h, k, tile, L);

    // Monte Carlo oracle for both expectations
    const StrictRadius ball(k * h);
    SiteSet<2> tile_set(tile.begin(), tile.end());
    auto exit_in_tile = [&](const Site<2>& from, std::uint64_t seed, int trials) {
      int hits = 0;
      for (int t = 0; t < trials; ++t) {
        RandomSource rng(seed, static_cast<std::uint64_t>(t));
        Site<2> pos = from;
        while (ball.contains_norm2(norm2(pos))) step_site(pos, rng);
        hits += tile_set.count(pos) != 0;
      }
      return double(hits) / trials;
    };
    const std::int64_t N = ball_site_count<2>(n);
    const int trials = 40000;
    double mc = double(N) * exit_in_tile(Site<2>{}, 1234, trials * 4);
    double far_expect = 0.0;
    const double range2 = (L * h) * (L * h);
    for (const auto& y : ball_sites<2>(Site<2>{}, k * h)) {
      double d2min = 1e18;
      for (const auto& z : tile) d2min = std::min(d2min, double(dist2(y, z)));
      if (d2min < range2) continue;
      far_expect += exit_in_tile(y, 4321 + norm2(y), trials / 10);
    }
    mc -= far_expect;
    CHECK(mu.value == Catch::Approx(mc).margin(0.15 * std::abs(mu.value) + 0.8));
  }
}

TEST_CASE("mu falls back to Monte Carlo beyond the solve budget") {
  const double n = 8.0, h = 2.0;
  const int k = 2;
  const auto part = ShellPartition<2>::inner(n, h, k + 1);
  const auto tile = part.tile(k, part.sphere(k).front());
  const auto exact = mu_tile<2>(n, h, k, tile, 1.0);
  // force the Monte Carlo path with a tiny budget
  CHECK_THROWS_AS(mu_tile<2>(n, h, k, tile, 1.0, 10), Error);
  const auto mc = mu_tile<2>(n, h, k, tile, 1.0, 10, 60000, 777);
  CHECK_FALSE(mc.exact);
  CHECK(mc.halfwidth > 0.0);
  CHECK(std::abs(mc.value - exact.value) <= 3.0 * mc.halfwidth + 0.3);
}

TEST_CASE("exit-probability supremum check") {
  const double h = 2.0;
  const int k = 2;
  const auto part = ShellPartition<2>::inner(8.0, h, k + 1);
  const auto sigma = part.sphere(k);
  SECTION("empty tile gives 0") { CHECK(check_h1<2>(h, k, {}, 1.0) == 0.0); }
  SECTION("the full sphere gives 1") {
    CHECK(check_h1<2>(h, k, sigma, 0.5) == Catch::Approx(1.0).margin(1e-8));
  }
  SECTION("strictly below 1 and decreasing in L for a proper tile") {
    const auto tile = part.tile(k, sigma.front());
    const double s1 = check_h1<2>(h, k, tile, 0.5);
    const double s2 = check_h1<2>(h, k, tile, 1.0);
    const double s3 = check_h1<2>(h, k, tile, 1.5);
    CHECK(s1 < 1.0);
    CHECK(s2 <= s1);
    CHECK(s3 <= s2);
    CHECK(s3 > 0.0);
  }
}

TEST_CASE("per-tile W grows with the distance parameter A") {
  // innermost waves sit deeper inside B(0,n), i.e. at larger A = (n - kh)/h;
  // their tiles are crossed by more explorers on average
  const double n = 12.0;
  const int trials = 20;
  std::vector<double> a_values;
  std::vector<double> mean_w;
  std::map<int, std::vector<double>> per_wave;
  double height = 0.0;
  for (int t = 0; t < trials; ++t) {
    const auto run = grow_by_waves<2>(n, derive_seed(909, t), 2.0);
    height = run.height;
    for (const auto& wave : run.waves) {
      if (wave.sphere_radius >= n) continue;
      per_wave[wave.k].push_back(double(wave.paused_total()) /
                                 double(sphere_sites<2>(Site<2>{}, wave.sphere_radius).size()));
    }
  }
  for (const auto& [k, values] : per_wave) {
    a_values.push_back((n - k * height) / height);
    mean_w.push_back(stats::mean(values));
  }
  REQUIRE(a_values.size() >= 3);
  const auto fit = stats::linear_fit(a_values, mean_w);
  CHECK(fit.slope > 0.0);
}
