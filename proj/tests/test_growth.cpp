#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "idla/growth.hpp"
#include "idla/stats.hpp"

using namespace idla;

TEST_CASE("a single explorer settles at its start at time zero") {
  const auto cluster = grow<2>(Configuration<2>::point_mass(Site<2>{}, 1), 5);
  REQUIRE(cluster.settle_order.size() == 1);
  CHECK(cluster.settle_order[0].site == Site<2>{});
  CHECK(cluster.settle_order[0].tau == 0);
}

TEST_CASE("exactly one explorer occupies each site of the cluster") {
  for (std::uint64_t seed : {1ull, 2ull, 99ull}) {
    for (std::int64_t N : {1, 7, 60, 250}) {
      const auto cluster = grow<2>(Configuration<2>::point_mass(Site<2>{}, N), seed);
      CHECK(cluster.settled_total() == N);
      std::set<Site<2>> sites;
      for (const auto& s : cluster.settle_order) CHECK(sites.insert(s.site).second);
      CHECK(cluster.occupied.size() == N);
    }
  }
  const auto d3 = grow<3>(Configuration<3>::point_mass(Site<3>{}, 300), 4);
  CHECK(d3.settled_total() == 300);
}

TEST_CASE("the second explorer settles uniformly on the four neighbors") {
  std::map<Site<2>, int> counts;
  const int trials = 100000;
  for (int t = 0; t < trials; ++t) {
    const auto cluster =
        grow<2>(Configuration<2>::point_mass(Site<2>{}, 2), derive_seed(11, t));
    REQUIRE(cluster.settle_order.size() == 2);
    ++counts[cluster.settle_order[1].site];
  }
  REQUIRE(counts.size() == 4);
  for (const auto& [s, c] : counts) {
    CHECK(norm2(s) == 1);
    CHECK(std::abs(double(c) / trials - 0.25) < 0.02);
  }
}

TEST_CASE("monotone growth: the cluster gains one site per explorer") {
  const auto cluster = grow<2>(Configuration<2>::point_mass(Site<2>{}, 120), 8);
  for (std::size_t k = 0; k < cluster.settle_order.size(); ++k)
    CHECK(cluster.settle_order[k].explorer == static_cast<std::int64_t>(k));
}

TEST_CASE("tau is zero whenever the start site is free") {
  // multi-site configuration: each first arrival at a fresh site settles at 0
  Configuration<2> eta;
  eta.add(Site<2>{{3, 0}}, 2);
  eta.add(Site<2>{{0, 0}}, 1);
  const auto cluster = grow<2>(eta, 17);
  // processing is lexicographic: (0,0) first, then the two at (3,0)
  CHECK(cluster.settle_order[0].site == Site<2>{{0, 0}});
  CHECK(cluster.settle_order[0].tau == 0);
  CHECK(cluster.settle_order[1].site == Site<2>{{3, 0}});
  CHECK(cluster.settle_order[1].tau == 0);
  CHECK(cluster.settle_order[2].tau > 0);
}

TEST_CASE("grow is reproducible bit for bit") {
  const auto a = grow<3>(Configuration<3>::point_mass(Site<3>{}, 150), 77);
  const auto b = grow<3>(Configuration<3>::point_mass(Site<3>{}, 150), 77);
  REQUIRE(a.settle_order.size() == b.settle_order.size());
  for (std::size_t i = 0; i < a.settle_order.size(); ++i) {
    CHECK(a.settle_order[i].site == b.settle_order[i].site);
    CHECK(a.settle_order[i].tau == b.settle_order[i].tau);
  }
}

TEST_CASE("stopped growth conserves explorers and stays inside the ball") {
  SECTION("single explorer, nothing stopped") {
    const auto c = grow_stopped<2>(Configuration<2>::point_mass(Site<2>{}, 1), 3.0, 5);
    CHECK(c.settled_total() == 1);
    CHECK(c.stopped_total == 0);
  }
  SECTION("conservation and geometry") {
    const double R = 6.0;
    const StrictRadius sr(R);
    for (std::uint64_t seed : {3ull, 12ull, 80ull}) {
      const std::int64_t N = 260;  // more explorers than |B(0,6)| = 109 in d=2
      const auto c = grow_stopped<2>(Configuration<2>::point_mass(Site<2>{}, N), R, seed);
      CHECK(c.settled_total() + c.stopped_total == N);
      CHECK(c.stopped_total > 0);
      for (const auto& s : c.settle_order) CHECK(sr.contains_norm2(norm2(s.site)));
      for (const auto& [site, cnt] : c.stopped_on_boundary) {
        CHECK(on_ball_boundary(site, Site<2>{}, sr));
        CHECK(cnt > 0);
      }
    }
  }
  SECTION("rejects mass outside the domain") {
    Configuration<2> eta;
    eta.add(Site<2>{{9, 0}}, 1);
    CHECK_THROWS_AS(grow_stopped<2>(eta, 4.0, 1), Error);
  }
}

TEST_CASE("error radii follow their definitions") {
  const double n = 5.0;
  SECTION("perfect ball has zero errors") {
    Cluster<2> c;
    for (const auto& s : ball_sites<2>(Site<2>{}, n)) {
      c.occupied.insert(s);
      c.settle_order.push_back({0, s, 0});
    }
    CHECK(inner_error(c, n) == 0.0);
    CHECK(outer_error(c, n) == 0.0);
  }
  SECTION("empty cluster has inner error n") {
    Cluster<2> c;
    CHECK(inner_error(c, n) == n);
  }
  SECTION("one missing site sets the inner error to n minus its norm") {
    const Site<2> removed{{3, 1}};  // norm sqrt(10) ~ 3.16, inside B(0,5)
    Cluster<2> c;
    for (const auto& s : ball_sites<2>(Site<2>{}, n)) {
      if (s == removed) continue;
      c.occupied.insert(s);
      c.settle_order.push_back({0, s, 0});
    }
    CHECK(inner_error(c, n) == Catch::Approx(n - norm<2>(removed)));
  }
  SECTION("outer error is the norm excess of the farthest site") {
    Cluster<2> c;
    c.occupied.insert(Site<2>{});
    c.settle_order.push_back({0, Site<2>{}, 0});
    const Site<2> far{{7, 2}};
    c.occupied.insert(far);
    c.settle_order.push_back({1, far, 0});
    CHECK(outer_error(c, n) == Catch::Approx(norm<2>(far) - n));
    CHECK(outer_error(c, 10.0) == 0.0);  // clamped when contained
  }
  SECTION("sandwich property on real runs") {
    const double m = 8.0;
    const std::int64_t N = ball_site_count<2>(m);
    for (std::uint64_t seed : {21ull, 22ull, 23ull}) {
      const auto c = grow<2>(Configuration<2>::point_mass(Site<2>{}, N), seed);
      const auto e = error_radii(c, m);
      CHECK(e.inner >= 0.0);
      CHECK(e.inner <= m);
      CHECK(e.outer >= 0.0);
      // B(0, m - delta_I) is fully occupied (exact squared-norm form)
      const auto filled = StrictRadius::from_squared_norm(e.inner_norm2);
      std::vector<Site<2>> inner_ball;
      visit_ball<2>(Site<2>{}, filled, [&](const Site<2>& s, std::int64_t) {
        inner_ball.push_back(s);
      });
      for (const auto& s : inner_ball) CHECK(c.contains(s));
      // everything fits strictly inside any radius beyond m + delta_O
      const auto outer = StrictRadius::from_squared_norm(e.outer_norm2 + 1);
      for (const auto& s : c.settle_order) CHECK(outer.contains_norm2(norm2(s.site)));
    }
  }
}

TEST_CASE("count_hits observables") {
  const double R = 5.0;
  SECTION("every free walk exits somewhere on the boundary") {
    const auto targets = sphere_sites<2>(Site<2>{}, R);
    const std::int64_t N = 40;
    const auto res = count_hits<2>(Configuration<2>::point_mass(Site<2>{}, N), R, targets,
                                   HitMode::walkers_M, 9);
    std::int64_t total = 0;
    for (auto c : res.counts) total += c;
    CHECK(total == N);
  }
  SECTION("a walker starting on a target counts immediately") {
    const Site<2> z{{2, 1}};
    Configuration<2> eta;
    eta.add(z, 1);
    const auto res = count_hits<2>(eta, R, {z}, HitMode::walkers_M, 13);
    CHECK(res.counts[0] >= 1);
  }
  SECTION("explorer mode returns the stopped cluster and conserves mass") {
    const std::int64_t N = 150;
    const auto targets = sphere_sites<2>(Site<2>{}, R);
    const auto res = count_hits<2>(Configuration<2>::point_mass(Site<2>{}, N), R, targets,
                                   HitMode::explorers_W, 31);
    CHECK(res.cluster.settled_total() + res.cluster.stopped_total == N);
    std::int64_t w_total = 0;
    for (auto c : res.counts) w_total += c;
    // every stopped explorer exits on exactly one boundary site
    CHECK(w_total == res.cluster.stopped_total);
  }
  SECTION("rejects targets outside the closed ball") {
    CHECK_THROWS_AS(count_hits<2>(Configuration<2>::point_mass(Site<2>{}, 1), R,
                                  {Site<2>{{9, 9}}}, HitMode::walkers_M, 1),
                    Error);
  }
}
