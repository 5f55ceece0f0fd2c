#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "idla/greens.hpp"
#include "idla/stats.hpp"
#include "idla/walk.hpp"

using namespace idla;

TEST_CASE("streams are deterministic and distinct") {
  RandomSource a(42, 7), b(42, 7), c(42, 8);
  bool all_equal = true;
  bool any_equal_other = false;
  for (int i = 0; i < 64; ++i) {
    const auto x = a.next();
    all_equal = all_equal && (x == b.next());
    any_equal_other = any_equal_other || (x == c.next());
  }
  CHECK(all_equal);
  CHECK_FALSE(any_equal_other);
}

TEST_CASE("steps pick each neighbor uniformly") {
  RandomSource rng(2024, 0);
  std::map<Site<2>, int> counts;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    Site<2> s{};
    step_site(s, rng);
    ++counts[s];
  }
  REQUIRE(counts.size() == 4);
  for (const auto& [s, c] : counts) {
    CHECK(norm2(s) == 1);
    CHECK(std::abs(double(c) / n - 0.25) < 0.02);
  }
}

TEST_CASE("step increments the clock") {
  WalkState<3> w;
  RandomSource rng(1, 0);
  CHECK(w.step_count == 0);
  step(w, rng);
  CHECK(w.step_count == 1);
  CHECK(norm2(w.position) == 1);
}

TEST_CASE("replay determinism is bit exact") {
  auto trajectory = [](std::uint64_t seed, std::uint64_t stream) {
    RandomSource rng(seed, stream);
    WalkState<2> w;
    std::vector<Site<2>> path;
    for (int i = 0; i < 500; ++i) {
      step(w, rng);
      path.push_back(w.position);
    }
    return path;
  };
  CHECK(trajectory(99, 3) == trajectory(99, 3));
  CHECK(trajectory(99, 3) != trajectory(99, 4));
}

TEST_CASE("run_until_hit contract") {
  RandomSource rng(7, 0);
  SECTION("start on the target hits at step 0") {
    SiteSet<2> target = {Site<2>{}};
    SiteSet<2> absorbing = {Site<2>{{1, 0}}};
    const auto hit = run_until_hit<2>({Site<2>{}, 0}, target, absorbing, rng);
    CHECK(hit.kind == HitKind::target);
    CHECK(hit.steps == 0);
    CHECK(hit.first_hit == Site<2>{});
  }
  SECTION("target wins ties") {
    SiteSet<2> both = {Site<2>{}};
    const auto hit = run_until_hit<2>({Site<2>{}, 0}, both, both, rng);
    CHECK(hit.kind == HitKind::target);
  }
  SECTION("exit from a ball always terminates on the boundary") {
    const double R = 6.0;
    const StrictRadius sr(R);
    for (int rep = 0; rep < 50; ++rep) {
      RandomSource r2(100, static_cast<std::uint64_t>(rep));
      const auto hit = run_until_hit_if<2>(
          {Site<2>{}, 0}, [](const Site<2>&) { return false; },
          [&](const Site<2>& s) { return !sr.contains_norm2(norm2(s)); }, r2);
      CHECK(hit.kind == HitKind::absorbing);
      CHECK(on_ball_boundary(hit.first_hit, Site<2>{}, sr));
    }
  }
  SECTION("step cap raises") {
    SiteSet<2> none;
    RandomSource r3(5, 5);
    CHECK_THROWS_AS(run_until_hit<2>({Site<2>{}, 0}, none, none, r3, 1000), Error);
  }
}

TEST_CASE("exit law from the center is symmetric under lattice symmetries") {
  // exit sites of B(0,5), pooled over axis permutation + sign flips
  const double R = 5.0;
  const StrictRadius sr(R);
  std::map<Site<2>, int> counts;
  const int trials = 40000;
  for (int t = 0; t < trials; ++t) {
    RandomSource rng(31337, static_cast<std::uint64_t>(t));
    const auto hit = run_until_hit_if<2>(
        {Site<2>{}, 0}, [](const Site<2>&) { return false; },
        [&](const Site<2>& s) { return !sr.contains_norm2(norm2(s)); }, rng);
    ++counts[hit.first_hit];
  }
  // compare a site against its reflection through x<->y
  auto freq = [&](Site<2> s) { return double(counts[s]) / trials; };
  const Site<2> a{{5, 1}}, b{{1, 5}};
  CHECK(std::abs(freq(a) - freq(b)) < 0.01);
  const Site<2> c{{-5, 0}}, d{{0, 5}};
  CHECK(std::abs(freq(c) - freq(d)) < 0.01);
}

TEST_CASE("d=3 hit frequency follows the inverse-distance trend") {
  // frequency of hitting z before exiting B(0, 4R), vs fitted a/(1+|z|)
  const double R = 6.0;
  const StrictRadius absorb(4.0 * R);
  const int trials = 100000;
  std::vector<double> scaled;  // freq * (1 + |z|^{d-2})
  for (const Site<3> z : {Site<3>{{2, 0, 0}}, Site<3>{{4, 0, 0}}, Site<3>{{6, 0, 0}}}) {
    int hits = 0;
    for (int t = 0; t < trials; ++t) {
      RandomSource rng(555 + norm2(z), static_cast<std::uint64_t>(t));
      const auto hit = run_until_hit_if<3>(
          {Site<3>{}, 0}, [&](const Site<3>& s) { return s == z; },
          [&](const Site<3>& s) { return !absorb.contains_norm2(norm2(s)); }, rng);
      hits += hit.kind == HitKind::target;
    }
    scaled.push_back(double(hits) / trials * (1.0 + norm<3>(z)));
  }
  // the scaled frequencies are bracketed within a modest constant band
  const double lo = *std::min_element(scaled.begin(), scaled.end());
  const double hi = *std::max_element(scaled.begin(), scaled.end());
  CHECK(lo > 0.0);
  CHECK(hi / lo < 3.0);
}
