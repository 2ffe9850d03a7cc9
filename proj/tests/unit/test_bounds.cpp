#include "lsicert/bounds.hpp"
#include "lsicert/common.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace lsicert;
using doctest::Approx;

TEST_CASE("poincare bound") {
  CHECK(*bound_poincare(1, 0).value == 1.0);
  CHECK(*bound_poincare(1, 1).value == Approx(54.598150033144236).epsilon(1e-14));
  CHECK(*bound_poincare(2, 1).value == Approx(4 * std::numbers::e).epsilon(1e-14));
  CHECK(bound_poincare(1, 1).dimension_free);
  CHECK_THROWS_AS(bound_poincare(0, 1), InputError);
  CHECK_THROWS_AS(bound_poincare(-1, 1), InputError);
}

TEST_CASE("large-variance bounds") {
  CHECK(*bound_lsi_large_variance(2, 1).value == Approx(16.0 / 3).epsilon(1e-14));
  CHECK(*bound_lsi_large_variance(1, 0).value == 1.0);
  CHECK_FALSE(bound_lsi_large_variance(1, 1).valid);
  CHECK_FALSE(bound_lsi_large_variance(1, 1).value.has_value());
  CHECK(*bound_lsi_large_variance_corrected(1, 0).value == 2.0);
  CHECK(*bound_lsi_large_variance_corrected(2, 1).value == Approx(32.0 / 3).epsilon(1e-14));
}

TEST_CASE("dimension one and Miclo bounds") {
  CHECK(*bound_lsi_dim1(1, 0).value == 4.0);
  CHECK(*bound_lsi_dim1(1, 1).value == Approx(4 * std::exp(8 / std::numbers::pi)).epsilon(1e-14));
  CHECK(*bound_lsi_dim1(1, 1).value == Approx(51.048).epsilon(1e-4));
  for (int d : {1, 3, 10}) CHECK(*bound_lsi_miclo(1, 0, d).value == 4.0);
  for (double delta : {0.3, 1.0, 2.5})
    for (double R : {0.0, 0.4, 1.7})
      CHECK(*bound_lsi_miclo(delta, R, 1).value == Approx(*bound_lsi_dim1(delta, R).value).epsilon(1e-12));
  double prev = 0.0;
  for (int d = 1; d <= 30; ++d) {
    const double v = *bound_lsi_miclo(1, 0.8, d).value;
    CHECK(v >= prev);
    prev = v;
  }
  CHECK_FALSE(bound_lsi_miclo(1, 1, 2).dimension_free);
}

TEST_CASE("gaussian norm mean") {
  CHECK(gaussian_norm_mean(1) == Approx(std::sqrt(2 / std::numbers::pi)).epsilon(1e-14));
  CHECK(gaussian_norm_mean(2) == Approx(std::sqrt(std::numbers::pi / 2)).epsilon(1e-14));
  for (int d = 1; d <= 100; ++d) CHECK(gaussian_norm_mean(d) <= std::sqrt(d));
  CHECK_THROWS_AS(gaussian_norm_mean(0), InputError);
  // Monte Carlo cross-check in d = 2.
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  const int N = 400000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < N; ++i) {
    const double r = std::hypot(n(rng), n(rng));
    s += r;
    s2 += r * r;
  }
  const double mean = s / N, se = std::sqrt((s2 / N - mean * mean) / N);
  CHECK(std::abs(mean - gaussian_norm_mean(2)) <= 4 * se);
}

TEST_CASE("lyapunov assembly") {
  for (double delta : {0.3, 0.5, 1.0})
    for (double R : {1.0, 1.5}) {
      const auto p = lyapunov_params(delta, R, 3);
      CHECK(p.epsilon == Approx(2 / p.K).epsilon(1e-15));
      CHECK(p.A == Approx(128 * R * R + 2 * std::pow(delta, 4) / (R * R)).epsilon(1e-12));
      CHECK(p.c == Approx(1 / (64 * std::pow(delta, 4))).epsilon(1e-15));
      CHECK(p.b == Approx(3 / (8 * delta * delta) + R * R / (32 * std::pow(delta, 4))).epsilon(1e-15));
      CHECK(p.second_moment == Approx(R * R + 3 * delta * delta).epsilon(1e-15));
      const auto rep = bound_lsi_lyapunov(delta, R, 3);
      CHECK(*rep.value == Approx(p.A + (p.B + 2) * *bound_poincare(delta, R).value).epsilon(1e-12));
    }
  CHECK_FALSE(bound_lsi_lyapunov(1, 0, 1).valid);
  // Linear growth in d.
  const double v1 = *bound_lsi_lyapunov(1, 1, 1).value, v2 = *bound_lsi_lyapunov(1, 1, 2).value;
  const double v4 = *bound_lsi_lyapunov(1, 1, 4).value, v8 = *bound_lsi_lyapunov(1, 1, 8).value;
  CHECK((v4 - v2) == Approx(2 * (v2 - v1)).epsilon(1e-10));
  CHECK((v8 - v4) == Approx(2 * (v4 - v2)).epsilon(1e-10));
  CHECK(v1 > 0);
  CHECK(v1 < *bound_lsi_zimmermann(1, 1, 1).value);
}

TEST_CASE("zimmermann bound") {
  CHECK(*bound_lsi_zimmermann(1, 1, 1).value == Approx(289 * std::exp(25.0)).epsilon(1e-13));
  CHECK_FALSE(bound_lsi_zimmermann(2, 1, 1).valid);
  double prev = 0.0;
  for (int d : {1, 5, 10}) {
    const double r = *bound_lsi_zimmermann(1, 1, d).value / *bound_lsi_lyapunov(1, 1, d).value;
    CHECK(r > prev);
    prev = r;
  }
  const double r1 = *bound_lsi_zimmermann(1, 1, 1).value / *bound_lsi_lyapunov(1, 1, 1).value;
  const double r10 = *bound_lsi_zimmermann(1, 1, 10).value / *bound_lsi_lyapunov(1, 1, 10).value;
  const double growth = std::log(r10 / r1);
  CHECK(growth > 180 - std::log(10.0) - 1);
  CHECK(growth < 180);
}

TEST_CASE("discrete bound") {
  CHECK(*bound_lsi_discrete(1, 0, 3).value == Approx(2 + 3 * std::log(3.0)).epsilon(1e-14));
  CHECK(*bound_lsi_discrete(1, 1, 10).value == Approx(379.2).epsilon(1e-3));
  CHECK_FALSE(bound_lsi_discrete(1, 1, 2).valid);
  const double e3 = *bound_lsi_discrete(1, 0.5, 20).value - 2;
  CHECK(e3 == Approx(3 * std::log(20.0) * std::exp(1.0)).epsilon(1e-13));
  CHECK(*bound_lsi_discrete(1, 0.5, 21).value > *bound_lsi_discrete(1, 0.5, 20).value);
  CHECK(*bound_lsi_discrete(1, 0.6, 20).value > *bound_lsi_discrete(1, 0.5, 20).value);
}

TEST_CASE("logarithmic mean") {
  CHECK(lambda_fn(0.5, 0.5) == 0.5);
  CHECK(lambda_fn(0.25, 0.75) == Approx(0.5 / std::log(3.0)).epsilon(1e-14));
  CHECK(lambda_fn(0.3, 0.3 * (1 + 1e-9)) == Approx(0.3 * (1 + 0.5e-9)).epsilon(1e-15));
  CHECK_THROWS_AS(lambda_fn(0.0, 0.5), InputError);
  CHECK_THROWS_AS(lambda_fn(0.5, 1.0), InputError);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(1e-6, 0.5 - 1e-6);
  for (int i = 0; i < 10000; ++i) {
    const double p = u(rng);
    CHECK(1 / lambda_fn(p, 1 - p) <= std::log(1 / p) / (1 - 2 * p) * (1 + 1e-12));
  }
}

TEST_CASE("transport and convex bounds") {
  CHECK(*bound_transport(1, 0, 1).l4.value == 1.0);
  CHECK(*bound_transport(1, 1, 1).l4.value == Approx(2 * std::exp(4.0)).epsilon(1e-14));
  for (int d : {1, 2, 7})
    CHECK(*bound_transport(0.7, 0.4, 2.5, d).euclidean.value ==
          Approx(std::sqrt(d) * *bound_transport(0.7, 0.4, 2.5, d).l4.value).epsilon(1e-15));
  CHECK_THROWS_AS(bound_transport(1, 1, 0), InputError);
  CHECK(*bound_convex_lsi(1, 0).value == 8.0);
  CHECK(*bound_convex_lsi(1, 1).value == 40.0);
  CHECK(*bound_convex_lsi(0.6, 0.9).value == Approx(8 * (0.36 + 4 * 0.81)).epsilon(1e-15));
}

TEST_CASE("best bound") {
  const auto b = best_bound(2, 1, 10);
  CHECK(b.source == "bakry-emery-large-variance");
  CHECK(*b.value == Approx(32.0 / 3).epsilon(1e-14));

  const auto b1 = best_bound(0.5, 1, 1, 5);
  double m = INFINITY;
  for (const auto& c : lsi_candidates(0.5, 1, 1, 5, false))
    if (c.valid) m = std::min(m, *c.value);
  CHECK(*b1.value == m);

  CHECK_FALSE(best_bound(1, 1, 50).source == "miclo-holley-stroock-dim1");
  CHECK(best_bound(1, 1, 50, std::nullopt, true).source == "miclo-holley-stroock-dim1");

  for (double delta : {0.25, 0.5, 1.0, 2.0})
    for (double R : {0.0, 0.5, 1.0, 2.0})
      for (int d : {1, 2, 5}) {
        const auto best = best_bound(delta, R, d, 4);
        REQUIRE(best.valid);
        for (const auto& c : lsi_candidates(delta, R, d, 4, false))
          if (c.valid) CHECK(*best.value <= *c.value);
      }
}

TEST_CASE("bounds are monotone and positive") {
  const double deltas[] = {0.25, 0.5, 1.0, 1.5, 2.0};
  const double radii[] = {0.1, 0.3, 0.6, 1.0, 1.5};
  const int dims[] = {1, 2, 3, 5, 8};
  for (double delta : deltas)
    for (int d : dims) {
      std::vector<double> prev;
      for (double R : radii) {
        const auto all = all_bounds(delta, R, d, 5, 1.0);
        std::vector<double> cur;
        for (const auto& b : all) {
          if (b.valid) {
            CHECK(std::isfinite(*b.value));
            CHECK(*b.value > 0);
          }
          cur.push_back(b.valid ? *b.value : NAN);
        }
        if (!prev.empty()) {
          for (std::size_t i = 0; i < cur.size(); ++i)
            if (std::isfinite(cur[i]) && std::isfinite(prev[i]) && all[i].name != "best_lsi")
              CHECK(cur[i] >= prev[i]);
        }
        prev = cur;
      }
    }
  for (double delta : deltas)
    for (double R : radii) {
      double prev_m = 0.0, prev_l = 0.0;
      for (int d : dims) {
        const double m = *bound_lsi_miclo(delta, R, d).value;
        CHECK(m >= prev_m);
        prev_m = m;
        const auto l = bound_lsi_lyapunov(delta, R, d);
        if (l.valid) {
          CHECK(*l.value >= prev_l);
          prev_l = *l.value;
        }
      }
    }
}
