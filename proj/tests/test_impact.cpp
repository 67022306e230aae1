#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "tsync/error.hpp"
#include "tsync/impact.hpp"

using namespace tsync;

namespace {

// Independent IoU oracle: interval overlap computed from the endpoints.
double interval_iou(double a0, double a1, double b0, double b1) {
  const double inter = std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
  const double uni = (a1 - a0) + (b1 - b0) - inter;
  return inter / uni;
}

}  // namespace

TEST_CASE("iou_1d examples") {
  CHECK(iou_1d(4.09, 0.0) == 1.0);
  CHECK(iou_1d(4.09, 4.09) == 0.0);
  CHECK(iou_1d(4.09, 10.0) == 0.0);
  CHECK(iou_1d(4.09, 4.09 / 3) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(iou_1d(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(iou_1d(1.0, -0.1), DomainError);
}

TEST_CASE("property: iou_1d matches interval overlap") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> len(0.1, 20.0), frac(0.0, 1.5);
  for (int i = 0; i < 10'000; ++i) {
    const double L = len(gen);
    const double d = frac(gen) * L;
    REQUIRE(iou_1d(L, d) == doctest::Approx(interval_iou(0, L, d, d + L)).epsilon(1e-12));
  }
}

TEST_CASE("tolerance table for a 4.09 m vehicle") {
  const double v[] = {5, 10, 20, 40};
  const std::int64_t half[] = {273, 136, 68, 34};
  const std::int64_t zero[] = {818, 409, 205, 102};
  for (int i = 0; i < 4; ++i) {
    CHECK(tolerable_sync_error_ms({v[i], 0.5, 4.09}) == half[i]);
    CHECK(tolerable_sync_error_ms({v[i], 0.0, 4.09}) == zero[i]);
  }
  // The 20 m/s, theta 0 cell is an exact tie: 4090 / 20 = 204.5.
  CHECK(tolerable_sync_error_exact_ms({20, 0.0, 4.09}) == doctest::Approx(204.5));
}

TEST_CASE("tolerance approaches zero as theta approaches 1") {
  CHECK(tolerable_sync_error_ms({5, 0.9999999, 4.09}) == 0);
  CHECK(tolerable_sync_error_ms({40, 0.999, 4.09}) == 0);
  CHECK_THROWS_AS(tolerable_sync_error_ms({5, 1.0, 4.09}), DomainError);
  CHECK_THROWS_AS(tolerable_sync_error_ms({0, 0.5, 4.09}), DomainError);
  CHECK_THROWS_AS(tolerable_sync_error_ms({5, -0.1, 4.09}), DomainError);
}

TEST_CASE("round_decimal_half_away") {
  CHECK(round_decimal_half_away(204.5) == 205);
  CHECK(round_decimal_half_away(204.49999999999997) == 205);
  CHECK(round_decimal_half_away(204.4) == 204);
  CHECK(round_decimal_half_away(-2.5) == -3);
  CHECK(round_decimal_half_away(0.0) == 0);
}

TEST_CASE("property: inverse consistency") {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> v(0.1, 100.0), theta(0.0, 0.999), L(0.5, 30.0);
  for (int i = 0; i < 10'000; ++i) {
    const ToleranceQuery q{v(gen), theta(gen), L(gen)};
    const double d = q.velocity_mps * tolerable_sync_error_exact_ms(q) / 1000.0;
    REQUIRE(std::abs(iou_1d(q.object_length_m, d) - q.iou_threshold) <= 1e-9);
  }
}

TEST_CASE("property: tolerance strictly decreases in v and theta") {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> v(0.1, 100.0), theta(0.0, 0.99), L(0.5, 30.0);
  for (int i = 0; i < 5'000; ++i) {
    const ToleranceQuery q{v(gen), theta(gen), L(gen)};
    ToleranceQuery faster = q, stricter = q;
    faster.velocity_mps *= 1.01;
    stricter.iou_threshold += 0.005;
    REQUIRE(tolerable_sync_error_exact_ms(faster) < tolerable_sync_error_exact_ms(q));
    REQUIRE(tolerable_sync_error_exact_ms(stricter) < tolerable_sync_error_exact_ms(q));
  }
}

TEST_CASE("speed estimate from the field example") {
  const SpeedObservation obs{{180.388, 463.93}, {177.235, 463.749}, 6317, 6818, 849};
  const auto s = speed_estimate(obs);
  CHECK(std::abs(s.true_mps - 6.30) <= 0.005);
  CHECK(std::abs(s.biased_mps - 2.34) <= 0.005);
  CHECK(std::abs(s.error_mps - 3.96) <= 0.005);
}

TEST_CASE("speed estimate hand-worked cases") {
  auto s = speed_estimate({{0, 0}, {10, 0}, 0, 1000, 1000});
  CHECK(s.true_mps == doctest::Approx(10));
  CHECK(s.biased_mps == doctest::Approx(5));
  CHECK(s.error_mps == doctest::Approx(5));

  s = speed_estimate({{180.388, 463.93}, {177.235, 463.749}, 6317, 6818, 0});
  CHECK(s.error_mps == 0.0);
  CHECK(s.biased_mps == s.true_mps);

  // Third coordinate enters the norm: |(3, 0, 4)| = 5 m over 1 s.
  s = speed_estimate({{0, 0, 0}, {3, 0, 4}, 0, 1000, 0});
  CHECK(s.true_mps == doctest::Approx(5));

  CHECK_THROWS_AS(speed_estimate({{0, 0}, {1, 0}, 10, 10, 0}), DomainError);
  CHECK_THROWS_AS(speed_estimate({{0, 0}, {1, 0}, 0, 10, -10}), DomainError);
}

TEST_CASE("property: speed error increases with positive dt") {
  std::mt19937_64 gen(10);
  std::uniform_real_distribution<double> coord(-500, 500), dt(0, 2000);
  for (int i = 0; i < 5'000; ++i) {
    SpeedObservation obs{{coord(gen), coord(gen)}, {coord(gen), coord(gen)}, 0, 500, dt(gen)};
    const double before = speed_estimate(obs).error_mps;
    obs.delta_t_ms += 1.0;
    REQUIRE(speed_estimate(obs).error_mps > before);
  }
}

TEST_CASE("misalignment examples") {
  auto m = misalignment_from_sync_error(10, 0);
  CHECK(m.displacement_m == 0.0);
  CHECK(m.iou == 1.0);
  CHECK(m.sync_case == SyncCase::Aligned);

  m = misalignment_from_sync_error(10, 136, 4.09, 0.5);
  CHECK(m.iou >= 0.5);
  CHECK(m.sync_case == SyncCase::Tolerable);

  m = misalignment_from_sync_error(10, 500, 4.09, 0.5);
  CHECK(m.displacement_m == doctest::Approx(5.0));
  CHECK(m.iou == 0.0);
  CHECK(m.sync_case == SyncCase::Intolerable);

  CHECK_FALSE(misalignment_from_sync_error(10, 100).sync_case.has_value());
}
