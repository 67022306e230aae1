#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "tsync/error.hpp"
#include "tsync/units.hpp"

using namespace tsync;

TEST_CASE("parse_duration accepts unit strings") {
  CHECK(parse_duration("100us") == 100'000);
  CHECK(parse_duration("1ms") == 1'000'000);
  CHECK(parse_duration("1s") == 1'000'000'000);
  CHECK(parse_duration("0.5ms") == 500'000);
  CHECK(parse_duration("-2ms") == -2'000'000);
  CHECK(parse_duration("7ns") == 7);
  CHECK(parse_duration("1.000000001s") == 1'000'000'001);
}

TEST_CASE("parse_duration rejects bare numbers and inexact values") {
  CHECK_THROWS_AS(parse_duration("100"), DomainError);
  CHECK_THROWS_AS(parse_duration("1.5ns"), DomainError);
  CHECK_THROWS_AS(parse_duration("3 ms"), DomainError);
  CHECK_THROWS_AS(parse_duration("3min"), DomainError);
  CHECK_THROWS_AS(parse_duration("ms"), DomainError);
  CHECK_THROWS_AS(parse_duration("1."), DomainError);
  CHECK_THROWS_AS(parse_duration(""), DomainError);
}

TEST_CASE("format_duration picks the largest exact unit") {
  CHECK(format_duration(0) == "0ns");
  CHECK(format_duration(seconds(300)) == "300s");
  CHECK(format_duration(microseconds(500)) == "500us");
  CHECK(format_duration(-milliseconds(7)) == "-7ms");
  CHECK(format_duration(1'000'000'001) == "1000000001ns");
}

TEST_CASE("property: parse(format(x)) == x") {
  std::mt19937_64 gen(42);
  std::uniform_int_distribution<std::int64_t> value(-seconds(1'000'000), seconds(1'000'000));
  for (int i = 0; i < 10'000; ++i) {
    const std::int64_t v = i % 3 == 0 ? value(gen) / 1000 * 1000 : value(gen);
    REQUIRE(parse_duration(format_duration(v)) == v);
  }
}
