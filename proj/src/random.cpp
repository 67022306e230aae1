#include "tsync/random.hpp"

#include <cmath>
#include <limits>

#include "tsync/error.hpp"
#include "tsync/overloaded.hpp"

namespace tsync {

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) noexcept {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view name) noexcept {
  return splitmix64(splitmix64(master) ^ fnv1a(name));
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi <= lo) return lo;
  const auto span = static_cast<unsigned __int128>(
      static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo)) + 1;
  // Multiply-shift reduction; the bias is below 2^-64 * span.
  const auto scaled = (static_cast<unsigned __int128>(next()) * span) >> 64;
  return lo + static_cast<std::int64_t>(static_cast<std::uint64_t>(scaled));
}

double Rng::uniform01() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::int64_t draw(const Jitter& jitter, Rng& rng) {
  return std::visit(
      Overloaded{
          [](const NoJitter&) -> std::int64_t { return 0; },
          [&](const UniformJitter& j) { return rng.uniform_int(-j.half_width, j.half_width); },
          [&](const UniformRangeJitter& j) { return rng.uniform_int(j.low, j.high); },
          [&](const ExponentialJitter& j) -> std::int64_t {
            const double u = rng.uniform01();
            return std::llround(-static_cast<double>(j.mean) * std::log1p(-u));
          },
      },
      jitter);
}

std::int64_t jitter_min(const Jitter& jitter) noexcept {
  return std::visit(Overloaded{
                        [](const NoJitter&) -> std::int64_t { return 0; },
                        [](const UniformJitter& j) { return -j.half_width; },
                        [](const UniformRangeJitter& j) { return j.low; },
                        [](const ExponentialJitter&) -> std::int64_t { return 0; },
                    },
                    jitter);
}

std::int64_t jitter_max(const Jitter& jitter) noexcept {
  return std::visit(Overloaded{
                        [](const NoJitter&) -> std::int64_t { return 0; },
                        [](const UniformJitter& j) { return j.half_width; },
                        [](const UniformRangeJitter& j) { return j.high; },
                        [](const ExponentialJitter&) {
                          return std::numeric_limits<std::int64_t>::max();
                        },
                    },
                    jitter);
}

void validate(const Jitter& jitter) {
  std::visit(Overloaded{
                 [](const NoJitter&) {},
                 [](const UniformJitter& j) {
                   if (j.half_width < 0) throw DomainError("uniform jitter half-width must be >= 0");
                 },
                 [](const UniformRangeJitter& j) {
                   if (j.low > j.high) throw DomainError("uniform range jitter needs low <= high");
                 },
                 [](const ExponentialJitter& j) {
                   if (j.mean < 0) throw DomainError("exponential jitter mean must be >= 0");
                 },
             },
             jitter);
}

}  // namespace tsync
