#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <variant>

namespace tsync {

/// 64-bit FNV-1a, used for stream names and trace hashing.
std::uint64_t fnv1a(std::string_view bytes,
                    std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed of the named stream under `master`. Streams for different names are
/// independent, so adding an entity never perturbs the draws of another.
std::uint64_t derive_seed(std::uint64_t master, std::string_view name) noexcept;

/// Deterministic random stream. The integer/real conversions are done here
/// rather than with <random> distributions, whose output is not specified
/// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in the closed range [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  /// Uniform real in [0, 1).
  double uniform01();

 private:
  std::mt19937_64 engine_;
};

/// Fans a master seed out into named, independent streams.
class RngFactory {
 public:
  explicit RngFactory(std::uint64_t master) : master_(master) {}

  Rng stream(std::string_view name) const { return Rng(derive_seed(master_, name)); }
  std::uint64_t key(std::string_view name) const { return derive_seed(master_, name); }
  std::uint64_t master() const noexcept { return master_; }

 private:
  std::uint64_t master_;
};

// Additive delay/latency distributions, all in integer nanoseconds.

struct NoJitter {
  bool operator==(const NoJitter&) const = default;
};

/// Symmetric uniform draw in [-half_width, +half_width].
struct UniformJitter {
  std::int64_t half_width = 0;
  bool operator==(const UniformJitter&) const = default;
};

/// Uniform draw in [low, high].
struct UniformRangeJitter {
  std::int64_t low = 0;
  std::int64_t high = 0;
  bool operator==(const UniformRangeJitter&) const = default;
};

struct ExponentialJitter {
  std::int64_t mean = 0;
  bool operator==(const ExponentialJitter&) const = default;
};

using Jitter = std::variant<NoJitter, UniformJitter, UniformRangeJitter, ExponentialJitter>;

/// One draw from `jitter`. NoJitter consumes nothing from the stream.
std::int64_t draw(const Jitter& jitter, Rng& rng);

/// Smallest and largest value a draw can take (exponential is unbounded above).
std::int64_t jitter_min(const Jitter& jitter) noexcept;
std::int64_t jitter_max(const Jitter& jitter) noexcept;

/// Throws DomainError for negative widths/means or low > high.
void validate(const Jitter& jitter);

}  // namespace tsync
