#pragma once

#include <compare>
#include <cstdint>

namespace tsync {

/// Signed duration in nanoseconds.
using Nanos = std::int64_t;

inline constexpr Nanos kNanosecond = 1;
inline constexpr Nanos kMicrosecond = 1'000;
inline constexpr Nanos kMillisecond = 1'000'000;
inline constexpr Nanos kSecond = 1'000'000'000;

constexpr Nanos microseconds(std::int64_t v) { return v * kMicrosecond; }
constexpr Nanos milliseconds(std::int64_t v) { return v * kMillisecond; }
constexpr Nanos seconds(std::int64_t v) { return v * kSecond; }

/// An instant on one timescale, in integer nanoseconds. The tag keeps
/// instants of different timescales from being mixed up.
template <class Tag>
struct Instant {
  std::int64_t ns = 0;

  constexpr auto operator<=>(const Instant&) const = default;

  constexpr Instant& operator+=(Nanos d) {
    ns += d;
    return *this;
  }
  friend constexpr Instant operator+(Instant a, Nanos d) { return Instant{a.ns + d}; }
  friend constexpr Instant operator-(Instant a, Nanos d) { return Instant{a.ns - d}; }
  friend constexpr Nanos operator-(Instant a, Instant b) { return a.ns - b.ns; }
};

struct TrueTimeTag {};
struct LocalTimeTag {};

/// Ground-truth simulation time since the simulation epoch.
using TrueTime = Instant<TrueTimeTag>;
/// A reading of one node's clock.
using LocalTime = Instant<LocalTimeTag>;

/// Fractional frequency in parts per billion.
struct Ppb {
  std::int64_t value = 0;

  static Ppb from_ppm(double ppm);
  double ppm() const { return static_cast<double>(value) / 1000.0; }

  constexpr auto operator<=>(const Ppb&) const = default;
};

/// Rounded quotient num/den with ties away from zero. den > 0.
std::int64_t div_round_half_away(__int128 num, std::int64_t den);

/// Nearest integer with ties away from zero.
std::int64_t round_half_away(double x);

struct ClockModel {
  Nanos initial_offset = 0;
  Ppb drift{};
  /// Half-width of the uniform per-read jitter.
  Nanos read_jitter = 0;
  Ppb slew_rate_limit = Ppb{500'000};

  /// Throws DomainError unless |drift| < 10'000 ppm, read_jitter >= 0 and
  /// 0 <= slew_rate_limit < 1e6 ppm.
  void validate() const;

  bool operator==(const ClockModel&) const = default;
};

/// A phase correction that is being worked off gradually.
struct PendingSlew {
  /// Still to be added to the clock reading, in ns (negative slews back).
  Nanos remaining = 0;
  Ppb rate{};
  TrueTime start{};

  bool operator==(const PendingSlew&) const = default;
};

struct ClockState {
  ClockModel model;
  /// True time at which the node was created; drift accrues from here.
  TrueTime epoch{};
  Nanos accumulated_correction = 0;
  PendingSlew pending_slew;
  TrueTime last_sync_epoch{};
  /// Key of the counter-based read-jitter stream.
  std::uint64_t jitter_key = 0;

  bool operator==(const ClockState&) const = default;
};

/// Validates `model` and returns a clock created at `created_at`.
ClockState make_clock(const ClockModel& model, TrueTime created_at = TrueTime{0},
                      std::uint64_t jitter_key = 0);

/// Reading of the clock at true time `t` without read jitter.
LocalTime local_from_true_noiseless(const ClockState& state, TrueTime t);

/// Reading of the clock at `t`, including the read-jitter draw. The draw is a
/// pure function of (jitter_key, t), so repeated reads replay identically.
LocalTime local_from_true(const ClockState& state, TrueTime t);

/// Inverse of the noiseless reading. Throws NonInvertible when the effective
/// clock rate is not positive.
TrueTime true_from_local(const ClockState& state, LocalTime l);

enum class CorrectionMode { Step, Slew };

/// Removes `offset_estimate` (clock ahead by that much) from the clock as of
/// true time `at`. Step applies it at once; Slew works it off at
/// `slew_rate` (capped at the model's slew_rate_limit; defaults to the limit).
/// A model with a zero slew limit cannot slew and steps instead.
ClockState apply_correction(ClockState state, Nanos offset_estimate, CorrectionMode mode,
                            TrueTime at, Ppb slew_rate = Ppb{-1});

}  // namespace tsync
