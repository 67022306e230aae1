#include "tsync/timebase.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tsync/error.hpp"
#include "tsync/random.hpp"

namespace tsync {

namespace {

constexpr std::int64_t kPpbScale = 1'000'000'000;

__int128 abs128(__int128 v) { return v < 0 ? -v : v; }

// Slew progress at `t`, in units of ns * 1e-9, signed like `remaining`.
__int128 slew_progress_scaled(const PendingSlew& slew, TrueTime t) {
  if (slew.remaining == 0 || slew.rate.value <= 0 || t <= slew.start) return 0;
  const __int128 elapsed = t - slew.start;
  const __int128 cap = abs128(slew.remaining) * kPpbScale;
  const __int128 progress = std::min(cap, elapsed * slew.rate.value);
  return slew.remaining < 0 ? -progress : progress;
}

// Folds the part of the pending slew absorbed by `at` into the accumulated
// correction, keeping the reading at `at` unchanged.
void settle(ClockState& state, TrueTime at) {
  auto& slew = state.pending_slew;
  if (slew.remaining == 0 || at <= slew.start) return;
  const LocalTime before = local_from_true_noiseless(state, at);
  const auto absorbed = static_cast<Nanos>(slew_progress_scaled(slew, at) / kPpbScale);
  state.accumulated_correction += absorbed;
  slew.remaining -= absorbed;
  slew.start = at;
  if (slew.remaining == 0) slew.rate = Ppb{};
  const LocalTime after = local_from_true_noiseless(state, at);
  state.accumulated_correction += before - after;
}

}  // namespace

Ppb Ppb::from_ppm(double ppm) {
  if (!std::isfinite(ppm)) throw DomainError("ppm value must be finite");
  return Ppb{round_half_away(ppm * 1000.0)};
}

std::int64_t div_round_half_away(__int128 num, std::int64_t den) {
  const __int128 q = num / den;
  const __int128 r = num % den;
  if (2 * abs128(r) >= den) return static_cast<std::int64_t>(num < 0 ? q - 1 : q + 1);
  return static_cast<std::int64_t>(q);
}

std::int64_t round_half_away(double x) { return std::llround(x); }

void ClockModel::validate() const {
  if (std::abs(drift.value) >= 10'000'000) {
    throw DomainError("clock drift must satisfy |drift| < 10000 ppm");
  }
  if (read_jitter < 0) throw DomainError("clock read jitter must be >= 0");
  if (slew_rate_limit.value < 0 || slew_rate_limit.value >= kPpbScale) {
    throw DomainError("slew rate limit must lie in [0, 1e6) ppm");
  }
}

ClockState make_clock(const ClockModel& model, TrueTime created_at, std::uint64_t jitter_key) {
  model.validate();
  ClockState state;
  state.model = model;
  state.epoch = created_at;
  state.last_sync_epoch = created_at;
  state.jitter_key = jitter_key;
  return state;
}

LocalTime local_from_true_noiseless(const ClockState& state, TrueTime t) {
  const __int128 elapsed = t - state.epoch;
  const __int128 fractional =
      elapsed * state.model.drift.value + slew_progress_scaled(state.pending_slew, t);
  return LocalTime{t.ns + state.model.initial_offset + state.accumulated_correction +
                   div_round_half_away(fractional, kPpbScale)};
}

LocalTime local_from_true(const ClockState& state, TrueTime t) {
  LocalTime l = local_from_true_noiseless(state, t);
  const Nanos w = state.model.read_jitter;
  if (w > 0) {
    const std::uint64_t h =
        splitmix64(state.jitter_key ^ splitmix64(static_cast<std::uint64_t>(t.ns)));
    const auto span = static_cast<unsigned __int128>(2 * w + 1);
    l += static_cast<Nanos>((static_cast<unsigned __int128>(h) * span) >> 64) - w;
  }
  return l;
}

TrueTime true_from_local(const ClockState& state, LocalTime l) {
  const auto& slew = state.pending_slew;
  const std::int64_t base_rate = kPpbScale + state.model.drift.value;
  std::int64_t slewing_rate = base_rate;
  if (slew.remaining != 0) {
    slewing_rate += slew.remaining < 0 ? -slew.rate.value : slew.rate.value;
  }
  if (base_rate <= 0 || slewing_rate <= 0) {
    throw NonInvertible("clock rate is not positive; local time cannot be inverted");
  }

  // The noiseless mapping is non-decreasing, so bracket and bisect.
  const auto f = [&](std::int64_t t) { return local_from_true_noiseless(state, TrueTime{t}).ns; };
  const std::int64_t guess = l.ns - state.model.initial_offset - state.accumulated_correction;
  constexpr std::int64_t kMaxSpan = std::int64_t{1} << 62;
  std::int64_t span = kMicrosecond;
  std::int64_t lo = guess - span;
  std::int64_t hi = guess + span;
  while (f(lo) > l.ns && span < kMaxSpan) {
    span *= 2;
    lo = guess - span;
  }
  span = kMicrosecond;
  while (f(hi) < l.ns && span < kMaxSpan) {
    span *= 2;
    hi = guess + span;
  }
  // Invariant: f(lo) <= l <= f(hi).
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (f(mid) < l.ns) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (f(lo) == l.ns) return TrueTime{lo};
  return TrueTime{(l.ns - f(lo) < f(hi) - l.ns) ? lo : hi};
}

ClockState apply_correction(ClockState state, Nanos offset_estimate, CorrectionMode mode,
                            TrueTime at, Ppb slew_rate) {
  settle(state, at);
  const Ppb limit = state.model.slew_rate_limit;
  if (mode == CorrectionMode::Step || limit.value == 0) {
    state.accumulated_correction -= offset_estimate;
    return state;
  }
  if (offset_estimate == 0) return state;
  auto& slew = state.pending_slew;
  slew.remaining -= offset_estimate;
  slew.rate = (slew_rate.value <= 0) ? limit : std::min(slew_rate, limit);
  slew.start = at;
  if (slew.remaining == 0) slew.rate = Ppb{};
  return state;
}

}  // namespace tsync
