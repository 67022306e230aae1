#pragma once

#include <cstdint>
#include <optional>

namespace tsync {

/// Length of the reference vehicle, in meters.
inline constexpr double kDefaultObjectLength = 4.09;

/// IoU of two equal boxes of length `length_m` offset by `displacement_m`
/// along the direction of travel: max(0, (L - d) / (L + d)).
/// Throws DomainError if length_m <= 0 or displacement_m < 0.
double iou_1d(double length_m, double displacement_m);

struct ToleranceQuery {
  double velocity_mps = 0.0;
  double iou_threshold = 0.0;
  double object_length_m = kDefaultObjectLength;

  /// Throws DomainError unless v > 0, L > 0 and 0 <= threshold < 1.
  void validate() const;
};

/// Largest sync error (ms) that keeps the IoU at or above the threshold:
/// 1000 * L * (1 - theta) / (v * (1 + theta)).
double tolerable_sync_error_exact_ms(const ToleranceQuery& q);

/// The same, rounded half away from zero to whole milliseconds.
std::int64_t tolerable_sync_error_ms(const ToleranceQuery& q);

/// Half-away-from-zero rounding that treats values within 1e-9 of a .5 tie
/// as the tie, so decimal inputs like 4.09 round the way they read.
std::int64_t round_decimal_half_away(double x);

struct Position {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Two observations of one object from different machines. The second
/// machine's clock is off by delta_t_ms.
struct SpeedObservation {
  Position p1;
  Position p2;
  double t1_ms = 0.0;
  double t2_ms = 0.0;
  double delta_t_ms = 0.0;
};

struct SpeedEstimate {
  double true_mps = 0.0;
  double biased_mps = 0.0;
  double error_mps = 0.0;
};

/// s = |p2 - p1| / (t2 - t1), s' = |p2 - p1| / (t2 + dt - t1), error = |s - s'|.
/// Throws DomainError if either denominator is not positive.
SpeedEstimate speed_estimate(const SpeedObservation& obs);

enum class SyncCase {
  /// Perfectly aligned (no displacement).
  Aligned = 0,
  /// IoU still at or above the threshold.
  Tolerable = 1,
  /// IoU below the threshold.
  Intolerable = 2,
};

struct Misalignment {
  double displacement_m = 0.0;
  double iou = 1.0;
  /// Set when a threshold was given, or when the boxes are aligned.
  std::optional<SyncCase> sync_case;
};

/// Box displacement v * dt caused by a sync error, and the resulting IoU.
Misalignment misalignment_from_sync_error(double velocity_mps, double sync_error_ms,
                                          double object_length_m = kDefaultObjectLength,
                                          std::optional<double> iou_threshold = std::nullopt);

}  // namespace tsync
