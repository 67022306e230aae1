#include "tsync/impact.hpp"

#include <cmath>

#include "tsync/error.hpp"

namespace tsync {

double iou_1d(double length_m, double displacement_m) {
  if (!(length_m > 0.0) || !std::isfinite(length_m)) throw DomainError("box length must be > 0");
  if (!(displacement_m >= 0.0)) throw DomainError("displacement must be >= 0");
  if (displacement_m >= length_m) return 0.0;
  return (length_m - displacement_m) / (length_m + displacement_m);
}

void ToleranceQuery::validate() const {
  if (!(velocity_mps > 0.0) || !std::isfinite(velocity_mps)) {
    throw DomainError("velocity must be > 0");
  }
  if (!(object_length_m > 0.0) || !std::isfinite(object_length_m)) {
    throw DomainError("object length must be > 0");
  }
  if (!(iou_threshold >= 0.0 && iou_threshold < 1.0)) {
    throw DomainError("IoU threshold must lie in [0, 1)");
  }
}

double tolerable_sync_error_exact_ms(const ToleranceQuery& q) {
  q.validate();
  return 1000.0 * q.object_length_m * (1.0 - q.iou_threshold) /
         (q.velocity_mps * (1.0 + q.iou_threshold));
}

std::int64_t round_decimal_half_away(double x) {
  const double magnitude = std::abs(x);
  const double whole = std::floor(magnitude);
  const double frac = magnitude - whole;
  const auto rounded = static_cast<std::int64_t>(
      std::abs(frac - 0.5) < 1e-9 ? whole + 1.0 : std::round(magnitude));
  return x < 0 ? -rounded : rounded;
}

std::int64_t tolerable_sync_error_ms(const ToleranceQuery& q) {
  return round_decimal_half_away(tolerable_sync_error_exact_ms(q));
}

SpeedEstimate speed_estimate(const SpeedObservation& obs) {
  const double true_span_s = (obs.t2_ms - obs.t1_ms) / 1000.0;
  const double biased_span_s = (obs.t2_ms + obs.delta_t_ms - obs.t1_ms) / 1000.0;
  if (!(true_span_s > 0.0)) throw DomainError("speed estimate needs t2 > t1");
  if (!(biased_span_s > 0.0)) throw DomainError("speed estimate needs t2 + delta_t > t1");
  const double distance = std::sqrt(std::pow(obs.p2.x - obs.p1.x, 2) +
                                    std::pow(obs.p2.y - obs.p1.y, 2) +
                                    std::pow(obs.p2.z - obs.p1.z, 2));
  SpeedEstimate out;
  out.true_mps = distance / true_span_s;
  out.biased_mps = distance / biased_span_s;
  out.error_mps = std::abs(out.true_mps - out.biased_mps);
  return out;
}

Misalignment misalignment_from_sync_error(double velocity_mps, double sync_error_ms,
                                          double object_length_m,
                                          std::optional<double> iou_threshold) {
  if (!(velocity_mps >= 0.0) || !(sync_error_ms >= 0.0)) {
    throw DomainError("velocity and sync error must be >= 0");
  }
  if (iou_threshold && !(*iou_threshold >= 0.0 && *iou_threshold < 1.0)) {
    throw DomainError("IoU threshold must lie in [0, 1)");
  }
  Misalignment out;
  out.displacement_m = velocity_mps * sync_error_ms / 1000.0;
  out.iou = iou_1d(object_length_m, out.displacement_m);
  if (out.displacement_m == 0.0) {
    out.sync_case = SyncCase::Aligned;
  } else if (iou_threshold) {
    out.sync_case = out.iou >= *iou_threshold ? SyncCase::Tolerable : SyncCase::Intolerable;
  }
  return out;
}

}  // namespace tsync
