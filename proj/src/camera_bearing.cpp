#include "poleloc/camera_bearing.hpp"

#include <algorithm>
#include <cmath>

#include "poleloc/error.hpp"
#include "poleloc/geometry.hpp"

namespace poleloc {
namespace {

// Keeps noiseless simulated cameras usable in the filter.
constexpr double kMinVariance = 1e-12;

}  // namespace


void PinholeIntrinsics::validate() const {
  if (!(fu > 0.0) || !(fv > 0.0)) {
    throw ConfigError("intrinsics: focal lengths must be positive");
  }
  if (width <= 0 || height <= 0 || !(cu >= 0.0 && cu < width) || !(cv >= 0.0 && cv < height)) {
    throw ConfigError("intrinsics: principal point outside the image");
  }
}

double PinholeIntrinsics::horizontal_fov() const {
  return std::atan2(cu, fu) + std::atan2(width - cu, fu);
}

double pixel_to_bearing(double u, double v, const PinholeIntrinsics& k) {
  if (!(u >= 0.0 && u < k.width && v >= 0.0 && v < k.height)) {
    throw DomainError("pixel_to_bearing: pixel outside the image");
  }
  return wrap_angle(std::atan2(u - k.cu, k.fu));
}

double bearing_to_pixel(double alpha, const PinholeIntrinsics& k) {
  return k.cu + k.fu * std::tan(alpha);
}

BearingSet convert_detections(const PixelDetectionSet& detections, const PinholeIntrinsics& k,
                              double min_score, double sigma_px, int camera_id,
                              std::span<const PixelRect> exclusions) {
  BearingSet out;
  out.camera_id = camera_id;
  const double axis_var = (sigma_px / k.fu) * (sigma_px / k.fu);
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const auto& d = detections[i];
    if (d.score < min_score) continue;
    bool masked = false;
    for (const auto& r : exclusions) masked = masked || r.contains(d.u, d.v);
    if (masked) continue;

    const double image_alpha = pixel_to_bearing(d.u, d.v, k);
    const double c2 = std::cos(image_alpha) * std::cos(image_alpha);
    out.bearings.push_back({wrap_angle(-image_alpha), std::max(axis_var * c2 * c2, kMinVariance), i});
  }
  return out;
}

}  // namespace poleloc
