#pragma once

#include <span>
#include <vector>

namespace poleloc {

struct PinholeIntrinsics {
  double fu = 1000.0;
  double fv = 1000.0;
  double cu = 960.0;
  double cv = 540.0;
  int width = 1920;
  int height = 1080;

  /// Throws ConfigError unless focal lengths are positive and the principal
  /// point lies inside the image.
  void validate() const;

  /// Full horizontal field of view implied by the image width.
  double horizontal_fov() const;
};

/// A pole-base detection in image coordinates, as produced by the detector.
struct PixelDetection {
  double u = 0.0;
  double v = 0.0;
  double score = 1.0;
};

using PixelDetectionSet = std::vector<PixelDetection>;

/// Image region whose detections are discarded (e.g. the vehicle roof).
struct PixelRect {
  double u_min = 0.0;
  double v_min = 0.0;
  double u_max = 0.0;
  double v_max = 0.0;

  bool contains(double u, double v) const {
    return u >= u_min && u <= u_max && v >= v_min && v <= v_max;
  }
};

struct Bearing {
  double alpha = 0.0;     // rad, counter-clockwise from the optical axis
  double variance = 0.0;  // rad^2
  std::size_t detection = 0;
};

struct BearingSet {
  int camera_id = 0;
  std::vector<Bearing> bearings;
};

/// Horizontal angle of pixel column u from the optical axis, positive toward
/// increasing u (to the right in the image). v is ignored.
double pixel_to_bearing(double u, double v, const PinholeIntrinsics& k);

/// Column at which a ray with image bearing `alpha` (positive right) lands.
double bearing_to_pixel(double alpha, const PinholeIntrinsics& k);

/// Filters by score and exclusion mask, then converts each detection into a
/// camera-frame bearing. Image bearings are positive to the right, camera
/// frame bearings are counter-clockwise like every other angle in the
/// system, so the sign flips here. Variance is the pixel noise pushed
/// through the derivative of atan((u - cu) / fu).
BearingSet convert_detections(const PixelDetectionSet& detections, const PinholeIntrinsics& k,
                              double min_score, double sigma_px, int camera_id,
                              std::span<const PixelRect> exclusions = {});

}  // namespace poleloc
