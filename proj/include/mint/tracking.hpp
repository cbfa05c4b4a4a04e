#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "mint/association.hpp"
#include "mint/estimation.hpp"
#include "mint/geometry.hpp"
#include "mint/waveform.hpp"

namespace mint {

// EKF state: [p_x, p_y, v_x, v_y], covariance kept symmetric PSD.
struct TrackerState {
  Eigen::Vector4d mean = Eigen::Vector4d::Zero();
  Eigen::Matrix4d cov = Eigen::Matrix4d::Identity();

  Point2D position() const { return {mean(0), mean(1)}; }
};

// Constant-velocity model, Q = sigma_a^2 G G^T.
struct MotionModel {
  double dt = 0.0;
  double sigma_a2 = 0.0;
  Eigen::Matrix4d F = Eigen::Matrix4d::Identity();
  Eigen::Matrix<double, 4, 2> G = Eigen::Matrix<double, 4, 2>::Zero();
  Eigen::Matrix4d Q = Eigen::Matrix4d::Zero();

  static MotionModel make(double dt, double sigma_a2);
};

// sigma_a^2 = (v_max / (3 dt))^2: the 3-sigma point of the velocity noise
// allows motion at v_max.
double sigma_a_from_vmax(double v_max, double dt);

// Stacked range observations: anchors may be base stations or virtual
// anchors, all sharing the noise variance sigma_z^2 (R = sigma_z^2 I).
struct ObservationBatch {
  std::vector<Point2D> anchors;
  std::vector<double> distances;  // m
  double noise_var = 0.0;         // sigma_z^2, m^2
};

TrackerState predict(const TrackerState& state, const MotionModel& model);

struct UpdateResult {
  TrackerState state;
  int rows_used = 0;  // anchors coincident with the position are skipped
};

// EKF range update with Joseph-form covariance. Throws on an empty batch.
UpdateResult update(const TrackerState& state, const ObservationBatch& batch);

struct TrackingConfig {
  Pulse pulse;
  MotionModel motion;
  double sigma_z2 = 0.01;        // m^2
  double cutoff_dc = 0.3;        // m
  double gamma = 0.1;            // extraction threshold factor
  int k_max = 20;                // K_hat
  double prelos_window = 10e-9;  // s
  double jbsf_xi = 0.4;
  double jbsf_searchback = 100e-9;  // s
};

enum class DaMode { kDa, kGada };

// Predict + update from per-BS range estimates; outage entries are dropped,
// all-outage steps fall back to the prediction.
TrackerState step_conventional_from_ranges(
    const TrackerState& state, const std::vector<std::optional<double>>& ranges,
    const std::vector<Point2D>& bs_positions, double sigma_z2,
    const MotionModel& motion);

// Runs the ranging front end (ML or JBSF) on one frame per base station.
TrackerState step_conventional(const TrackerState& state,
                               const std::vector<SignalFrame>& frames,
                               const std::vector<Point2D>& bs_positions,
                               RangingMethod method, const TrackingConfig& config);

struct MintStepResult {
  TrackerState state;
  std::vector<Correspondences> per_bs;
};

// Predict, associate each base station's measured distances against the
// anchors expected at the reference position (predicted for DA, true for
// GADA), stack all accepted pairs into one batch, update. Steps with no
// association anywhere fall back to the prediction.
MintStepResult step_mint_from_measurements(
    const TrackerState& state, const std::vector<MpcEstimateSet>& estimates,
    const std::vector<std::vector<VirtualAnchor>>& vas_per_bs,
    const FloorPlan& plan, const TrackingConfig& config, DaMode mode,
    std::optional<Point2D> true_position = std::nullopt);

// Frame-level variant: extracts MPCs per base station first.
MintStepResult step_mint(const TrackerState& state,
                         const std::vector<SignalFrame>& frames,
                         const std::vector<std::vector<VirtualAnchor>>& vas_per_bs,
                         const FloorPlan& plan, const TrackingConfig& config,
                         DaMode mode,
                         std::optional<Point2D> true_position = std::nullopt);

}  // namespace mint
