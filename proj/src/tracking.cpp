#include "mint/tracking.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "mint/common.hpp"

namespace mint {

namespace {

Eigen::Matrix4d symmetrize(const Eigen::Matrix4d& m) {
  return 0.5 * (m + m.transpose());
}

}  // namespace

MotionModel MotionModel::make(double dt, double sigma_a2) {
  if (dt <= 0.0) throw std::invalid_argument("MotionModel: dt <= 0");
  MotionModel m;
  m.dt = dt;
  m.sigma_a2 = sigma_a2;
  m.F.setIdentity();
  m.F(0, 2) = dt;
  m.F(1, 3) = dt;
  m.G.setZero();
  m.G(0, 0) = m.G(1, 1) = 0.5 * dt * dt;
  m.G(2, 0) = m.G(3, 1) = dt;
  m.Q = sigma_a2 * m.G * m.G.transpose();
  return m;
}

double sigma_a_from_vmax(double v_max, double dt) {
  if (dt <= 0.0) throw std::invalid_argument("sigma_a_from_vmax: dt <= 0");
  double s = v_max / (3.0 * dt);
  return s * s;
}

TrackerState predict(const TrackerState& state, const MotionModel& model) {
  TrackerState out;
  out.mean = model.F * state.mean;
  out.cov = symmetrize(model.F * state.cov * model.F.transpose() + model.Q);
  return out;
}

UpdateResult update(const TrackerState& state, const ObservationBatch& batch) {
  if (batch.anchors.empty() || batch.anchors.size() != batch.distances.size())
    throw std::invalid_argument("update: empty or inconsistent batch");

  const Point2D p = state.position();
  std::vector<std::size_t> rows;
  rows.reserve(batch.anchors.size());
  for (std::size_t j = 0; j < batch.anchors.size(); ++j) {
    if (distance(p, batch.anchors[j]) > 1e-6) rows.push_back(j);
  }
  if (rows.empty()) return {state, 0};

  const auto m = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd h(m, 4);
  Eigen::VectorXd innov(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const Point2D& a = batch.anchors[rows[r]];
    double d = distance(p, a);
    h(r, 0) = (p.x - a.x) / d;
    h(r, 1) = (p.y - a.y) / d;
    h(r, 2) = 0.0;
    h(r, 3) = 0.0;
    innov(r) = batch.distances[rows[r]] - d;
  }

  Eigen::MatrixXd pht = state.cov * h.transpose();
  Eigen::MatrixXd s = h * pht;
  s.diagonal().array() += batch.noise_var;
  Eigen::MatrixXd gain = pht * s.ldlt().solve(Eigen::MatrixXd::Identity(m, m));

  TrackerState out;
  out.mean = state.mean + gain * innov;
  Eigen::Matrix4d a = Eigen::Matrix4d::Identity() - gain * h;
  out.cov = symmetrize(a * state.cov * a.transpose() +
                       batch.noise_var * gain * gain.transpose());
  return {out, static_cast<int>(m)};
}

TrackerState step_conventional_from_ranges(
    const TrackerState& state, const std::vector<std::optional<double>>& ranges,
    const std::vector<Point2D>& bs_positions, double sigma_z2,
    const MotionModel& motion) {
  if (ranges.size() != bs_positions.size())
    throw std::invalid_argument("step_conventional: ranges/bs size mismatch");

  TrackerState pred = predict(state, motion);
  ObservationBatch batch;
  batch.noise_var = sigma_z2;
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    if (!ranges[i]) continue;
    batch.anchors.push_back(bs_positions[i]);
    batch.distances.push_back(*ranges[i]);
  }
  if (batch.anchors.empty()) return pred;
  return update(pred, batch).state;
}

TrackerState step_conventional(const TrackerState& state,
                               const std::vector<SignalFrame>& frames,
                               const std::vector<Point2D>& bs_positions,
                               RangingMethod method, const TrackingConfig& config) {
  if (frames.size() != bs_positions.size())
    throw std::invalid_argument("step_conventional: frames/bs size mismatch");

  std::vector<std::optional<double>> ranges(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (method == RangingMethod::kJbsf) {
      ranges[i] = jbsf_range(frames[i], config.jbsf_xi, config.jbsf_searchback,
                             config.prelos_window)
                      .distance;
    } else {
      double thr = noise_threshold(frames[i], config.gamma, config.prelos_window);
      auto est = extract_mpcs(frames[i], config.pulse, config.k_max, thr);
      if (auto r = ml_range(est)) ranges[i] = r->distance;
    }
  }
  return step_conventional_from_ranges(state, ranges, bs_positions,
                                       config.sigma_z2, config.motion);
}

MintStepResult step_mint_from_measurements(
    const TrackerState& state, const std::vector<MpcEstimateSet>& estimates,
    const std::vector<std::vector<VirtualAnchor>>& vas_per_bs,
    const FloorPlan& plan, const TrackingConfig& config, DaMode mode,
    std::optional<Point2D> true_position) {
  if (estimates.size() != vas_per_bs.size())
    throw std::invalid_argument("step_mint: estimates/vas size mismatch");
  if (mode == DaMode::kGada && !true_position)
    throw std::invalid_argument("step_mint: GADA requires the true position");

  TrackerState pred = predict(state, config.motion);
  Point2D ref = mode == DaMode::kGada ? *true_position : pred.position();

  MintStepResult result;
  result.per_bs.resize(estimates.size());
  ObservationBatch batch;
  batch.noise_var = config.sigma_z2;

  for (std::size_t i = 0; i < estimates.size(); ++i) {
    std::vector<double> z;
    z.reserve(estimates[i].delays.size());
    for (double tau : estimates[i].delays) z.push_back(kSpeedOfLight * tau);

    Correspondences corr =
        associate_at(ref, vas_per_bs[i], plan, z, config.cutoff_dc);

    std::unordered_map<int, const VirtualAnchor*> by_id;
    for (const auto& va : vas_per_bs[i]) by_id[va.id] = &va;
    for (const auto& [meas_idx, va_id] : corr.assignments) {
      auto it = by_id.find(va_id);
      if (it == by_id.end()) continue;
      batch.anchors.push_back(it->second->position);
      batch.distances.push_back(z[meas_idx]);
    }
    result.per_bs[i] = std::move(corr);
  }

  if (batch.anchors.empty()) {
    result.state = pred;
    return result;
  }
  result.state = update(pred, batch).state;
  return result;
}

MintStepResult step_mint(const TrackerState& state,
                         const std::vector<SignalFrame>& frames,
                         const std::vector<std::vector<VirtualAnchor>>& vas_per_bs,
                         const FloorPlan& plan, const TrackingConfig& config,
                         DaMode mode, std::optional<Point2D> true_position) {
  std::vector<MpcEstimateSet> estimates(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    double thr = noise_threshold(frames[i], config.gamma, config.prelos_window);
    estimates[i] = extract_mpcs(frames[i], config.pulse, config.k_max, thr);
  }
  return step_mint_from_measurements(state, estimates, vas_per_bs, plan, config,
                                     mode, true_position);
}

}  // namespace mint
