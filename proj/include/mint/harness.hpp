#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mint/association.hpp"
#include "mint/bounds.hpp"
#include "mint/estimation.hpp"
#include "mint/geometry.hpp"
#include "mint/tracking.hpp"
#include "mint/waveform.hpp"

namespace mint {

// Blocking-only segments modeling a change in the propagation environment
// (e.g. a group of people). The tracker's floor-plan knowledge never
// includes them; affected paths lose attenuation_db of SINR.
struct ObstructionSpec {
  std::vector<WallSegment> segments;
  double attenuation_db = 10.0;
};

struct ScenarioConfig {
  PlanFile plan;
  std::vector<Point2D> waypoints;
  double spacing = 0.1;  // m
  double dt = 0.1;       // s

  std::vector<double> pulse_durations;  // s
  std::vector<double> sigma_z2;         // m^2, aligned with pulse_durations
  std::vector<double> cutoff_dc;        // m, aligned
  std::vector<double> jbsf_xi;          // aligned
  std::vector<double> center_freqs;     // Hz, aligned

  double rolloff = 0.5;
  double gamma = 0.1;
  int k_max = 20;
  double v_max = 1.5;               // m/s
  double prelos_window = 10e-9;     // s
  double jbsf_searchback = 100e-9;  // s

  DiffuseModel dm;  // onset_delay = excess delay over the direct path
  double noise_psd = 1e-7;
  AmplitudeModel amplitude;
  ObstructionSpec obstruction;
  int max_va_order = 2;
  std::uint64_t seed = 1;

  double cdf_max = 3.0;    // m
  double cdf_step = 0.01;  // m
};

// Built-in synthetic scenario: 20 m x 8 m room, four corner base stations,
// U-shaped 220-point trajectory, central obstruction.
ScenarioConfig default_config();

// JSON config file; missing keys fall back to default_config() values.
ScenarioConfig load_config(const std::string& path);

// Throws std::invalid_argument with a diagnostic on inconsistent configs.
void validate(const ScenarioConfig& config);

// Piecewise-linear interpolation with exact arc-length spacing. Throws on
// duplicate consecutive waypoints.
std::vector<Point2D> build_trajectory(const std::vector<Point2D>& waypoints,
                                      double spacing);

// Scales every MPC whose unfolded path crosses a blocking segment by
// 10^(-attenuation_db/20), preserving the phase. Returns the number of
// affected paths.
int apply_obstruction(std::vector<Mpc>& mpcs, const std::vector<VirtualAnchor>& vas,
                      const Point2D& position, const FloorPlan& plan,
                      const ObstructionSpec& spec);

// Signal-level variant for ingested frames: per affected expected delay,
// locates the path near it, subtracts the estimated pulse and re-adds it
// attenuated with its original phase.
SignalFrame apply_obstruction_signal(const SignalFrame& frame, const Pulse& pulse,
                                     const std::vector<double>& affected_delays,
                                     double attenuation_db);

enum class Tracker { kMintDa, kMintGada, kEkfMl, kEkfJbsf };
const char* tracker_name(Tracker t);

// Everything shared by the four trackers for one (pulse, obstruction state):
// synthetic frames, their generating truth, and the ranging front end run
// once per frame.
struct FrameSet {
  std::size_t tp_index = 0;
  bool obstruction = false;
  Pulse pulse;
  std::vector<Point2D> trajectory;
  std::vector<std::vector<VirtualAnchor>> vas;  // per base station
  std::vector<SignalFrame> frames;              // pos * n_bs + bs
  std::vector<std::vector<Mpc>> truth_mpcs;
  std::vector<double> los_delays;
  std::vector<MpcEstimateSet> estimates;
  std::vector<std::optional<double>> ml_ranges;
  std::vector<double> jbsf_ranges;
  double duration = 0.0;
};

FrameSet build_frame_set(const ScenarioConfig& config, std::size_t tp_index,
                         bool obstruction);

struct MetricsRecord {
  Tracker tracker = Tracker::kMintGada;
  double tp = 0.0;
  bool obstruction = false;
  std::uint64_t seed = 0;

  std::vector<Point2D> truth;
  std::vector<Point2D> estimates;
  std::vector<double> errors;       // m, per position
  std::vector<double> hdop_values;  // NaN when undefined at a position
  std::vector<int> assoc_counts;    // accepted MPCs summed over base stations
  std::vector<double> ranging_errors;

  double rms_error = 0.0;
  double avg_hdop = 0.0;
  double mean_assoc = 0.0;
  std::vector<double> cdf_grid;
  std::vector<double> cdf;
};

MetricsRecord run_combination(const ScenarioConfig& config, const FrameSet& set,
                              Tracker tracker);

struct RunFilter {
  std::optional<Tracker> tracker;
  std::optional<std::size_t> tp_index;
  std::optional<bool> obstruction;
};

// Full sweep (trackers x pulse durations x obstruction states), optionally
// filtered. Deterministic for a fixed config and seed.
std::vector<MetricsRecord> run_scenario(const ScenarioConfig& config,
                                        const RunFilter& filter = {});

// Empirical CDF of |errors| evaluated on an ascending grid.
std::vector<double> ranging_error_cdf(const std::vector<double>& errors,
                                      const std::vector<double>& grid);

// Writes summary.csv plus per-combination trace_* and cdf_* files; byte
// deterministic for a fixed config and seed.
void write_metrics(const std::vector<MetricsRecord>& records,
                   const std::string& out_dir);

// Per-position position-error bound from the generating truth.
struct CrlbMapRow {
  int position = 0;
  Point2D truth;
  double crlb_trace = 0.0;  // m^2, <0 when the EFIM is singular
  double var_x = 0.0;
  double var_y = 0.0;
  int n_paths = 0;
  bool separable_paths = true;
};

std::vector<CrlbMapRow> crlb_map(const ScenarioConfig& config,
                                 std::size_t tp_index, bool obstruction);
void write_crlb_map(const std::vector<CrlbMapRow>& rows, const std::string& path);

}  // namespace mint
