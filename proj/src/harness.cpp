#include "mint/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "mint/common.hpp"

namespace mint {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

double quiet_nan() { return std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

ScenarioConfig default_config() {
  ScenarioConfig c;

  c.plan.plan.walls = {
      {{0.0, 0.0}, {20.0, 0.0}, true},
      {{20.0, 0.0}, {20.0, 8.0}, true},
      {{20.0, 8.0}, {0.0, 8.0}, true},
      {{0.0, 8.0}, {0.0, 0.0}, true},
  };
  c.plan.base_stations = {{1.0, 1.0}, {19.0, 1.0}, {1.0, 7.0}, {19.0, 7.0}};

  c.waypoints = {{4.5, 2.6}, {15.5, 2.6}, {15.5, 5.4}, {7.4, 5.4}};
  c.spacing = 0.1;
  c.dt = 0.1;

  c.pulse_durations = {0.2e-9, 0.5e-9, 1e-9, 2e-9, 4e-9};
  c.sigma_z2 = {0.01, 0.01, 0.04, 0.04, 0.09};
  c.cutoff_dc = {0.3, 0.3, 0.5, 0.5, 0.6};
  c.jbsf_xi = {0.4, 0.4, 0.3, 0.3, 0.3};
  c.center_freqs = {6.85e9, 7e9, 7e9, 7e9, 7e9};

  c.rolloff = 0.5;
  c.gamma = 0.1;
  c.k_max = 20;
  c.v_max = 1.5;
  c.prelos_window = 10e-9;
  c.jbsf_searchback = 100e-9;

  c.dm.onset_delay = 0.0;  // excess over the direct path
  c.dm.total_power = 0.2;
  c.dm.decay_const = 20e-9;
  c.noise_psd = 1e-7;
  c.amplitude = {1.0, 0.75};

  c.obstruction.segments = {
      {{8.25, 3.05}, {11.75, 3.05}, false},
      {{11.75, 3.05}, {11.75, 4.95}, false},
      {{11.75, 4.95}, {8.25, 4.95}, false},
      {{8.25, 4.95}, {8.25, 3.05}, false},
  };
  c.obstruction.attenuation_db = 10.0;

  c.max_va_order = 2;
  c.seed = 1;
  c.cdf_max = 3.0;
  c.cdf_step = 0.01;
  return c;
}

namespace {

Point2D parse_point(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

std::vector<WallSegment> parse_segments(const json& j, bool reflective_field) {
  std::vector<WallSegment> out;
  for (const auto& row : j) {
    WallSegment w;
    w.a = {row.at(0).get<double>(), row.at(1).get<double>()};
    w.b = {row.at(2).get<double>(), row.at(3).get<double>()};
    w.reflective = reflective_field ? row.at(4).get<int>() != 0 : false;
    out.push_back(w);
  }
  return out;
}

}  // namespace

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }

  ScenarioConfig c = default_config();
  auto base = std::filesystem::path(path).parent_path();

  if (j.contains("plan_path")) {
    auto p = std::filesystem::path(j["plan_path"].get<std::string>());
    if (p.is_relative()) p = base / p;
    c.plan = load_floor_plan(p.string());
  } else if (j.contains("plan")) {
    const auto& jp = j["plan"];
    c.plan = PlanFile{};
    if (jp.contains("walls")) c.plan.plan.walls = parse_segments(jp["walls"], true);
    if (jp.contains("obstructions"))
      c.plan.plan.obstructions = parse_segments(jp["obstructions"], false);
    if (jp.contains("base_stations"))
      for (const auto& b : jp["base_stations"])
        c.plan.base_stations.push_back(parse_point(b));
  }

  if (j.contains("waypoints")) {
    c.waypoints.clear();
    for (const auto& w : j["waypoints"]) c.waypoints.push_back(parse_point(w));
  }
  if (j.contains("spacing_m")) c.spacing = j["spacing_m"].get<double>();
  if (j.contains("dt_s")) c.dt = j["dt_s"].get<double>();

  auto load_ns_list = [&](const char* key, std::vector<double>& dst) {
    if (!j.contains(key)) return;
    dst.clear();
    for (const auto& v : j[key]) dst.push_back(v.get<double>() * 1e-9);
  };
  load_ns_list("pulse_durations_ns", c.pulse_durations);
  if (j.contains("sigma_z2_m2")) c.sigma_z2 = j["sigma_z2_m2"].get<std::vector<double>>();
  if (j.contains("cutoff_dc_m")) c.cutoff_dc = j["cutoff_dc_m"].get<std::vector<double>>();
  if (j.contains("jbsf_xi")) c.jbsf_xi = j["jbsf_xi"].get<std::vector<double>>();
  if (j.contains("center_freq_ghz")) {
    c.center_freqs.clear();
    for (const auto& v : j["center_freq_ghz"]) c.center_freqs.push_back(v.get<double>() * 1e9);
  }

  if (j.contains("rolloff")) c.rolloff = j["rolloff"].get<double>();
  if (j.contains("gamma")) c.gamma = j["gamma"].get<double>();
  if (j.contains("k_max")) c.k_max = j["k_max"].get<int>();
  if (j.contains("v_max_mps")) c.v_max = j["v_max_mps"].get<double>();
  if (j.contains("prelos_window_ns")) c.prelos_window = j["prelos_window_ns"].get<double>() * 1e-9;
  if (j.contains("jbsf_searchback_ns"))
    c.jbsf_searchback = j["jbsf_searchback_ns"].get<double>() * 1e-9;

  if (j.contains("dm")) {
    const auto& jd = j["dm"];
    if (jd.contains("excess_onset_ns")) c.dm.onset_delay = jd["excess_onset_ns"].get<double>() * 1e-9;
    if (jd.contains("total_power")) c.dm.total_power = jd["total_power"].get<double>();
    if (jd.contains("decay_const_ns")) c.dm.decay_const = jd["decay_const_ns"].get<double>() * 1e-9;
  }
  if (j.contains("noise_psd")) c.noise_psd = j["noise_psd"].get<double>();
  if (j.contains("amplitude")) {
    const auto& ja = j["amplitude"];
    if (ja.contains("g0")) c.amplitude.gain_g0 = ja["g0"].get<double>();
    if (ja.contains("eta")) c.amplitude.reflection_eta = ja["eta"].get<double>();
  }
  if (j.contains("obstruction")) {
    const auto& jo = j["obstruction"];
    if (jo.contains("segments"))
      c.obstruction.segments = parse_segments(jo["segments"], false);
    if (jo.contains("attenuation_db"))
      c.obstruction.attenuation_db = jo["attenuation_db"].get<double>();
  }
  if (j.contains("max_va_order")) c.max_va_order = j["max_va_order"].get<int>();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("cdf_max_m")) c.cdf_max = j["cdf_max_m"].get<double>();
  if (j.contains("cdf_step_m")) c.cdf_step = j["cdf_step_m"].get<double>();
  return c;
}

void validate(const ScenarioConfig& c) {
  auto fail = [](const std::string& msg) {
    throw std::invalid_argument("config error: " + msg);
  };
  if (c.plan.plan.walls.empty()) fail("floor plan has no walls");
  bool any_reflective = false;
  for (const auto& w : c.plan.plan.walls) any_reflective |= w.reflective;
  if (!any_reflective) fail("floor plan has no reflective wall");
  if (c.plan.base_stations.empty()) fail("no base stations");
  if (c.waypoints.size() < 2) fail("trajectory needs at least two waypoints");
  if (c.spacing <= 0.0) fail("spacing must be positive");
  if (c.dt <= 0.0) fail("dt must be positive");
  if (c.spacing / c.dt > c.v_max + 1e-9)
    fail("trajectory speed spacing/dt exceeds v_max");
  if (c.pulse_durations.empty()) fail("no pulse durations");
  auto n = c.pulse_durations.size();
  if (c.sigma_z2.size() != n) fail("sigma_z2_m2 length does not match pulse set");
  if (c.cutoff_dc.size() != n) fail("cutoff_dc_m length does not match pulse set");
  if (c.jbsf_xi.size() != n) fail("jbsf_xi length does not match pulse set");
  if (c.center_freqs.size() != n) fail("center_freq_ghz length does not match pulse set");
  for (double tp : c.pulse_durations)
    if (tp <= 0.0) fail("pulse durations must be positive");
  for (double s : c.sigma_z2)
    if (s <= 0.0) fail("sigma_z2 must be positive");
  for (double d : c.cutoff_dc)
    if (d <= 0.0) fail("cutoff distances must be positive");
  for (double x : c.jbsf_xi)
    if (x <= 0.0 || x >= 1.0) fail("jbsf_xi must lie in (0, 1)");
  if (c.gamma <= 0.0 || c.gamma >= 1.0) fail("gamma must lie in (0, 1)");
  if (c.k_max < 1) fail("k_max must be >= 1");
  if (c.noise_psd < 0.0) fail("noise_psd must be non-negative");
  if (c.dm.total_power < 0.0) fail("dm total power must be non-negative");
  if (c.dm.decay_const <= 0.0) fail("dm decay constant must be positive");
  if (c.obstruction.attenuation_db < 0.0) fail("attenuation must be non-negative");
  if (c.cdf_step <= 0.0 || c.cdf_max <= 0.0) fail("cdf grid must be positive");
}

std::vector<Point2D> build_trajectory(const std::vector<Point2D>& waypoints,
                                      double spacing) {
  if (spacing <= 0.0) throw std::invalid_argument("build_trajectory: spacing <= 0");
  if (waypoints.size() < 2)
    throw std::invalid_argument("build_trajectory: need at least two waypoints");
  for (std::size_t i = 1; i < waypoints.size(); ++i)
    if (distance(waypoints[i - 1], waypoints[i]) < 1e-12)
      throw std::invalid_argument("build_trajectory: duplicate consecutive waypoints");

  double total = 0.0;
  for (std::size_t i = 1; i < waypoints.size(); ++i)
    total += distance(waypoints[i - 1], waypoints[i]);

  std::vector<Point2D> out;
  auto n_points = static_cast<std::size_t>(std::floor(total / spacing + 1e-9)) + 1;
  std::size_t seg = 0;
  double seg_start = 0.0;
  double seg_len = distance(waypoints[0], waypoints[1]);
  for (std::size_t k = 0; k < n_points; ++k) {
    double s = static_cast<double>(k) * spacing;
    while (s > seg_start + seg_len + 1e-12 && seg + 2 < waypoints.size()) {
      seg_start += seg_len;
      ++seg;
      seg_len = distance(waypoints[seg], waypoints[seg + 1]);
    }
    double t = std::clamp((s - seg_start) / seg_len, 0.0, 1.0);
    const Point2D& a = waypoints[seg];
    const Point2D& b = waypoints[seg + 1];
    out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
  }
  return out;
}

int apply_obstruction(std::vector<Mpc>& mpcs, const std::vector<VirtualAnchor>& vas,
                      const Point2D& position, const FloorPlan& plan,
                      const ObstructionSpec& spec) {
  if (spec.segments.empty()) return 0;
  const double scale = std::pow(10.0, -spec.attenuation_db / 20.0);

  std::unordered_map<int, const VirtualAnchor*> by_id;
  for (const auto& va : vas) by_id[va.id] = &va;

  int affected = 0;
  for (auto& m : mpcs) {
    auto it = by_id.find(m.va_id);
    if (it == by_id.end()) continue;
    auto path = unfold_path(*it->second, position, plan);
    if (!path) continue;
    bool blocked = false;
    for (std::size_t j = 0; j + 1 < path->size() && !blocked; ++j)
      blocked = segment_blocked((*path)[j], (*path)[j + 1], spec.segments);
    if (!blocked) continue;
    m.amplitude *= scale;
    ++affected;
  }
  return affected;
}

SignalFrame apply_obstruction_signal(const SignalFrame& frame, const Pulse& pulse,
                                     const std::vector<double>& affected_delays,
                                     double attenuation_db) {
  SignalFrame out = frame;
  const double scale = std::pow(10.0, -attenuation_db / 20.0);
  const double dtau = frame.dtau;
  const double tp = pulse.duration_tp;
  const auto n = static_cast<std::int64_t>(frame.samples.size());

  for (double expected : affected_delays) {
    // Locate the path near its expected delay, then project and rescale.
    auto lo = static_cast<std::int64_t>(std::floor((expected - tp) / dtau));
    auto hi = static_cast<std::int64_t>(std::ceil((expected + tp) / dtau));
    lo = std::max<std::int64_t>(lo, 0);
    hi = std::min<std::int64_t>(hi, n - 1);
    if (lo > hi) continue;

    std::int64_t best = lo;
    double best_mag = -1.0;
    for (std::int64_t m = lo; m <= hi; ++m) {
      double mag = std::abs(out.samples[m]);
      if (mag > best_mag) {
        best_mag = mag;
        best = m;
      }
    }
    double tau_hat = static_cast<double>(best) * dtau;

    cdouble acc{0.0, 0.0};
    double energy = 0.0;
    auto wlo = static_cast<std::int64_t>(std::ceil((tau_hat - 8.0 * tp) / dtau));
    auto whi = static_cast<std::int64_t>(std::floor((tau_hat + 8.0 * tp) / dtau));
    wlo = std::max<std::int64_t>(wlo, 0);
    whi = std::min<std::int64_t>(whi, n - 1);
    for (std::int64_t k = wlo; k <= whi; ++k) {
      double s = pulse.eval(k * dtau - tau_hat);
      acc += out.samples[k] * s;
      energy += s * s;
    }
    if (energy <= 0.0) continue;
    cdouble alpha = acc / energy;
    cdouble delta = alpha * (1.0 - scale);
    for (std::int64_t k = wlo; k <= whi; ++k)
      out.samples[k] -= delta * pulse.eval(k * dtau - tau_hat);
  }
  return out;
}

const char* tracker_name(Tracker t) {
  switch (t) {
    case Tracker::kMintDa: return "mint-da";
    case Tracker::kMintGada: return "mint-gada";
    case Tracker::kEkfMl: return "ekf-ml";
    case Tracker::kEkfJbsf: return "ekf-jbsf";
  }
  return "unknown";
}

FrameSet build_frame_set(const ScenarioConfig& config, std::size_t tp_index,
                         bool obstruction) {
  validate(config);
  if (tp_index >= config.pulse_durations.size())
    throw std::invalid_argument("build_frame_set: tp_index out of range");

  FrameSet set;
  set.tp_index = tp_index;
  set.obstruction = obstruction;

  const double tp = config.pulse_durations[tp_index];
  const double fc = config.center_freqs[tp_index];
  const double f0 = fc - (1.0 + config.rolloff) / (2.0 * tp);
  set.pulse = make_pulse(tp, config.rolloff, fc, f0, tp / 16.0);

  set.trajectory = build_trajectory(config.waypoints, config.spacing);

  const auto& bss = config.plan.base_stations;
  set.vas.resize(bss.size());
  for (std::size_t i = 0; i < bss.size(); ++i)
    set.vas[i] = generate_vas(config.plan.plan, bss[i], static_cast<int>(i),
                              config.max_va_order);

  MpcTransform transform;
  if (obstruction) {
    transform = [&set, &config](std::vector<Mpc>& mpcs, int pos, int bs) {
      apply_obstruction(mpcs, set.vas[static_cast<std::size_t>(bs)],
                        set.trajectory[static_cast<std::size_t>(pos)],
                        config.plan.plan, config.obstruction);
    };
  }

  ScenarioSignalsDebug debug;
  set.frames = scenario_signals(config.plan.plan, set.trajectory, bss, set.pulse,
                                config.dm, config.noise_psd, config.amplitude,
                                config.seed, config.max_va_order,
                                obstruction ? &transform : nullptr, &debug);
  set.truth_mpcs = std::move(debug.mpc_lists);
  set.los_delays = std::move(debug.los_delays);
  set.duration = debug.duration;

  const std::size_t n_frames = set.frames.size();
  set.estimates.resize(n_frames);
  set.ml_ranges.resize(n_frames);
  set.jbsf_ranges.resize(n_frames);
  const double xi = config.jbsf_xi[tp_index];
  parallel_for(n_frames, [&](std::size_t idx) {
    const auto& frame = set.frames[idx];
    double thr = noise_threshold(frame, config.gamma, config.prelos_window);
    set.estimates[idx] = extract_mpcs(frame, set.pulse, config.k_max, thr);
    if (auto r = ml_range(set.estimates[idx])) set.ml_ranges[idx] = r->distance;
    set.jbsf_ranges[idx] =
        jbsf_range(frame, xi, config.jbsf_searchback, config.prelos_window).distance;
  });
  return set;
}

MetricsRecord run_combination(const ScenarioConfig& config, const FrameSet& set,
                              Tracker tracker) {
  const auto& bss = config.plan.base_stations;
  const std::size_t n_bs = bss.size();
  const std::size_t n_pos = set.trajectory.size();

  TrackingConfig tc;
  tc.pulse = set.pulse;
  tc.motion = MotionModel::make(config.dt, sigma_a_from_vmax(config.v_max, config.dt));
  tc.sigma_z2 = config.sigma_z2[set.tp_index];
  tc.cutoff_dc = config.cutoff_dc[set.tp_index];
  tc.gamma = config.gamma;
  tc.k_max = config.k_max;
  tc.prelos_window = config.prelos_window;
  tc.jbsf_xi = config.jbsf_xi[set.tp_index];
  tc.jbsf_searchback = config.jbsf_searchback;

  std::vector<std::unordered_map<int, Point2D>> va_pos(n_bs);
  for (std::size_t i = 0; i < n_bs; ++i)
    for (const auto& va : set.vas[i]) va_pos[i][va.id] = va.position;

  MetricsRecord rec;
  rec.tracker = tracker;
  rec.tp = config.pulse_durations[set.tp_index];
  rec.obstruction = set.obstruction;
  rec.seed = config.seed;
  rec.truth = set.trajectory;

  TrackerState state;
  state.mean << set.trajectory[0].x, set.trajectory[0].y, 0.0, 0.0;
  double v0 = config.v_max / 3.0;
  state.cov = Eigen::Vector4d(tc.sigma_z2, tc.sigma_z2, v0 * v0, v0 * v0).asDiagonal();

  const bool is_mint = tracker == Tracker::kMintDa || tracker == Tracker::kMintGada;

  for (std::size_t pos = 0; pos < n_pos; ++pos) {
    const Point2D truth = set.trajectory[pos];
    std::vector<double> step_rng_errors;
    int assoc = 0;

    if (is_mint) {
      std::vector<MpcEstimateSet> est(n_bs);
      for (std::size_t i = 0; i < n_bs; ++i) est[i] = set.estimates[pos * n_bs + i];
      DaMode mode = tracker == Tracker::kMintGada ? DaMode::kGada : DaMode::kDa;
      auto res = step_mint_from_measurements(
          state, est, set.vas, config.plan.plan, tc, mode,
          mode == DaMode::kGada ? std::optional<Point2D>(truth) : std::nullopt);
      state = res.state;
      for (std::size_t i = 0; i < n_bs; ++i) {
        for (const auto& [mi, va_id] : res.per_bs[i].assignments) {
          ++assoc;
          double z = kSpeedOfLight * est[i].delays[mi];
          double d_true = distance(truth, va_pos[i].at(va_id));
          step_rng_errors.push_back(std::abs(z - d_true));
        }
      }
    } else {
      std::vector<std::optional<double>> ranges(n_bs);
      for (std::size_t i = 0; i < n_bs; ++i) {
        if (tracker == Tracker::kEkfMl) {
          ranges[i] = set.ml_ranges[pos * n_bs + i];
        } else {
          ranges[i] = set.jbsf_ranges[pos * n_bs + i];
        }
        if (ranges[i])
          step_rng_errors.push_back(std::abs(*ranges[i] - distance(truth, bss[i])));
      }
      state = step_conventional_from_ranges(state, ranges, bss, tc.sigma_z2, tc.motion);
    }

    double err = distance(state.position(), truth);
    rec.estimates.push_back(state.position());
    rec.errors.push_back(err);
    rec.assoc_counts.push_back(assoc);
    for (double e : step_rng_errors) rec.ranging_errors.push_back(e);

    if (!step_rng_errors.empty()) {
      double ms = 0.0;
      for (double e : step_rng_errors) ms += e * e;
      double rms = std::sqrt(ms / static_cast<double>(step_rng_errors.size()));
      auto h = hdop(err, rms);
      rec.hdop_values.push_back(h ? *h : quiet_nan());
    } else {
      rec.hdop_values.push_back(quiet_nan());
    }
  }

  double ms = 0.0;
  for (double e : rec.errors) ms += e * e;
  rec.rms_error = std::sqrt(ms / static_cast<double>(rec.errors.size()));

  double hsum = 0.0;
  std::size_t hcount = 0;
  for (double h : rec.hdop_values) {
    if (std::isnan(h)) continue;
    hsum += h;
    ++hcount;
  }
  rec.avg_hdop = hcount ? hsum / static_cast<double>(hcount) : quiet_nan();

  double asum = 0.0;
  for (int a : rec.assoc_counts) asum += a;
  rec.mean_assoc = asum / static_cast<double>(rec.assoc_counts.size());

  for (double g = 0.0; g <= config.cdf_max + 1e-12; g += config.cdf_step)
    rec.cdf_grid.push_back(g);
  rec.cdf = ranging_error_cdf(rec.ranging_errors, rec.cdf_grid);
  return rec;
}

std::vector<MetricsRecord> run_scenario(const ScenarioConfig& config,
                                        const RunFilter& filter) {
  validate(config);
  const Tracker trackers[] = {Tracker::kMintDa, Tracker::kMintGada,
                              Tracker::kEkfMl, Tracker::kEkfJbsf};
  std::vector<MetricsRecord> records;
  for (std::size_t tp = 0; tp < config.pulse_durations.size(); ++tp) {
    if (filter.tp_index && *filter.tp_index != tp) continue;
    for (bool obstruction : {false, true}) {
      if (filter.obstruction && *filter.obstruction != obstruction) continue;
      FrameSet set = build_frame_set(config, tp, obstruction);
      for (Tracker t : trackers) {
        if (filter.tracker && *filter.tracker != t) continue;
        records.push_back(run_combination(config, set, t));
      }
    }
  }
  return records;
}

std::vector<double> ranging_error_cdf(const std::vector<double>& errors,
                                      const std::vector<double>& grid) {
  if (errors.empty()) throw std::invalid_argument("ranging_error_cdf: empty errors");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (grid[i] <= grid[i - 1])
      throw std::invalid_argument("ranging_error_cdf: grid not ascending");

  std::vector<double> sorted = errors;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> cdf(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    auto it = std::upper_bound(sorted.begin(), sorted.end(), grid[i]);
    cdf[i] = static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
  }
  return cdf;
}

namespace {

std::string combo_stem(const MetricsRecord& r) {
  std::ostringstream ss;
  ss << tracker_name(r.tracker) << "_tp" << fmt(r.tp * 1e9) << "ns_"
     << (r.obstruction ? "obst" : "free");
  return ss.str();
}

}  // namespace

void write_metrics(const std::vector<MetricsRecord>& records,
                   const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  std::ofstream summary(fs::path(out_dir) / "summary.csv");
  summary << "# mint-metrics v1\n";
  summary << "tracker,tp_ns,obstruction,seed,n_positions,rms_error_m,avg_hdop,"
             "mean_assoc_mpcs\n";
  for (const auto& r : records) {
    summary << tracker_name(r.tracker) << ',' << fmt(r.tp * 1e9) << ','
            << (r.obstruction ? 1 : 0) << ',' << r.seed << ',' << r.errors.size()
            << ',' << fmt(r.rms_error) << ',' << fmt(r.avg_hdop) << ','
            << fmt(r.mean_assoc) << '\n';
  }

  for (const auto& r : records) {
    std::string stem = combo_stem(r);
    std::ofstream trace(fs::path(out_dir) / ("trace_" + stem + ".csv"));
    trace << "# mint-metrics v1\n";
    trace << "position,true_x,true_y,est_x,est_y,error_m,hdop,assoc_mpcs\n";
    for (std::size_t i = 0; i < r.errors.size(); ++i) {
      trace << i << ',' << fmt(r.truth[i].x) << ',' << fmt(r.truth[i].y) << ','
            << fmt(r.estimates[i].x) << ',' << fmt(r.estimates[i].y) << ','
            << fmt(r.errors[i]) << ','
            << (std::isnan(r.hdop_values[i]) ? "" : fmt(r.hdop_values[i])) << ','
            << r.assoc_counts[i] << '\n';
    }

    std::ofstream cdf(fs::path(out_dir) / ("cdf_" + stem + ".csv"));
    cdf << "# mint-metrics v1\n";
    cdf << "error_m,cdf\n";
    for (std::size_t i = 0; i < r.cdf_grid.size(); ++i)
      cdf << fmt(r.cdf_grid[i]) << ',' << fmt(r.cdf[i]) << '\n';
  }
}

std::vector<CrlbMapRow> crlb_map(const ScenarioConfig& config,
                                 std::size_t tp_index, bool obstruction) {
  FrameSet set = build_frame_set(config, tp_index, obstruction);
  const double tp = config.pulse_durations[tp_index];
  const double beta = effective_bandwidth(set.pulse);
  const std::size_t n_bs = config.plan.base_stations.size();

  std::vector<std::unordered_map<int, Point2D>> va_pos(n_bs);
  for (std::size_t i = 0; i < n_bs; ++i)
    for (const auto& va : set.vas[i]) va_pos[i][va.id] = va.position;

  std::vector<CrlbMapRow> rows;
  for (std::size_t pos = 0; pos < set.trajectory.size(); ++pos) {
    CrlbMapRow row;
    row.position = static_cast<int>(pos);
    row.truth = set.trajectory[pos];

    std::vector<MpcSinr> sinrs;
    bool all_separable = true;
    for (std::size_t i = 0; i < n_bs; ++i) {
      const auto& mpcs = set.truth_mpcs[pos * n_bs + i];
      DiffuseModel link_dm = config.dm;
      link_dm.onset_delay = config.dm.onset_delay + set.los_delays[pos * n_bs + i];
      std::vector<double> delays;
      for (const auto& m : mpcs) {
        delays.push_back(m.delay);
        MpcSinr s;
        s.va_id = m.va_id;
        s.sinr = sinr(m.amplitude, config.noise_psd, tp, link_dm.pdp(m.delay));
        const Point2D& a = va_pos[i].at(m.va_id);
        s.angle = std::atan2(row.truth.y - a.y, row.truth.x - a.x);
        sinrs.push_back(s);
      }
      all_separable = all_separable && separable(delays, tp);
    }

    row.n_paths = static_cast<int>(sinrs.size());
    row.separable_paths = all_separable;
    Efim j = efim(sinrs, beta);
    if (auto r = position_crlb(j)) {
      row.crlb_trace = r->total_variance;
      row.var_x = r->var_x;
      row.var_y = r->var_y;
    } else {
      row.crlb_trace = -1.0;
      row.var_x = -1.0;
      row.var_y = -1.0;
    }
    rows.push_back(row);
  }
  return rows;
}

void write_crlb_map(const std::vector<CrlbMapRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write CRLB map: " + path);
  out << "# mint-crlb v1\n";
  out << "position,true_x,true_y,crlb_trace_m2,var_x_m2,var_y_m2,n_paths,separable\n";
  for (const auto& r : rows) {
    out << r.position << ',' << fmt(r.truth.x) << ',' << fmt(r.truth.y) << ','
        << fmt(r.crlb_trace) << ',' << fmt(r.var_x) << ',' << fmt(r.var_y) << ','
        << r.n_paths << ',' << (r.separable_paths ? 1 : 0) << '\n';
  }
}

}  // namespace mint
