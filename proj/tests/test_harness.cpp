#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mint/common.hpp"
#include "mint/harness.hpp"

using namespace mint;

namespace {

// Small scenario for fast integration checks: short trajectory, one pulse.
ScenarioConfig small_config() {
  ScenarioConfig c = default_config();
  c.waypoints = {{4.5, 2.6}, {6.5, 2.6}};
  c.pulse_durations = {1e-9};
  c.sigma_z2 = {0.04};
  c.cutoff_dc = {0.5};
  c.jbsf_xi = {0.3};
  c.center_freqs = {7e9};
  return c;
}

}  // namespace

TEST_CASE("build_trajectory spacing and endpoints") {
  auto t = build_trajectory({{0.0, 0.0}, {1.0, 0.0}}, 0.1);
  CHECK(t.size() == 11);
  CHECK(t.front().x == doctest::Approx(0.0));
  CHECK(t.back().x == doctest::Approx(1.0));
  for (std::size_t i = 1; i < t.size(); ++i)
    CHECK(distance(t[i - 1], t[i]) == doctest::Approx(0.1));

  // 0.1 m spacing stepped at 0.1 s is 1 m/s along straight segments.
  CHECK(distance(t[0], t[1]) / 0.1 == doctest::Approx(1.0));
}

TEST_CASE("build_trajectory includes a corner exactly once") {
  auto t = build_trajectory({{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}}, 0.5);
  REQUIRE(t.size() == 5);
  CHECK(t[2].x == doctest::Approx(1.0));
  CHECK(t[2].y == doctest::Approx(0.0));
  CHECK(t[3].y == doctest::Approx(0.5));

  CHECK_THROWS_AS(build_trajectory({{0.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}}, 0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_trajectory({{0.0, 0.0}, {1.0, 0.0}}, 0.0),
                  std::invalid_argument);
}

TEST_CASE("apply_obstruction scales only blocked paths") {
  FloorPlan plan;
  plan.walls = {
      {{0.0, 0.0}, {10.0, 0.0}, true},
      {{10.0, 0.0}, {10.0, 8.0}, true},
      {{10.0, 8.0}, {0.0, 8.0}, true},
      {{0.0, 8.0}, {0.0, 0.0}, true},
  };
  Point2D bs{1.0, 1.0};
  Point2D pos{6.0, 5.0};
  auto vas = generate_vas(plan, bs, 0, 1);
  VisibleSet vs = expected_visible_set(pos, 0, vas, plan);

  std::vector<Mpc> mpcs;
  for (std::size_t j = 0; j < vs.vas.size(); ++j)
    mpcs.push_back({vs.distances[j] / kSpeedOfLight,
                    std::polar(1.0, 0.3 * static_cast<double>(j)),
                    vs.vas[j].id});
  auto before = mpcs;

  // Tiny diagonal blocker across the direct path midpoint (3.5, 3).
  ObstructionSpec spec;
  spec.segments = {{{3.4, 3.1}, {3.6, 2.9}, false}};
  int affected = apply_obstruction(mpcs, vas, pos, plan, spec);
  CHECK(affected == 1);
  for (std::size_t j = 0; j < mpcs.size(); ++j) {
    double ratio = std::abs(mpcs[j].amplitude) / std::abs(before[j].amplitude);
    double phase_diff =
        std::arg(mpcs[j].amplitude) - std::arg(before[j].amplitude);
    CHECK(phase_diff == doctest::Approx(0.0));
    if (mpcs[j].va_id == 0) {
      CHECK(ratio == doctest::Approx(std::pow(10.0, -0.5)));
      CHECK(std::norm(mpcs[j].amplitude) / std::norm(before[j].amplitude) ==
            doctest::Approx(0.1));
    } else {
      CHECK(ratio == doctest::Approx(1.0));
    }
  }

  // No blockers: a no-op.
  auto untouched = before;
  CHECK(apply_obstruction(untouched, vas, pos, plan, ObstructionSpec{}) == 0);
  for (std::size_t j = 0; j < untouched.size(); ++j)
    CHECK(untouched[j].amplitude == before[j].amplitude);
}

TEST_CASE("apply_obstruction_signal attenuates the located path") {
  Pulse p = make_pulse(1e-9, 0.5, 7e9, 6.25e9, 1e-9 / 16.0);
  const double tau = 20e-9;
  SignalFrame f = synthesize({{tau, std::polar(1.0, 0.8), 0}}, {}, 0.0, p, 50e-9, 1);
  SignalFrame out = apply_obstruction_signal(f, p, {tau}, 10.0);

  double peak_before = 0.0, peak_after = 0.0;
  cdouble at_peak_before, at_peak_after;
  for (std::size_t n = 0; n < f.samples.size(); ++n) {
    if (std::abs(f.samples[n]) > peak_before) {
      peak_before = std::abs(f.samples[n]);
      at_peak_before = f.samples[n];
    }
    if (std::abs(out.samples[n]) > peak_after) {
      peak_after = std::abs(out.samples[n]);
      at_peak_after = out.samples[n];
    }
  }
  CHECK(peak_after / peak_before == doctest::Approx(std::pow(10.0, -0.5)).epsilon(1e-3));
  CHECK(std::arg(at_peak_after) == doctest::Approx(std::arg(at_peak_before)).epsilon(1e-3));
}

TEST_CASE("obstruction leaves unblocked frames bit-identical") {
  ScenarioConfig c = small_config();
  FrameSet off = build_frame_set(c, 0, false);
  FrameSet on = build_frame_set(c, 0, true);
  REQUIRE(off.frames.size() == on.frames.size());

  int identical = 0, different = 0;
  for (std::size_t idx = 0; idx < off.frames.size(); ++idx) {
    bool same = off.frames[idx].samples == on.frames[idx].samples;
    bool any_scaled = false;
    for (std::size_t k = 0; k < off.truth_mpcs[idx].size(); ++k)
      any_scaled |= off.truth_mpcs[idx][k].amplitude != on.truth_mpcs[idx][k].amplitude;
    CHECK(same == !any_scaled);
    (same ? identical : different)++;
  }
  CHECK(identical > 0);
  CHECK(different > 0);
}

TEST_CASE("ranging_error_cdf basics") {
  std::vector<double> errors = {0.1, 0.2, 0.3};
  auto cdf = ranging_error_cdf(errors, {0.05, 0.2, 1.0});
  CHECK(cdf[0] == doctest::Approx(0.0));
  CHECK(cdf[1] == doctest::Approx(2.0 / 3.0));
  CHECK(cdf[2] == doctest::Approx(1.0));

  CHECK_THROWS_AS(ranging_error_cdf({}, {0.1}), std::invalid_argument);
  CHECK_THROWS_AS(ranging_error_cdf(errors, {0.2, 0.1}), std::invalid_argument);
}

TEST_CASE("config validation reports inconsistencies") {
  ScenarioConfig c = default_config();
  CHECK_NOTHROW(validate(c));

  ScenarioConfig bad = c;
  bad.sigma_z2.pop_back();
  CHECK_THROWS_WITH_AS(validate(bad),
                       "config error: sigma_z2_m2 length does not match pulse set",
                       std::invalid_argument);

  ScenarioConfig fast = c;
  fast.spacing = 0.3;  // 3 m/s against v_max = 1.5
  CHECK_THROWS_AS(validate(fast), std::invalid_argument);

  ScenarioConfig no_bs = c;
  no_bs.plan.base_stations.clear();
  CHECK_THROWS_AS(validate(no_bs), std::invalid_argument);
}

TEST_CASE("config file loading overrides defaults") {
  const char* plan_path = "plan_tmp_h.txt";
  {
    std::ofstream out(plan_path);
    out << "wall 0 0 12 0 1\nwall 12 0 12 6 1\nwall 12 6 0 6 1\nwall 0 6 0 0 1\n";
    out << "bs 1 1\nbs 11 1\nbs 1 5\nbs 11 5\n";
  }
  const char* cfg_path = "config_tmp_h.json";
  {
    std::ofstream out(cfg_path);
    out << R"({
      "plan_path": "plan_tmp_h.txt",
      "waypoints": [[3, 3], [9, 3]],
      "pulse_durations_ns": [0.5, 1],
      "sigma_z2_m2": [0.01, 0.04],
      "cutoff_dc_m": [0.3, 0.5],
      "jbsf_xi": [0.4, 0.3],
      "center_freq_ghz": [7, 7],
      "seed": 42,
      "dm": {"total_power": 0.002, "decay_const_ns": 15}
    })";
  }
  ScenarioConfig c = load_config(cfg_path);
  CHECK(c.plan.base_stations.size() == 4);
  CHECK(c.pulse_durations.size() == 2);
  CHECK(c.pulse_durations[0] == doctest::Approx(0.5e-9));
  CHECK(c.seed == 42);
  CHECK(c.dm.decay_const == doctest::Approx(15e-9));
  CHECK(c.gamma == doctest::Approx(0.1));  // untouched default
  CHECK_NOTHROW(validate(c));
  std::remove(plan_path);
  std::remove(cfg_path);

  CHECK_THROWS_AS(load_config("missing_config.json"), std::runtime_error);
}

TEST_CASE("small scenario run is deterministic") {
  ScenarioConfig c = small_config();
  RunFilter filter;
  filter.tp_index = 0;
  auto a = run_scenario(c, filter);
  auto b = run_scenario(c, filter);
  REQUIRE(a.size() == b.size());
  REQUIRE(a.size() == 8);  // 4 trackers x 2 obstruction states
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].rms_error == b[i].rms_error);
    CHECK(a[i].errors == b[i].errors);
    CHECK(a[i].ranging_errors == b[i].ranging_errors);
  }

  namespace fs = std::filesystem;
  fs::path dir_a = fs::temp_directory_path() / "mint_test_out_a";
  fs::path dir_b = fs::temp_directory_path() / "mint_test_out_b";
  write_metrics(a, dir_a.string());
  write_metrics(b, dir_b.string());
  for (const auto& entry : fs::directory_iterator(dir_a)) {
    std::ifstream fa(entry.path(), std::ios::binary);
    std::ifstream fb(dir_b / entry.path().filename(), std::ios::binary);
    std::string sa((std::istreambuf_iterator<char>(fa)), {});
    std::string sb((std::istreambuf_iterator<char>(fb)), {});
    CHECK(sa == sb);
    CHECK(!sa.empty());
  }
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("per-position CDF of errors is consistent with the RMS") {
  ScenarioConfig c = small_config();
  FrameSet set = build_frame_set(c, 0, false);
  MetricsRecord rec = run_combination(c, set, Tracker::kMintGada);

  double mean_err = 0.0;
  for (double e : rec.errors) mean_err += e;
  mean_err /= static_cast<double>(rec.errors.size());

  std::vector<double> grid = {mean_err, rec.rms_error + 1e-12};
  auto cdf = ranging_error_cdf(rec.errors, grid);
  CHECK(cdf[1] >= cdf[0]);
  CHECK(cdf[1] <= 1.0);
}

TEST_CASE("crlb map covers the trajectory") {
  ScenarioConfig c = small_config();
  auto rows = crlb_map(c, 0, false);
  CHECK(rows.size() == build_trajectory(c.waypoints, c.spacing).size());
  int bounded = 0;
  for (const auto& r : rows) {
    CHECK(r.n_paths > 0);
    if (r.crlb_trace > 0.0) {
      ++bounded;
      CHECK(r.var_x > 0.0);
      CHECK(r.var_y > 0.0);
    }
  }
  CHECK(bounded == static_cast<int>(rows.size()));  // rich multipath geometry

  write_crlb_map(rows, "crlb_tmp.csv");
  std::ifstream in("crlb_tmp.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header.find("mint-crlb") != std::string::npos);
  std::remove("crlb_tmp.csv");
}
