// Command-line front end: scenario sweeps, VA tables, CRLB maps, and
// single-frame ranging dumps.
#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "mint/common.hpp"
#include "mint/harness.hpp"

namespace {

using namespace mint;

std::optional<Tracker> parse_tracker(const std::string& name) {
  for (Tracker t : {Tracker::kMintDa, Tracker::kMintGada, Tracker::kEkfMl,
                    Tracker::kEkfJbsf})
    if (name == tracker_name(t)) return t;
  return std::nullopt;
}

ScenarioConfig config_from(const std::string& path) {
  return path.empty() ? default_config() : load_config(path);
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            std::optional<std::uint64_t> seed, const std::string& tracker,
            double pulse_ns, const std::string& obstruction) {
  ScenarioConfig config = config_from(config_path);
  if (seed) config.seed = *seed;
  validate(config);

  RunFilter filter;
  if (!tracker.empty()) {
    auto t = parse_tracker(tracker);
    if (!t) throw std::invalid_argument("unknown tracker: " + tracker);
    filter.tracker = t;
  }
  if (pulse_ns > 0.0) {
    for (std::size_t i = 0; i < config.pulse_durations.size(); ++i)
      if (std::abs(config.pulse_durations[i] - pulse_ns * 1e-9) < 1e-15)
        filter.tp_index = i;
    if (!filter.tp_index)
      throw std::invalid_argument("pulse duration not in the configured set");
  }
  if (obstruction == "off") filter.obstruction = false;
  else if (obstruction == "on") filter.obstruction = true;
  else if (obstruction != "both")
    throw std::invalid_argument("--obstruction must be off, on or both");

  auto records = run_scenario(config, filter);
  write_metrics(records, out_dir);
  std::printf("%zu combinations -> %s\n", records.size(), out_dir.c_str());
  for (const auto& r : records)
    std::printf("  %-9s tp %4.1f ns %s  rms %.4f m  hdop %.3f  assoc %.1f\n",
                tracker_name(r.tracker), r.tp * 1e9,
                r.obstruction ? "obst" : "free", r.rms_error, r.avg_hdop,
                r.mean_assoc);
  return 0;
}

int cmd_vas(const std::string& plan_path, int max_order,
            const std::string& out_path) {
  PlanFile pf = load_floor_plan(plan_path);
  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw std::runtime_error("cannot write " + out_path);
    out = &file;
  }
  *out << "bs_id,va_id,order,x,y,mirror_walls\n";
  for (std::size_t i = 0; i < pf.base_stations.size(); ++i) {
    auto vas = generate_vas(pf.plan, pf.base_stations[i], static_cast<int>(i),
                            max_order);
    for (const auto& va : vas) {
      char buf[128];
      std::snprintf(buf, sizeof(buf), "%zu,%d,%d,%.9g,%.9g,", i, va.id, va.order,
                    va.position.x, va.position.y);
      *out << buf;
      for (std::size_t w = 0; w < va.mirror_walls.size(); ++w)
        *out << (w ? " " : "") << va.mirror_walls[w];
      *out << '\n';
    }
  }
  return 0;
}

int cmd_crlb(const std::string& config_path, const std::string& out_path,
             double pulse_ns, bool obstruction) {
  ScenarioConfig config = config_from(config_path);
  validate(config);
  std::size_t tp_index = 0;
  if (pulse_ns > 0.0) {
    bool found = false;
    for (std::size_t i = 0; i < config.pulse_durations.size(); ++i)
      if (std::abs(config.pulse_durations[i] - pulse_ns * 1e-9) < 1e-15) {
        tp_index = i;
        found = true;
      }
    if (!found)
      throw std::invalid_argument("pulse duration not in the configured set");
  }
  auto rows = crlb_map(config, tp_index, obstruction);
  write_crlb_map(rows, out_path);
  std::printf("%zu positions -> %s\n", rows.size(), out_path.c_str());
  return 0;
}

int cmd_range_test(const std::string& config_path, int position, int bs,
                   bool obstruction, const std::string& dump_path) {
  ScenarioConfig config = config_from(config_path);
  validate(config);
  FrameSet set = build_frame_set(config, 0, obstruction);
  const auto n_bs = config.plan.base_stations.size();
  if (position < 0 || static_cast<std::size_t>(position) >= set.trajectory.size())
    throw std::invalid_argument("position index out of range");
  if (bs < 0 || static_cast<std::size_t>(bs) >= n_bs)
    throw std::invalid_argument("bs index out of range");

  std::size_t idx = static_cast<std::size_t>(position) * n_bs + bs;
  const auto& est = set.estimates[idx];
  Point2D truth = set.trajectory[position];
  double true_dist = distance(truth, config.plan.base_stations[bs]);

  std::printf("position %d (%.2f, %.2f)  bs %d  true distance %.4f m\n", position,
              truth.x, truth.y, bs, true_dist);
  std::printf("extracted %zu paths:\n", est.delays.size());
  for (std::size_t k = 0; k < est.delays.size(); ++k)
    std::printf("  tau %8.3f ns  distance %8.4f m  |alpha| %.3g\n",
                est.delays[k] * 1e9, est.delays[k] * kSpeedOfLight,
                std::abs(est.amplitudes[k]));
  if (set.ml_ranges[idx])
    std::printf("ml range    %.4f m (error %+.4f m)\n", *set.ml_ranges[idx],
                *set.ml_ranges[idx] - true_dist);
  else
    std::printf("ml range    outage\n");
  std::printf("jbsf range  %.4f m (error %+.4f m)\n", set.jbsf_ranges[idx],
              set.jbsf_ranges[idx] - true_dist);
  std::printf("klos        %.2f dB\n",
              estimate_klos_db(set.frames[idx], set.pulse, config.prelos_window,
                               config.gamma, config.k_max));

  if (!dump_path.empty()) {
    write_signal_frame(set.frames[idx], dump_path);
    std::printf("frame -> %s\n", dump_path.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multipath-assisted indoor navigation and tracking simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", tracker, obstruction = "both";
  std::string plan_path, out_path, dump_path;
  double pulse_ns = 0.0;
  int max_order = 2, position = 0, bs = 0;
  std::uint64_t seed_value = 0;
  bool seed_set = false, obstruction_flag = false;

  auto* run = app.add_subcommand("run", "Run the tracker sweep and write CSVs");
  run->add_option("-c,--config", config_path, "JSON scenario config");
  run->add_option("-o,--out", out_dir, "Output directory");
  run->add_option("-s,--seed", seed_value, "Override the RNG seed")
      ->each([&](const std::string&) { seed_set = true; });
  run->add_option("-t,--tracker", tracker,
                  "Only one tracker (mint-da, mint-gada, ekf-ml, ekf-jbsf)");
  run->add_option("-p,--pulse", pulse_ns, "Only one pulse duration (ns)");
  run->add_option("--obstruction", obstruction, "off, on or both");

  auto* vas = app.add_subcommand("vas", "Dump the virtual-anchor table");
  vas->add_option("plan", plan_path, "Floor plan file")->required();
  vas->add_option("-m,--max-order", max_order, "Maximum mirror order");
  vas->add_option("-o,--out", out_path, "CSV output path (default stdout)");

  auto* crlb = app.add_subcommand("crlb", "Write the per-position CRLB map");
  crlb->add_option("-c,--config", config_path, "JSON scenario config");
  crlb->add_option("-o,--out", out_path, "CSV output path")->required();
  crlb->add_option("-p,--pulse", pulse_ns, "Pulse duration (ns)");
  crlb->add_flag("--obstruction", obstruction_flag, "Apply the obstruction");

  auto* rt = app.add_subcommand("range-test", "Single-frame ranging dump");
  rt->add_option("-c,--config", config_path, "JSON scenario config");
  rt->add_option("-l,--position", position, "Trajectory position index");
  rt->add_option("-b,--bs", bs, "Base station index");
  rt->add_flag("--obstruction", obstruction_flag, "Apply the obstruction");
  rt->add_option("--dump-frame", dump_path, "Export the frame samples");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(config_path, out_dir,
                     seed_set ? std::optional<std::uint64_t>(seed_value)
                              : std::nullopt,
                     tracker, pulse_ns, obstruction);
    if (vas->parsed()) return cmd_vas(plan_path, max_order, out_path);
    if (crlb->parsed())
      return cmd_crlb(config_path, out_path, pulse_ns, obstruction_flag);
    if (rt->parsed())
      return cmd_range_test(config_path, position, bs, obstruction_flag, dump_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
