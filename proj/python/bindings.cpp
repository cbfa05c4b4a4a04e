// Python bindings for the core operations: geometry, waveforms, estimation,
// association, tracking, bounds, and scenario runs.
#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mint/bounds.hpp"
#include "mint/common.hpp"
#include "mint/harness.hpp"

namespace py = pybind11;
using namespace mint;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multipath-assisted indoor navigation and tracking (MINT) with "
            "ultra-wideband signals";
  m.attr("SPEED_OF_LIGHT") = kSpeedOfLight;

  // geometry
  py::class_<Point2D>(m, "Point2D")
      .def(py::init<>())
      .def(py::init<double, double>(), py::arg("x"), py::arg("y"))
      .def_readwrite("x", &Point2D::x)
      .def_readwrite("y", &Point2D::y)
      .def("__repr__", [](const Point2D& p) {
        return "Point2D(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")";
      });
  m.def("distance", &distance);

  py::class_<WallSegment>(m, "WallSegment")
      .def(py::init<>())
      .def(py::init([](Point2D a, Point2D b, bool reflective) {
             return WallSegment{a, b, reflective};
           }),
           py::arg("a"), py::arg("b"), py::arg("reflective") = true)
      .def_readwrite("a", &WallSegment::a)
      .def_readwrite("b", &WallSegment::b)
      .def_readwrite("reflective", &WallSegment::reflective);

  py::class_<FloorPlan>(m, "FloorPlan")
      .def(py::init<>())
      .def_readwrite("walls", &FloorPlan::walls)
      .def_readwrite("obstructions", &FloorPlan::obstructions)
      .def("without_obstructions", &FloorPlan::without_obstructions);

  py::class_<VirtualAnchor>(m, "VirtualAnchor")
      .def_readonly("id", &VirtualAnchor::id)
      .def_readonly("bs_id", &VirtualAnchor::bs_id)
      .def_readonly("position", &VirtualAnchor::position)
      .def_readonly("order", &VirtualAnchor::order)
      .def_readonly("mirror_walls", &VirtualAnchor::mirror_walls);

  py::class_<VisibleSet>(m, "VisibleSet")
      .def_readonly("position_index", &VisibleSet::position_index)
      .def_readonly("bs_id", &VisibleSet::bs_id)
      .def_readonly("vas", &VisibleSet::vas)
      .def_readonly("distances", &VisibleSet::distances)
      .def_readonly("angles", &VisibleSet::angles);

  m.def("mirror_point", &mirror_point, py::arg("p"), py::arg("wall"));
  m.def("generate_vas", &generate_vas, py::arg("plan"), py::arg("bs"),
        py::arg("bs_id"), py::arg("max_order"));
  m.def("is_visible", &is_visible, py::arg("va"), py::arg("p"), py::arg("plan"));
  m.def("unfold_path", &unfold_path, py::arg("va"), py::arg("p"), py::arg("plan"));
  m.def("expected_visible_set", &expected_visible_set, py::arg("p"),
        py::arg("position_index"), py::arg("all_vas"), py::arg("plan"));

  py::class_<PlanFile>(m, "PlanFile")
      .def_readwrite("plan", &PlanFile::plan)
      .def_readwrite("base_stations", &PlanFile::base_stations);
  m.def("load_floor_plan", &load_floor_plan, py::arg("path"));

  // waveform
  py::class_<Pulse>(m, "Pulse")
      .def_readonly("duration_tp", &Pulse::duration_tp)
      .def_readonly("rolloff", &Pulse::rolloff)
      .def_readonly("center_freq", &Pulse::center_freq)
      .def_readonly("band_edge_f0", &Pulse::band_edge_f0)
      .def_readonly("dtau", &Pulse::dtau)
      .def_readonly("samples", &Pulse::samples)
      .def("eval", &Pulse::eval)
      .def("peak", &Pulse::peak)
      .def("spectrum", &Pulse::spectrum)
      .def("discrete_energy", &Pulse::discrete_energy);
  m.def("make_pulse", &make_pulse, py::arg("duration_tp"), py::arg("rolloff"),
        py::arg("center_freq"), py::arg("band_edge_f0"), py::arg("dtau"));

  py::class_<Mpc>(m, "Mpc")
      .def(py::init([](double delay, cdouble amplitude, int va_id) {
             return Mpc{delay, amplitude, va_id};
           }),
           py::arg("delay"), py::arg("amplitude"), py::arg("va_id") = -1)
      .def_readwrite("delay", &Mpc::delay)
      .def_readwrite("amplitude", &Mpc::amplitude)
      .def_readwrite("va_id", &Mpc::va_id);

  py::class_<DiffuseModel>(m, "DiffuseModel")
      .def(py::init<>())
      .def(py::init([](double onset, double power, double decay) {
             return DiffuseModel{onset, power, decay};
           }),
           py::arg("onset_delay"), py::arg("total_power"), py::arg("decay_const"))
      .def_readwrite("onset_delay", &DiffuseModel::onset_delay)
      .def_readwrite("total_power", &DiffuseModel::total_power)
      .def_readwrite("decay_const", &DiffuseModel::decay_const)
      .def("pdp", &DiffuseModel::pdp);

  py::class_<SignalFrame>(m, "SignalFrame")
      .def_readwrite("samples", &SignalFrame::samples)
      .def_readonly("dtau", &SignalFrame::dtau)
      .def_readonly("position_index", &SignalFrame::position_index)
      .def_readonly("bs_id", &SignalFrame::bs_id)
      .def_readonly("noise_psd", &SignalFrame::noise_psd)
      .def("duration", &SignalFrame::duration);

  m.def(
      "synthesize",
      [](const std::vector<Mpc>& mpcs, const DiffuseModel& dm, double noise_psd,
         const Pulse& pulse, double duration, std::uint64_t seed) {
        return synthesize(mpcs, dm, noise_psd, pulse, duration, seed);
      },
      py::arg("mpcs"), py::arg("dm"), py::arg("noise_psd"), py::arg("pulse"),
      py::arg("duration"), py::arg("rng_seed"));

  py::class_<FrequencyResponse>(m, "FrequencyResponse")
      .def(py::init<>())
      .def_readwrite("values", &FrequencyResponse::values)
      .def_readwrite("freq_spacing", &FrequencyResponse::freq_spacing)
      .def_readwrite("start_freq", &FrequencyResponse::start_freq)
      .def_readwrite("position_index", &FrequencyResponse::position_index);
  m.def("band_extract", &band_extract, py::arg("response"), py::arg("pulse"));
  m.def("read_frequency_response", &read_frequency_response, py::arg("path"));
  m.def("write_signal_frame", &write_signal_frame, py::arg("frame"), py::arg("path"));

  // estimation
  py::class_<MpcEstimateSet>(m, "MpcEstimateSet")
      .def(py::init<>())
      .def_readwrite("delays", &MpcEstimateSet::delays)
      .def_readwrite("amplitudes", &MpcEstimateSet::amplitudes)
      .def_readwrite("position_index", &MpcEstimateSet::position_index)
      .def_readwrite("bs_id", &MpcEstimateSet::bs_id);

  py::enum_<RangingMethod>(m, "RangingMethod")
      .value("ML", RangingMethod::kMl)
      .value("JBSF", RangingMethod::kJbsf);

  py::class_<RangeEstimate>(m, "RangeEstimate")
      .def_readonly("distance", &RangeEstimate::distance)
      .def_readonly("method", &RangeEstimate::method)
      .def_readonly("position_index", &RangeEstimate::position_index)
      .def_readonly("bs_id", &RangeEstimate::bs_id);

  m.def("noise_threshold", &noise_threshold, py::arg("frame"), py::arg("gamma"),
        py::arg("prelos_window"));
  m.def("extract_mpcs", &extract_mpcs, py::arg("frame"), py::arg("pulse"),
        py::arg("k_max"), py::arg("threshold"));
  m.def("ml_range", &ml_range, py::arg("estimates"));
  m.def("jbsf_range", &jbsf_range, py::arg("frame"), py::arg("xi"),
        py::arg("searchback_window"), py::arg("prelos_window"));
  m.def("estimate_klos_db", &estimate_klos_db, py::arg("frame"), py::arg("pulse"),
        py::arg("prelos_window"), py::arg("gamma") = 0.1, py::arg("k_max") = 20);

  // association
  py::class_<AssociationProblem>(m, "AssociationProblem")
      .def(py::init<>())
      .def_readwrite("measured", &AssociationProblem::measured)
      .def_readwrite("expected", &AssociationProblem::expected)
      .def_readwrite("cutoff", &AssociationProblem::cutoff);

  py::class_<Correspondences>(m, "Correspondences")
      .def_readonly("assignments", &Correspondences::assignments)
      .def_readonly("clutter", &Correspondences::clutter);

  m.def("cutoff_metric", &cutoff_metric, py::arg("d"), py::arg("z"), py::arg("dc"));
  m.def("assign", &assign, py::arg("problem"));
  m.def("associate_at", &associate_at, py::arg("position"), py::arg("vas"),
        py::arg("plan"), py::arg("measured"), py::arg("cutoff"));

  // tracking
  py::class_<TrackerState>(m, "TrackerState")
      .def(py::init<>())
      .def_readwrite("mean", &TrackerState::mean)
      .def_readwrite("cov", &TrackerState::cov)
      .def("position", &TrackerState::position);

  py::class_<MotionModel>(m, "MotionModel")
      .def_static("make", &MotionModel::make, py::arg("dt"), py::arg("sigma_a2"))
      .def_readonly("dt", &MotionModel::dt)
      .def_readonly("sigma_a2", &MotionModel::sigma_a2)
      .def_readonly("F", &MotionModel::F)
      .def_readonly("G", &MotionModel::G)
      .def_readonly("Q", &MotionModel::Q);
  m.def("sigma_a_from_vmax", &sigma_a_from_vmax, py::arg("v_max"), py::arg("dt"));

  py::class_<ObservationBatch>(m, "ObservationBatch")
      .def(py::init<>())
      .def_readwrite("anchors", &ObservationBatch::anchors)
      .def_readwrite("distances", &ObservationBatch::distances)
      .def_readwrite("noise_var", &ObservationBatch::noise_var);

  py::class_<UpdateResult>(m, "UpdateResult")
      .def_readonly("state", &UpdateResult::state)
      .def_readonly("rows_used", &UpdateResult::rows_used);

  m.def("predict", &predict, py::arg("state"), py::arg("model"));
  m.def("update", &update, py::arg("state"), py::arg("batch"));

  py::enum_<DaMode>(m, "DaMode").value("DA", DaMode::kDa).value("GADA", DaMode::kGada);

  py::class_<TrackingConfig>(m, "TrackingConfig")
      .def(py::init<>())
      .def_readwrite("pulse", &TrackingConfig::pulse)
      .def_readwrite("motion", &TrackingConfig::motion)
      .def_readwrite("sigma_z2", &TrackingConfig::sigma_z2)
      .def_readwrite("cutoff_dc", &TrackingConfig::cutoff_dc)
      .def_readwrite("gamma", &TrackingConfig::gamma)
      .def_readwrite("k_max", &TrackingConfig::k_max)
      .def_readwrite("prelos_window", &TrackingConfig::prelos_window)
      .def_readwrite("jbsf_xi", &TrackingConfig::jbsf_xi)
      .def_readwrite("jbsf_searchback", &TrackingConfig::jbsf_searchback);

  py::class_<MintStepResult>(m, "MintStepResult")
      .def_readonly("state", &MintStepResult::state)
      .def_readonly("per_bs", &MintStepResult::per_bs);

  m.def("step_conventional_from_ranges", &step_conventional_from_ranges,
        py::arg("state"), py::arg("ranges"), py::arg("bs_positions"),
        py::arg("sigma_z2"), py::arg("motion"));
  m.def("step_conventional", &step_conventional, py::arg("state"),
        py::arg("frames"), py::arg("bs_positions"), py::arg("method"),
        py::arg("config"));
  m.def("step_mint_from_measurements", &step_mint_from_measurements,
        py::arg("state"), py::arg("estimates"), py::arg("vas_per_bs"),
        py::arg("plan"), py::arg("config"), py::arg("mode"),
        py::arg("true_position") = std::nullopt);
  m.def("step_mint", &step_mint, py::arg("state"), py::arg("frames"),
        py::arg("vas_per_bs"), py::arg("plan"), py::arg("config"), py::arg("mode"),
        py::arg("true_position") = std::nullopt);

  // bounds
  py::class_<MpcSinr>(m, "MpcSinr")
      .def(py::init([](int va_id, double sinr, double angle) {
             return MpcSinr{va_id, sinr, angle};
           }),
           py::arg("va_id"), py::arg("sinr"), py::arg("angle"))
      .def_readwrite("va_id", &MpcSinr::va_id)
      .def_readwrite("sinr", &MpcSinr::sinr)
      .def_readwrite("angle", &MpcSinr::angle);

  py::class_<Efim>(m, "Efim")
      .def_readonly("info", &Efim::info)
      .def_readonly("effective_bandwidth", &Efim::effective_bandwidth);

  py::class_<CrlbResult>(m, "CrlbResult")
      .def_readonly("total_variance", &CrlbResult::total_variance)
      .def_readonly("var_x", &CrlbResult::var_x)
      .def_readonly("var_y", &CrlbResult::var_y);

  m.def("sinr", &sinr, py::arg("amplitude"), py::arg("noise_psd"), py::arg("tp"),
        py::arg("s_nu_at_tau"));
  m.def("ranging_direction_matrix", &ranging_direction_matrix, py::arg("phi"));
  m.def("efim", &efim, py::arg("mpcs"), py::arg("beta"));
  m.def("position_crlb", &position_crlb, py::arg("efim"));
  m.def("hdop", &hdop, py::arg("position_error"), py::arg("rms_ranging_error"));
  m.def("effective_bandwidth", &effective_bandwidth, py::arg("pulse"));
  m.def("rms_bandwidth", &rms_bandwidth, py::arg("psd"), py::arg("start_freq"),
        py::arg("freq_step"));
  m.def("delay_variance_bound", &delay_variance_bound, py::arg("sinr"),
        py::arg("beta"));
  m.def("separable", &separable, py::arg("delays"), py::arg("tp"));

  // harness
  py::class_<ObstructionSpec>(m, "ObstructionSpec")
      .def(py::init<>())
      .def_readwrite("segments", &ObstructionSpec::segments)
      .def_readwrite("attenuation_db", &ObstructionSpec::attenuation_db);

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init<>())
      .def_readwrite("plan", &ScenarioConfig::plan)
      .def_readwrite("waypoints", &ScenarioConfig::waypoints)
      .def_readwrite("spacing", &ScenarioConfig::spacing)
      .def_readwrite("dt", &ScenarioConfig::dt)
      .def_readwrite("pulse_durations", &ScenarioConfig::pulse_durations)
      .def_readwrite("sigma_z2", &ScenarioConfig::sigma_z2)
      .def_readwrite("cutoff_dc", &ScenarioConfig::cutoff_dc)
      .def_readwrite("jbsf_xi", &ScenarioConfig::jbsf_xi)
      .def_readwrite("center_freqs", &ScenarioConfig::center_freqs)
      .def_readwrite("rolloff", &ScenarioConfig::rolloff)
      .def_readwrite("gamma", &ScenarioConfig::gamma)
      .def_readwrite("k_max", &ScenarioConfig::k_max)
      .def_readwrite("v_max", &ScenarioConfig::v_max)
      .def_readwrite("prelos_window", &ScenarioConfig::prelos_window)
      .def_readwrite("jbsf_searchback", &ScenarioConfig::jbsf_searchback)
      .def_readwrite("dm", &ScenarioConfig::dm)
      .def_readwrite("noise_psd", &ScenarioConfig::noise_psd)
      .def_readwrite("obstruction", &ScenarioConfig::obstruction)
      .def_readwrite("max_va_order", &ScenarioConfig::max_va_order)
      .def_readwrite("seed", &ScenarioConfig::seed)
      .def_readwrite("cdf_max", &ScenarioConfig::cdf_max)
      .def_readwrite("cdf_step", &ScenarioConfig::cdf_step);

  m.def("default_config", &default_config);
  m.def("load_config", &load_config, py::arg("path"));
  m.def("validate_config", &validate, py::arg("config"));
  m.def("build_trajectory", &build_trajectory, py::arg("waypoints"),
        py::arg("spacing"));
  m.def("ranging_error_cdf", &ranging_error_cdf, py::arg("errors"), py::arg("grid"));

  py::enum_<Tracker>(m, "Tracker")
      .value("MINT_DA", Tracker::kMintDa)
      .value("MINT_GADA", Tracker::kMintGada)
      .value("EKF_ML", Tracker::kEkfMl)
      .value("EKF_JBSF", Tracker::kEkfJbsf);
  m.def("tracker_name", &tracker_name);

  py::class_<MetricsRecord>(m, "MetricsRecord")
      .def_readonly("tracker", &MetricsRecord::tracker)
      .def_readonly("tp", &MetricsRecord::tp)
      .def_readonly("obstruction", &MetricsRecord::obstruction)
      .def_readonly("seed", &MetricsRecord::seed)
      .def_readonly("truth", &MetricsRecord::truth)
      .def_readonly("estimates", &MetricsRecord::estimates)
      .def_readonly("errors", &MetricsRecord::errors)
      .def_readonly("hdop_values", &MetricsRecord::hdop_values)
      .def_readonly("assoc_counts", &MetricsRecord::assoc_counts)
      .def_readonly("ranging_errors", &MetricsRecord::ranging_errors)
      .def_readonly("rms_error", &MetricsRecord::rms_error)
      .def_readonly("avg_hdop", &MetricsRecord::avg_hdop)
      .def_readonly("mean_assoc", &MetricsRecord::mean_assoc)
      .def_readonly("cdf_grid", &MetricsRecord::cdf_grid)
      .def_readonly("cdf", &MetricsRecord::cdf);

  py::class_<FrameSet>(m, "FrameSet")
      .def_readonly("tp_index", &FrameSet::tp_index)
      .def_readonly("obstruction", &FrameSet::obstruction)
      .def_readonly("pulse", &FrameSet::pulse)
      .def_readonly("trajectory", &FrameSet::trajectory)
      .def_readonly("vas", &FrameSet::vas)
      .def_readonly("frames", &FrameSet::frames)
      .def_readonly("estimates", &FrameSet::estimates)
      .def_readonly("duration", &FrameSet::duration);

  m.def("build_frame_set", &build_frame_set, py::arg("config"),
        py::arg("tp_index"), py::arg("obstruction"),
        py::call_guard<py::gil_scoped_release>());
  m.def("run_combination", &run_combination, py::arg("config"), py::arg("set"),
        py::arg("tracker"), py::call_guard<py::gil_scoped_release>());
  m.def(
      "run_scenario",
      [](const ScenarioConfig& config) { return run_scenario(config); },
      py::arg("config"), py::call_guard<py::gil_scoped_release>());
  m.def("write_metrics", &write_metrics, py::arg("records"), py::arg("out_dir"));
}
