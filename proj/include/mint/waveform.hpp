#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mint/geometry.hpp"

namespace mint {

using cdouble = std::complex<double>;

// Raised-cosine pulse, defined in the time domain and truncated to
// |t| <= 8*Tp. The discretized pulse is energy-normalized: sum |s|^2 dtau = 1.
struct Pulse {
  double duration_tp = 0.0;    // s
  double rolloff = 0.0;        // in [0, 1]
  double center_freq = 0.0;    // Hz
  double band_edge_f0 = 0.0;   // Hz, lower edge of the occupied band
  double dtau = 0.0;           // s, sample interval

  std::vector<double> samples;  // s(j*dtau), j in [-half_support, half_support]
  int half_support = 0;
  double norm_scale = 1.0;

  // Normalized closed-form shape; 0 outside the truncation window.
  double eval(double t) const;
  double peak() const { return eval(0.0); }
  // Normalized closed-form spectrum magnitude at baseband offset nu from the
  // band center; support |nu| <= (1+rolloff)/(2*Tp).
  double spectrum(double nu) const;
  double discrete_energy() const;
};

// Requires dtau <= Tp/8 and rolloff in [0, 1].
Pulse make_pulse(double duration_tp, double rolloff, double center_freq,
                 double band_edge_f0, double dtau);

struct Mpc {
  double delay = 0.0;       // s
  cdouble amplitude = 0.0;  // relative to the unit-energy pulse
  int va_id = -1;           // generating anchor, -1 when unknown
};

// Single-exponential power delay profile of the diffuse multipath:
// S_nu(tau) = (Omega/gamma_d) * exp(-(tau-onset)/gamma_d) for tau >= onset.
struct DiffuseModel {
  double onset_delay = 0.0;   // s
  double total_power = 0.0;   // Omega, dimensionless
  double decay_const = 1e-9;  // gamma_d, s

  double pdp(double tau) const;
};

struct SignalFrame {
  std::vector<cdouble> samples;
  double dtau = 0.0;
  int position_index = 0;
  int bs_id = 0;
  double noise_psd = 0.0;  // N0, two-sided PSD N0/2

  double duration() const { return static_cast<double>(samples.size()) * dtau; }
};

// r(t) = sum_k a_k s(t - tau_k) + (s * nu)(t) + w(t).
// nu is a zero-mean complex Gaussian uncorrelated-scattering process with the
// given PDP; w is complex AWGN with per-sample variance N0/dtau, split evenly
// across the two quadratures. Draw order: diffuse process first, then noise.
SignalFrame synthesize(const std::vector<Mpc>& mpcs, const DiffuseModel& dm,
                       double noise_psd, const Pulse& pulse, double duration,
                       std::uint64_t rng_seed);
SignalFrame synthesize(const std::vector<Mpc>& mpcs, const DiffuseModel& dm,
                       double noise_psd, const Pulse& pulse, double duration,
                       std::mt19937_64& rng);

// Measured channel transfer function H[k] at start_freq + k*freq_spacing.
struct FrequencyResponse {
  std::vector<cdouble> values;
  double freq_spacing = 0.0;  // Hz
  double start_freq = 0.0;    // Hz
  int position_index = 0;
};

// Extracts the pulse band from H and returns the equivalent baseband signal
// r(t) = df * sum_k H[k] S(f_k - fc) exp(j 2 pi (f_k - fc) t), evaluated on
// N_FFT = ceil(1/(df*dtau)) samples spanning one period 1/df. The output
// sample interval is 1/(N_FFT*df), i.e. the pulse dtau rounded to the grid.
SignalFrame band_extract(const FrequencyResponse& fr, const Pulse& pulse);

// |alpha| = g0 * (1/d) * eta^order with uniformly random phase.
struct AmplitudeModel {
  double gain_g0 = 1.0;
  double reflection_eta = 0.6;
};

std::vector<Mpc> build_mpc_list(const VisibleSet& vs, const AmplitudeModel& model,
                                std::mt19937_64& rng);

// Optional hook applied to each frame's MPC list before synthesis.
using MpcTransform = std::function<void(std::vector<Mpc>&, int position_index, int bs_id)>;

struct ScenarioSignalsDebug {
  std::vector<std::vector<Mpc>> mpc_lists;  // position-major: pos*nbs + bs
  std::vector<double> los_delays;           // direct-path delay per frame
  double duration = 0.0;
};

// Generates one frame per (trajectory position, base station). Visibility is
// evaluated against the plan as given (including its obstructions). The
// diffuse onset is interpreted as excess delay relative to the direct path.
// Frames are generated in parallel with one RNG substream per (position, bs).
std::vector<SignalFrame> scenario_signals(
    const FloorPlan& plan, const std::vector<Point2D>& trajectory,
    const std::vector<Point2D>& bss, const Pulse& pulse, const DiffuseModel& dm,
    double noise_psd, const AmplitudeModel& amplitude, std::uint64_t rng_seed,
    int max_va_order = 2, const MpcTransform* transform = nullptr,
    ScenarioSignalsDebug* debug = nullptr);

// Tabular signal-frame export / frequency-response ingestion.
void write_signal_frame(const SignalFrame& frame, const std::string& path);
FrequencyResponse read_frequency_response(const std::string& path);

}  // namespace mint
