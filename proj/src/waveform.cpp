#include "mint/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mint/common.hpp"

namespace mint {

namespace {

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}

// Raised-cosine shape before energy normalization, s(0) = 1.
double raw_rc(double t, double tp, double beta) {
  double u = t / tp;
  if (beta <= 0.0) return sinc(u);
  double den = 1.0 - (2.0 * beta * u) * (2.0 * beta * u);
  if (std::abs(den) < 1e-7) {
    // cos/den limit at |t| = Tp/(2 beta)
    return sinc(u) * kPi / 4.0;
  }
  return sinc(u) * std::cos(kPi * beta * u) / den;
}

}  // namespace

double Pulse::eval(double t) const {
  if (std::abs(t) > 8.0 * duration_tp) return 0.0;
  return norm_scale * raw_rc(t, duration_tp, rolloff);
}

double Pulse::spectrum(double nu) const {
  double af = std::abs(nu);
  double f1 = (1.0 - rolloff) / (2.0 * duration_tp);
  double f2 = (1.0 + rolloff) / (2.0 * duration_tp);
  double raw;
  if (af <= f1) {
    raw = duration_tp;
  } else if (af <= f2 && rolloff > 0.0) {
    raw = 0.5 * duration_tp *
          (1.0 + std::cos(kPi * duration_tp / rolloff * (af - f1)));
  } else {
    raw = 0.0;
  }
  return norm_scale * raw;
}

double Pulse::discrete_energy() const {
  double e = 0.0;
  for (double s : samples) e += s * s;
  return e * dtau;
}

Pulse make_pulse(double duration_tp, double rolloff, double center_freq,
                 double band_edge_f0, double dtau) {
  if (duration_tp <= 0.0) throw std::invalid_argument("make_pulse: Tp <= 0");
  if (rolloff < 0.0 || rolloff > 1.0)
    throw std::invalid_argument("make_pulse: rolloff outside [0, 1]");
  if (dtau <= 0.0 || dtau > duration_tp / 8.0)
    throw std::invalid_argument("make_pulse: dtau must be <= Tp/8");

  Pulse p;
  p.duration_tp = duration_tp;
  p.rolloff = rolloff;
  p.center_freq = center_freq;
  p.band_edge_f0 = band_edge_f0;
  p.dtau = dtau;
  p.half_support = static_cast<int>(std::llround(8.0 * duration_tp / dtau));

  p.samples.resize(2 * p.half_support + 1);
  double energy = 0.0;
  for (int j = -p.half_support; j <= p.half_support; ++j) {
    double v = raw_rc(j * dtau, duration_tp, rolloff);
    p.samples[j + p.half_support] = v;
    energy += v * v;
  }
  energy *= dtau;
  p.norm_scale = 1.0 / std::sqrt(energy);
  for (double& v : p.samples) v *= p.norm_scale;
  return p;
}

double DiffuseModel::pdp(double tau) const {
  if (total_power <= 0.0 || tau < onset_delay) return 0.0;
  return total_power / decay_const * std::exp(-(tau - onset_delay) / decay_const);
}

SignalFrame synthesize(const std::vector<Mpc>& mpcs, const DiffuseModel& dm,
                       double noise_psd, const Pulse& pulse, double duration,
                       std::uint64_t rng_seed) {
  std::mt19937_64 rng(rng_seed);
  return synthesize(mpcs, dm, noise_psd, pulse, duration, rng);
}

SignalFrame synthesize(const std::vector<Mpc>& mpcs, const DiffuseModel& dm,
                       double noise_psd, const Pulse& pulse, double duration,
                       std::mt19937_64& rng) {
  if (noise_psd < 0.0) throw std::invalid_argument("synthesize: negative N0");
  const double dtau = pulse.dtau;
  const auto n_samples = static_cast<std::size_t>(std::llround(duration / dtau));
  if (n_samples == 0) throw std::invalid_argument("synthesize: empty frame");
  for (const auto& m : mpcs)
    if (m.delay < 0.0 || m.delay >= duration)
      throw std::invalid_argument("synthesize: MPC delay outside frame");

  SignalFrame frame;
  frame.samples.assign(n_samples, cdouble{0.0, 0.0});
  frame.dtau = dtau;
  frame.noise_psd = noise_psd;

  const double support = 8.0 * pulse.duration_tp;
  for (const auto& m : mpcs) {
    auto lo = static_cast<std::int64_t>(std::ceil((m.delay - support) / dtau));
    auto hi = static_cast<std::int64_t>(std::floor((m.delay + support) / dtau));
    lo = std::max<std::int64_t>(lo, 0);
    hi = std::min<std::int64_t>(hi, static_cast<std::int64_t>(n_samples) - 1);
    for (std::int64_t n = lo; n <= hi; ++n)
      frame.samples[n] += m.amplitude * pulse.eval(n * dtau - m.delay);
  }

  if (dm.total_power > 0.0) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto m0 = static_cast<std::int64_t>(std::ceil(dm.onset_delay / dtau));
    m0 = std::max<std::int64_t>(m0, 0);
    const int hs = pulse.half_support;
    const auto n_total = static_cast<std::int64_t>(n_samples);
    for (std::int64_t m = m0; m < n_total; ++m) {
      double var = dm.pdp(m * dtau) / dtau;
      if (var <= 0.0) continue;
      double sigma_q = std::sqrt(0.5 * var);
      cdouble nu{sigma_q * gauss(rng), sigma_q * gauss(rng)};
      cdouble scaled = nu * dtau;
      std::int64_t lo = std::max<std::int64_t>(m - hs, 0);
      std::int64_t hi = std::min<std::int64_t>(m + hs, n_total - 1);
      for (std::int64_t n = lo; n <= hi; ++n)
        frame.samples[n] += scaled * pulse.samples[n - m + hs];
    }
  }

  if (noise_psd > 0.0) {
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5 * noise_psd / dtau));
    for (auto& s : frame.samples) s += cdouble{gauss(rng), gauss(rng)};
  }
  return frame;
}

SignalFrame band_extract(const FrequencyResponse& fr, const Pulse& pulse) {
  if (fr.values.empty() || fr.freq_spacing <= 0.0)
    throw std::invalid_argument("band_extract: empty or invalid frequency response");
  const double df = fr.freq_spacing;
  const double band_half = (1.0 + pulse.rolloff) / (2.0 * pulse.duration_tp);
  const double f_lo = pulse.center_freq - band_half;
  const double f_hi = pulse.center_freq + band_half;
  const double meas_lo = fr.start_freq;
  const double meas_hi = fr.start_freq + (fr.values.size() - 1) * df;
  if (f_lo < meas_lo - 1e-3 || f_hi > meas_hi + 1e-3)
    throw std::invalid_argument("band_extract: pulse band outside measured band");

  const auto n_fft =
      static_cast<std::size_t>(std::ceil(1.0 / (df * pulse.dtau)));
  const double dtau_out = 1.0 / (static_cast<double>(n_fft) * df);

  SignalFrame frame;
  frame.samples.assign(n_fft, cdouble{0.0, 0.0});
  frame.dtau = dtau_out;
  frame.position_index = fr.position_index;

  for (std::size_t k = 0; k < fr.values.size(); ++k) {
    double nu = fr.start_freq + static_cast<double>(k) * df - pulse.center_freq;
    double sk = pulse.spectrum(nu);
    if (sk == 0.0) continue;
    cdouble coeff = fr.values[k] * sk * df;
    double phase_step = 2.0 * kPi * nu * dtau_out;
    cdouble rotor{std::cos(phase_step), std::sin(phase_step)};
    cdouble phase{1.0, 0.0};
    for (std::size_t n = 0; n < n_fft; ++n) {
      frame.samples[n] += coeff * phase;
      phase *= rotor;
    }
  }
  return frame;
}

std::vector<Mpc> build_mpc_list(const VisibleSet& vs, const AmplitudeModel& model,
                                std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 2.0 * kPi);
  std::vector<Mpc> mpcs;
  mpcs.reserve(vs.vas.size());
  for (std::size_t j = 0; j < vs.vas.size(); ++j) {
    double d = std::max(vs.distances[j], 0.1);  // clamp the 1/d gain near contact
    double mag = model.gain_g0 / d;
    if (vs.vas[j].order > 0)
      mag *= std::pow(model.reflection_eta, vs.vas[j].order);
    double phi = uni(rng);  // drawn for every visible anchor; keeps streams stable
    if (mag <= 0.0) continue;
    Mpc m;
    m.delay = vs.distances[j] / kSpeedOfLight;
    m.amplitude = std::polar(mag, phi);
    m.va_id = vs.vas[j].id;
    mpcs.push_back(m);
  }
  return mpcs;
}

std::vector<SignalFrame> scenario_signals(
    const FloorPlan& plan, const std::vector<Point2D>& trajectory,
    const std::vector<Point2D>& bss, const Pulse& pulse, const DiffuseModel& dm,
    double noise_psd, const AmplitudeModel& amplitude, std::uint64_t rng_seed,
    int max_va_order, const MpcTransform* transform, ScenarioSignalsDebug* debug) {
  if (trajectory.empty())
    throw std::invalid_argument("scenario_signals: empty trajectory");
  if (bss.empty()) throw std::invalid_argument("scenario_signals: no base stations");

  const std::size_t n_pos = trajectory.size();
  const std::size_t n_bs = bss.size();

  std::vector<std::vector<VirtualAnchor>> vas(n_bs);
  for (std::size_t i = 0; i < n_bs; ++i)
    vas[i] = generate_vas(plan, bss[i], static_cast<int>(i), max_va_order);

  std::vector<VisibleSet> visible(n_pos * n_bs);
  parallel_for(n_pos * n_bs, [&](std::size_t idx) {
    std::size_t pos = idx / n_bs, bs = idx % n_bs;
    visible[idx] = expected_visible_set(trajectory[pos], static_cast<int>(pos),
                                        vas[bs], plan);
  });

  double max_dist = 0.0;
  for (const auto& vs : visible)
    for (double d : vs.distances) max_dist = std::max(max_dist, d);
  const double duration =
      max_dist / kSpeedOfLight + 12.0 * pulse.duration_tp + 2e-9;

  std::vector<SignalFrame> frames(n_pos * n_bs);
  std::vector<std::vector<Mpc>> mpc_lists(n_pos * n_bs);
  std::vector<double> los_delays(n_pos * n_bs);
  parallel_for(n_pos * n_bs, [&](std::size_t idx) {
    std::size_t pos = idx / n_bs, bs = idx % n_bs;
    std::mt19937_64 rng(substream_seed(rng_seed, static_cast<std::int64_t>(pos),
                                       static_cast<std::int64_t>(bs)));
    auto mpcs = build_mpc_list(visible[idx], amplitude, rng);
    if (transform && *transform)
      (*transform)(mpcs, static_cast<int>(pos), static_cast<int>(bs));

    double los = distance(trajectory[pos], bss[bs]) / kSpeedOfLight;
    DiffuseModel link_dm = dm;
    link_dm.onset_delay = dm.onset_delay + los;

    auto frame = synthesize(mpcs, link_dm, noise_psd, pulse, duration, rng);
    frame.position_index = static_cast<int>(pos);
    frame.bs_id = static_cast<int>(bs);
    frames[idx] = std::move(frame);
    mpc_lists[idx] = std::move(mpcs);
    los_delays[idx] = los;
  });

  if (debug) {
    debug->mpc_lists = std::move(mpc_lists);
    debug->los_delays = std::move(los_delays);
    debug->duration = duration;
  }
  return frames;
}

void write_signal_frame(const SignalFrame& frame, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write signal frame: " + path);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "# mint-signal-frame v1 dtau_s %.9g position_index %d bs_id %d "
                "noise_psd %.9g\n",
                frame.dtau, frame.position_index, frame.bs_id, frame.noise_psd);
  out << buf << "# n re im\n";
  for (std::size_t n = 0; n < frame.samples.size(); ++n) {
    std::snprintf(buf, sizeof(buf), "%zu %.9g %.9g\n", n, frame.samples[n].real(),
                  frame.samples[n].imag());
    out << buf;
  }
}

FrequencyResponse read_frequency_response(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open frequency response file: " + path);

  FrequencyResponse fr;
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.rfind("# mint-frequency-response", 0) == 0) {
      std::istringstream ss(line);
      std::string tok;
      while (ss >> tok) {
        if (tok == "delta_f_hz") ss >> fr.freq_spacing;
        else if (tok == "start_freq_hz") ss >> fr.start_freq;
        else if (tok == "position_index") ss >> fr.position_index;
      }
      header_seen = true;
      continue;
    }
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::size_t k;
    double re, im;
    if (!(ss >> k >> re >> im)) continue;
    if (k != fr.values.size())
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": non-contiguous bin index");
    fr.values.emplace_back(re, im);
  }
  if (!header_seen || fr.freq_spacing <= 0.0)
    throw std::runtime_error(path + ": missing or invalid header");
  return fr;
}

}  // namespace mint
