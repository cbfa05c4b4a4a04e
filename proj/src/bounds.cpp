#include "mint/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mint/common.hpp"

namespace mint {

double sinr(cdouble amplitude, double noise_psd, double tp, double s_nu_at_tau) {
  double denom = noise_psd + tp * s_nu_at_tau;
  if (denom <= 0.0)
    throw std::domain_error("sinr: zero noise and diffuse power (infinite SINR)");
  return std::norm(amplitude) / denom;
}

Eigen::Matrix2d ranging_direction_matrix(double phi) {
  double c = std::cos(phi), s = std::sin(phi);
  Eigen::Matrix2d j;
  j << c * c, c * s, c * s, s * s;
  return j;
}

Efim efim(const std::vector<MpcSinr>& mpcs, double beta) {
  Efim out;
  out.effective_bandwidth = beta;
  double scale = 8.0 * kPi * kPi * beta * beta / (kSpeedOfLight * kSpeedOfLight);
  for (const auto& m : mpcs) out.info += scale * m.sinr * ranging_direction_matrix(m.angle);
  out.info = 0.5 * (out.info + out.info.transpose().eval());
  return out;
}

std::optional<CrlbResult> position_crlb(const Efim& j) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(j.info);
  double lmin = es.eigenvalues()(0);
  double lmax = es.eigenvalues()(1);
  if (lmin <= 0.0 || lmax / lmin > 1e12) return std::nullopt;

  Eigen::Matrix2d inv = j.info.inverse();
  CrlbResult r;
  r.var_x = inv(0, 0);
  r.var_y = inv(1, 1);
  r.total_variance = inv.trace();
  return r;
}

std::optional<double> hdop(double position_error, double rms_ranging_error) {
  if (rms_ranging_error <= 0.0) return std::nullopt;
  return position_error / rms_ranging_error;
}

double rms_bandwidth(const std::vector<double>& psd, double start_freq,
                     double freq_step) {
  double total = 0.0, first = 0.0;
  for (std::size_t k = 0; k < psd.size(); ++k) {
    double f = start_freq + static_cast<double>(k) * freq_step;
    total += psd[k];
    first += f * psd[k];
  }
  if (total <= 0.0) throw std::invalid_argument("rms_bandwidth: empty spectrum");
  double centroid = first / total;
  double second = 0.0;
  for (std::size_t k = 0; k < psd.size(); ++k) {
    double f = start_freq + static_cast<double>(k) * freq_step - centroid;
    second += f * f * psd[k];
  }
  return std::sqrt(second / total);
}

double effective_bandwidth(const Pulse& pulse) {
  // Direct DFT of the (short) discretized pulse over the occupied band.
  const double f_max = 1.5 * (1.0 + pulse.rolloff) / pulse.duration_tp;
  const int m = 2048;
  const double df = 2.0 * f_max / m;

  std::vector<double> psd(m);
  for (int k = 0; k < m; ++k) {
    double f = -f_max + k * df;
    cdouble acc{0.0, 0.0};
    for (int j = -pulse.half_support; j <= pulse.half_support; ++j) {
      double t = j * pulse.dtau;
      double s = pulse.samples[j + pulse.half_support];
      acc += s * std::polar(1.0, -2.0 * kPi * f * t);
    }
    psd[k] = std::norm(acc * pulse.dtau);
  }
  return rms_bandwidth(psd, -f_max, df);
}

double delay_variance_bound(double sinr_linear, double beta) {
  if (sinr_linear <= 0.0 || beta <= 0.0)
    throw std::invalid_argument("delay_variance_bound: non-positive SINR or beta");
  return 1.0 / (8.0 * kPi * kPi * beta * beta * sinr_linear);
}

bool separable(const std::vector<double>& delays, double tp) {
  std::vector<double> sorted = delays;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i] - sorted[i - 1] < tp) return false;
  return true;
}

}  // namespace mint
