#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <vector>

#include "mint/waveform.hpp"

namespace mint {

struct MpcSinr {
  int va_id = -1;
  double sinr = 0.0;   // linear
  double angle = 0.0;  // rad, anchor -> position
};

// Equivalent Fisher information for the 2D position.
struct Efim {
  Eigen::Matrix2d info = Eigen::Matrix2d::Zero();
  double effective_bandwidth = 0.0;  // Hz
};

// SINR = |alpha|^2 / (N0 + Tp * S_nu(tau)). Throws when the denominator is 0.
double sinr(cdouble amplitude, double noise_psd, double tp, double s_nu_at_tau);

// Rank-1 projection onto (cos phi, sin phi).
Eigen::Matrix2d ranging_direction_matrix(double phi);

// J = (8 pi^2 beta^2 / c^2) sum_k SINR_k J_r(phi_k). Valid when the paths do
// not overlap in delay; see separable().
Efim efim(const std::vector<MpcSinr>& mpcs, double beta);

struct CrlbResult {
  double total_variance = 0.0;  // trace(J^-1), m^2
  double var_x = 0.0;
  double var_y = 0.0;
};

// nullopt when J is singular or too ill-conditioned (cond > 1e12): the
// position is not identifiable and the bound is unbounded.
std::optional<CrlbResult> position_crlb(const Efim& j);

// Instantaneous position error over RMS ranging error; nullopt (undefined)
// when the ranging error is zero.
std::optional<double> hdop(double position_error, double rms_ranging_error);

// RMS bandwidth about the spectral centroid, beta^2 = int (f-f0)^2 |S|^2 /
// int |S|^2, computed numerically from the discretized pulse.
double effective_bandwidth(const Pulse& pulse);

// Same second moment for an arbitrary sampled power spectrum (test oracle
// hook and ingested-spectrum support).
double rms_bandwidth(const std::vector<double>& psd, double start_freq,
                     double freq_step);

// Single-path delay-estimation bound: var(tau) >= 1/(8 pi^2 beta^2 SINR).
double delay_variance_bound(double sinr_linear, double beta);

// True when all pairwise delay gaps are at least one pulse duration; the
// EFIM decomposition assumes this.
bool separable(const std::vector<double>& delays, double tp);

}  // namespace mint
