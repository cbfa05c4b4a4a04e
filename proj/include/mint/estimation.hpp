#pragma once

#include <optional>
#include <vector>

#include "mint/waveform.hpp"

namespace mint {

// Greedily extracted multipath components; delays ascending, any two delays
// at least one pulse duration apart.
struct MpcEstimateSet {
  std::vector<double> delays;       // s
  std::vector<cdouble> amplitudes;
  int position_index = 0;
  int bs_id = 0;
};

enum class RangingMethod { kMl, kJbsf };

struct RangeEstimate {
  double distance = 0.0;  // m
  RangingMethod method = RangingMethod::kMl;
  int position_index = 0;
  int bs_id = 0;
};

// A_gamma = gamma * (max|r| - <|w|>) + <|w|>, with <|w|> the mean magnitude
// over the pre-LOS window [0, prelos_window). Requires 0 < gamma < 1 and a
// non-empty window inside the frame.
double noise_threshold(const SignalFrame& frame, double gamma,
                       double prelos_window);

// Greedy matching-pursuit extraction: repeatedly take the delay maximizing
// |<r, s(.-tau)>| at least Tp away from all accepted delays (grid search with
// parabolic peak interpolation), project out the pulse, and stop after k_max
// paths or when the candidate amplitude falls below threshold (in |r| units).
MpcEstimateSet extract_mpcs(const SignalFrame& frame, const Pulse& pulse,
                            int k_max, double threshold);

// c * min(delays); nullopt signals a ranging outage (empty estimate set).
std::optional<RangeEstimate> ml_range(const MpcEstimateSet& est);

// Jump-back search-forward: earliest sample within [tau_peak - searchback,
// tau_peak] whose magnitude reaches the relative threshold xi (window start
// clamped to 0).
RangeEstimate jbsf_range(const SignalFrame& frame, double xi,
                         double searchback_window, double prelos_window);

// K-factor of the first-arriving extracted path in dB: |a_LOS|^2 over the
// energy of r with that path removed. Clamped to [-60, +60] dB; -60 when no
// path is detectable.
double estimate_klos_db(const SignalFrame& frame, const Pulse& pulse,
                        double prelos_window, double gamma = 0.1,
                        int k_max = 20);

}  // namespace mint
