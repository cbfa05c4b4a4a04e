#pragma once

#include <utility>
#include <vector>

#include "mint/geometry.hpp"

namespace mint {

// One data-association instance for a single base station: measured distances
// Z (size K_hat) against expected anchor distances D (size K).
struct AssociationProblem {
  std::vector<double> measured;                  // m
  std::vector<std::pair<int, double>> expected;  // (va_id, distance m)
  double cutoff = 0.0;                           // d_c, m
};

struct Correspondences {
  std::vector<std::pair<int, int>> assignments;  // (measurement_index, va_id)
  std::vector<int> clutter;                      // unassigned measurement indices
};

// min(|d - z|, dc)
double cutoff_metric(double d, double z, double dc);

// Optimal sub-pattern assignment: minimum total cutoff metric over one-to-one
// matchings of the expected set into the measured set (padded with dummy
// clutter when K_hat < K). Pairs whose metric reaches the cutoff are rejected
// to clutter.
Correspondences assign(const AssociationProblem& problem);

// Computes the expected distances at `position` from the visible anchors
// (obstructions are stripped from the plan: the tracker does not know them)
// and assigns the measured distances. Pass the EKF-predicted position for DA
// or the true position for the genie-aided variant.
Correspondences associate_at(const Point2D& position,
                             const std::vector<VirtualAnchor>& vas,
                             const FloorPlan& plan,
                             const std::vector<double>& measured, double cutoff);

}  // namespace mint
