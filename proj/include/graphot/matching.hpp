#pragma once

// Bottleneck (min-max distance) assignment between two point sets on the
// torus, where every right point receives exactly `capacity` left points.

#include "graphot/torus.hpp"

#include <vector>

namespace graphot {

struct BottleneckAssignment {
  std::vector<int> owner;  // owner[i] = right point matched to left point i
  double delta = 0.0;      // max matched distance
  int feasibility_tests = 0;
};

/// Requires left.size() == capacity * right.size(). The threshold is found by
/// search over the sorted candidate distances, each tested by a max-flow
/// b-matching; ties are broken by the lexicographic order of (left, right).
BottleneckAssignment bottleneck_assignment(const std::vector<TorusPoint>& left,
                                           const std::vector<TorusPoint>& right, int capacity);

}  // namespace graphot
