#pragma once

#include <vector>

namespace oracle {

struct Step {
  int neuron = -1;
  double time = 0.0;
  std::vector<int> unfitted_before;  // S_U before the jump, sorted
  std::vector<int> fitted_now;       // data fitted at the jump, sorted
};

struct Run {
  std::vector<Step> steps;
  std::vector<int> unfitted_after;  // S_U after the last jump
  double norm = 0.0;                // sum over neurons of a_j^2
};

// Straight transcription of the recursion: D_j is kept as a full n-vector,
// every unfitted neuron's exponent is advanced to the earliest hitting time
// of zero, and ties go to the lowest neuron index. mask[i][j] in {0, 1}.
Run run(const std::vector<std::vector<int>>& mask, const std::vector<double>& labels);

}  // namespace oracle
