#pragma once

#include <string>
#include <vector>

namespace cboc {

/// Outcome of an NLP solve. Feasibility is always recomputed by the caller
/// from the transcription itself, never taken from a backend.
struct SolveStats {
  int outer_iters = 0;
  int inner_iters = 0;
  double final_feas = 0.0;  // max scaled constraint violation at the result
  double final_kkt = 0.0;   // projected-gradient infinity norm at exit
  double wall_time = 0.0;   // seconds
  bool converged = false;
  std::vector<std::string> warnings;
};

}  // namespace cboc
