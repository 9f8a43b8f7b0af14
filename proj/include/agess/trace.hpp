#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "agess/kernels.hpp"

namespace agess {

// Working parameters committed at an adaptation time. Only the mean and the
// scale diagonal are kept; full scale snapshots at P in the hundreds would
// dominate trace memory and no consumer needs them.
struct CommitRecord {
  std::int64_t iteration = 0;
  Eigen::VectorXd mean;
  Eigen::VectorXd scale_diag;
};

struct PhaseTimings {
  double burn_seconds = 0.0;
  double sampling_seconds = 0.0;
};

// Chain states in original (untransformed) coordinates, one row per
// iteration, plus per-iteration step statistics. Row 0 is the initial state;
// its loop count is zero and its kernel tag is meaningless.
struct Trace {
  Eigen::MatrixXd states;
  std::vector<int> loop_counts;
  std::vector<KernelTag> kernel_tags;
  std::vector<CommitRecord> commits;
  PhaseTimings timings;
  std::int64_t burn_in = 0;
  std::uint64_t density_evals = 0;

  Eigen::Index iterations() const { return states.rows(); }
  Eigen::Index dim() const { return states.cols(); }

  // States after burn-in, the window diagnostics usually run on.
  Eigen::MatrixXd sampling_states() const {
    const Eigen::Index n = states.rows() - burn_in;
    return states.bottomRows(n > 0 ? n : states.rows());
  }

  double mean_loop_count() const {
    if (loop_counts.size() <= 1) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 1; i < loop_counts.size(); ++i) sum += loop_counts[i];
    return sum / static_cast<double>(loop_counts.size() - 1);
  }
};

}  // namespace agess
