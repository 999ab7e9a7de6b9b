#pragma once

#include <cstdint>
#include <vector>

#include "tcomplete/completion.hpp"
#include "tcomplete/grassmann.hpp"
#include "tcomplete/tensor.hpp"

namespace tcomplete {

/// Relative Frobenius error at or below which a trial counts as a recovery.
inline constexpr double kSuccessThreshold = 1e-7;

/// A synthetic orthogonally decomposable target d * sum_k u_k (x) v_k (x) w_k.
struct GroundTruth {
  Tensor3 tensor;
  TripleFrame factors;
  CoreTensor core;  // diagonal, every diagonal entry equal to d

  /// max of the three factor coherences.
  double max_coherence() const;
};

/// Factors are the eigenvectors for the r largest eigenvalues of three
/// independent symmetrized standard Gaussian d x d matrices (G + G^T) / 2.
/// Throws std::invalid_argument unless 1 <= r <= d.
GroundTruth generate_odeco(Index d, Index r, std::uint64_t seed);

/// Settings shared by every trial of an experiment.
struct TrialConfig {
  GoGConfig solver;
  /// When true, mu0 is set per trial to the measured max coherence of the
  /// generated truth (never below 1); otherwise solver.mu0 is used.
  bool mu0_from_truth = true;
};

struct TrialRecord {
  Index d = 0;
  Index r = 0;
  double alpha = 0.0;
  Index n = 0;
  Index trial = 0;
  std::uint64_t seed = 0;
  bool success = false;
  double rel_error = 0.0;
  int iterations = 0;
  double dp_init = 0.0;
  double runtime_ms = 0.0;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

/// round-half-up(alpha * sqrt(r) * d^{3/2}), at least 2.
Index sample_size(Index d, Index r, double alpha);

/// Generate truth, sample n = sample_size(d, r, alpha) entries, initialize
/// spectrally, run GoG and score the full-tensor relative error.
TrialRecord run_trial(Index d, Index r, double alpha, std::uint64_t seed,
                      const TrialConfig& config);

/// As run_trial, but the spectral frames are perturbed by sigma times an
/// i.i.d. standard normal matrix before re-orthonormalization and trimming.
/// sigma = 0 reproduces run_trial exactly.
TrialRecord perturbed_init_trial(Index d, Index r, double alpha, double sigma,
                                 std::uint64_t seed, const TrialConfig& config);

/// Seed of trial `trial` in cell (r_index, alpha_index):
/// derive_seed({master, d, r, alpha_index, trial}).
std::uint64_t trial_seed(std::uint64_t master, Index d, Index r, std::size_t alpha_index,
                         Index trial);

struct CellSummary {
  Index r = 0;
  double alpha = 0.0;
  Index trials = 0;
  double success_rate = 0.0;
  double mean_rel_error = 0.0;
  double mean_iterations = 0.0;
};

struct SweepResult {
  std::vector<CellSummary> cells;     // r-major, then alpha
  std::vector<TrialRecord> records;   // ordered by (cell, trial)
};

struct SweepOptions {
  Index trials_per_cell = 1;
  std::uint64_t seed = 0;
  /// Worker threads; 0 means std::thread::hardware_concurrency().
  unsigned threads = 1;
};

/// Runs every (r, alpha, trial) combination. Output order and content do not
/// depend on the thread count.
SweepResult sweep(Index d, const std::vector<Index>& ranks, const std::vector<double>& alphas,
                  const SweepOptions& options, const TrialConfig& config);

}  // namespace tcomplete
