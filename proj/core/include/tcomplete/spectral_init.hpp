#pragma once

#include <Eigen/Dense>

#include "tcomplete/grassmann.hpp"
#include "tcomplete/observations.hpp"

namespace tcomplete {

/// U-statistic estimate of M M^T for M the mode-k unfolding of the sampled tensor.
struct SecondMomentEstimate {
  int mode = 1;
  Eigen::MatrixXd matrix;  // d_k x d_k, symmetric
  Index n = 0;
};

/// N = 1/(n(n-1)) sum_{i<j} (X_i X_j^T + X_j X_i^T), where X_i is the
/// mode-k unfolding of the single-entry tensor (d1 d2 d3) T(omega_i) e_{omega_i}.
///
/// Evaluated as (S S^T - sum_i X_i X_i^T) / (n(n-1)) with S = sum_i X_i kept
/// sparse: samples are grouped by unfolding column and only rows sharing a
/// column interact. Throws std::invalid_argument when n < 2.
SecondMomentEstimate second_moment_estimate(const ObservationSet& obs, int mode);

/// Eigenvectors of the symmetrized estimate for its r algebraically largest
/// eigenvalues, ordered by decreasing eigenvalue.
Frame top_eigenspace(const SecondMomentEstimate& estimate, Index r);
Frame top_eigenspace(const Eigen::MatrixXd& symmetric, Index r);

/// Largest eigenvalue of the symmetrized estimate.
double top_eigenvalue(const SecondMomentEstimate& estimate);

/// Per mode: second_moment_estimate -> top_eigenspace -> trim(., mu0).
TripleFrame initialize(const ObservationSet& obs, const Dims3& ranks, double mu0);

/// The untrimmed spectral frames (U-hat, V-hat, W-hat).
TripleFrame spectral_frames(const ObservationSet& obs, const Dims3& ranks);

}  // namespace tcomplete
