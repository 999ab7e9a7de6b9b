#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "tcomplete/tensor.hpp"

namespace tcomplete {

/// One observed entry. Indices are zero-based.
struct Sample {
  std::array<Index, 3> index{0, 0, 0};
  double value = 0.0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

/// Entries drawn uniformly with replacement from a d1 x d2 x d3 tensor.
///
/// Duplicate indices are kept: every sum over observations in this library
/// runs over samples, so an entry drawn m times is counted m times.
class ObservationSet {
 public:
  /// Throws std::invalid_argument if samples is empty or an index is out of range.
  ObservationSet(const Dims3& dims, std::vector<Sample> samples);

  const Dims3& dims() const { return dims_; }
  Index size() const { return static_cast<Index>(samples_.size()); }
  std::span<const Sample> samples() const { return samples_; }
  const Sample& operator[](Index i) const { return samples_[static_cast<std::size_t>(i)]; }

  friend bool operator==(const ObservationSet&, const ObservationSet&) = default;

 private:
  Dims3 dims_;
  std::vector<Sample> samples_;
};

/// n i.i.d. uniform draws from [d1] x [d2] x [d3] with values read from t.
/// Each draw takes one 64-bit word mapped onto the flat index range.
ObservationSet sample_uniform(const Tensor3& t, Index n, std::uint64_t seed);

/// out[i] = a(omega_i).
std::vector<double> project_omega(const Tensor3& a, const ObservationSet& obs);

/// out[i] = ((x, y, z) . core)(omega_i), evaluated per sample without forming
/// the dense tensor.
std::vector<double> evaluate_tucker_at(const ObservationSet& obs, const Eigen::MatrixXd& x,
                                       const Eigen::MatrixXd& y, const Eigen::MatrixXd& z,
                                       const CoreTensor& core);

}  // namespace tcomplete
