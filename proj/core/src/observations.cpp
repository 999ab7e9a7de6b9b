#include "tcomplete/observations.hpp"

#include <stdexcept>

#include "tcomplete/rng.hpp"

namespace tcomplete {

ObservationSet::ObservationSet(const Dims3& dims, std::vector<Sample> samples)
    : dims_(dims), samples_(std::move(samples)) {
  if (samples_.empty()) throw std::invalid_argument("ObservationSet: need at least one sample");
  for (const Index d : dims_) {
    if (d < 1) throw std::invalid_argument("ObservationSet: dimensions must be positive");
  }
  for (const Sample& s : samples_) {
    for (std::size_t k = 0; k < 3; ++k) {
      if (s.index[k] < 0 || s.index[k] >= dims_[k]) {
        throw std::invalid_argument("ObservationSet: sample index out of range");
      }
    }
  }
}

ObservationSet sample_uniform(const Tensor3& t, Index n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_uniform: n must be >= 1");
  const auto [d1, d2, d3] = t.dims();
  const auto total = static_cast<std::uint64_t>(volume(t.dims()));
  Rng rng(seed);
  std::vector<Sample> samples;
  samples.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const auto flat = static_cast<Index>(rng.bounded(total));
    const Index i3 = flat % d3;
    const Index i2 = (flat / d3) % d2;
    const Index i1 = flat / (d2 * d3);
    samples.push_back({{i1, i2, i3}, t(i1, i2, i3)});
  }
  return ObservationSet(t.dims(), std::move(samples));
}

std::vector<double> project_omega(const Tensor3& a, const ObservationSet& obs) {
  if (a.dims() != obs.dims()) throw std::invalid_argument("project_omega: dimension mismatch");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(obs.size()));
  for (const Sample& s : obs.samples()) out.push_back(a(s.index[0], s.index[1], s.index[2]));
  return out;
}

std::vector<double> evaluate_tucker_at(const ObservationSet& obs, const Eigen::MatrixXd& x,
                                       const Eigen::MatrixXd& y, const Eigen::MatrixXd& z,
                                       const CoreTensor& core) {
  const auto [r1, r2, r3] = core.dims();
  const Dims3& dims = obs.dims();
  if (x.rows() != dims[0] || y.rows() != dims[1] || z.rows() != dims[2] || x.cols() != r1 ||
      y.cols() != r2 || z.cols() != r3) {
    throw std::invalid_argument("evaluate_tucker_at: factor shapes inconsistent");
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(obs.size()));
  const double* c = core.values().data();
  for (const Sample& s : obs.samples()) {
    double value = 0.0;
    for (Index j1 = 0; j1 < r1; ++j1) {
      double over_j2 = 0.0;
      for (Index j2 = 0; j2 < r2; ++j2) {
        const double* row = c + (j1 * r2 + j2) * r3;
        double over_j3 = 0.0;
        for (Index j3 = 0; j3 < r3; ++j3) over_j3 += row[j3] * z(s.index[2], j3);
        over_j2 += over_j3 * y(s.index[1], j2);
      }
      value += over_j2 * x(s.index[0], j1);
    }
    out.push_back(value);
  }
  return out;
}

}  // namespace tcomplete
