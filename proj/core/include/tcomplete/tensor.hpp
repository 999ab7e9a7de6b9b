#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace tcomplete {

using Index = Eigen::Index;

/// Dimensions (d1, d2, d3) of an order-3 array.
using Dims3 = std::array<Index, 3>;

inline Index volume(const Dims3& dims) { return dims[0] * dims[1] * dims[2]; }

/// Dense order-3 real array.
///
/// Storage is one contiguous buffer with the last index fastest:
/// offset(i1, i2, i3) = (i1 * d2 + i2) * d3 + i3. Indices are zero-based.
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(const Dims3& dims);
  Tensor3(const Dims3& dims, std::vector<double> values);

  const Dims3& dims() const { return dims_; }
  Index dim(int mode) const { return dims_.at(static_cast<std::size_t>(mode - 1)); }
  Index size() const { return static_cast<Index>(values_.size()); }

  Index offset(Index i1, Index i2, Index i3) const {
    return (i1 * dims_[1] + i2) * dims_[2] + i3;
  }
  double operator()(Index i1, Index i2, Index i3) const {
    return values_[static_cast<std::size_t>(offset(i1, i2, i3))];
  }
  double& operator()(Index i1, Index i2, Index i3) {
    return values_[static_cast<std::size_t>(offset(i1, i2, i3))];
  }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  Dims3 dims_{0, 0, 0};
  std::vector<double> values_;
};

/// The r1 x r2 x r3 core of a Tucker representation. Same layout as Tensor3.
using CoreTensor = Tensor3;

/// Mode-k matricization. Rows are indexed by the mode-k index; the remaining
/// two indices are laid out in ascending mode order with the later one fastest:
///   mode 1: (i1, i2 * d3 + i3)
///   mode 2: (i2, i1 * d3 + i3)
///   mode 3: (i3, i1 * d2 + i2)
struct UnfoldedMatrix {
  int mode = 1;
  Eigen::MatrixXd matrix;
};

UnfoldedMatrix unfold(const Tensor3& a, int mode);
Tensor3 refold(const UnfoldedMatrix& m, const Dims3& dims);
Tensor3 refold(const Eigen::MatrixXd& m, int mode, const Dims3& dims);

/// (X, Y, Z) . C, the trilinear product
///   out(i1,i2,i3) = sum_{j} C(j1,j2,j3) X(i1,j1) Y(i2,j2) Z(i3,j3).
Tensor3 multilinear_product(const CoreTensor& core, const Eigen::MatrixXd& x,
                            const Eigen::MatrixXd& y, const Eigen::MatrixXd& z);

/// Rank-one tensor x (outer) y (outer) z.
Tensor3 outer(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& z);

double inner(const Tensor3& a, const Tensor3& b);

enum class NormKind { Frobenius, Max };
double norm(const Tensor3& a, NormKind kind = NormKind::Frobenius);

/// a - b, entrywise.
Tensor3 difference(const Tensor3& a, const Tensor3& b);

struct SpectralOptions {
  int sweeps = 50;
  int random_restarts = 8;
  std::uint64_t seed = 0;
  // Cap on the number of canonical starts taken from entries attaining the
  // max norm. One is enough for the lower-bound guarantee.
  int max_canonical_starts = 64;
};

/// Certified lower bound on the spectral norm sup <A, u (x) v (x) w> over unit
/// u, v, w, computed by alternating (higher-order) power iteration. The starts
/// include canonical basis triples at entries attaining the max norm, so the
/// result is never below norm(a, Max).
double spectral_lower_bound(const Tensor3& a, const SpectralOptions& options = {});

/// Numerical multilinear ranks: per mode, the number of singular values of the
/// unfolding above tol * sigma_max. A zero tensor has ranks (0, 0, 0).
std::array<Index, 3> multilinear_ranks(const Tensor3& a, double tol = 1e-10);

/// A(., v, w), A(u, ., w) or A(u, v, .) depending on the free mode.
Eigen::VectorXd contract_two(const Tensor3& a, int free_mode, const Eigen::VectorXd& p,
                             const Eigen::VectorXd& q);

}  // namespace tcomplete
