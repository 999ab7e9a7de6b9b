#include "tcomplete/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "tcomplete/rng.hpp"

namespace tcomplete {

namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void check_mode(int mode) {
  if (mode < 1 || mode > 3) {
    throw std::invalid_argument("mode must be 1, 2 or 3, got " + std::to_string(mode));
  }
}

void check_dims(const Dims3& dims) {
  for (const Index d : dims) {
    if (d < 0) throw std::invalid_argument("tensor dimensions must be nonnegative");
  }
}

void check_same_dims(const Tensor3& a, const Tensor3& b, const char* what) {
  if (a.dims() != b.dims()) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

}  // namespace

Tensor3::Tensor3(const Dims3& dims) : dims_(dims) {
  check_dims(dims);
  values_.assign(static_cast<std::size_t>(volume(dims)), 0.0);
}

Tensor3::Tensor3(const Dims3& dims, std::vector<double> values)
    : dims_(dims), values_(std::move(values)) {
  check_dims(dims);
  if (static_cast<Index>(values_.size()) != volume(dims)) {
    throw std::invalid_argument("tensor value count does not match d1*d2*d3");
  }
}

UnfoldedMatrix unfold(const Tensor3& a, int mode) {
  check_mode(mode);
  const auto [d1, d2, d3] = a.dims();
  UnfoldedMatrix out{mode, Eigen::MatrixXd()};
  switch (mode) {
    case 1:
      out.matrix = Eigen::Map<const RowMajorMatrix>(a.values().data(), d1, d2 * d3);
      break;
    case 2:
      out.matrix.resize(d2, d1 * d3);
      for (Index i1 = 0; i1 < d1; ++i1)
        for (Index i2 = 0; i2 < d2; ++i2)
          for (Index i3 = 0; i3 < d3; ++i3) out.matrix(i2, i1 * d3 + i3) = a(i1, i2, i3);
      break;
    default:
      out.matrix.resize(d3, d1 * d2);
      for (Index i1 = 0; i1 < d1; ++i1)
        for (Index i2 = 0; i2 < d2; ++i2)
          for (Index i3 = 0; i3 < d3; ++i3) out.matrix(i3, i1 * d2 + i2) = a(i1, i2, i3);
      break;
  }
  return out;
}

Tensor3 refold(const Eigen::MatrixXd& m, int mode, const Dims3& dims) {
  check_mode(mode);
  check_dims(dims);
  const auto [d1, d2, d3] = dims;
  const Index rows = dims[static_cast<std::size_t>(mode - 1)];
  if (m.rows() != rows || m.rows() * m.cols() != volume(dims)) {
    throw std::invalid_argument("refold: matrix shape inconsistent with dims and mode");
  }
  Tensor3 out(dims);
  for (Index i1 = 0; i1 < d1; ++i1)
    for (Index i2 = 0; i2 < d2; ++i2)
      for (Index i3 = 0; i3 < d3; ++i3) {
        switch (mode) {
          case 1: out(i1, i2, i3) = m(i1, i2 * d3 + i3); break;
          case 2: out(i1, i2, i3) = m(i2, i1 * d3 + i3); break;
          default: out(i1, i2, i3) = m(i3, i1 * d2 + i2); break;
        }
      }
  return out;
}

Tensor3 refold(const UnfoldedMatrix& m, const Dims3& dims) { return refold(m.matrix, m.mode, dims); }

Tensor3 multilinear_product(const CoreTensor& core, const Eigen::MatrixXd& x,
                            const Eigen::MatrixXd& y, const Eigen::MatrixXd& z) {
  const auto [r1, r2, r3] = core.dims();
  if (x.cols() != r1 || y.cols() != r2 || z.cols() != r3) {
    throw std::invalid_argument("multilinear_product: factor columns do not match core dims");
  }
  const Index d1 = x.rows(), d2 = y.rows(), d3 = z.rows();

  // Contract mode 3: t1(j1 j2, i3).
  const RowMajorMatrix t1 =
      Eigen::Map<const RowMajorMatrix>(core.values().data(), r1 * r2, r3) * z.transpose();

  // Contract mode 2: t2(j1, i2 i3).
  RowMajorMatrix t2(r1, d2 * d3);
  for (Index j1 = 0; j1 < r1; ++j1) {
    Eigen::Map<RowMajorMatrix> slab(t2.row(j1).data(), d2, d3);
    slab.noalias() = y * t1.middleRows(j1 * r2, r2);
  }

  // Contract mode 1: out(i1, i2 i3), which is the storage layout.
  Tensor3 out({d1, d2, d3});
  Eigen::Map<RowMajorMatrix>(out.values().data(), d1, d2 * d3).noalias() = x * t2;
  return out;
}

Tensor3 outer(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& z) {
  Tensor3 out({x.size(), y.size(), z.size()});
  for (Index i1 = 0; i1 < x.size(); ++i1)
    for (Index i2 = 0; i2 < y.size(); ++i2)
      for (Index i3 = 0; i3 < z.size(); ++i3) out(i1, i2, i3) = x(i1) * y(i2) * z(i3);
  return out;
}

double inner(const Tensor3& a, const Tensor3& b) {
  check_same_dims(a, b, "inner");
  double s = 0.0;
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t k = 0; k < av.size(); ++k) s += av[k] * bv[k];
  return s;
}

double norm(const Tensor3& a, NormKind kind) {
  if (kind == NormKind::Max) {
    double m = 0.0;
    for (const double v : a.values()) m = std::max(m, std::abs(v));
    return m;
  }
  return std::sqrt(inner(a, a));
}

Tensor3 difference(const Tensor3& a, const Tensor3& b) {
  check_same_dims(a, b, "difference");
  Tensor3 out(a.dims());
  for (Index k = 0; k < a.size(); ++k) out.values()[k] = a.values()[k] - b.values()[k];
  return out;
}

Eigen::VectorXd contract_two(const Tensor3& a, int free_mode, const Eigen::VectorXd& p,
                             const Eigen::VectorXd& q) {
  check_mode(free_mode);
  const auto [d1, d2, d3] = a.dims();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(a.dim(free_mode));
  for (Index i1 = 0; i1 < d1; ++i1)
    for (Index i2 = 0; i2 < d2; ++i2)
      for (Index i3 = 0; i3 < d3; ++i3) {
        const double v = a(i1, i2, i3);
        switch (free_mode) {
          case 1: out(i1) += v * p(i2) * q(i3); break;
          case 2: out(i2) += v * p(i1) * q(i3); break;
          default: out(i3) += v * p(i1) * q(i2); break;
        }
      }
  return out;
}

namespace {

// Alternating rank-one power iteration from (u, v, w). Each partial update
// maximizes |<A, u v w>| over one factor, so the value never decreases.
double power_iterate(const Tensor3& a, Eigen::VectorXd u, Eigen::VectorXd v, Eigen::VectorXd w,
                     int sweeps) {
  double best = std::abs(contract_two(a, 1, v, w).dot(u));
  for (int s = 0; s < sweeps; ++s) {
    Eigen::VectorXd nu = contract_two(a, 1, v, w);
    if (nu.norm() == 0.0) break;
    u = nu.normalized();
    Eigen::VectorXd nv = contract_two(a, 2, u, w);
    if (nv.norm() == 0.0) break;
    v = nv.normalized();
    Eigen::VectorXd nw = contract_two(a, 3, u, v);
    const double value = nw.norm();
    if (value == 0.0) break;
    w = nw / value;
    const double previous = best;
    best = std::max(best, value);
    if (best - previous <= 1e-15 * best && s > 0) break;
  }
  return best;
}

Eigen::VectorXd basis_vector(Index n, Index k) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  e(k) = 1.0;
  return e;
}

Eigen::VectorXd random_unit(Index n, Rng& rng) {
  Eigen::VectorXd g(n);
  for (Index k = 0; k < n; ++k) g(k) = rng.normal();
  return g.normalized();
}

}  // namespace

double spectral_lower_bound(const Tensor3& a, const SpectralOptions& options) {
  if (options.sweeps < 1) throw std::invalid_argument("spectral_lower_bound: sweeps must be >= 1");
  const double max_abs = norm(a, NormKind::Max);
  if (max_abs == 0.0) return 0.0;
  const auto [d1, d2, d3] = a.dims();

  double best = max_abs;
  int canonical = 0;
  for (Index i1 = 0; i1 < d1 && canonical < options.max_canonical_starts; ++i1)
    for (Index i2 = 0; i2 < d2 && canonical < options.max_canonical_starts; ++i2)
      for (Index i3 = 0; i3 < d3 && canonical < options.max_canonical_starts; ++i3) {
        if (std::abs(a(i1, i2, i3)) != max_abs) continue;
        ++canonical;
        best = std::max(best, power_iterate(a, basis_vector(d1, i1), basis_vector(d2, i2),
                                            basis_vector(d3, i3), options.sweeps));
      }

  Rng rng(options.seed);
  for (int k = 0; k < options.random_restarts; ++k) {
    Eigen::VectorXd u = random_unit(d1, rng);
    Eigen::VectorXd v = random_unit(d2, rng);
    Eigen::VectorXd w = random_unit(d3, rng);
    best = std::max(best, power_iterate(a, std::move(u), std::move(v), std::move(w), options.sweeps));
  }
  return best;
}

std::array<Index, 3> multilinear_ranks(const Tensor3& a, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("multilinear_ranks: tol must be positive");
  std::array<Index, 3> ranks{0, 0, 0};
  if (a.size() == 0 || norm(a, NormKind::Max) == 0.0) return ranks;
  for (int mode = 1; mode <= 3; ++mode) {
    const Eigen::MatrixXd m = unfold(a, mode).matrix;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    const Eigen::VectorXd& s = svd.singularValues();
    const double cutoff = tol * s(0);
    ranks[static_cast<std::size_t>(mode - 1)] = (s.array() > cutoff).count();
  }
  return ranks;
}

}  // namespace tcomplete
