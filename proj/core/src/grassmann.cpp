#include "tcomplete/grassmann.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "tcomplete/errors.hpp"

namespace tcomplete {

namespace {

constexpr double kZeroAngle = 1e-14;
constexpr double kDriftTol = 1e-12;
constexpr int kTrimPasses = 3;

double max_gram_error(const Eigen::MatrixXd& m) {
  const Index r = m.cols();
  return (m.transpose() * m - Eigen::MatrixXd::Identity(r, r)).cwiseAbs().maxCoeff();
}

void check_same_shape(const Frame& a, const Frame& b, const char* what) {
  if (a.dim() != b.dim() || a.rank() != b.rank()) {
    throw std::invalid_argument(std::string(what) + ": frame shapes differ");
  }
}

Eigen::MatrixXd clip_rows(const Eigen::MatrixXd& m, double level) {
  Eigen::MatrixXd out = m;
  for (Index i = 0; i < out.rows(); ++i) {
    const double sq = out.row(i).squaredNorm();
    if (sq > level) out.row(i) *= std::sqrt(level / sq);
  }
  return out;
}

}  // namespace

Frame::Frame(Eigen::MatrixXd matrix) : matrix_(std::move(matrix)) {
  if (matrix_.cols() > matrix_.rows()) throw std::invalid_argument("Frame: r must not exceed d");
  if (matrix_.cols() > 0 && !(max_gram_error(matrix_) <= kOrthonormalityTol)) {
    throw std::invalid_argument("Frame: columns are not orthonormal");
  }
}

Frame Frame::orthonormalize(const Eigen::MatrixXd& m) {
  if (m.cols() > m.rows()) throw std::invalid_argument("Frame: r must not exceed d");
  if (!m.allFinite()) throw NumericError("Frame::orthonormalize: non-finite input");
  const Index d = m.rows(), r = m.cols();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, r);
  const Eigen::MatrixXd& packed = qr.matrixQR();
  for (Index j = 0; j < r; ++j) {
    if (packed(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return Frame(std::move(q), Unchecked{});
}

Frame Frame::canonical(Index d, Index r) {
  if (r > d || r < 0) throw std::invalid_argument("Frame::canonical: need 0 <= r <= d");
  return Frame(Eigen::MatrixXd::Identity(d, r), Unchecked{});
}

double Frame::orthonormality_error() const { return max_gram_error(matrix_); }

const Frame& TripleFrame::operator[](int mode) const {
  switch (mode) {
    case 1: return x;
    case 2: return y;
    case 3: return z;
    default: throw std::invalid_argument("mode must be 1, 2 or 3");
  }
}

const Eigen::MatrixXd& TripleTangent::operator[](int mode) const {
  switch (mode) {
    case 1: return x;
    case 2: return y;
    case 3: return z;
    default: throw std::invalid_argument("mode must be 1, 2 or 3");
  }
}

double TripleTangent::norm() const { return std::sqrt(squared_norm()); }

double coherence(const Frame& x) {
  if (x.rank() < 1) throw std::invalid_argument("coherence: r must be >= 1");
  const double max_row = x.matrix().rowwise().squaredNorm().maxCoeff();
  return static_cast<double>(x.dim()) / static_cast<double>(x.rank()) * max_row;
}

double proj_distance(const Frame& x, const Frame& u) {
  check_same_shape(x, u, "proj_distance");
  const Eigen::MatrixXd& xm = x.matrix();
  const Eigen::MatrixXd& um = u.matrix();
  return (um - xm * (xm.transpose() * um)).norm();
}

double triple_distance(const TripleFrame& p, const TripleFrame& q) {
  return proj_distance(p.x, q.x) + proj_distance(p.y, q.y) + proj_distance(p.z, q.z);
}

TangentDirection tangent_project(const Frame& x, const Eigen::MatrixXd& g) {
  if (g.rows() != x.dim() || g.cols() != x.rank()) {
    throw std::invalid_argument("tangent_project: shape mismatch");
  }
  const Eigen::MatrixXd& xm = x.matrix();
  return {g - xm * (xm.transpose() * g)};
}

GeodesicPath::GeodesicPath(const Frame& base, const Eigen::MatrixXd& direction)
    : base_(base) {
  if (direction.rows() != base.dim() || direction.cols() != base.rank()) {
    throw std::invalid_argument("geodesic: direction shape mismatch");
  }
  if (!direction.allFinite()) throw NumericError("geodesic: non-finite direction");
  if (direction.cwiseAbs().maxCoeff() == 0.0 || base.rank() == 0) {
    zero_ = true;
    return;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(direction, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericError("geodesic: SVD failed");
  left_ = svd.matrixU();
  right_ = svd.matrixV();
  angles_ = svd.singularValues();
  for (Index k = 0; k < angles_.size(); ++k) {
    if (angles_(k) < kZeroAngle) angles_(k) = 0.0;
  }
  base_times_right_ = base_.matrix() * right_;
}

Frame GeodesicPath::at(double t) const {
  if (zero_ || t == 0.0) return base_;
  const Eigen::ArrayXd cos_t = (angles_.array() * t).cos();
  const Eigen::ArrayXd sin_t = (angles_.array() * t).sin();
  Eigen::MatrixXd moved =
      (base_times_right_ * cos_t.matrix().asDiagonal() + left_ * sin_t.matrix().asDiagonal()) *
      right_.transpose();
  if (max_gram_error(moved) > kDriftTol) return Frame::orthonormalize(moved);
  return Frame(std::move(moved));
}

Frame geodesic(const Frame& x, const TangentDirection& d, double t) {
  return GeodesicPath(x, d.matrix).at(t);
}

Frame dct_frame(Index d, Index r) {
  if (r > d || r < 0) throw std::invalid_argument("dct_frame: need 0 <= r <= d");
  Eigen::MatrixXd m(d, r);
  const double dd = static_cast<double>(d);
  for (Index k = 0; k < r; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / dd) : std::sqrt(2.0 / dd);
    for (Index i = 0; i < d; ++i) {
      m(i, k) = scale * std::cos(std::numbers::pi * (static_cast<double>(i) + 0.5) *
                                 static_cast<double>(k) / dd);
    }
  }
  return Frame::orthonormalize(m);
}

Frame trim(const Frame& x, double mu0) {
  if (!(mu0 >= 1.0)) throw std::invalid_argument("trim: mu0 must be >= 1");
  const double bound = 3.0 * mu0;
  if (coherence(x) <= bound) return x;

  const double level =
      2.0 * mu0 * static_cast<double>(x.rank()) / static_cast<double>(x.dim());
  Frame current = x;
  for (int pass = 0; pass < kTrimPasses; ++pass) {
    current = Frame::orthonormalize(clip_rows(current.matrix(), level));
    if (coherence(current) <= bound) return current;
  }

  const Frame spread = dct_frame(x.dim(), x.rank());
  const Eigen::MatrixXd clipped = clip_rows(current.matrix(), level);
  for (double weight = 1.0 / 64.0; weight <= 64.0; weight *= 2.0) {
    Frame blended = Frame::orthonormalize(clipped + weight * spread.matrix());
    if (coherence(blended) <= bound) return blended;
  }
  return spread;
}

}  // namespace tcomplete
