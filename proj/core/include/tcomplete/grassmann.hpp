#pragma once

#include <Eigen/Dense>

#include "tcomplete/tensor.hpp"

namespace tcomplete {

/// Column-orthonormal d x r matrix, used as a representative of a point on
/// the Grassmannian G(d, r).
class Frame {
 public:
  static constexpr double kOrthonormalityTol = 1e-10;

  /// Throws std::invalid_argument unless r <= d and max|M^T M - I| <= 1e-10.
  explicit Frame(Eigen::MatrixXd matrix);

  /// Thin QR of m with the signs chosen so that R has a nonnegative diagonal;
  /// a nearly orthonormal m is returned nearly unchanged.
  static Frame orthonormalize(const Eigen::MatrixXd& m);

  /// First r canonical basis vectors of R^d.
  static Frame canonical(Index d, Index r);

  const Eigen::MatrixXd& matrix() const { return matrix_; }
  Index dim() const { return matrix_.rows(); }
  Index rank() const { return matrix_.cols(); }

  /// max|M^T M - I|.
  double orthonormality_error() const;

 private:
  struct Unchecked {};
  Frame(Eigen::MatrixXd matrix, Unchecked) : matrix_(std::move(matrix)) {}

  Eigen::MatrixXd matrix_;
};

/// A point on G(d1, r1) x G(d2, r2) x G(d3, r3).
struct TripleFrame {
  Frame x;
  Frame y;
  Frame z;

  const Frame& operator[](int mode) const;
  Dims3 dims() const { return {x.dim(), y.dim(), z.dim()}; }
  Dims3 ranks() const { return {x.rank(), y.rank(), z.rank()}; }
};

/// Horizontal tangent vector at a base frame X (X^T D = 0).
struct TangentDirection {
  Eigen::MatrixXd matrix;
};

/// One tangent direction per component of a TripleFrame.
struct TripleTangent {
  Eigen::MatrixXd x;
  Eigen::MatrixXd y;
  Eigen::MatrixXd z;

  const Eigen::MatrixXd& operator[](int mode) const;
  double squared_norm() const { return x.squaredNorm() + y.squaredNorm() + z.squaredNorm(); }
  double norm() const;
  TripleTangent operator-() const { return {-x, -y, -z}; }
};

/// mu(X) = (d / r) max_i ||P_X e_i||^2 = (d / r) max_i ||row_i(X)||^2.
double coherence(const Frame& x);

/// Projection distance (1/sqrt 2) ||U U^T - X X^T||_F, computed as
/// ||(I - X X^T) U||_F (the norm of the sines of the principal angles).
double proj_distance(const Frame& x, const Frame& u);

/// Sum of the three component projection distances.
double triple_distance(const TripleFrame& p, const TripleFrame& q);

/// (I - X X^T) G.
TangentDirection tangent_project(const Frame& x, const Eigen::MatrixXd& g);

/// Geodesic t -> X R cos(Theta t) R^T + L sin(Theta t) R^T from X in the
/// direction D = L Theta R^T (thin SVD). The SVD is computed once, so
/// evaluating many t along one direction is cheap.
class GeodesicPath {
 public:
  GeodesicPath(const Frame& base, const Eigen::MatrixXd& direction);

  Frame at(double t) const;

 private:
  Frame base_;
  Eigen::MatrixXd base_times_right_;  // X R
  Eigen::MatrixXd left_;              // L
  Eigen::MatrixXd right_;             // R
  Eigen::VectorXd angles_;            // diag(Theta)
  bool zero_ = false;
};

Frame geodesic(const Frame& x, const TangentDirection& d, double t);

/// Incoherence trimming. Returns x unchanged when coherence(x) <= 3 mu0.
/// Otherwise rows with squared norm above 2 mu0 r / d are scaled down to that
/// level and the columns re-orthonormalized, for up to three passes. If that
/// does not reach 3 mu0 (a frame concentrated on fewer than r rows cannot be
/// spread by row scaling), the clipped frame is blended with a DCT frame of
/// coherence below 2 until the bound holds.
Frame trim(const Frame& x, double mu0);

/// Orthonormal DCT-II columns 0..r-1 of R^d; coherence < 2.
Frame dct_frame(Index d, Index r);

}  // namespace tcomplete
