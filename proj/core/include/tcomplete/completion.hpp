#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tcomplete/grassmann.hpp"
#include "tcomplete/observations.hpp"
#include "tcomplete/tensor.hpp"

namespace tcomplete {

struct LineSearchOptions {
  double growth = 2.0;              // bracket expansion / contraction factor
  double initial_fraction = 1e-3;   // first probe moves about this fraction of gamma
  double golden_tolerance = 1e-3;   // relative width at which golden-section stops
  int max_probes = 80;
};

/// Hyperparameters of the Grassmannian gradient descent.
struct GoGConfig {
  double mu0 = 1.0;
  /// Penalty weight; std::nullopt selects the data-driven rule in auto_rho().
  std::optional<double> rho;
  /// Radius of the trust ball, in triple projection distance, around the
  /// initial point. The default leaves the ball unbounded.
  double gamma = std::numeric_limits<double>::infinity();
  double eps_tol = 1e-14;
  int max_iterations = 1000;
  LineSearchOptions line_search;

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

/// rho = 10 * n / (d1 d2 d3) * lambda * log(max dk), where lambda is the top
/// eigenvalue of the mode-1 second-moment estimate (a proxy for the squared
/// largest unfolding singular value).
double auto_rho(const ObservationSet& obs);
double resolve_rho(const GoGConfig& config, const ObservationSet& obs);

struct CoreSolve {
  CoreTensor core;
  bool used_pseudoinverse = false;
};

/// Least-squares core for fixed frames: minimizes
/// 1/2 sum_i (((X, Y, Z) . C)(omega_i) - T(omega_i))^2 via the normal equations
/// sum_i v_i v_i^T c = sum_i T(omega_i) v_i with v_i = x_{i1} (x) y_{i2} (x) z_{i3}.
/// Falls back to the minimum-norm eigen-pseudoinverse solution when the
/// normal matrix is singular to 1e-12 relative.
CoreSolve solve_core_detailed(const TripleFrame& frames, const ObservationSet& obs);
CoreTensor solve_core(const TripleFrame& frames, const ObservationSet& obs);

struct ObjectiveValue {
  double value = 0.0;
  CoreTensor core;
};

/// F(X, Y, Z) = min_C 1/2 || P_Omega((X, Y, Z) . C - T) ||_F^2, with the minimizing core.
ObjectiveValue objective_F(const TripleFrame& frames, const ObservationSet& obs);

/// G_0(z) = 0 for z <= 1 and exp((z - 1)^2) - 1 above. The exponent argument
/// z - 1 is clamped at 26; beyond it G_0 continues linearly with the slope it
/// has at the clamp.
double penalty_g0(double z);
double penalty_g0_derivative(double z);

/// rho * sum over modes and rows j of G_0(d_k ||row_j||^2 / (3 mu0 r_k)).
double penalty_G(const TripleFrame& frames, double mu0, double rho);

/// Euclidean gradient of one mode's penalty term with respect to the frame matrix.
Eigen::MatrixXd penalty_gradient(const Frame& frame, double mu0, double rho);

/// Riemannian gradient of F + G. The core must be the optimal core for these
/// frames, so the gradient of F is its partial derivative at fixed core. Each
/// component is projected onto the horizontal space (X^T D_X = 0).
TripleTangent riemannian_gradient(const TripleFrame& frames, const CoreTensor& core,
                                  const ObservationSet& obs, double mu0, double rho);

/// Evaluates the penalized objective F + G for a fixed (mu0, rho).
class PenalizedObjective {
 public:
  struct Evaluation {
    double total = 0.0;
    double fit = 0.0;
    double penalty = 0.0;
    CoreTensor core;
    bool used_pseudoinverse = false;
  };

  PenalizedObjective(const ObservationSet& obs, double mu0, double rho);

  Evaluation operator()(const TripleFrame& frames) const;
  TripleTangent gradient(const TripleFrame& frames, const CoreTensor& core) const;

  const ObservationSet& observations() const { return obs_; }
  double mu0() const { return mu0_; }
  double rho() const { return rho_; }

 private:
  const ObservationSet& obs_;
  double mu0_;
  double rho_;
};

struct LineSearchResult {
  double step = 0.0;
  TripleFrame frames;
  PenalizedObjective::Evaluation evaluation;
  int probes = 0;
};

/// Approximate exact line search along the three geodesics
/// t -> (H(X, D_X, t), H(Y, D_Y, t), H(Z, D_Z, t)), restricted to
/// triple_distance(., anchor) <= gamma. The bracket starts at
/// t0 = initial_fraction * min(gamma, sum_k sqrt(r_k)) / ||D||_F, grows (or
/// shrinks) geometrically, and is refined by golden-section search; points outside the ball count as
/// +infinity. Returns step 0 with the input frames when no admissible
/// decrease is found.
LineSearchResult line_search_detailed(const TripleFrame& frames, const TripleTangent& directions,
                                      const PenalizedObjective& objective,
                                      double current_value, const GoGConfig& config,
                                      const TripleFrame& anchor);

/// The step t_k only. rho must be resolvable (a number, or auto from obs).
double line_search(const TripleFrame& frames, const TripleTangent& directions,
                   const ObservationSet& obs, const GoGConfig& config, const TripleFrame& anchor);

struct SolveState {
  TripleFrame frames;
  CoreTensor core;
  double objective = 0.0;
  double gradient_norm = 0.0;
  int iteration = 0;
};

struct TraceEntry {
  int iteration = 0;
  double objective = 0.0;
  double gradient_norm = 0.0;
  double step = 0.0;
  double distance_from_init = 0.0;
};

enum class StopReason { MaxIterations, ObjectiveZero, GradientSmall, ObjectiveStalled };

const char* to_string(StopReason reason);

struct SolveReport {
  SolveState final_state;
  bool converged = false;
  StopReason stop_reason = StopReason::MaxIterations;
  std::vector<TraceEntry> trace;
  double wall_time_ms = 0.0;
  double rho = 0.0;
  std::vector<std::string> warnings;

  /// (X, Y, Z) . C at the final iterate.
  Tensor3 reconstruction() const;
};

/// Gradient descent on the product of Grassmannians.
///
/// Each iteration takes the negative Riemannian gradient of F + G, searches
/// along the geodesics inside the trust ball around init, and moves to the
/// best point found. Stops after max_iterations, when the objective is
/// numerically zero (<= eps_tol^2 * 1/2 ||P_Omega T||^2), when the gradient
/// norm drops below eps_tol * n / (d1 d2 d3), or when the relative objective
/// decrease falls below eps_tol. Non-convergence is reported, not thrown.
SolveReport gog_run(const ObservationSet& obs, const Dims3& ranks, const GoGConfig& config,
                    const TripleFrame& init);

}  // namespace tcomplete
