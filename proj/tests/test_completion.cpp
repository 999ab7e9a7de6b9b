#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "oracles.hpp"
#include "tcomplete/completion.hpp"
#include "tcomplete/experiments.hpp"
#include "tcomplete/spectral_init.hpp"

namespace tcomplete {
namespace {

using testing::gaussian_matrix;
using testing::random_frame;
using testing::random_triple;

struct Instance {
  testing::Odeco truth;
  TripleFrame frames;
  ObservationSet obs;
};

Instance odeco_instance(const Dims3& dims, const std::vector<double>& weights, Index n,
                        std::uint64_t seed) {
  Rng rng(seed);
  testing::Odeco truth = testing::random_odeco(dims, weights, rng);
  TripleFrame frames{truth.u, truth.v, truth.w};
  ObservationSet obs = sample_uniform(truth.tensor, n, seed + 1);
  return {std::move(truth), std::move(frames), std::move(obs)};
}

TripleTangent random_tangent(const TripleFrame& f, Rng& rng) {
  return {tangent_project(f.x, gaussian_matrix(f.x.dim(), f.x.rank(), rng)).matrix,
          tangent_project(f.y, gaussian_matrix(f.y.dim(), f.y.rank(), rng)).matrix,
          tangent_project(f.z, gaussian_matrix(f.z.dim(), f.z.rank(), rng)).matrix};
}

TripleFrame move(const TripleFrame& f, const TripleTangent& d, double t) {
  return {GeodesicPath(f.x, d.x).at(t), GeodesicPath(f.y, d.y).at(t), GeodesicPath(f.z, d.z).at(t)};
}

double inner(const TripleTangent& a, const TripleTangent& b) {
  return (a.x.array() * b.x.array()).sum() + (a.y.array() * b.y.array()).sum() +
         (a.z.array() * b.z.array()).sum();
}

// A frame with one dominant row, so its coherence exceeds 3 mu0 at mu0 = 1.
Frame spiky_frame(Index d, Index r, Rng& rng) {
  Eigen::MatrixXd g = gaussian_matrix(d, r, rng);
  g.row(0) *= 30.0;
  return Frame::orthonormalize(g);
}

TEST(GoGConfig, Validation) {
  EXPECT_NO_THROW(GoGConfig{}.validate());
  EXPECT_THROW((GoGConfig{.mu0 = 0.5}.validate()), std::invalid_argument);
  EXPECT_THROW((GoGConfig{.rho = -1.0}.validate()), std::invalid_argument);
  EXPECT_THROW((GoGConfig{.gamma = 0.0}.validate()), std::invalid_argument);
  EXPECT_THROW((GoGConfig{.eps_tol = 0.0}.validate()), std::invalid_argument);
  EXPECT_THROW((GoGConfig{.max_iterations = 0}.validate()), std::invalid_argument);
}

TEST(AutoRho, FollowsTheRule) {
  const Instance inst = odeco_instance({8, 9, 10}, {2.0}, 200, 3);
  const double lambda = top_eigenvalue(second_moment_estimate(inst.obs, 1));
  EXPECT_NEAR(auto_rho(inst.obs), 10.0 * 200.0 / 720.0 * lambda * std::log(10.0), 1e-12 * lambda);
  EXPECT_EQ(resolve_rho(GoGConfig{.rho = 0.25}, inst.obs), 0.25);
  EXPECT_EQ(resolve_rho(GoGConfig{}, inst.obs), auto_rho(inst.obs));
}

TEST(SolveCore, RecoversTruthCore) {
  const Instance inst = odeco_instance({5, 6, 4}, {3.0, 1.0}, 2000, 1);
  const CoreTensor c = solve_core(inst.frames, inst.obs);
  Tensor3 expected({2, 2, 2});
  expected(0, 0, 0) = 3.0;
  expected(1, 1, 1) = 1.0;
  EXPECT_LE(norm(difference(c, expected)), 1e-10);
}

TEST(SolveCore, SingleObservationExactFit) {
  Rng rng(2);
  const TripleFrame f = random_triple({4, 4, 4}, {1, 1, 1}, rng);
  const ObservationSet obs({4, 4, 4}, {Sample{{1, 2, 3}, 0.7}});
  const CoreSolve s = solve_core_detailed(f, obs);
  const double product = f.x.matrix()(1, 0) * f.y.matrix()(2, 0) * f.z.matrix()(3, 0);
  EXPECT_NEAR(s.core(0, 0, 0), 0.7 / product, 1e-12 * std::abs(0.7 / product));
  EXPECT_FALSE(s.used_pseudoinverse);
  EXPECT_NEAR(objective_F(f, obs).value, 0.0, 1e-24);
}

TEST(SolveCore, MatchesDenseLeastSquares) {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const TripleFrame f = random_triple({5, 5, 5}, {2, 2, 2}, rng);
    const ObservationSet obs = sample_uniform(testing::random_tensor({5, 5, 5}, rng), 40, rng.next());
    const CoreTensor c = solve_core(f, obs);
    const Tensor3 oracle = testing::core_from_vector(testing::dense_least_squares_core(f, obs), {2, 2, 2});
    EXPECT_LE(norm(difference(c, oracle)), 1e-9 * std::max(1.0, norm(oracle)));
  }
}

TEST(SolveCore, RankDeficientUsesMinimumNorm) {
  Rng rng(4);
  const TripleFrame f = random_triple({4, 4, 4}, {2, 2, 2}, rng);
  // Three samples cannot determine eight core entries.
  const ObservationSet obs({4, 4, 4}, {Sample{{0, 0, 0}, 1.0}, Sample{{1, 2, 3}, -0.5},
                                       Sample{{3, 1, 2}, 2.0}});
  const CoreSolve s = solve_core_detailed(f, obs);
  EXPECT_TRUE(s.used_pseudoinverse);
  const Tensor3 oracle = testing::core_from_vector(testing::dense_least_squares_core(f, obs), {2, 2, 2});
  EXPECT_LE(norm(difference(s.core, oracle)), 1e-8 * norm(oracle));
  EXPECT_NEAR(testing::dense_fit(f, s.core, obs), 0.0, 1e-16);
}

TEST(SolveCore, NormalEquationResidualIsSmall) {
  Rng rng(5);
  const TripleFrame f = random_triple({6, 5, 7}, {2, 3, 2}, rng);
  const ObservationSet obs = sample_uniform(testing::random_tensor({6, 5, 7}, rng), 150, 9);
  const CoreTensor c = solve_core(f, obs);
  // Gradient of the fit in the core is sum_i residual_i v_i; it must vanish.
  const std::vector<double> fitted = evaluate_tucker_at(obs, f.x.matrix(), f.y.matrix(), f.z.matrix(), c);
  Tensor3 grad({2, 3, 2});
  double scale = 0.0;
  for (Index i = 0; i < obs.size(); ++i) {
    const auto& idx = obs[i].index;
    const double res = fitted[static_cast<std::size_t>(i)] - obs[i].value;
    for (Index a = 0; a < 2; ++a)
      for (Index b = 0; b < 3; ++b)
        for (Index e = 0; e < 2; ++e) {
          const double v = f.x.matrix()(idx[0], a) * f.y.matrix()(idx[1], b) * f.z.matrix()(idx[2], e);
          grad(a, b, e) += res * v;
          scale += std::abs(obs[i].value * v);
        }
  }
  EXPECT_LE(norm(grad), 1e-8 * scale);
}

TEST(ObjectiveF, ZeroAtTruth) {
  const Instance inst = odeco_instance({6, 6, 6}, {2.0, 1.0}, 300, 6);
  EXPECT_LE(objective_F(inst.frames, inst.obs).value, 1e-18);
}

TEST(ObjectiveF, MatchesDensePath) {
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const TripleFrame f = random_triple({5, 4, 6}, {2, 2, 1}, rng);
    const ObservationSet obs = sample_uniform(testing::random_tensor({5, 4, 6}, rng), 60, rng.next());
    const ObjectiveValue v = objective_F(f, obs);
    EXPECT_GE(v.value, 0.0);
    EXPECT_NEAR(v.value, testing::dense_fit(f, v.core, obs), 1e-12 * v.value);
  }
}

TEST(Penalty, G0Shape) {
  EXPECT_EQ(penalty_g0(0.5), 0.0);
  EXPECT_EQ(penalty_g0(1.0), 0.0);
  EXPECT_NEAR(penalty_g0(1.5), std::exp(0.25) - 1.0, 1e-15);
  EXPECT_NEAR(penalty_g0_derivative(1.5), 2 * 0.5 * std::exp(0.25), 1e-15);
  EXPECT_EQ(penalty_g0_derivative(0.9), 0.0);
  // Beyond the clamp the function stays finite, increasing and linear.
  const double a = penalty_g0(40.0), b = penalty_g0(41.0), c = penalty_g0(42.0);
  EXPECT_TRUE(std::isfinite(c));
  EXPECT_GT(b, a);
  EXPECT_NEAR((c - b) / (b - a), 1.0, 1e-9);
  EXPECT_NEAR(b - a, penalty_g0_derivative(27.0), 1e-9 * (b - a));
}

TEST(Penalty, CanonicalFrameFormula) {
  // d = 12, r = 2: canonical rows 0, 1 have ||row||^2 = 1, so z = 12 / (3 * 2 * mu0).
  const double mu0 = 1.2, rho = 0.3;
  const Frame spiky = Frame::canonical(12, 2);
  const Frame flat = dct_frame(12, 2);
  const TripleFrame f{spiky, flat, flat};
  const double z = 12.0 / (3.0 * mu0 * 2.0);
  EXPECT_NEAR(penalty_G(f, mu0, rho), rho * 2.0 * (std::exp((z - 1) * (z - 1)) - 1.0), 1e-12);
  const TripleFrame quiet{flat, flat, flat};
  EXPECT_EQ(penalty_G(quiet, 1.0, 5.0), 0.0);
  EXPECT_THROW(penalty_G(quiet, 0.9, 1.0), std::invalid_argument);
  EXPECT_THROW(penalty_G(quiet, 1.0, -1.0), std::invalid_argument);
}

TEST(Penalty, RowGradientMatchesFiniteDifference) {
  // One row with z = 1.5 at d = 6, r = 1, mu0 = 1: ||row||^2 = 0.75.
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(6, 1);
  m(0, 0) = std::sqrt(0.75);
  m(1, 0) = std::sqrt(0.25);
  const Frame f(m);
  const double mu0 = 1.0, rho = 0.7;
  const Eigen::MatrixXd g = penalty_gradient(f, mu0, rho);
  const double zrow = 6.0 * 0.75 / 3.0;
  EXPECT_NEAR(zrow, 1.5, 1e-15);
  EXPECT_NEAR(g(0, 0), rho * penalty_g0_derivative(1.5) * (2.0 * 6.0 / 3.0) * m(0, 0), 1e-14);
  // Central differences of the mode penalty on the raw matrix entries.
  auto mode_penalty = [&](const Eigen::MatrixXd& x) {
    double s = 0.0;
    for (Index j = 0; j < x.rows(); ++j) s += penalty_g0(6.0 * x.row(j).squaredNorm() / 3.0);
    return rho * s;
  };
  const double h = 1e-6;
  for (Index j = 0; j < 6; ++j) {
    Eigen::MatrixXd p = m, q = m;
    p(j, 0) += h;
    q(j, 0) -= h;
    const double fd = (mode_penalty(p) - mode_penalty(q)) / (2 * h);
    EXPECT_NEAR(g(j, 0), fd, 1e-5 * std::max(1.0, std::abs(fd)));
  }
}

TEST(RiemannianGradient, VanishesAtTruth) {
  const Instance inst = odeco_instance({8, 8, 8}, {2.0, 1.0}, 400, 8);
  const double mu0 = std::max({1.0, coherence(inst.truth.u), coherence(inst.truth.v), coherence(inst.truth.w)});
  const CoreTensor c = solve_core(inst.frames, inst.obs);
  const TripleTangent g = riemannian_gradient(inst.frames, c, inst.obs, mu0, 1.0);
  const double scale = 400.0 / 512.0 * 4.0;
  EXPECT_LE(g.norm(), 1e-10 * scale);
}

TEST(RiemannianGradient, IsHorizontal) {
  Rng rng(9);
  const TripleFrame f{spiky_frame(7, 2, rng), random_frame(6, 2, rng), random_frame(5, 1, rng)};
  const ObservationSet obs = sample_uniform(testing::random_tensor({7, 6, 5}, rng), 100, 1);
  const TripleTangent g = riemannian_gradient(f, solve_core(f, obs), obs, 1.0, 2.0);
  for (int mode = 1; mode <= 3; ++mode) {
    EXPECT_LE((f[mode].matrix().transpose() * g[mode]).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, g.norm()));
  }
}

// Directional derivative of F (rho = 0) or F + G (rho > 0) along random
// geodesics. Without the penalty a forward difference at t = 1e-6 is accurate
// enough; the exponential penalty has enough curvature that its forward
// truncation error reaches 1e-4, so that case uses central differences.
void check_directional_derivative(double mu0, double rho, bool spiky, std::uint64_t seed) {
  Rng rng(seed);
  const Dims3 dims{7, 6, 8};
  const TripleFrame f = spiky ? TripleFrame{spiky_frame(7, 2, rng), spiky_frame(6, 1, rng), random_frame(8, 2, rng)}
                              : random_triple(dims, {2, 2, 2}, rng);
  const ObservationSet obs = sample_uniform(testing::random_tensor(dims, rng), 150, rng.next());
  const PenalizedObjective objective(obs, mu0, rho);
  const PenalizedObjective::Evaluation base = objective(f);
  if (spiky) ASSERT_GT(base.penalty, 0.0);
  const TripleTangent g = objective.gradient(f, base.core);
  for (int k = 0; k < 3; ++k) {
    const TripleTangent d = random_tangent(f, rng);
    const double analytic = inner(g, d);
    const double t = 1e-6;
    const double ahead = objective(move(f, d, t)).total;
    const double fd = spiky ? (ahead - objective(move(f, -d, t)).total) / (2 * t) : (ahead - base.total) / t;
    EXPECT_NEAR(fd, analytic, 1e-4 * std::max(std::abs(analytic), 1e-3 * base.total))
        << "rho " << rho << " seed " << seed;
  }
}

TEST(RiemannianGradient, FiniteDifferenceWithoutPenalty) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) check_directional_derivative(1.0, 0.0, false, seed);
}

TEST(RiemannianGradient, FiniteDifferenceWithActivePenalty) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) check_directional_derivative(1.0, 0.05, true, seed);
}

TEST(RiemannianGradient, GaugeInvariance) {
  Rng rng(10);
  const TripleFrame f = random_triple({6, 7, 5}, {2, 3, 2}, rng);
  const ObservationSet obs = sample_uniform(testing::random_tensor({6, 7, 5}, rng), 120, 4);
  const Eigen::MatrixXd q1 = testing::random_orthogonal(2, rng);
  const Eigen::MatrixXd q2 = testing::random_orthogonal(3, rng);
  const Eigen::MatrixXd q3 = testing::random_orthogonal(2, rng);
  const TripleFrame g_frames{Frame(f.x.matrix() * q1), Frame(f.y.matrix() * q2), Frame(f.z.matrix() * q3)};
  const CoreTensor c = solve_core(f, obs);
  const CoreTensor c_rot = multilinear_product(c, q1.transpose(), q2.transpose(), q3.transpose());
  const TripleTangent a = riemannian_gradient(f, c, obs, 1.0, 0.0);
  const TripleTangent b = riemannian_gradient(g_frames, c_rot, obs, 1.0, 0.0);
  EXPECT_NEAR(a.norm(), b.norm(), 1e-12 * a.norm());
  EXPECT_LE((a.x * q1 - b.x).norm(), 1e-12 * a.norm());
  EXPECT_LE((a.y * q2 - b.y).norm(), 1e-12 * a.norm());
  EXPECT_LE((a.z * q3 - b.z).norm(), 1e-12 * a.norm());
}

TEST(LineSearch, ZeroDirectionAndTruthGiveZeroStep) {
  const Instance inst = odeco_instance({6, 6, 6}, {1.0}, 200, 11);
  const GoGConfig config{.rho = 0.0};
  const TripleTangent zero{Eigen::MatrixXd::Zero(6, 1), Eigen::MatrixXd::Zero(6, 1), Eigen::MatrixXd::Zero(6, 1)};
  Rng rng(1);
  const TripleFrame other = random_triple({6, 6, 6}, {1, 1, 1}, rng);
  EXPECT_EQ(line_search(other, zero, inst.obs, config, other), 0.0);
  const PenalizedObjective objective(inst.obs, 1.0, 0.0);
  const TripleTangent g = objective.gradient(inst.frames, solve_core(inst.frames, inst.obs));
  EXPECT_EQ(line_search(inst.frames, -g, inst.obs, config, inst.frames), 0.0);
}

TEST(LineSearch, AgreesWithGridScan) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Instance inst = odeco_instance({10, 10, 10}, {1.0}, 300, 20 + seed);
    Rng rng(seed);
    const TripleFrame start = TripleFrame{
        Frame::orthonormalize(inst.truth.u.matrix() + 0.3 * gaussian_matrix(10, 1, rng)),
        Frame::orthonormalize(inst.truth.v.matrix() + 0.3 * gaussian_matrix(10, 1, rng)),
        Frame::orthonormalize(inst.truth.w.matrix() + 0.3 * gaussian_matrix(10, 1, rng))};
    const GoGConfig config{.rho = 0.0};
    const PenalizedObjective objective(inst.obs, 1.0, 0.0);
    const PenalizedObjective::Evaluation base = objective(start);
    const TripleTangent d = -objective.gradient(start, base.core);
    const LineSearchResult ls = line_search_detailed(start, d, objective, base.total, config, start);
    ASSERT_GT(ls.step, 0.0);
    EXPECT_LT(ls.evaluation.total, base.total);

    // Dense scan over [0, 2 t]; walk to the first local minimum.
    const int points = 1000;
    const double span = 2.0 * ls.step;
    double best_t = 0.0, best = base.total;
    for (int i = 1; i <= points; ++i) {
      const double t = span * i / points;
      const double v = objective(move(start, d, t)).total;
      if (v > best) break;
      best = v;
      best_t = t;
    }
    EXPECT_NEAR(ls.step, best_t, 1e-2 * ls.step + span / points) << "seed " << seed;
    EXPECT_LE(ls.evaluation.total, best + 1e-6 * base.total);
  }
}

TEST(LineSearch, RespectsTrustBall) {
  const Instance inst = odeco_instance({10, 10, 10}, {1.0}, 300, 40);
  Rng rng(3);
  const TripleFrame start = random_triple({10, 10, 10}, {1, 1, 1}, rng);
  const PenalizedObjective objective(inst.obs, 1.0, 0.0);
  const PenalizedObjective::Evaluation base = objective(start);
  const TripleTangent d = -objective.gradient(start, base.core);
  const GoGConfig config{.rho = 0.0, .gamma = 0.02};
  const LineSearchResult ls = line_search_detailed(start, d, objective, base.total, config, start);
  EXPECT_LE(triple_distance(ls.frames, start), 0.02);
  EXPECT_LE(ls.evaluation.total, base.total);
}

TEST(GogRun, FixedPointAtTruth) {
  const Instance inst = odeco_instance({8, 8, 8}, {2.0, 1.0}, 400, 12);
  const double mu0 = std::max({1.0, coherence(inst.truth.u), coherence(inst.truth.v), coherence(inst.truth.w)});
  const SolveReport report = gog_run(inst.obs, {2, 2, 2}, GoGConfig{.mu0 = mu0}, inst.frames);
  EXPECT_TRUE(report.converged);
  EXPECT_EQ(report.final_state.iteration, 0);
  EXPECT_LE(testing::relative_difference(report.reconstruction(), inst.truth.tensor), 1e-12);
  EXPECT_TRUE(report.warnings.empty());
}

TEST(GogRun, RejectsInconsistentInput) {
  const Instance inst = odeco_instance({5, 5, 5}, {1.0}, 50, 13);
  EXPECT_THROW(gog_run(inst.obs, {2, 1, 1}, GoGConfig{}, inst.frames), std::invalid_argument);
  EXPECT_THROW(gog_run(inst.obs, {1, 1, 1}, GoGConfig{.max_iterations = 0}, inst.frames), std::invalid_argument);
}

TEST(GogRun, RecoversRankOneFromSpectralStart) {
  const Index d = 20, r = 1;
  const double alpha = 10.0;
  int successes = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const GroundTruth truth = generate_odeco(d, r, seed);
    const double mu0 = std::max(1.0, truth.max_coherence());
    const ObservationSet obs = sample_uniform(truth.tensor, sample_size(d, r, alpha), seed + 77);
    const TripleFrame init = initialize(obs, {r, r, r}, mu0);
    const SolveReport report = gog_run(obs, {r, r, r}, GoGConfig{.mu0 = mu0, .max_iterations = 200}, init);
    const double err = testing::relative_difference(report.reconstruction(), truth.tensor);
    if (err <= 1e-7) ++successes;

    double previous = std::numeric_limits<double>::infinity();
    for (const TraceEntry& e : report.trace) {
      EXPECT_LE(e.objective, previous);
      previous = e.objective;
    }
    for (int mode = 1; mode <= 3; ++mode) {
      EXPECT_LE(report.final_state.frames[mode].orthonormality_error(), 1e-10);
    }
  }
  EXPECT_GE(successes, 9);
}

TEST(GogRun, IteratesStayInTrustBall) {
  const GroundTruth truth = generate_odeco(15, 1, 5);
  const ObservationSet obs = sample_uniform(truth.tensor, sample_size(15, 1, 6.0), 3);
  const TripleFrame init = initialize(obs, {1, 1, 1}, std::max(1.0, truth.max_coherence()));
  const double gamma = 0.1;
  const SolveReport report =
      gog_run(obs, {1, 1, 1}, GoGConfig{.mu0 = 3.0, .gamma = gamma, .max_iterations = 50}, init);
  ASSERT_GT(report.trace.size(), 2u);
  double previous = std::numeric_limits<double>::infinity();
  for (const TraceEntry& e : report.trace) {
    EXPECT_LE(e.distance_from_init, gamma + 1e-12);
    EXPECT_LE(e.objective, previous);
    previous = e.objective;
  }
}

TEST(GogRun, StopReasonNames) {
  EXPECT_STREQ(to_string(StopReason::MaxIterations), "max_iterations");
  EXPECT_STREQ(to_string(StopReason::ObjectiveZero), "objective_zero");
  EXPECT_STREQ(to_string(StopReason::GradientSmall), "gradient_small");
  EXPECT_STREQ(to_string(StopReason::ObjectiveStalled), "objective_stalled");
}

}  // namespace
}  // namespace tcomplete
