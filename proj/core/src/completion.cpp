#include "tcomplete/completion.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "tcomplete/errors.hpp"
#include "tcomplete/spectral_init.hpp"

namespace tcomplete {

namespace {

constexpr double kSingularRatio = 1e-12;
constexpr double kPenaltyClamp = 26.0;

void check_frames(const TripleFrame& frames, const ObservationSet& obs, const char* what) {
  if (frames.dims() != obs.dims()) {
    throw std::invalid_argument(std::string(what) + ": frame dimensions do not match observations");
  }
}

// Row i of the design matrix: x_{i1} (x) y_{i2} (x) z_{i3}, flattened in core
// storage order (j3 fastest).
Eigen::MatrixXd design_matrix(const TripleFrame& frames, const ObservationSet& obs) {
  const Eigen::MatrixXd& x = frames.x.matrix();
  const Eigen::MatrixXd& y = frames.y.matrix();
  const Eigen::MatrixXd& z = frames.z.matrix();
  const Index r1 = x.cols(), r2 = y.cols(), r3 = z.cols();
  Eigen::MatrixXd v(obs.size(), r1 * r2 * r3);
  for (Index i = 0; i < obs.size(); ++i) {
    const auto& idx = obs[i].index;
    Index col = 0;
    for (Index j1 = 0; j1 < r1; ++j1) {
      const double xv = x(idx[0], j1);
      for (Index j2 = 0; j2 < r2; ++j2) {
        const double xy = xv * y(idx[1], j2);
        for (Index j3 = 0; j3 < r3; ++j3) v(i, col++) = xy * z(idx[2], j3);
      }
    }
  }
  return v;
}

Eigen::VectorXd observed_values(const ObservationSet& obs) {
  Eigen::VectorXd t(obs.size());
  for (Index i = 0; i < obs.size(); ++i) t(i) = obs[i].value;
  return t;
}

struct FitResult {
  CoreTensor core;
  double fit = 0.0;
  bool used_pseudoinverse = false;
};

FitResult fit_core(const TripleFrame& frames, const ObservationSet& obs) {
  const Dims3 ranks = frames.ranks();
  const Eigen::MatrixXd v = design_matrix(frames, obs);
  const Eigen::VectorXd t = observed_values(obs);
  const Index size = v.cols();

  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(size, size);
  normal.selfadjointView<Eigen::Lower>().rankUpdate(v.transpose());
  const Eigen::VectorXd moment = v.transpose() * t;

  FitResult out;
  Eigen::VectorXd c;
  Eigen::LLT<Eigen::MatrixXd> llt(normal);
  if (llt.info() == Eigen::Success && llt.rcond() >= kSingularRatio) {
    c = llt.solve(moment);
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
        normal.selfadjointView<Eigen::Lower>().toDenseMatrix());
    if (eig.info() != Eigen::Success) throw NumericError("solve_core: eigensolver failed");
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    const double cutoff = kSingularRatio * std::max(lambda.maxCoeff(), 0.0);
    Eigen::VectorXd projected = eig.eigenvectors().transpose() * moment;
    for (Index k = 0; k < size; ++k) {
      projected(k) = lambda(k) > cutoff && lambda(k) > 0.0 ? projected(k) / lambda(k) : 0.0;
    }
    c = eig.eigenvectors() * projected;
    out.used_pseudoinverse = true;
  }
  out.fit = 0.5 * (v * c - t).squaredNorm();
  out.core = CoreTensor(ranks, std::vector<double>(c.data(), c.data() + c.size()));
  return out;
}

double mode_penalty(const Frame& frame, double mu0) {
  const double scale = static_cast<double>(frame.dim()) /
                       (3.0 * mu0 * static_cast<double>(frame.rank()));
  double sum = 0.0;
  for (Index j = 0; j < frame.dim(); ++j) sum += penalty_g0(scale * frame.matrix().row(j).squaredNorm());
  return sum;
}

}  // namespace

void GoGConfig::validate() const {
  if (!(mu0 >= 1.0)) throw std::invalid_argument("GoGConfig: mu0 must be >= 1");
  if (rho && !(*rho >= 0.0)) throw std::invalid_argument("GoGConfig: rho must be >= 0");
  if (!(gamma > 0.0)) throw std::invalid_argument("GoGConfig: gamma must be > 0");
  if (!(eps_tol > 0.0)) throw std::invalid_argument("GoGConfig: eps_tol must be > 0");
  if (max_iterations < 1) throw std::invalid_argument("GoGConfig: max_iterations must be >= 1");
  if (!(line_search.growth > 1.0)) throw std::invalid_argument("GoGConfig: growth must be > 1");
  if (!(line_search.initial_fraction > 0.0)) {
    throw std::invalid_argument("GoGConfig: initial_fraction must be > 0");
  }
  if (!(line_search.golden_tolerance > 0.0)) {
    throw std::invalid_argument("GoGConfig: golden_tolerance must be > 0");
  }
  if (line_search.max_probes < 1) throw std::invalid_argument("GoGConfig: max_probes must be >= 1");
}

double auto_rho(const ObservationSet& obs) {
  const Dims3& dims = obs.dims();
  const double lambda = std::max(top_eigenvalue(second_moment_estimate(obs, 1)), 0.0);
  const double d = static_cast<double>(*std::max_element(dims.begin(), dims.end()));
  return 10.0 * static_cast<double>(obs.size()) / static_cast<double>(volume(dims)) * lambda *
         std::log(d);
}

double resolve_rho(const GoGConfig& config, const ObservationSet& obs) {
  return config.rho ? *config.rho : auto_rho(obs);
}

CoreSolve solve_core_detailed(const TripleFrame& frames, const ObservationSet& obs) {
  check_frames(frames, obs, "solve_core");
  FitResult fit = fit_core(frames, obs);
  return {std::move(fit.core), fit.used_pseudoinverse};
}

CoreTensor solve_core(const TripleFrame& frames, const ObservationSet& obs) {
  return solve_core_detailed(frames, obs).core;
}

ObjectiveValue objective_F(const TripleFrame& frames, const ObservationSet& obs) {
  check_frames(frames, obs, "objective_F");
  FitResult fit = fit_core(frames, obs);
  return {fit.fit, std::move(fit.core)};
}

double penalty_g0(double z) {
  if (z <= 1.0) return 0.0;
  const double s = z - 1.0;
  if (s <= kPenaltyClamp) return std::expm1(s * s);
  const double at_clamp = std::expm1(kPenaltyClamp * kPenaltyClamp);
  const double slope = 2.0 * kPenaltyClamp * std::exp(kPenaltyClamp * kPenaltyClamp);
  return at_clamp + slope * (s - kPenaltyClamp);
}

double penalty_g0_derivative(double z) {
  if (z <= 1.0) return 0.0;
  const double s = std::min(z - 1.0, kPenaltyClamp);
  return 2.0 * s * std::exp(s * s);
}

double penalty_G(const TripleFrame& frames, double mu0, double rho) {
  if (!(mu0 >= 1.0)) throw std::invalid_argument("penalty_G: mu0 must be >= 1");
  if (!(rho >= 0.0)) throw std::invalid_argument("penalty_G: rho must be >= 0");
  if (rho == 0.0) return 0.0;
  return rho * (mode_penalty(frames.x, mu0) + mode_penalty(frames.y, mu0) +
                mode_penalty(frames.z, mu0));
}

Eigen::MatrixXd penalty_gradient(const Frame& frame, double mu0, double rho) {
  const Eigen::MatrixXd& m = frame.matrix();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m.rows(), m.cols());
  if (rho == 0.0) return g;
  const double scale = static_cast<double>(frame.dim()) /
                       (3.0 * mu0 * static_cast<double>(frame.rank()));
  for (Index j = 0; j < m.rows(); ++j) {
    const double z = scale * m.row(j).squaredNorm();
    if (z <= 1.0) continue;
    g.row(j) = rho * penalty_g0_derivative(z) * 2.0 * scale * m.row(j);
  }
  return g;
}

TripleTangent riemannian_gradient(const TripleFrame& frames, const CoreTensor& core,
                                  const ObservationSet& obs, double mu0, double rho) {
  check_frames(frames, obs, "riemannian_gradient");
  const Eigen::MatrixXd& x = frames.x.matrix();
  const Eigen::MatrixXd& y = frames.y.matrix();
  const Eigen::MatrixXd& z = frames.z.matrix();
  const auto [r1, r2, r3] = core.dims();
  if (frames.ranks() != core.dims()) {
    throw std::invalid_argument("riemannian_gradient: core dims do not match frame ranks");
  }

  Eigen::MatrixXd gx = Eigen::MatrixXd::Zero(x.rows(), r1);
  Eigen::MatrixXd gy = Eigen::MatrixXd::Zero(y.rows(), r2);
  Eigen::MatrixXd gz = Eigen::MatrixXd::Zero(z.rows(), r3);
  const double* c = core.values().data();
  Eigen::MatrixXd cz(r1, r2);     // C x_3 z
  Eigen::VectorXd along_x(r1);    // C x_2 y x_3 z
  Eigen::VectorXd along_y(r2);    // C x_1 x x_3 z
  Eigen::VectorXd along_z(r3);    // C x_1 x x_2 y

  for (const Sample& s : obs.samples()) {
    const Index i1 = s.index[0], i2 = s.index[1], i3 = s.index[2];
    along_z.setZero();
    for (Index j1 = 0; j1 < r1; ++j1)
      for (Index j2 = 0; j2 < r2; ++j2) {
        const double* row = c + (j1 * r2 + j2) * r3;
        const double xy = x(i1, j1) * y(i2, j2);
        double acc = 0.0;
        for (Index j3 = 0; j3 < r3; ++j3) {
          acc += row[j3] * z(i3, j3);
          along_z(j3) += xy * row[j3];
        }
        cz(j1, j2) = acc;
      }
    along_x.noalias() = cz * y.row(i2).transpose();
    along_y.noalias() = cz.transpose() * x.row(i1).transpose();
    const double residual = x.row(i1).dot(along_x) - s.value;
    gx.row(i1) += residual * along_x.transpose();
    gy.row(i2) += residual * along_y.transpose();
    gz.row(i3) += residual * along_z.transpose();
  }

  gx += penalty_gradient(frames.x, mu0, rho);
  gy += penalty_gradient(frames.y, mu0, rho);
  gz += penalty_gradient(frames.z, mu0, rho);
  return {tangent_project(frames.x, gx).matrix, tangent_project(frames.y, gy).matrix,
          tangent_project(frames.z, gz).matrix};
}

PenalizedObjective::PenalizedObjective(const ObservationSet& obs, double mu0, double rho)
    : obs_(obs), mu0_(mu0), rho_(rho) {
  if (!(mu0 >= 1.0)) throw std::invalid_argument("PenalizedObjective: mu0 must be >= 1");
  if (!(rho >= 0.0)) throw std::invalid_argument("PenalizedObjective: rho must be >= 0");
}

PenalizedObjective::Evaluation PenalizedObjective::operator()(const TripleFrame& frames) const {
  check_frames(frames, obs_, "PenalizedObjective");
  FitResult fit = fit_core(frames, obs_);
  Evaluation out;
  out.fit = fit.fit;
  out.penalty = penalty_G(frames, mu0_, rho_);
  out.total = out.fit + out.penalty;
  out.core = std::move(fit.core);
  out.used_pseudoinverse = fit.used_pseudoinverse;
  return out;
}

TripleTangent PenalizedObjective::gradient(const TripleFrame& frames, const CoreTensor& core) const {
  return riemannian_gradient(frames, core, obs_, mu0_, rho_);
}

LineSearchResult line_search_detailed(const TripleFrame& frames, const TripleTangent& directions,
                                      const PenalizedObjective& objective,
                                      double current_value, const GoGConfig& config,
                                      const TripleFrame& anchor) {
  const LineSearchOptions& opt = config.line_search;
  LineSearchResult best{0.0, frames, {current_value, 0.0, 0.0, CoreTensor(), false}, 0};
  const double direction_norm = directions.norm();
  if (direction_norm == 0.0) return best;

  const GeodesicPath path_x(frames.x, directions.x);
  const GeodesicPath path_y(frames.y, directions.y);
  const GeodesicPath path_z(frames.z, directions.z);
  const double infinity = std::numeric_limits<double>::infinity();
  int probes = 0;

  // phi(t), +infinity outside the trust ball. Tracks the best admissible point.
  auto probe = [&](double t) {
    ++probes;
    TripleFrame moved{path_x.at(t), path_y.at(t), path_z.at(t)};
    if (triple_distance(moved, anchor) > config.gamma) return infinity;
    PenalizedObjective::Evaluation eval = objective(moved);
    const double value = eval.total;
    if (value < best.evaluation.total) {
      best.step = t;
      best.frames = std::move(moved);
      best.evaluation = std::move(eval);
    }
    return value;
  };

  // Triple distance never exceeds sum_k sqrt(r_k), so a larger ball is the
  // whole manifold and that bound sets the bracket scale instead.
  const Dims3 ranks = frames.ranks();
  double diameter = 0.0;
  for (const Index r : ranks) diameter += std::sqrt(static_cast<double>(r));
  const double t0 = opt.initial_fraction * std::min(config.gamma, diameter) /
                    std::max(direction_norm, std::numeric_limits<double>::min());
  double lo = 0.0;
  double mid = t0;
  double mid_value = probe(mid);
  double hi;

  if (mid_value < current_value) {
    // Expand until the objective rises or the ball is left.
    hi = mid * opt.growth;
    double hi_value = probe(hi);
    while (hi_value < mid_value && probes < opt.max_probes) {
      lo = mid;
      mid = hi;
      mid_value = hi_value;
      hi = mid * opt.growth;
      hi_value = probe(hi);
    }
  } else {
    // Contract toward zero until a decrease appears.
    hi = mid;
    bool found = false;
    while (probes < opt.max_probes) {
      mid = hi / opt.growth;
      mid_value = probe(mid);
      if (mid_value < current_value) {
        found = true;
        break;
      }
      hi = mid;
    }
    if (!found) {
      best.probes = probes;
      return best;
    }
  }

  // Golden-section refinement on [lo, hi].
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - ratio * (b - a);
  double d = a + ratio * (b - a);
  double fc = probe(c);
  double fd = probe(d);
  while (probes < opt.max_probes && (b - a) > opt.golden_tolerance * std::max(best.step, c)) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - ratio * (b - a);
      fc = probe(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + ratio * (b - a);
      fd = probe(d);
    }
  }

  best.probes = probes;
  return best;
}

double line_search(const TripleFrame& frames, const TripleTangent& directions,
                   const ObservationSet& obs, const GoGConfig& config, const TripleFrame& anchor) {
  config.validate();
  const PenalizedObjective objective(obs, config.mu0, resolve_rho(config, obs));
  const double current = objective(frames).total;
  return line_search_detailed(frames, directions, objective, current, config, anchor).step;
}

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::MaxIterations: return "max_iterations";
    case StopReason::ObjectiveZero: return "objective_zero";
    case StopReason::GradientSmall: return "gradient_small";
    case StopReason::ObjectiveStalled: return "objective_stalled";
  }
  return "unknown";
}

Tensor3 SolveReport::reconstruction() const {
  return multilinear_product(final_state.core, final_state.frames.x.matrix(),
                             final_state.frames.y.matrix(), final_state.frames.z.matrix());
}

SolveReport gog_run(const ObservationSet& obs, const Dims3& ranks, const GoGConfig& config,
                    const TripleFrame& init) {
  const auto started = std::chrono::steady_clock::now();
  config.validate();
  check_frames(init, obs, "gog_run");
  if (init.ranks() != ranks) throw std::invalid_argument("gog_run: init ranks differ from ranks");

  const double rho = resolve_rho(config, obs);
  const PenalizedObjective objective(obs, config.mu0, rho);
  const double sample_ratio = static_cast<double>(obs.size()) / static_cast<double>(volume(obs.dims()));
  double data_energy = 0.0;
  for (const Sample& s : obs.samples()) data_energy += 0.5 * s.value * s.value;
  const double zero_floor = config.eps_tol * config.eps_tol * data_energy;
  const double gradient_floor = config.eps_tol * sample_ratio;

  PenalizedObjective::Evaluation eval = objective(init);
  bool pseudoinverse = eval.used_pseudoinverse;
  SolveReport report{SolveState{init, std::move(eval.core), eval.total, 0.0, 0},
                     false,
                     StopReason::MaxIterations,
                     {},
                     0.0,
                     rho,
                     {}};
  SolveState& state = report.final_state;
  double step = 0.0;
  double last_relative_decrease = std::numeric_limits<double>::infinity();

  while (true) {
    const TripleTangent gradient = objective.gradient(state.frames, state.core);
    state.gradient_norm = gradient.norm();
    report.trace.push_back({state.iteration, state.objective, state.gradient_norm, step,
                            triple_distance(state.frames, init)});

    if (state.objective <= zero_floor) {
      report.converged = true;
      report.stop_reason = StopReason::ObjectiveZero;
      break;
    }
    if (state.gradient_norm < gradient_floor) {
      report.converged = true;
      report.stop_reason = StopReason::GradientSmall;
      break;
    }
    if (last_relative_decrease < config.eps_tol) {
      report.converged = true;
      report.stop_reason = StopReason::ObjectiveStalled;
      break;
    }
    if (state.iteration >= config.max_iterations) {
      report.stop_reason = StopReason::MaxIterations;
      break;
    }

    LineSearchResult ls =
        line_search_detailed(state.frames, -gradient, objective, state.objective, config, init);
    if (ls.step == 0.0) {
      report.converged = true;
      report.stop_reason = StopReason::ObjectiveStalled;
      break;
    }
    pseudoinverse = pseudoinverse || ls.evaluation.used_pseudoinverse;
    last_relative_decrease = (state.objective - ls.evaluation.total) / state.objective;
    state.frames = std::move(ls.frames);
    state.core = std::move(ls.evaluation.core);
    state.objective = ls.evaluation.total;
    step = ls.step;
    ++state.iteration;
  }

  if (pseudoinverse) {
    report.warnings.emplace_back(
        "normal matrix was numerically singular; used the minimum-norm pseudoinverse core");
  }
  report.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return report;
}

}  // namespace tcomplete
