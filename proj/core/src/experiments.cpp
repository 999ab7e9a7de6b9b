#include "tcomplete/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "tcomplete/observations.hpp"
#include "tcomplete/rng.hpp"
#include "tcomplete/spectral_init.hpp"

namespace tcomplete {

namespace {

// Stream tags mixed into a trial seed.
enum : std::uint64_t { kTruthStream = 1, kSampleStream = 2, kPerturbStream = 3 };

Frame gaussian_eigenframe(Index d, Index r, Rng& rng) {
  Eigen::MatrixXd g(d, d);
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < d; ++i) g(i, j) = rng.normal();
  return top_eigenspace(0.5 * (g + g.transpose()), r);
}

}  // namespace

double GroundTruth::max_coherence() const {
  return std::max({coherence(factors.x), coherence(factors.y), coherence(factors.z)});
}

GroundTruth generate_odeco(Index d, Index r, std::uint64_t seed) {
  if (r < 1 || r > d) throw std::invalid_argument("generate_odeco: need 1 <= r <= d");
  Rng rng(seed);
  Frame u = gaussian_eigenframe(d, r, rng);
  Frame v = gaussian_eigenframe(d, r, rng);
  Frame w = gaussian_eigenframe(d, r, rng);
  CoreTensor core({r, r, r});
  for (Index k = 0; k < r; ++k) core(k, k, k) = static_cast<double>(d);
  Tensor3 tensor = multilinear_product(core, u.matrix(), v.matrix(), w.matrix());
  return {std::move(tensor), TripleFrame{std::move(u), std::move(v), std::move(w)}, std::move(core)};
}

Index sample_size(Index d, Index r, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("sample_size: alpha must be > 0");
  const double exact = alpha * std::sqrt(static_cast<double>(r)) *
                       std::pow(static_cast<double>(d), 1.5);
  return std::max<Index>(2, static_cast<Index>(std::floor(exact + 0.5)));
}

TrialRecord perturbed_init_trial(Index d, Index r, double alpha, double sigma,
                                 std::uint64_t seed, const TrialConfig& config) {
  if (!(alpha > 0.0)) throw std::invalid_argument("run_trial: alpha must be > 0");
  if (!(sigma >= 0.0)) throw std::invalid_argument("perturbed_init_trial: sigma must be >= 0");
  const auto started = std::chrono::steady_clock::now();

  const GroundTruth truth = generate_odeco(d, r, derive_seed({seed, kTruthStream}));
  const Index n = sample_size(d, r, alpha);
  const ObservationSet obs = sample_uniform(truth.tensor, n, derive_seed({seed, kSampleStream}));

  GoGConfig solver = config.solver;
  if (config.mu0_from_truth) solver.mu0 = std::max(1.0, truth.max_coherence());
  const Dims3 ranks{r, r, r};

  TripleFrame spectral = spectral_frames(obs, ranks);
  if (sigma > 0.0) {
    Rng rng(derive_seed({seed, kPerturbStream}));
    auto perturb = [&](const Frame& f) {
      Eigen::MatrixXd noise(f.dim(), f.rank());
      for (Index j = 0; j < noise.cols(); ++j)
        for (Index i = 0; i < noise.rows(); ++i) noise(i, j) = rng.normal();
      return Frame::orthonormalize(f.matrix() + sigma * noise);
    };
    spectral = TripleFrame{perturb(spectral.x), perturb(spectral.y), perturb(spectral.z)};
  }
  const TripleFrame init{trim(spectral.x, solver.mu0), trim(spectral.y, solver.mu0),
                         trim(spectral.z, solver.mu0)};

  const SolveReport report = gog_run(obs, ranks, solver, init);
  const Tensor3 estimate = report.reconstruction();

  TrialRecord record;
  record.d = d;
  record.r = r;
  record.alpha = alpha;
  record.n = n;
  record.seed = seed;
  record.rel_error = norm(difference(estimate, truth.tensor)) / norm(truth.tensor);
  record.success = record.rel_error <= kSuccessThreshold;
  record.iterations = report.final_state.iteration;
  record.dp_init = triple_distance(init, truth.factors);
  record.runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return record;
}

TrialRecord run_trial(Index d, Index r, double alpha, std::uint64_t seed,
                      const TrialConfig& config) {
  return perturbed_init_trial(d, r, alpha, 0.0, seed, config);
}

std::uint64_t trial_seed(std::uint64_t master, Index d, Index r, std::size_t alpha_index,
                         Index trial) {
  return derive_seed({master, static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(r),
                      static_cast<std::uint64_t>(alpha_index), static_cast<std::uint64_t>(trial)});
}

SweepResult sweep(Index d, const std::vector<Index>& ranks, const std::vector<double>& alphas,
                  const SweepOptions& options, const TrialConfig& config) {
  if (ranks.empty() || alphas.empty()) throw std::invalid_argument("sweep: empty rank or alpha list");
  if (options.trials_per_cell < 1) throw std::invalid_argument("sweep: trials_per_cell must be >= 1");

  struct Job {
    Index r;
    double alpha;
    std::size_t alpha_index;
    Index trial;
  };
  std::vector<Job> jobs;
  for (const Index r : ranks)
    for (std::size_t a = 0; a < alphas.size(); ++a)
      for (Index t = 0; t < options.trials_per_cell; ++t) jobs.push_back({r, alphas[a], a, t});

  SweepResult result;
  result.records.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= jobs.size()) return;
      const Job& job = jobs[k];
      try {
        TrialRecord rec = run_trial(d, job.r, job.alpha,
                                    trial_seed(options.seed, d, job.r, job.alpha_index, job.trial),
                                    config);
        rec.trial = job.trial;
        result.records[k] = rec;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(jobs.size());
        return;
      }
    }
  };

  unsigned threads = options.threads == 0 ? std::thread::hardware_concurrency() : options.threads;
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(jobs.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  const auto per_cell = static_cast<std::size_t>(options.trials_per_cell);
  for (std::size_t begin = 0; begin < jobs.size(); begin += per_cell) {
    CellSummary cell{jobs[begin].r, jobs[begin].alpha, options.trials_per_cell, 0.0, 0.0, 0.0};
    for (std::size_t k = begin; k < begin + per_cell; ++k) {
      const TrialRecord& rec = result.records[k];
      cell.success_rate += rec.success ? 1.0 : 0.0;
      cell.mean_rel_error += rec.rel_error;
      cell.mean_iterations += rec.iterations;
    }
    const auto count = static_cast<double>(per_cell);
    cell.success_rate /= count;
    cell.mean_rel_error /= count;
    cell.mean_iterations /= count;
    result.cells.push_back(cell);
  }
  return result;
}

}  // namespace tcomplete
