#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "tcomplete/errors.hpp"
#include "tcomplete/io.hpp"
#include "tcomplete/observations.hpp"
#include "tcomplete/rng.hpp"
#include "tcomplete/spectral_init.hpp"

namespace tcomplete::cli {

namespace {

double parse_number(const std::string& text, const std::string& flag) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw UsageError(flag + ": malformed number '" + text + "'");
  }
  if (used != text.size()) throw UsageError(flag + ": malformed number '" + text + "'");
  return value;
}

Index parse_index(const std::string& text, const std::string& flag) {
  std::size_t used = 0;
  long long value = 0;
  try {
    value = std::stoll(text, &used);
  } catch (const std::exception&) {
    throw UsageError(flag + ": malformed integer '" + text + "'");
  }
  if (used != text.size()) throw UsageError(flag + ": malformed integer '" + text + "'");
  return static_cast<Index>(value);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) parts.push_back(item);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

std::vector<Index> parse_index_list(const std::string& text, const std::string& flag) {
  std::vector<Index> out;
  for (const std::string& part : split(text, ',')) {
    const Index v = parse_index(part, flag);
    if (v < 1) throw UsageError(flag + ": values must be positive");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(flag + ": empty list");
  return out;
}

Dims3 parse_triple(const std::string& text, const std::string& flag) {
  const std::vector<Index> v = parse_index_list(text, flag);
  if (v.size() == 1) return {v[0], v[0], v[0]};
  if (v.size() != 3) throw UsageError(flag + ": expected one or three comma-separated values");
  return {v[0], v[1], v[2]};
}

std::optional<double> parse_auto(const std::string& text, const std::string& flag) {
  if (text == "auto") return std::nullopt;
  return parse_number(text, flag);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool cubic(const Dims3& d) { return d[0] == d[1] && d[1] == d[2]; }

TrialConfig trial_config(const CliConfig& c) {
  TrialConfig tc;
  tc.solver.rho = c.rho;
  tc.solver.gamma = c.gamma;
  tc.solver.eps_tol = c.eps_tol;
  tc.solver.max_iterations = c.max_iterations;
  tc.mu0_from_truth = !c.mu0.has_value();
  if (c.mu0) tc.solver.mu0 = *c.mu0;
  return tc;
}

void finalize_records(std::vector<TrialRecord>& records, bool timing) {
  if (timing) return;
  for (TrialRecord& r : records) r.runtime_ms = 0.0;
}

// Largest coherence of the leading left singular subspaces of the unfoldings.
double tensor_coherence(const Tensor3& t, const Dims3& ranks) {
  double mu = 1.0;
  for (int mode = 1; mode <= 3; ++mode) {
    const Eigen::MatrixXd m = unfold(t, mode).matrix;
    mu = std::max(mu, coherence(top_eigenspace(m * m.transpose(), ranks[mode - 1])));
  }
  return mu;
}

TripleFrame truth_frames(const Tensor3& t, const Dims3& ranks) {
  auto frame = [&](int mode) {
    const Eigen::MatrixXd m = unfold(t, mode).matrix;
    return top_eigenspace(m * m.transpose(), ranks[mode - 1]);
  };
  return {frame(1), frame(2), frame(3)};
}

Index resolve_n(const CliConfig& c, Index d, Index r) {
  return c.n ? *c.n : sample_size(d, r, c.alphas.front());
}

int run_complete_from_observations(const CliConfig& c, std::ostream& log) {
  const ObservationSet obs = load_observations(c.input);
  for (std::size_t k = 0; k < 3; ++k) {
    if (c.ranks[k] > obs.dims()[k]) throw UsageError("--ranks exceed the observation dimensions");
  }
  GoGConfig solver = trial_config(c).solver;
  const TripleFrame spectral = spectral_frames(obs, c.ranks);
  solver.mu0 = c.mu0 ? *c.mu0
                     : std::max({1.0, coherence(spectral.x), coherence(spectral.y),
                                 coherence(spectral.z)});
  const TripleFrame init{trim(spectral.x, solver.mu0), trim(spectral.y, solver.mu0),
                         trim(spectral.z, solver.mu0)};
  const SolveReport report = gog_run(obs, c.ranks, solver, init);
  log << "iterations=" << report.final_state.iteration
      << " objective=" << format_double(report.final_state.objective)
      << " stop=" << to_string(report.stop_reason) << '\n';
  for (const std::string& w : report.warnings) log << "warning: " << w << '\n';
  try {
    save_tensor(c.out, report.reconstruction());
  } catch (const std::runtime_error& e) {
    throw IoError(e.what());
  }
  return kOk;
}

int run_complete_from_tensor(const CliConfig& c, std::ostream& log) {
  Tensor3 truth;
  try {
    truth = load_tensor(c.tensor);
  } catch (const std::runtime_error& e) {
    throw IoError(e.what());
  }
  const Dims3& dims = truth.dims();
  for (std::size_t k = 0; k < 3; ++k) {
    if (c.ranks[k] > dims[k]) throw UsageError("--ranks exceed the tensor dimensions");
  }
  const Index d = std::max({dims[0], dims[1], dims[2]});
  const Index r = std::max({c.ranks[0], c.ranks[1], c.ranks[2]});
  const Index n = resolve_n(c, d, r);
  GoGConfig solver = trial_config(c).solver;
  if (!c.mu0) solver.mu0 = tensor_coherence(truth, c.ranks);

  std::vector<TrialRecord> records;
  for (Index t = 0; t < c.trials; ++t) {
    const std::uint64_t seed = trial_seed(c.seed, d, r, 0, t);
    const ObservationSet obs = sample_uniform(truth, n, seed);
    const TripleFrame init = initialize(obs, c.ranks, solver.mu0);
    const SolveReport report = gog_run(obs, c.ranks, solver, init);
    TrialRecord rec;
    rec.d = d;
    rec.r = r;
    rec.alpha = static_cast<double>(n) /
                (std::sqrt(static_cast<double>(r)) * std::pow(static_cast<double>(d), 1.5));
    rec.n = n;
    rec.trial = t;
    rec.seed = seed;
    rec.rel_error = norm(difference(report.reconstruction(), truth)) / norm(truth);
    rec.success = rec.rel_error <= kSuccessThreshold;
    rec.iterations = report.final_state.iteration;
    rec.dp_init = triple_distance(init, truth_frames(truth, c.ranks));
    rec.runtime_ms = report.wall_time_ms;
    records.push_back(rec);
  }
  finalize_records(records, c.timing);
  emit_csv(records, c.out);
  log << "wrote " << records.size() << " record(s) to " << c.out << '\n';
  return kOk;
}

int run_complete_synthetic(const CliConfig& c, std::ostream& log) {
  if (!cubic(c.dims) || !cubic(c.ranks)) {
    throw UsageError("synthetic trials need cubic --dims and equal --ranks");
  }
  const Index d = c.dims[0], r = c.ranks[0];
  if (r > d) throw UsageError("--ranks must not exceed --dims");
  const TrialConfig tc = trial_config(c);
  std::vector<TrialRecord> records;
  for (Index t = 0; t < c.trials; ++t) {
    const std::uint64_t seed = trial_seed(c.seed, d, r, 0, t);
    const double alpha =
        c.n ? static_cast<double>(*c.n) /
                  (std::sqrt(static_cast<double>(r)) * std::pow(static_cast<double>(d), 1.5))
            : c.alphas.front();
    TrialRecord rec = perturbed_init_trial(d, r, alpha, c.sigma, seed, tc);
    rec.trial = t;
    records.push_back(rec);
  }
  finalize_records(records, c.timing);
  emit_csv(records, c.out);
  log << "wrote " << records.size() << " record(s) to " << c.out << '\n';
  return kOk;
}

int run_sweep(const CliConfig& c, std::ostream& log) {
  const Index d = c.dims[0];
  for (const Index r : c.rank_list) {
    if (r > d) throw UsageError("--ranks must not exceed --d");
  }
  SweepOptions options;
  options.trials_per_cell = c.trials;
  options.seed = c.seed;
  options.threads = c.threads;
  SweepResult result = sweep(d, c.rank_list, c.alphas, options, trial_config(c));
  finalize_records(result.records, c.timing);
  emit_csv(result.records, c.out);
  for (const CellSummary& cell : result.cells) {
    log << "r=" << cell.r << " alpha=" << format_double(cell.alpha)
        << " success_rate=" << format_double(cell.success_rate) << '\n';
  }
  return kOk;
}

int run_init_only(const CliConfig& c, std::ostream& log) {
  std::optional<ObservationSet> obs;
  std::optional<TripleFrame> truth;
  double mu0 = c.mu0.value_or(1.0);
  Dims3 ranks = c.ranks;
  if (!c.input.empty()) {
    try {
      obs = load_observations(c.input);
    } catch (const std::runtime_error& e) {
      throw IoError(e.what());
    }
  } else {
    if (!cubic(c.dims) || !cubic(c.ranks)) {
      throw UsageError("synthetic init-only needs cubic --dims and equal --ranks");
    }
    const Index d = c.dims[0], r = c.ranks[0];
    if (r > d) throw UsageError("--ranks must not exceed --dims");
    const GroundTruth gt = generate_odeco(d, r, derive_seed({c.seed, 1}));
    const Index n = resolve_n(c, d, r);
    obs = sample_uniform(gt.tensor, n, derive_seed({c.seed, 2}));
    if (!c.mu0) mu0 = std::max(1.0, gt.max_coherence());
    truth = gt.factors;
  }
  for (std::size_t k = 0; k < 3; ++k) {
    if (ranks[k] > obs->dims()[k]) throw UsageError("--ranks exceed the dimensions");
  }
  const TripleFrame spectral = spectral_frames(*obs, ranks);
  if (!c.mu0 && !truth) {
    mu0 = std::max({1.0, coherence(spectral.x), coherence(spectral.y), coherence(spectral.z)});
  }
  const TripleFrame init{trim(spectral.x, mu0), trim(spectral.y, mu0), trim(spectral.z, mu0)};

  std::ofstream out(c.out);
  if (!out) throw IoError("cannot open " + c.out + " for writing");
  out << "mode,d,r,coherence,dp_to_truth\n";
  for (int mode = 1; mode <= 3; ++mode) {
    out << mode << ',' << init[mode].dim() << ',' << init[mode].rank() << ','
        << format_double(coherence(init[mode])) << ',';
    if (truth) out << format_double(proj_distance(init[mode], (*truth)[mode]));
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + c.out);
  log << "wrote initialization summary to " << c.out << '\n';
  return kOk;
}

}  // namespace

std::vector<double> parse_alpha_list(const std::string& text) {
  std::vector<double> out;
  const std::vector<std::string> range = split(text, ':');
  if (range.size() == 3) {
    const double start = parse_number(range[0], "--alphas");
    const double stop = parse_number(range[1], "--alphas");
    const double step = parse_number(range[2], "--alphas");
    if (!(step > 0.0) || !(stop >= start)) throw UsageError("--alphas: need step > 0 and stop >= start");
    const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    for (long k = 0; k <= count; ++k) out.push_back(start + static_cast<double>(k) * step);
  } else if (range.size() == 1) {
    for (const std::string& part : split(text, ',')) out.push_back(parse_number(part, "--alphas"));
  } else {
    throw UsageError("--alphas: expected a,b,c or start:stop:step");
  }
  if (out.empty()) throw UsageError("--alphas: empty list");
  for (const double a : out) {
    if (!(a > 0.0)) throw UsageError("--alphas: values must be positive");
  }
  return out;
}

CliConfig parse_args(const std::vector<std::string>& args) {
  CLI::App app{"Low-rank Tucker tensor completion on Grassmannians", "tcomplete"};
  app.require_subcommand(1);

  std::string dims, d, ranks, n, alpha, alphas, mu0 = "auto", rho = "auto", gamma = "inf";
  CliConfig config;

  auto add_solver_flags = [&](CLI::App* sub) {
    sub->add_option("--mu0", mu0, "incoherence level mu0 >= 1, or 'auto'");
    sub->add_option("--rho", rho, "penalty weight >= 0, or 'auto'");
    sub->add_option("--gamma", gamma, "trust-ball radius > 0, or 'inf'");
    sub->add_option("--eps-tol", config.eps_tol, "stopping tolerance");
    sub->add_option("--max-iterations", config.max_iterations, "iteration cap (>= 1)");
    sub->add_option("--seed", config.seed, "master seed");
    sub->add_option("--out", config.out, "output path")->required();
    sub->add_flag("--timing", config.timing, "write wall-clock runtime_ms instead of 0");
  };

  CLI::App* complete = app.add_subcommand("complete", "run completion trials or complete a file");
  complete->add_option("--dims", dims, "d1,d2,d3 (or a single d)");
  complete->add_option("--ranks", ranks, "r1,r2,r3 (or a single r)")->required();
  complete->add_option("--n", n, "number of sampled entries");
  complete->add_option("--alpha", alpha, "n = alpha sqrt(r) d^{3/2}");
  complete->add_option("--trials", config.trials, "number of trials");
  complete->add_option("--sigma", config.sigma, "perturbation of the spectral frames");
  complete->add_option("--input", config.input, "observation file to complete");
  complete->add_option("--tensor", config.tensor, "full tensor file to sample from");
  add_solver_flags(complete);

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "success-rate sweep over ranks and alphas");
  sweep_cmd->add_option("--d", d, "cubic dimension")->required();
  sweep_cmd->add_option("--ranks", ranks, "comma-separated ranks")->required();
  sweep_cmd->add_option("--alphas", alphas, "a,b,c or start:stop:step")->required();
  sweep_cmd->add_option("--trials", config.trials, "trials per cell");
  sweep_cmd->add_option("--threads", config.threads, "worker threads (0 = all cores)");
  add_solver_flags(sweep_cmd);

  CLI::App* init = app.add_subcommand("init-only", "spectral initialization summary");
  init->add_option("--dims", dims, "d1,d2,d3 (or a single d)");
  init->add_option("--ranks", ranks, "r1,r2,r3 (or a single r)")->required();
  init->add_option("--n", n, "number of sampled entries");
  init->add_option("--alpha", alpha, "n = alpha sqrt(r) d^{3/2}");
  init->add_option("--input", config.input, "observation file");
  add_solver_flags(init);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw UsageError(app.help(), kOk);
  } catch (const CLI::ParseError& e) {
    throw UsageError(std::string(e.what()) + "\n" + app.help());
  }

  config.mu0 = parse_auto(mu0, "--mu0");
  config.rho = parse_auto(rho, "--rho");
  config.gamma = gamma == "inf" ? std::numeric_limits<double>::infinity()
                                : parse_number(gamma, "--gamma");
  if (config.mu0 && !(*config.mu0 >= 1.0)) throw UsageError("--mu0 must be >= 1");
  if (config.rho && !(*config.rho >= 0.0)) throw UsageError("--rho must be >= 0");
  if (!(config.gamma > 0.0)) throw UsageError("--gamma must be > 0");
  if (!(config.eps_tol > 0.0)) throw UsageError("--eps-tol must be > 0");
  if (config.max_iterations < 1) throw UsageError("--max-iterations must be >= 1");
  if (config.trials < 1) throw UsageError("--trials must be >= 1");
  if (!(config.sigma >= 0.0)) throw UsageError("--sigma must be >= 0");

  if (sweep_cmd->parsed()) {
    config.command = Command::Sweep;
    const Index cube = parse_index(d, "--d");
    if (cube < 1) throw UsageError("--d must be positive");
    config.dims = {cube, cube, cube};
    config.rank_list = parse_index_list(ranks, "--ranks");
    config.alphas = parse_alpha_list(alphas);
    return config;
  }

  config.command = complete->parsed() ? Command::Complete : Command::InitOnly;
  config.ranks = parse_triple(ranks, "--ranks");
  const bool from_file = !config.input.empty();
  if (from_file && !config.tensor.empty()) throw UsageError("--input and --tensor are exclusive");
  if (!dims.empty()) config.dims = parse_triple(dims, "--dims");
  if (!n.empty()) {
    config.n = parse_index(n, "--n");
    if (*config.n < 2) throw UsageError("--n must be >= 2");
  }
  if (!alpha.empty()) {
    const double a = parse_number(alpha, "--alpha");
    if (!(a > 0.0)) throw UsageError("--alpha must be positive");
    config.alphas = {a};
  }
  if (from_file) {
    if (config.n || !config.alphas.empty()) throw UsageError("--n/--alpha do not apply to --input");
    return config;
  }
  if (config.n.has_value() == !config.alphas.empty()) {
    throw UsageError("exactly one of --n and --alpha is required");
  }
  if (config.tensor.empty() && dims.empty()) throw UsageError("--dims is required");
  return config;
}

void write_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
  out << kCsvHeader << '\n';
  for (const TrialRecord& r : records) {
    out << r.d << ',' << r.r << ',' << format_double(r.alpha) << ',' << r.n << ',' << r.trial << ','
        << r.seed << ',' << (r.success ? 1 : 0) << ',' << format_double(r.rel_error) << ','
        << r.iterations << ',' << format_double(r.dp_init) << ',' << format_double(r.runtime_ms)
        << '\n';
  }
}

void emit_csv(const std::vector<TrialRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_csv(out, records);
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

int run(const CliConfig& config, std::ostream& log) {
  switch (config.command) {
    case Command::Sweep: return run_sweep(config, log);
    case Command::InitOnly: return run_init_only(config, log);
    case Command::Complete:
      if (!config.input.empty()) return run_complete_from_observations(config, log);
      if (!config.tensor.empty()) return run_complete_from_tensor(config, log);
      return run_complete_synthetic(config, log);
  }
  return kUsage;
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return run(parse_args(args), out);
  } catch (const UsageError& e) {
    (e.exit_code() == kOk ? out : err) << e.what() << '\n';
    return e.exit_code();
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::runtime_error& e) {
    err << "I/O error: " << e.what() << '\n';
    return kIo;
  }
}

}  // namespace tcomplete::cli
