#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcomplete/experiments.hpp"
#include "tcomplete/tensor.hpp"

namespace tcomplete::cli {

enum class Command { Complete, Sweep, InitOnly };

/// Process exit codes.
enum ExitCode : int { kOk = 0, kUsage = 1, kIo = 2, kNumeric = 3 };

struct CliConfig {
  Command command = Command::Complete;
  Dims3 dims{0, 0, 0};
  Dims3 ranks{0, 0, 0};             // complete / init-only
  std::vector<Index> rank_list;     // sweep
  std::optional<Index> n;
  std::vector<double> alphas;       // one entry for complete / init-only
  std::optional<double> mu0;        // nullopt: auto
  std::optional<double> rho;        // nullopt: auto
  double gamma = std::numeric_limits<double>::infinity();
  double eps_tol = 1e-14;
  int max_iterations = 1000;
  Index trials = 1;
  std::uint64_t seed = 0;
  double sigma = 0.0;
  unsigned threads = 0;             // 0: hardware concurrency
  bool timing = false;
  std::string input;                // observation file
  std::string tensor;               // full tensor file to sample from
  std::string out;
};

/// Bad command line. exit_code is kOk for --help (message holds the help text).
class UsageError : public std::runtime_error {
 public:
  UsageError(const std::string& message, int exit_code = kUsage)
      : std::runtime_error(message), exit_code_(exit_code) {}
  int exit_code() const { return exit_code_; }

 private:
  int exit_code_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// args excludes the program name. Throws UsageError.
CliConfig parse_args(const std::vector<std::string>& args);

/// "a,b,c" or "start:stop:step" (stop included when reached to within 1e-9 step).
std::vector<double> parse_alpha_list(const std::string& text);

inline constexpr const char* kCsvHeader =
    "d,r,alpha,n,trial,seed,success,rel_error,iterations,dp_init,runtime_ms";

void write_csv(std::ostream& out, const std::vector<TrialRecord>& records);

/// Writes header and one row per record; throws IoError on failure.
void emit_csv(const std::vector<TrialRecord>& records, const std::string& path);

/// Executes a parsed command, writing status lines to log. Returns an ExitCode.
int run(const CliConfig& config, std::ostream& log);

/// parse_args + run with exceptions mapped to exit codes.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tcomplete::cli
