#pragma once
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lfrg/flow_systems.hpp"
#include "lfrg/fixed_points.hpp"

namespace lfrg::cli {

enum class Command { Tadpole, Beta, Flow, FixedPoint, Exponents, Scan, PotentialFlow };
enum class Format { Csv, Json };

std::string to_string(Command c);
std::string to_string(Format f);

/// Exit codes.
constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kNumerical = 2;
constexpr int kIo = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BackgroundConfig {
  std::string kind;  // minkowski-vacuum, thermal, thermal-high-t, de-sitter
  int d = 4;
  double beta = 1.0;
  double H2 = 1.0;
  double xi = 1.0 / 6.0;
  std::optional<std::string> mu_mode;  // fixed, tied-to-k, tied-to-h
  double mu2 = 1.0;
  DeSitterSign sign = DeSitterSign::PaperTranscribed;
};

struct SolverConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double t0 = 0.0;
  double t1 = 0.0;
  long max_steps = 1'000'000;
  double Lambda = 1.0;
  std::string beta_mode = "transcribed";  // or "kernel"
  double fd_step = kDefaultFdStep;
  double newton_tol = 1e-12;
  std::optional<double> k2_over_H2;
  // tadpole
  double M2 = 1.0;
  std::optional<double> k;
  // scan
  GridSpec grid;
  // potential-flow
  std::size_t N = 256;
  std::optional<double> rho_max;
  std::vector<double> checkpoints;
};

struct OutputConfig {
  std::optional<std::string> path;
  std::optional<Format> format;
  bool quiet = false;
};

struct RunConfig {
  Command command = Command::Flow;
  BackgroundConfig background;
  CouplingVector couplings;  // initial values, guess or evaluation point
  SolverConfig solver;
  OutputConfig output;

  /// Reports (fixed-point, exponents, scan) default to JSON, the rest to CSV.
  Format effective_format() const;
};

/// The replayable JSON form: {"command", "background", "couplings", "solver", "output"}.
nlohmann::json to_json(const RunConfig& cfg);

/// Strict reader for a config document. Also accepts a JSON result document
/// and replays its "config" block. Throws UsageError naming the offending key.
void apply_json(const nlohmann::json& doc, RunConfig& cfg);

/// Flags override values from --config. argv[0] is the program name.
RunConfig parse_config(int argc, const char* const* argv);

/// Writes to cfg.output.path (stdout when unset) and returns an exit code.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// parse_config + run with the exception-to-exit-code mapping.
int entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lfrg::cli
