#pragma once

// Experiment configuration: one strict JSON document driving every
// subcommand. Unknown keys are rejected with their full path, so configs
// cannot drift silently. A built-in wave preset (the default when no config
// is given) describes the damped wave instance with delayed boundary-style
// feedback and saturated stochastic forcing; explicit operator / delay /
// noise / diffusion sections describe arbitrary diagonal instances and are
// mutually exclusive with the preset.

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdwave/scenario.hpp"

namespace sdwave {

// Validation failure carrying the JSON path of the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path.empty() ? message : path + ": " + message),
        path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct OperatorConfig {
  std::string eigenvalues = "dirichlet";  // "dirichlet" | "explicit"
  int modes = 32;
  std::vector<double> explicit_lambdas;
  std::string damping_kind = "scalar";  // "scalar" | "diagonal" | "dense"
  Cx beta{-2.0, 0.0};
  std::vector<Cx> diagonal;
  Eigen::MatrixXd dense;  // real dense damping
};

struct AtomConfig {
  double lag = 0;
  Eigen::MatrixXd weight;
};

struct DelayConfig {
  double horizon = 0;
  std::vector<AtomConfig> position_atoms;
  std::vector<AtomConfig> velocity_atoms;
};

struct NoiseConfig {
  std::vector<double> wiener_variances = {1.0};
  double jump_rate = 0;
  std::string jump_law = "fixed";  // fixed | sphere | gaussian | pareto
  std::vector<double> jump_vector;
  double jump_scale = 1;
  double pareto_alpha = 3;
  bool compensate = false;
};

struct DiffusionConfig {
  std::string type = "additive";  // "additive" | "saturated_field"
  Eigen::MatrixXd bottom;         // additive: modes x noise_dim
  double beta = 0;                // saturated_field coupling
  double alpha1 = 0, alpha2 = 0;
  std::vector<KappaAtom> kappa;
  double lipschitz = 0;
};

struct SimulationConfig {
  double t_max = 40;
  double step = 1.0 / 128;
  int paths = 2000;
  std::uint64_t master_seed = 20260815;
  double initial_scale = 1.0;
  int initial_mode = 1;
  double divergence_norm = 1e8;
  // Rerun the deterministic part at step, step/2, step/4 and report the
  // Richardson ratio of the final second moments.
  bool richardson = false;
};

struct AnalysisConfig {
  double c = 0.5;           // two-branch resolvent bound parameter
  double b_max = 200;       // imaginary-axis scan cutoff
  int grid_points = 512;    // resolvent line grids
  int dictionary_size = 256;
  std::vector<double> checkpoints = {10, 20, 40};
  double offset = 10;
  // Candidate decay abscissas for the delay criterion scan; all strictly
  // negative, normalized to ascending order.
  std::vector<double> a_grid = {-0.60, -0.55, -0.50, -0.45, -0.40, -0.35,
                                -0.30, -0.25, -0.20, -0.15, -0.10, -0.05};
};

struct OutputConfig {
  std::string directory = "out";
  std::vector<std::string> formats = {"csv"};  // subset of {csv, text}
};

struct VerifyConfig {
  std::string fault = "none";  // "none" | "perturb_lyapunov"
  std::string scale = "desk";  // "desk" | "full"
};

struct ExperimentConfig {
  bool use_scenario = true;
  WaveScenario scenario;
  OperatorConfig op;
  DelayConfig delay;
  NoiseConfig noise;
  DiffusionConfig diffusion;
  SimulationConfig simulation;
  AnalysisConfig analysis;
  OutputConfig output;
  VerifyConfig verify;
  // Whether a noise / diffusion section was given explicitly; otherwise the
  // scenario preset (or the silent explicit-mode default) supplies them.
  bool noise_overridden = false;
  bool diffusion_overridden = false;
};

// The wave preset with all runner defaults.
ExperimentConfig default_config();

// Strict parse: unknown keys, wrong types, and out-of-range values raise
// ConfigError with the field path. Empty input raises ConfigError.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config_file(const std::string& path);

// Canonical echo with fixed key order and round-trippable numbers; equal
// configurations produce identical bytes.
std::string canonical_config_json(const ExperimentConfig& cfg);

// FNV-1a hash of the canonical echo, quoted in output provenance headers.
std::uint64_t config_hash(const ExperimentConfig& cfg);

// Command-line overrides applied after parsing.
void apply_overrides(ExperimentConfig& cfg, std::optional<std::uint64_t> seed,
                     std::optional<int> paths, std::optional<int> modes);

// Everything a run needs, assembled and validated. history(scale) seeds a
// constant segment; the sign of scale selects between the paired initial
// conditions used by the stationarity diagnostics.
struct BuiltSystem {
  BlockOperator op;
  DelayKernel kernel;
  DiffusionSpec diffusion;
  NoiseSpec noise;
  std::function<std::function<Eigen::VectorXd(double)>(double)> history;
};
BuiltSystem build_system(const ExperimentConfig& cfg);

}  // namespace sdwave
