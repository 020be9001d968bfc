#pragma once

#include "cpsem/estimation.hpp"
#include "cpsem/metrics.hpp"
#include "cpsem/model_config.hpp"
#include "cpsem/models.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cpsem::experiments {

enum class Algorithm { CPF_SEM, CPF_AS_SEM, CPF_BS_SEM, PF_BS_SEM, ENKS_EM };

std::string_view algorithm_name(Algorithm a);
Algorithm parse_algorithm(std::string_view name);  ///< InvalidArgument on unknown names
SmootherKind smoother_of(Algorithm a);             ///< InvalidArgument for ENKS_EM

struct ArmConfig {
    std::string name;  ///< output subdirectory; derived from the fields when empty
    Algorithm algorithm = Algorithm::CPF_BS_SEM;
    int n_f = 10;
    int n_s = 10;  ///< ensemble size for ENKS_EM is n_f
    /// Dataset override (e.g. a different Lorenz time step); the experiment's
    /// `data` is used when unset.
    std::optional<ModelConfig> data;
};

struct ExperimentConfig {
    std::string scenario;
    std::string description;
    std::string command = "estimate";  ///< default subcommand of the scenario
    ModelConfig data;
    std::vector<ArmConfig> arms;
    int iters = 100;
    int repetitions = 1;
    std::uint64_t seed = 42;
    int keep_last = 10;
    std::optional<ParameterBox> theta0_box;
    // crossval
    int test_horizon = 1000;
    std::vector<int> checkpoints{5, 10, 50, 100};
    int score_component = 2;  ///< 1-based component scored by crossval
    // execution
    std::filesystem::path out_dir = "out";
    int jobs = 1;
    std::int64_t max_evals = 0;  ///< 0 means no limit
    bool timing = true;
};

/// Fills derived arm names and validates ranges. Throws InvalidArgument.
void finalize(ExperimentConfig& cfg);

/// Applies the fields present in `doc` on top of `cfg` (scenario defaults).
/// Recognized keys: scenario, model (object), arms (array of
/// {algorithm, n_f, n_s, name, model}), iters, repetitions, seed,
/// keep_last, theta0_box, test_T, checkpoints, score_component, out, jobs,
/// max_evals.
void apply_json(ExperimentConfig& cfg, const nlohmann::json& doc);

nlohmann::json to_json(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Scenario registry

struct ScenarioInfo {
    std::string name;
    std::string command;
    std::string description;
};

std::vector<ScenarioInfo> list_scenarios();
/// Full configuration of a named scenario; InvalidArgument if unknown.
ExperimentConfig scenario(std::string_view name);

// ---------------------------------------------------------------------------
// Runners. All outputs depend only on the configuration (never on `jobs`).

struct Dataset {
    ModelConfig config;
    SimulatedData sim;
};

Dataset make_dataset(const ModelConfig& data);
const ModelConfig& arm_data(const ExperimentConfig& cfg, const ArmConfig& arm);

/// Rough number of model transitions the command will evaluate.
std::int64_t estimated_evals(const ExperimentConfig& cfg, std::string_view command);

/// Starting value of repetition `rep`; shared by every arm on the same
/// dataset so arms are compared from identical starts.
Theta theta0_for(const ExperimentConfig& cfg, const ModelConfig& data, int rep);

/// One repetition of one arm. EnKS-EM traces carry NaN log-likelihoods.
SemTrace run_repetition(const ExperimentConfig& cfg, const ArmConfig& arm, const Dataset& data, int rep,
                        int keep_last = 0);

struct ArmResult {
    ArmConfig arm;
    std::vector<SemTrace> traces;  ///< by repetition
};

/// Every repetition of every arm, dispatched to `cfg.jobs` workers.
std::vector<ArmResult> run_estimate(const ExperimentConfig& cfg);

struct SmoothResult {
    Dataset data;
    SemTrace trace;
    ReconstructionSummary summary;
};

/// One run of the first arm, scoring the samples of its last keep_last iterations.
SmoothResult run_smooth(const ExperimentConfig& cfg);

struct CrossvalRow {
    std::string algorithm;
    int iters = 0;
    double rmse = 0.0;
    double cp = 0.0;
};

struct CrossvalResult {
    std::vector<ArmResult> training;
    std::vector<Theta> estimates;  ///< mean final estimate per training arm
    std::vector<CrossvalRow> rows;
};

/// Trains each arm on the experiment data (mean of final estimates over the
/// repetitions), then runs the matching smoother from the zero conditioning
/// on a fresh test record of length test_T and scores the pooled samples of
/// iterations 1..k for each checkpoint k.
CrossvalResult run_crossval(const ExperimentConfig& cfg);

// Writers (create directories as needed).
void write_simulation(const ExperimentConfig& cfg);
void write_estimates(const ExperimentConfig& cfg, const std::vector<ArmResult>& results);
void write_smooth(const ExperimentConfig& cfg, const SmoothResult& result);
void write_crossval(const ExperimentConfig& cfg, const CrossvalResult& result);

}  // namespace cpsem::experiments
