#include "cpsem/experiments/experiment.hpp"

#include "cpsem/baselines.hpp"
#include "cpsem/csv.hpp"
#include "cpsem/errors.hpp"
#include "cpsem/experiments/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>

namespace cpsem::experiments {

namespace fs = std::filesystem;
using nlohmann::json;

// Stream tags for Rng::split.
namespace stream {
constexpr std::uint64_t kData = 0xda7a;
constexpr std::uint64_t kTestData = 0x7e57da7a;
constexpr std::uint64_t kTheta0 = 0x7e7a0;
constexpr std::uint64_t kCrossval = 0xc405;
}  // namespace stream

std::string_view algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::CPF_SEM: return "CPF-SEM";
        case Algorithm::CPF_AS_SEM: return "CPF-AS-SEM";
        case Algorithm::CPF_BS_SEM: return "CPF-BS-SEM";
        case Algorithm::PF_BS_SEM: return "PF-BS-SEM";
        case Algorithm::ENKS_EM: return "EnKS-EM";
    }
    return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
    for (Algorithm a : {Algorithm::CPF_SEM, Algorithm::CPF_AS_SEM, Algorithm::CPF_BS_SEM, Algorithm::PF_BS_SEM,
                        Algorithm::ENKS_EM}) {
        if (name == algorithm_name(a)) return a;
    }
    throw InvalidArgument("unknown algorithm '" + std::string(name) +
                          "' (expected CPF-SEM, CPF-AS-SEM, CPF-BS-SEM, PF-BS-SEM or EnKS-EM)");
}

SmootherKind smoother_of(Algorithm a) {
    switch (a) {
        case Algorithm::CPF_SEM: return SmootherKind::CPF_TRACK;
        case Algorithm::CPF_AS_SEM: return SmootherKind::CPF_AS_TRACK;
        case Algorithm::CPF_BS_SEM: return SmootherKind::CPF_BS;
        case Algorithm::PF_BS_SEM: return SmootherKind::PF_BS;
        case Algorithm::ENKS_EM: break;
    }
    throw InvalidArgument("EnKS-EM has no particle smoother");
}

namespace {

std::uint64_t name_hash(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string default_arm_name(const ArmConfig& arm) {
    std::string name(algorithm_name(arm.algorithm));
    if (arm.algorithm == Algorithm::ENKS_EM) {
        name += "_n" + std::to_string(arm.n_f);
    } else {
        name += "_nf" + std::to_string(arm.n_f) + "_ns" + std::to_string(arm.n_s);
    }
    if (arm.data) {
        if (const auto* lz = std::get_if<ThetaLorenz>(&arm.data->theta)) name += "_dt" + format_number(lz->dt);
    }
    return name;
}

int int_field(const json& doc, const char* key) {
    const auto& v = doc.at(key);
    if (!v.is_number_integer()) throw InvalidArgument(std::string("config field '") + key + "' must be an integer");
    const auto x = v.get<long long>();
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
        throw InvalidArgument(std::string("config field '") + key + "' is out of range");
    }
    return static_cast<int>(x);
}

ArmConfig arm_from_json(const json& doc) {
    if (!doc.is_object()) throw InvalidArgument("each arm must be a JSON object");
    static const std::set<std::string> known{"algorithm", "n_f", "n_s", "name", "model"};
    for (const auto& [key, value] : doc.items()) {
        if (!known.contains(key)) throw InvalidArgument("unknown arm field '" + key + "'");
    }
    ArmConfig arm;
    if (!doc.contains("algorithm")) throw InvalidArgument("arm is missing 'algorithm'");
    arm.algorithm = parse_algorithm(doc.at("algorithm").get<std::string>());
    if (doc.contains("n_f")) arm.n_f = int_field(doc, "n_f");
    arm.n_s = arm.n_f;
    if (doc.contains("n_s")) arm.n_s = int_field(doc, "n_s");
    if (doc.contains("name")) arm.name = doc.at("name").get<std::string>();
    if (doc.contains("model")) arm.data = model_config_from_json(doc.at("model"));
    return arm;
}

std::vector<std::string> param_columns(const ExperimentConfig& cfg) {
    return parameter_names(family_of(cfg.data.theta));
}

void ensure_dir(const fs::path& p) {
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw InvalidArgument("cannot create output directory '" + p.string() + "': " + ec.message());
}

std::ofstream open_out(const fs::path& p) {
    ensure_dir(p.parent_path().empty() ? fs::path(".") : p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write '" + p.string() + "'");
    return out;
}

fs::path arm_dir(const ExperimentConfig& cfg, const ArmConfig& arm) {
    return cfg.arms.size() == 1 ? cfg.out_dir : cfg.out_dir / arm.name;
}

// Rethrows the first stored failure, prefixed with its task label and
// keeping its category (numerical vs. configuration).
void rethrow_first(const std::vector<std::exception_ptr>& errors, const std::vector<std::string>& labels) {
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!errors[i]) continue;
        try {
            std::rethrow_exception(errors[i]);
        } catch (const NumericalError& e) {
            throw NumericalError(labels[i] + ": " + e.what());
        } catch (const InvalidArgument& e) {
            throw InvalidArgument(labels[i] + ": " + e.what());
        }
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

void finalize(ExperimentConfig& cfg) {
    if (cfg.arms.empty()) throw InvalidArgument("experiment has no arms");
    if (cfg.iters < 1) throw InvalidArgument("iters must be >= 1");
    if (cfg.repetitions < 1) throw InvalidArgument("repetitions must be >= 1");
    if (cfg.jobs < 1) throw InvalidArgument("jobs must be >= 1");
    if (cfg.keep_last < 0) throw InvalidArgument("keep_last must be >= 0");
    if (cfg.test_horizon < 1) throw InvalidArgument("test_T must be >= 1");
    if (cfg.max_evals < 0) throw InvalidArgument("max_evals must be >= 0");
    if (cfg.checkpoints.empty() || !std::is_sorted(cfg.checkpoints.begin(), cfg.checkpoints.end()) ||
        cfg.checkpoints.front() < 1) {
        throw InvalidArgument("checkpoints must be a non-empty increasing list of positive counts");
    }
    check_theta(cfg.data.theta);
    const auto family = family_of(cfg.data.theta);
    if (cfg.theta0_box && cfg.theta0_box->size() != parameter_names(family).size()) {
        throw InvalidArgument("theta0_box needs one [lo, hi] pair per estimated parameter");
    }

    std::set<std::string> names;
    for (auto& arm : cfg.arms) {
        if (arm.n_f < 2) throw InvalidArgument("n_f must be >= 2");
        if (arm.n_s < 1) throw InvalidArgument("n_s must be >= 1");
        if (arm.data && family_of(arm.data->theta) != family) {
            throw InvalidArgument("all arms must use the same model family");
        }
        if (arm.name.empty()) arm.name = default_arm_name(arm);
        if (!names.insert(arm.name).second) throw InvalidArgument("duplicate arm name '" + arm.name + "'");
    }
}

void apply_json(ExperimentConfig& cfg, const json& doc) {
    if (!doc.is_object()) throw InvalidArgument("experiment config must be a JSON object");
    static const std::set<std::string> known{"scenario", "model",       "arms",      "iters",
                                             "repetitions", "seed",     "keep_last", "theta0_box",
                                             "test_T",   "checkpoints", "score_component", "out",
                                             "jobs",     "max_evals"};
    for (const auto& [key, value] : doc.items()) {
        if (!known.contains(key)) throw InvalidArgument("unknown config field '" + key + "'");
    }
    try {
        if (doc.contains("model")) cfg.data = model_config_from_json(doc.at("model"));
        if (doc.contains("arms")) {
            const auto& arms = doc.at("arms");
            if (!arms.is_array()) throw InvalidArgument("'arms' must be an array");
            cfg.arms.clear();
            for (const auto& a : arms) cfg.arms.push_back(arm_from_json(a));
        }
        if (doc.contains("iters")) cfg.iters = int_field(doc, "iters");
        if (doc.contains("repetitions")) cfg.repetitions = int_field(doc, "repetitions");
        if (doc.contains("seed")) {
            if (!doc.at("seed").is_number_unsigned()) throw InvalidArgument("'seed' must be an unsigned integer");
            cfg.seed = doc.at("seed").get<std::uint64_t>();
        }
        if (doc.contains("keep_last")) cfg.keep_last = int_field(doc, "keep_last");
        if (doc.contains("theta0_box")) {
            ParameterBox box;
            for (const auto& pair : doc.at("theta0_box")) {
                if (!pair.is_array() || pair.size() != 2) throw InvalidArgument("theta0_box entries must be [lo, hi]");
                box.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
            }
            cfg.theta0_box = box;
        }
        if (doc.contains("test_T")) cfg.test_horizon = int_field(doc, "test_T");
        if (doc.contains("checkpoints")) cfg.checkpoints = doc.at("checkpoints").get<std::vector<int>>();
        if (doc.contains("score_component")) cfg.score_component = int_field(doc, "score_component");
        if (doc.contains("out")) cfg.out_dir = doc.at("out").get<std::string>();
        if (doc.contains("jobs")) cfg.jobs = int_field(doc, "jobs");
        if (doc.contains("max_evals")) cfg.max_evals = doc.at("max_evals").get<std::int64_t>();
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("malformed config: ") + e.what());
    }
}

json to_json(const ExperimentConfig& cfg) {
    json doc;
    doc["scenario"] = cfg.scenario;
    doc["model"] = to_json(cfg.data);
    json arms = json::array();
    for (const auto& arm : cfg.arms) {
        json a{{"name", arm.name}, {"algorithm", std::string(algorithm_name(arm.algorithm))}, {"n_f", arm.n_f},
               {"n_s", arm.n_s}};
        if (arm.data) a["model"] = to_json(*arm.data);
        arms.push_back(std::move(a));
    }
    doc["arms"] = std::move(arms);
    doc["iters"] = cfg.iters;
    doc["repetitions"] = cfg.repetitions;
    doc["seed"] = cfg.seed;
    doc["keep_last"] = cfg.keep_last;
    const ParameterBox box = cfg.theta0_box ? *cfg.theta0_box : default_theta0_box(family_of(cfg.data.theta));
    json jbox = json::array();
    for (const auto& [lo, hi] : box) jbox.push_back({lo, hi});
    doc["theta0_box"] = std::move(jbox);
    doc["test_T"] = cfg.test_horizon;
    doc["checkpoints"] = cfg.checkpoints;
    doc["score_component"] = cfg.score_component;
    return doc;
}

// ---------------------------------------------------------------------------
// Runners

Dataset make_dataset(const ModelConfig& data) {
    const auto model = make_model(data.theta);
    Rng rng = Rng(data.seed).split(stream::kData);
    return {data, simulate(*model, rng, data.horizon)};
}

const ModelConfig& arm_data(const ExperimentConfig& cfg, const ArmConfig& arm) {
    return arm.data ? *arm.data : cfg.data;
}

std::int64_t estimated_evals(const ExperimentConfig& cfg, std::string_view command) {
    std::int64_t total = 0;
    auto sem_cost = [&](const ArmConfig& arm, std::int64_t reps) {
        return reps * cfg.iters * static_cast<std::int64_t>(arm_data(cfg, arm).horizon) * arm.n_f;
    };
    if (command == "simulate") {
        for (const auto& arm : cfg.arms) total += arm_data(cfg, arm).horizon;
        return std::max<std::int64_t>(total, cfg.data.horizon);
    }
    if (command == "smooth") return sem_cost(cfg.arms.front(), 1);
    for (const auto& arm : cfg.arms) total += sem_cost(arm, cfg.repetitions);
    if (command == "crossval") {
        for (const auto& arm : cfg.arms) {
            total += static_cast<std::int64_t>(cfg.checkpoints.back()) * cfg.test_horizon * arm.n_f;
        }
    }
    return total;
}

Theta theta0_for(const ExperimentConfig& cfg, const ModelConfig& data, int rep) {
    const ParameterBox box = cfg.theta0_box ? *cfg.theta0_box : default_theta0_box(family_of(data.theta));
    Rng rng = Rng(cfg.seed).split(stream::kTheta0, static_cast<std::uint64_t>(rep));
    return sample_theta0(data.theta, box, rng);
}

SemTrace run_repetition(const ExperimentConfig& cfg, const ArmConfig& arm, const Dataset& data, int rep,
                        int keep_last) {
    const Theta theta0 = theta0_for(cfg, data.config, rep);
    const Rng stream = Rng(cfg.seed).split(name_hash(arm.name), static_cast<std::uint64_t>(rep));

    if (arm.algorithm == Algorithm::ENKS_EM) {
        const auto start = std::chrono::steady_clock::now();
        Rng rng = stream;
        const EnksEmResult em = enks_em(theta0, data.sim.observations, arm.n_f, cfg.iters, rng);
        const double per_iter =
            cfg.timing ? std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count() /
                             cfg.iters
                       : 0.0;
        SemTrace trace;
        trace.family = family_of(theta0);
        trace.theta0 = theta0;
        trace.theta = em.theta;
        for (const auto& th : em.theta_trace) {
            trace.iterations.push_back({parameter_values(th), std::numeric_limits<double>::quiet_NaN(), per_iter, false});
        }
        return trace;
    }

    SemConfig sem;
    sem.smoother = smoother_of(arm.algorithm);
    sem.n_f = arm.n_f;
    sem.n_s = arm.n_s;
    sem.iters = cfg.iters;
    sem.theta0 = theta0;
    sem.seed = stream.key();
    sem.keep_last = keep_last;
    sem.record_timing = cfg.timing;
    return run_sem(data.sim.observations, sem);
}

std::vector<ArmResult> run_estimate(const ExperimentConfig& cfg) {
    // Datasets are simulated once, keyed by their JSON description.
    std::map<std::string, Dataset> datasets;
    for (const auto& arm : cfg.arms) {
        const ModelConfig& d = arm_data(cfg, arm);
        const std::string key = to_json(d).dump();
        if (!datasets.contains(key)) datasets.emplace(key, make_dataset(d));
    }

    std::vector<ArmResult> results;
    for (const auto& arm : cfg.arms) {
        results.push_back({arm, std::vector<SemTrace>(static_cast<std::size_t>(cfg.repetitions))});
    }
    const std::size_t reps = static_cast<std::size_t>(cfg.repetitions);
    std::vector<std::string> labels;
    for (const auto& arm : cfg.arms) {
        for (std::size_t k = 0; k < reps; ++k) labels.push_back(arm.name + " repetition " + std::to_string(k + 1));
    }

    const auto errors = parallel_for(cfg.arms.size() * reps, cfg.jobs, [&](std::size_t task) {
        const std::size_t a = task / reps;
        const std::size_t k = task % reps;
        const auto& arm = cfg.arms[a];
        const Dataset& data = datasets.at(to_json(arm_data(cfg, arm)).dump());
        results[a].traces[k] = run_repetition(cfg, arm, data, static_cast<int>(k), 0);
    });
    rethrow_first(errors, labels);
    return results;
}

SmoothResult run_smooth(const ExperimentConfig& cfg) {
    const auto& arm = cfg.arms.front();
    SmoothResult out;
    out.data = make_dataset(arm_data(cfg, arm));
    out.trace = run_repetition(cfg, arm, out.data, 0, std::min(cfg.keep_last, cfg.iters));
    if (out.trace.pooled.size() < 2) throw InvalidArgument("smooth: need at least 2 pooled samples (raise keep_last)");
    out.summary = summarize_reconstruction(out.trace.pooled, out.data.sim.truth);
    return out;
}

CrossvalResult run_crossval(const ExperimentConfig& cfg) {
    for (const auto& arm : cfg.arms) {
        if (arm.algorithm == Algorithm::ENKS_EM) throw InvalidArgument("crossval needs particle-smoother arms");
        if (arm.data) throw InvalidArgument("crossval arms must share the experiment dataset");
    }
    if (cfg.score_component < 1 || cfg.score_component > make_model(cfg.data.theta)->state_dim()) {
        throw InvalidArgument("score_component out of range");
    }
    CrossvalResult out;
    out.training = run_estimate(cfg);
    for (const auto& res : out.training) {
        std::vector<double> mean(parameter_names(family_of(cfg.data.theta)).size(), 0.0);
        for (const auto& tr : res.traces) {
            const auto v = parameter_values(tr.theta);
            for (std::size_t p = 0; p < v.size(); ++p) mean[p] += v[p] / static_cast<double>(res.traces.size());
        }
        out.estimates.push_back(with_parameters(cfg.data.theta, mean));
    }

    ModelConfig test_cfg = cfg.data;
    test_cfg.horizon = cfg.test_horizon;
    test_cfg.seed = Rng(cfg.data.seed).split(stream::kTestData).key();
    const Dataset test = make_dataset(test_cfg);
    const auto c = static_cast<Eigen::Index>(cfg.score_component - 1);

    // Only the scored component is kept, which bounds memory at
    // checkpoints.back() * n_s paths of length test_T + 1.
    Trajectory truth;
    for (const auto& x : test.sim.truth.states) truth.states.push_back(scalar_vector(x(c)));

    std::vector<std::vector<CrossvalRow>> per_arm(cfg.arms.size());
    const auto errors = parallel_for(cfg.arms.size(), cfg.jobs, [&](std::size_t a) {
        const auto& arm = cfg.arms[a];
        const auto model = make_model(out.estimates[a]);
        Trajectory conditioning = Trajectory::zeros(cfg.test_horizon, model->state_dim());
        const Rng root = Rng(cfg.seed).split(stream::kCrossval, name_hash(arm.name));
        std::vector<Trajectory> pooled;
        std::size_t next_checkpoint = 0;
        for (int k = 1; k <= cfg.checkpoints.back(); ++k) {
            Rng rng = root.split(static_cast<std::uint64_t>(k));
            SmootherStep step = smoother_step(*model, test.sim.observations, smoother_of(arm.algorithm), conditioning,
                                              arm.n_f, arm.n_s, rng);
            conditioning = std::move(step.next_conditioning);
            for (const auto& s : step.samples) {
                Trajectory reduced;
                reduced.states.reserve(s.states.size());
                for (const auto& x : s.states) reduced.states.push_back(scalar_vector(x(c)));
                pooled.push_back(std::move(reduced));
            }
            if (k == cfg.checkpoints[next_checkpoint]) {
                const auto summary = summarize_reconstruction(pooled, truth);
                per_arm[a].push_back({std::string(smoother_name(smoother_of(arm.algorithm))), k, summary.rmse[0],
                                      summary.cp[0]});
                ++next_checkpoint;
            }
        }
    });
    std::vector<std::string> labels;
    for (const auto& arm : cfg.arms) labels.push_back(arm.name + " test smoother");
    rethrow_first(errors, labels);
    for (auto& rows : per_arm) out.rows.insert(out.rows.end(), rows.begin(), rows.end());
    return out;
}

// ---------------------------------------------------------------------------
// Writers

namespace {

void write_dataset(const fs::path& dir, const Dataset& d) {
    auto truth = open_out(dir / "truth.csv");
    write_trajectory_csv(truth, d.sim.truth);
    auto obs = open_out(dir / "obs.csv");
    write_observations_csv(obs, d.sim.observations);
}

void write_config(const ExperimentConfig& cfg) {
    auto out = open_out(cfg.out_dir / "config.json");
    out << to_json(cfg).dump(2) << '\n';
}

void write_final_table(const fs::path& path, const ExperimentConfig& cfg, const std::vector<ArmResult>& results) {
    auto out = open_out(path);
    CsvRow header;
    header << "arm" << "algorithm" << "n_f" << "n_s" << "rep";
    for (const auto& n : param_columns(cfg)) header << n;
    header << "loglik";
    out << header.str() << '\n';
    for (const auto& res : results) {
        for (std::size_t k = 0; k < res.traces.size(); ++k) {
            const auto& tr = res.traces[k];
            CsvRow row;
            row << res.arm.name << algorithm_name(res.arm.algorithm) << res.arm.n_f << res.arm.n_s
                << static_cast<int>(k + 1);
            for (double v : parameter_values(tr.theta)) row << v;
            row << (tr.iterations.empty() ? std::numeric_limits<double>::quiet_NaN() : tr.iterations.back().loglik);
            out << row.str() << '\n';
        }
    }
}

}  // namespace

void write_simulation(const ExperimentConfig& cfg) {
    write_config(cfg);
    write_dataset(cfg.out_dir, make_dataset(cfg.data));
    for (const auto& arm : cfg.arms) {
        if (arm.data) write_dataset(cfg.out_dir / arm.name, make_dataset(*arm.data));
    }
}

void write_estimates(const ExperimentConfig& cfg, const std::vector<ArmResult>& results) {
    write_config(cfg);
    for (const auto& res : results) {
        const fs::path dir = arm_dir(cfg, res.arm);
        for (std::size_t k = 0; k < res.traces.size(); ++k) {
            auto out = open_out(dir / ("sem_trace_rep" + std::to_string(k + 1) + ".csv"));
            write_trace_csv(out, res.traces[k]);
        }
    }
    write_final_table(cfg.out_dir / "estimates_final.csv", cfg, results);

    // Exact maximum-likelihood reference for linear datasets.
    if (family_of(cfg.data.theta) == ModelFamily::Linear) {
        auto out = open_out(cfg.out_dir / "mle.csv");
        out << "A,Q,R,loglik\n";
        const Dataset d = make_dataset(cfg.data);
        const auto& truth = std::get<ThetaLinear>(cfg.data.theta);
        const KsEmResult mle = ks_em(truth, d.sim.observations, 10000);
        CsvRow row;
        row << mle.theta.A << mle.theta.Q << mle.theta.R << mle.loglik_trace.back();
        out << row.str() << '\n';
    }
}

void write_smooth(const ExperimentConfig& cfg, const SmoothResult& result) {
    write_config(cfg);
    write_dataset(cfg.out_dir, result.data);
    {
        auto out = open_out(cfg.out_dir / "reconstruction.csv");
        write_reconstruction_csv(out, result.summary);
    }
    {
        auto out = open_out(cfg.out_dir / "scores.csv");
        out << "component,rmse,cp\n";
        for (int c = 0; c < result.summary.dim(); ++c) {
            CsvRow row;
            row << (c + 1) << result.summary.rmse[static_cast<std::size_t>(c)]
                << result.summary.cp[static_cast<std::size_t>(c)];
            out << row.str() << '\n';
        }
    }
    auto out = open_out(cfg.out_dir / "sem_trace_rep1.csv");
    write_trace_csv(out, result.trace);
}

void write_crossval(const ExperimentConfig& cfg, const CrossvalResult& result) {
    write_config(cfg);
    write_final_table(cfg.out_dir / "estimates_final.csv", cfg, result.training);
    {
        auto out = open_out(cfg.out_dir / "crossval_theta.csv");
        CsvRow header;
        header << "arm";
        for (const auto& n : param_columns(cfg)) header << n;
        out << header.str() << '\n';
        for (std::size_t a = 0; a < cfg.arms.size(); ++a) {
            CsvRow row;
            row << cfg.arms[a].name;
            for (double v : parameter_values(result.estimates[a])) row << v;
            out << row.str() << '\n';
        }
    }
    auto out = open_out(cfg.out_dir / "table1.csv");
    out << "algorithm,iters,rmse,cp\n";
    for (const auto& r : result.rows) {
        CsvRow row;
        row << r.algorithm << r.iters << r.rmse << r.cp;
        out << row.str() << '\n';
    }
}

}  // namespace cpsem::experiments
