// cpsem: command-line runner for the smoothing / estimation experiments.

#include "cpsem/errors.hpp"
#include "cpsem/experiments/experiment.hpp"
#include "cpsem/metrics.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

namespace ex = cpsem::experiments;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Options {
    std::string config;
    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::optional<std::string> out;
    std::optional<std::int64_t> max_evals;
    bool no_timing = false;
};

void add_common(CLI::App* cmd, Options& o) {
    cmd->add_option("--config", o.config, "JSON experiment configuration");
    cmd->add_option("--scenario", o.scenario, "named scenario (see list-scenarios)");
    cmd->add_option("--seed", o.seed, "seed for data and algorithms");
    cmd->add_option("--jobs", o.jobs, "worker threads for repetitions");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--max-evals", o.max_evals, "refuse jobs whose estimated model evaluations exceed N");
    cmd->add_flag("--no-timing", o.no_timing, "write wall_ms as 0 so outputs are byte-reproducible");
}

std::string default_scenario(const std::string& command) {
    if (command == "estimate") return "fig7";
    if (command == "crossval") return "table1";
    return "linear";
}

// Precedence: scenario defaults < config file < command-line flags.
ex::ExperimentConfig resolve(const std::string& command, const Options& o) {
    nlohmann::json doc = nlohmann::json::object();
    if (!o.config.empty()) {
        std::ifstream in(o.config);
        if (!in) throw cpsem::InvalidArgument("cannot read config '" + o.config + "'");
        try {
            doc = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw cpsem::InvalidArgument("config '" + o.config + "' is not valid JSON: " + e.what());
        }
    }
    std::string name = o.scenario;
    if (name.empty() && doc.is_object() && doc.contains("scenario")) name = doc.at("scenario").get<std::string>();
    if (name.empty()) name = default_scenario(command);

    ex::ExperimentConfig cfg = ex::scenario(name);
    ex::apply_json(cfg, doc);
    if (o.seed) {
        cfg.seed = *o.seed;
        cfg.data.seed = *o.seed;
        for (auto& arm : cfg.arms) {
            if (arm.data) arm.data->seed = *o.seed;
        }
    }
    if (o.jobs) cfg.jobs = *o.jobs;
    if (o.out) cfg.out_dir = *o.out;
    if (o.max_evals) cfg.max_evals = *o.max_evals;
    if (o.no_timing) cfg.timing = false;
    ex::finalize(cfg);
    return cfg;
}

void guard_budget(const ex::ExperimentConfig& cfg, const std::string& command) {
    const auto evals = ex::estimated_evals(cfg, command);
    std::fprintf(stderr, "%s/%s: ~%lld model transitions, %d job(s)\n", cfg.scenario.c_str(), command.c_str(),
                 static_cast<long long>(evals), cfg.jobs);
    if (cfg.max_evals > 0 && evals > cfg.max_evals) {
        throw cpsem::InvalidArgument("estimated " + std::to_string(evals) + " evaluations exceed --max-evals " +
                                     std::to_string(cfg.max_evals));
    }
}

void print_medians(const ex::ExperimentConfig& cfg, const std::vector<ex::ArmResult>& results) {
    const auto names = cpsem::parameter_names(cpsem::family_of(cfg.data.theta));
    for (const auto& res : results) {
        std::printf("%-28s", res.arm.name.c_str());
        for (std::size_t p = 0; p < names.size(); ++p) {
            std::vector<double> v;
            for (const auto& tr : res.traces) v.push_back(cpsem::parameter_values(tr.theta)[p]);
            std::printf("  median %s=%.4f", names[p].c_str(), cpsem::quantile(v, 0.5));
        }
        std::printf("\n");
    }
}

int run(const std::string& command, const Options& o) {
    const ex::ExperimentConfig cfg = resolve(command, o);
    guard_budget(cfg, command);
    if (command == "simulate") {
        ex::write_simulation(cfg);
    } else if (command == "estimate") {
        const auto results = ex::run_estimate(cfg);
        ex::write_estimates(cfg, results);
        print_medians(cfg, results);
    } else if (command == "smooth") {
        const auto result = ex::run_smooth(cfg);
        ex::write_smooth(cfg, result);
        for (int c = 0; c < result.summary.dim(); ++c) {
            std::printf("component %d: rmse=%.4f cp=%.3f\n", c + 1, result.summary.rmse[static_cast<std::size_t>(c)],
                        result.summary.cp[static_cast<std::size_t>(c)]);
        }
    } else if (command == "crossval") {
        const auto result = ex::run_crossval(cfg);
        ex::write_crossval(cfg, result);
        for (const auto& r : result.rows) {
            std::printf("%-8s iters=%-4d rmse=%.4f cp=%.3f\n", r.algorithm.c_str(), r.iters, r.rmse, r.cp);
        }
    }
    std::fprintf(stderr, "outputs written to %s\n", cfg.out_dir.string().c_str());
    return 0;
}

void print_scenarios() {
    for (const auto& s : ex::list_scenarios()) {
        std::printf("%-10s %-9s %s\n", s.name.c_str(), s.command.c_str(), s.description.c_str());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Conditional particle smoothing and stochastic EM experiments"};
    app.require_subcommand(0, 1);
    bool list_flag = false;
    app.add_flag("--list-scenarios", list_flag, "list the named scenarios and exit");

    Options opts;
    std::string chosen;
    for (const char* name : {"simulate", "smooth", "estimate", "crossval"}) {
        CLI::App* cmd = app.add_subcommand(name);
        add_common(cmd, opts);
        cmd->callback([&chosen, name] { chosen = name; });
    }
    app.get_subcommand("simulate")->description("simulate truth.csv and obs.csv");
    app.get_subcommand("smooth")->description("one SEM run and a reconstruction.csv of pooled samples");
    app.get_subcommand("estimate")->description("repeated SEM runs: traces and estimates_final.csv");
    app.get_subcommand("crossval")->description("train, then score smoothers on a long test record (table1.csv)");
    app.add_subcommand("list-scenarios", "list the named scenarios")->callback([&chosen] { chosen = "list"; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    if (list_flag || chosen == "list") {
        print_scenarios();
        return 0;
    }
    if (chosen.empty()) {
        std::cerr << app.help();
        return kExitConfig;
    }

    try {
        return run(chosen, opts);
    } catch (const cpsem::InvalidArgument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const cpsem::NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
