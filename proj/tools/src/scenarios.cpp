#include "cpsem/errors.hpp"
#include "cpsem/experiments/experiment.hpp"

#include <functional>

namespace cpsem::experiments {

namespace {

ArmConfig arm(Algorithm a, int n_f, int n_s) { return {"", a, n_f, n_s, std::nullopt}; }

ModelConfig lorenz_data(double dt) {
    ModelConfig d = default_model_config(ModelFamily::Lorenz);
    std::get<ThetaLorenz>(d.theta).dt = dt;
    return d;
}

ExperimentConfig base(std::string name, std::string command, std::string description, ModelFamily family) {
    ExperimentConfig cfg;
    cfg.scenario = std::move(name);
    cfg.command = std::move(command);
    cfg.description = std::move(description);
    cfg.data = default_model_config(family);
    return cfg;
}

ExperimentConfig smooth_scenario(std::string name, ModelFamily family, int n, std::string description) {
    ExperimentConfig cfg = base(std::move(name), "smooth", std::move(description), family);
    cfg.arms = {arm(Algorithm::CPF_BS_SEM, n, n)};
    return cfg;
}

ExperimentConfig bs_vs_as(std::string name, ModelFamily family, int n, std::string description) {
    ExperimentConfig cfg = base(std::move(name), "estimate", std::move(description), family);
    cfg.arms = {arm(Algorithm::CPF_BS_SEM, n, n), arm(Algorithm::CPF_AS_SEM, n, n)};
    cfg.repetitions = 100;
    return cfg;
}

struct Entry {
    const char* name;
    std::function<ExperimentConfig()> make;
};

const std::vector<Entry>& registry() {
    static const std::vector<Entry> entries{
        {"linear",
         [] {
             return smooth_scenario("linear", ModelFamily::Linear, 10,
                                    "linear AR(1), theta*=(0.9,1,1), T=100: one CPF-BS-SEM run (N_f=N_s=10, 100 "
                                    "iterations), reconstruction from the last 10 iterations");
         }},
        {"kitagawa",
         [] {
             return smooth_scenario("kitagawa", ModelFamily::Kitagawa, 10,
                                    "Kitagawa model, theta*=(1,10), T=100: one CPF-BS-SEM run (N_f=N_s=10), "
                                    "reconstruction from the last 10 iterations");
         }},
        {"lorenz",
         [] {
             return smooth_scenario("lorenz", ModelFamily::Lorenz, 20,
                                    "Lorenz-63 observing (x1,x3), theta*=(1,2), dt=0.15, T=100: one CPF-BS-SEM run "
                                    "(N_f=N_s=20), reconstruction from the last 10 iterations");
         }},
        {"fig7",
         [] {
             return bs_vs_as("fig7", ModelFamily::Linear, 10,
                             "linear model, CPF-BS-SEM vs CPF-AS-SEM, N_f=N_s=10, 100 iterations x 100 "
                             "repetitions");
         }},
        {"fig8",
         [] {
             ExperimentConfig cfg = base("fig8", "estimate",
                                         "linear model, CPF-BS-SEM / CPF-AS-SEM / PF-BS-SEM with "
                                         "N_f=N_s in {10,100,1000}, final estimates of 100 repetitions",
                                         ModelFamily::Linear);
             for (int n : {10, 100, 1000}) {
                 for (Algorithm a : {Algorithm::CPF_BS_SEM, Algorithm::CPF_AS_SEM, Algorithm::PF_BS_SEM}) {
                     cfg.arms.push_back(arm(a, n, n));
                 }
             }
             cfg.repetitions = 100;
             return cfg;
         }},
        {"fig9",
         [] {
             return smooth_scenario("fig9", ModelFamily::Linear, 10,
                                    "linear model reconstruction, CPF-BS-SEM N_f=N_s=10, samples of the last "
                                    "10 of 100 iterations");
         }},
        {"fig10",
         [] {
             return bs_vs_as("fig10", ModelFamily::Kitagawa, 10,
                             "Kitagawa model, CPF-BS-SEM vs CPF-AS-SEM, N_f=N_s=10, 100 iterations x 100 "
                             "repetitions");
         }},
        {"fig11",
         [] {
             ExperimentConfig cfg = base("fig11", "estimate",
                                         "Kitagawa model, N_f=10 and N_s in {1,5,10}, CPF-BS-SEM vs "
                                         "CPF-AS-SEM, final estimates of 100 repetitions",
                                         ModelFamily::Kitagawa);
             for (Algorithm a : {Algorithm::CPF_BS_SEM, Algorithm::CPF_AS_SEM}) {
                 for (int ns : {1, 5, 10}) cfg.arms.push_back(arm(a, 10, ns));
             }
             cfg.repetitions = 100;
             return cfg;
         }},
        {"fig12",
         [] {
             return smooth_scenario("fig12", ModelFamily::Kitagawa, 10,
                                    "Kitagawa reconstruction, CPF-BS-SEM N_f=N_s=10, samples of the last "
                                    "10 of 100 iterations");
         }},
        {"fig13",
         [] {
             return bs_vs_as("fig13", ModelFamily::Lorenz, 20,
                             "Lorenz-63 dt=0.15, CPF-BS-SEM vs CPF-AS-SEM, N_f=N_s=20, 100 iterations x "
                             "100 repetitions");
         }},
        {"fig14",
         [] {
             ExperimentConfig cfg = base("fig14", "estimate",
                                         "Lorenz-63 with dt in {0.01,0.08,0.15}, CPF-BS-SEM / CPF-AS-SEM / "
                                         "EnKS-EM with 20 particles or members, final estimates of 100 repetitions",
                                         ModelFamily::Lorenz);
             for (double dt : {0.01, 0.08, 0.15}) {
                 for (Algorithm a : {Algorithm::CPF_BS_SEM, Algorithm::CPF_AS_SEM, Algorithm::ENKS_EM}) {
                     ArmConfig x = arm(a, 20, 20);
                     x.data = lorenz_data(dt);
                     cfg.arms.push_back(x);
                 }
             }
             cfg.repetitions = 100;
             return cfg;
         }},
        {"fig15",
         [] {
             return smooth_scenario("fig15", ModelFamily::Lorenz, 20,
                                    "Lorenz-63 reconstruction, CPF-BS-SEM N_f=N_s=20, samples of the last "
                                    "10 of 100 iterations");
         }},
        {"table1",
         [] {
             ExperimentConfig cfg = bs_vs_as("table1", ModelFamily::Lorenz, 20,
                                             "Lorenz-63 dt=0.15, parameters trained on T=100 (mean of 100 "
                                             "final estimates), CPF-BS and CPF-AS smoothers on a T'=1000 test record, "
                                             "x2 scored after 5/10/50/100 iterations");
             cfg.command = "crossval";
             return cfg;
         }},
    };
    return entries;
}

}  // namespace

std::vector<ScenarioInfo> list_scenarios() {
    std::vector<ScenarioInfo> out;
    for (const auto& e : registry()) {
        const ExperimentConfig cfg = e.make();
        out.push_back({cfg.scenario, cfg.command, cfg.description});
    }
    return out;
}

ExperimentConfig scenario(std::string_view name) {
    for (const auto& e : registry()) {
        if (name == e.name) {
            ExperimentConfig cfg = e.make();
            finalize(cfg);
            return cfg;
        }
    }
    throw InvalidArgument("unknown scenario '" + std::string(name) + "' (see list-scenarios)");
}

}  // namespace cpsem::experiments
