#include "cpsem/model_config.hpp"

#include "cpsem/detail/overloaded.hpp"
#include "cpsem/errors.hpp"

#include <cmath>
#include <string>

namespace cpsem {

using detail::Overloaded;
using nlohmann::json;

namespace {

double number_or(const json& doc, const char* key, double fallback) {
    if (!doc.contains(key)) return fallback;
    const auto& v = doc.at(key);
    if (!v.is_number()) throw InvalidArgument(std::string("config field '") + key + "' must be a number");
    return v.get<double>();
}

}  // namespace

ModelConfig default_model_config(ModelFamily family) {
    ModelConfig cfg;
    switch (family) {
        case ModelFamily::Linear: cfg.theta = ThetaLinear::with_stationary_prior(0.9, 1.0, 1.0); break;
        case ModelFamily::Kitagawa: cfg.theta = ThetaKitagawa{}; break;
        case ModelFamily::Lorenz: cfg.theta = ThetaLorenz{}; break;
    }
    return cfg;
}

ModelConfig model_config_from_json(const json& doc) {
    if (!doc.is_object()) throw InvalidArgument("model config must be a JSON object");
    const std::string name = doc.value("model", std::string("linear"));
    ModelConfig cfg = default_model_config(parse_family(name));

    if (doc.contains("T")) {
        if (!doc.at("T").is_number_integer() || doc.at("T").get<long long>() < 1) {
            throw InvalidArgument("config field 'T' must be a positive integer");
        }
        cfg.horizon = doc.at("T").get<int>();
    }
    if (doc.contains("seed")) {
        const auto& seed = doc.at("seed");
        if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<std::int64_t>() < 0)) {
            throw InvalidArgument("config field 'seed' must be a non-negative integer");
        }
        cfg.seed = doc.at("seed").get<std::uint64_t>();
    }

    std::visit(Overloaded{
                   [&](ThetaLinear& p) {
                       p.A = number_or(doc, "A", p.A);
                       p.Q = number_or(doc, "Q", p.Q);
                       p.R = number_or(doc, "R", p.R);
                       p.x0_mean = number_or(doc, "x0_mean", p.x0_mean);
                       const double stationary = std::abs(p.A) < 1.0 ? p.Q / (1.0 - p.A * p.A) : 1.0;
                       p.x0_var = number_or(doc, "x0_var", stationary);
                   },
                   [&](ThetaKitagawa& p) {
                       p.Q = number_or(doc, "Q", p.Q);
                       p.R = number_or(doc, "R", p.R);
                       p.x0_mean = number_or(doc, "x0_mean", p.x0_mean);
                       p.x0_var = number_or(doc, "x0_var", p.x0_var);
                   },
                   [&](ThetaLorenz& p) {
                       p.sigma_q2 = number_or(doc, "sigma_q2", p.sigma_q2);
                       p.sigma_r2 = number_or(doc, "sigma_r2", p.sigma_r2);
                       p.dt = number_or(doc, "dt", p.dt);
                       p.x0_var = number_or(doc, "x0_var", p.x0_var);
                       if (doc.contains("x0_mean")) {
                           const auto& m = doc.at("x0_mean");
                           if (!m.is_array() || m.size() != 3) {
                               throw InvalidArgument("lorenz x0_mean must be an array of 3 numbers");
                           }
                           p.x0_mean.resize(3);
                           for (int i = 0; i < 3; ++i) p.x0_mean[i] = m.at(static_cast<std::size_t>(i)).get<double>();
                       }
                   },
               },
               cfg.theta);
    check_theta(cfg.theta);
    return cfg;
}

json to_json(const ModelConfig& cfg) {
    json doc;
    doc["model"] = std::string(family_name(family_of(cfg.theta)));
    doc["T"] = cfg.horizon;
    doc["seed"] = cfg.seed;
    std::visit(Overloaded{
                   [&](const ThetaLinear& p) {
                       doc["A"] = p.A;
                       doc["Q"] = p.Q;
                       doc["R"] = p.R;
                       doc["x0_mean"] = p.x0_mean;
                       doc["x0_var"] = p.x0_var;
                   },
                   [&](const ThetaKitagawa& p) {
                       doc["Q"] = p.Q;
                       doc["R"] = p.R;
                       doc["x0_mean"] = p.x0_mean;
                       doc["x0_var"] = p.x0_var;
                   },
                   [&](const ThetaLorenz& p) {
                       doc["sigma_q2"] = p.sigma_q2;
                       doc["sigma_r2"] = p.sigma_r2;
                       doc["dt"] = p.dt;
                       if (p.x0_mean.size() == 3) doc["x0_mean"] = {p.x0_mean[0], p.x0_mean[1], p.x0_mean[2]};
                       doc["x0_var"] = p.x0_var;
                   },
               },
               cfg.theta);
    return doc;
}

}  // namespace cpsem
