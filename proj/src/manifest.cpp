#include "surrex/manifest.hpp"

#include <fstream>

#include <json.hpp>

namespace surrex {

using nlohmann::json;

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

namespace {

json manifest_body(const RunManifest& m) {
    json j;
    j["command"] = m.command;
    j["argv"] = m.argv;
    j["version"] = m.version;
    j["dataset_fingerprint"] = m.dataset_fingerprint;
    j["model"] = m.model;
    j["pi"] = m.pi;
    j["priors"] = {{"a", m.priors.a},
                   {"b", m.priors.b},
                   {"psi_bf_scale", m.priors.psi_bf_scale},
                   {"psi_prior_scale_used", m.psi_prior_scale_used}};
    j["mcmc"] = {{"iters", m.cfg.n_iter},
                 {"burnin", m.cfg.n_burnin},
                 {"thin", m.cfg.thin},
                 {"seed", m.cfg.seed}};
    j["level"] = m.level;
    j["constants"] = m.extra;
    return j;
}

} // namespace

std::string RunManifest::to_json() const { return manifest_body(*this).dump(2); }

std::string RunManifest::hash() const { return fnv1a_hex(to_json()); }

void RunManifest::write(const std::string& path) const {
    json j = manifest_body(*this);
    j["manifest_hash"] = hash();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest '" + path + "'");
    out << j.dump(2) << "\n";
}

RunManifest RunManifest::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open manifest '" + path + "'");
    json j;
    in >> j;
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.argv = j.at("argv").get<std::vector<std::string>>();
    m.version = j.at("version").get<std::string>();
    m.dataset_fingerprint = j.value("dataset_fingerprint", "");
    m.model = j.value("model", "");
    if (j.contains("pi")) m.pi = j["pi"].get<std::vector<double>>();
    m.priors.a = j.at("priors").at("a").get<double>();
    m.priors.b = j.at("priors").at("b").get<double>();
    m.priors.psi_bf_scale = j.at("priors").at("psi_bf_scale").get<double>();
    m.psi_prior_scale_used = j.at("priors").value("psi_prior_scale_used", 0.0);
    m.cfg.n_iter = j.at("mcmc").at("iters").get<std::int64_t>();
    m.cfg.n_burnin = j.at("mcmc").at("burnin").get<std::int64_t>();
    m.cfg.thin = j.at("mcmc").at("thin").get<std::int64_t>();
    m.cfg.seed = j.at("mcmc").at("seed").get<std::uint64_t>();
    m.level = j.value("level", 0.95);
    if (j.contains("constants"))
        m.extra = j["constants"].get<std::map<std::string, std::string>>();
    return m;
}

} // namespace surrex
