#pragma once

#include <map>
#include <string>
#include <vector>

#include "surrex/types.hpp"

namespace surrex {

/// Everything needed to reproduce a run bit-exactly: the command line, the
/// dataset fingerprint, model, priors, chain settings and the numeric
/// constants in effect. Serialized as JSON next to every output; the hash
/// of the serialized form is embedded in every output file. Deliberately
/// contains no timestamps so re-runs are byte-identical.
struct RunManifest {
    std::string command;
    std::vector<std::string> argv;
    std::string version;
    std::string dataset_fingerprint;
    std::string model;
    std::vector<double> pi;
    PriorSpec priors;
    double psi_prior_scale_used = 0.0;
    McmcConfig cfg;
    double level = 0.95;
    std::map<std::string, std::string> extra; // flags and constants in effect

    std::string to_json() const;      // canonical serialization, hash excluded
    std::string hash() const;         // FNV-1a of to_json()
    void write(const std::string& path) const; // JSON including the hash

    static RunManifest load(const std::string& path);
};

/// FNV-1a 64 of a byte string, hex-encoded.
std::string fnv1a_hex(const std::string& bytes);

} // namespace surrex
