#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "glassmem/config.hpp"
#include "glassmem/experiments.hpp"

namespace glassmem::harness {

struct OutputFile {
    std::string name; // relative to the output directory
    std::uint64_t bytes = 0;
    std::string sha256;
};

struct RunManifest {
    std::string experiment;
    std::string code_version;
    config::ExperimentConfig config;
    std::vector<experiments::SeedRecord> seeds;
    double wall_clock_s = 0.0;
    std::vector<OutputFile> outputs;
};

std::string code_version();

// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

// Runs the configured experiment, writes its CSVs and manifest.json into
// config.output. Throws ConfigError if the config does not validate.
RunManifest run(const config::ExperimentConfig& config);

std::string manifest_json(const RunManifest& manifest, int indent = 2);

// Recomputes the digests listed in a manifest; returns the names that differ.
std::vector<std::string> verify_manifest(const std::filesystem::path& manifest_path);

} // namespace glassmem::harness
