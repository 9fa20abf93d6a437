#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dlm/config.hpp"

namespace dlm {

inline constexpr const char* kVersion = "0.1.0";

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Stage seed from the root seed and the stage name (splitmix64 over an
/// FNV-1a hash of the name).
std::uint64_t derive_seed(std::uint64_t root, const std::string& stage);

struct ManifestFile {
    std::string path; ///< relative to the output directory for outputs
    std::string sha256;
    std::uintmax_t bytes = 0;
};

struct Manifest {
    std::vector<ManifestFile> inputs;
    std::vector<ManifestFile> files;
    std::uint64_t seed = 0;
    bool complete = false;
    std::string failed_stage;
    std::string error;

    bool lists(const std::string& relative_path) const;
};

/// ingest -> form space -> split -> train -> evaluate -> analyses (and time
/// slices when configured). Writes every report plus manifest.json into the
/// output directory. A failing stage writes an incomplete manifest and throws
/// StageError.
Manifest run_experiment(const ExperimentConfig& cfg);

struct SliceSummary {
    int year = 0;
    Eigen::Index train_words = 0;
    Eigen::Index heldout_words = 0;
    bool skipped = false;
};

/// Cumulative time slices: for each year y trains on input entries with
/// year <= y and evaluates on words first seen after y. Writes reports under
/// `<output_dir>/slices` and a manifest.
std::vector<SliceSummary> run_time_slices(const ExperimentConfig& cfg, const std::vector<int>& years,
                                          Manifest* manifest = nullptr);

/// Merges entries of the same form: frequencies add up, the earliest year
/// is kept, tags and lemma come from the first occurrence.
std::vector<WordEntry> collapse_types(const std::vector<WordEntry>& entries);

} // namespace dlm
