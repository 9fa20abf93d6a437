#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dlm/corpus.hpp"
#include "dlm/deep_mapping.hpp"
#include "dlm/form_space.hpp"
#include "dlm/linear_mapping.hpp"
#include "dlm/productivity.hpp"
#include "dlm/report.hpp"
#include "dlm/stats.hpp"

namespace dlm {

/// Flat "key = value" file. '#' starts a comment line; later keys override
/// earlier ones.
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);
std::map<std::string, std::string> parse_key_values(const std::string& text, const std::string& origin = "<config>");

enum class SplitMode { none, threshold, random };
enum class CandidatePolicy { dataset, embeddings };

struct ExperimentConfig {
    // data
    std::filesystem::path lexicon;
    std::filesystem::path embeddings;
    JoinKey join = JoinKey::form;
    LexiconSchema schema;
    bool lowercase_embeddings = false;

    // forms
    int ngram = 4;
    std::string boundary = "#";

    // split
    SplitMode split = SplitMode::none;
    std::int64_t split_threshold = 5;
    double split_fraction = 0.1;
    std::vector<std::string> coverage_tags;

    // mappings
    std::vector<std::string> methods{"eol"}; ///< eol, fil, deep
    std::vector<Direction> directions{Direction::comprehension};
    double eol_lambda = 0;
    FilOptions fil;
    DeepOptions deep;

    // evaluation
    std::vector<Eigen::Index> ks{1, 10};
    CandidatePolicy candidates = CandidatePolicy::dataset;
    std::string class_tag;
    Similarity metric = Similarity::pearson;

    // analyses
    std::vector<std::string> analyses; ///< centroids, compounds, diachronic
    std::vector<std::string> centroid_tags;
    bool centroid_initial = false;
    std::filesystem::path compound_parses;
    int compound_ngram = 3;
    std::vector<std::string> pivots; ///< "left:air", "right:field"
    IntervalMethod pivot_interval = IntervalMethod::percentile;
    std::vector<PatternRule> patterns;
    DistanceMetric distance = DistanceMetric::euclidean;

    // time slices
    std::vector<int> slices;

    std::filesystem::path output_dir = "out";
    ReportFormat format = ReportFormat::csv;
    std::uint64_t seed = 1;

    /// Raw key/value pairs the config was built from, kept for the manifest.
    std::map<std::string, std::string> raw;

    bool has_analysis(const std::string& name) const;
};

/// Keys accepted in an experiment config file, with one-line descriptions.
const std::vector<std::pair<std::string, std::string>>& documented_keys();

/// Builds a config from key/value pairs, resolving relative paths against
/// `base_dir`. Unknown keys and malformed values throw ArgumentError.
ExperimentConfig make_config(const std::map<std::string, std::string>& kv,
                             const std::filesystem::path& base_dir = {});

ExperimentConfig load_config(const std::filesystem::path& path);

/// Checks that referenced files exist and every enabled analysis has its
/// inputs. Throws ArgumentError.
void validate(const ExperimentConfig& cfg);

std::vector<std::string> split_list(const std::string& s);
std::vector<Eigen::Index> parse_ks(const std::string& s);

} // namespace dlm
