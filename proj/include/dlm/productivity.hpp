#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "dlm/corpus.hpp"

namespace dlm {

/// Decides which words belong to a word-formation pattern. With `tag_key`
/// set membership is `tag(tag_key) == tag_value`; otherwise the form must end
/// in `suffix`, be longer than it, and not be on the stoplist.
struct PatternRule {
    std::string name;
    std::string tag_key;
    std::string tag_value;
    std::string suffix;
    std::set<std::string> stoplist;

    bool matches(const WordEntry& e) const;

    /// "nis" -> suffix rule named "-nis"; "key=value" -> tag rule named value.
    static PatternRule parse(const std::string& text);
};

struct GrowthPoint {
    int year = 0;
    Eigen::Index types = 0; ///< distinct types up to and including `year`
};

/// Cumulative type counts for the years present in `entries`. Every entry
/// must carry a year.
std::vector<GrowthPoint> growth_curve(const std::vector<WordEntry>& entries,
                                      const std::function<bool(const WordEntry&)>& filter = {});

/// Output types never seen before, per output year. A type is new in year y
/// when it is absent from input years <= y and from output years < y. Every
/// output year gets an entry, possibly empty; lists are sorted.
std::map<int, std::vector<std::string>> detect_new_types(const std::vector<WordEntry>& input,
                                                         const std::vector<WordEntry>& output);

enum class DistanceMetric { euclidean, correlation };

struct PatternYearStats {
    std::string pattern;
    int year = 0;
    Eigen::Index input_types = 0;  ///< types occurring in the input that year
    std::int64_t input_tokens = 0;
    Eigen::Index input_hapaxes = 0;
    Eigen::Index cumulative_input_types = 0;
    Eigen::Index new_input_types = 0;
    Eigen::Index output_types = 0;
    std::int64_t output_tokens = 0;
    Eigen::Index known_output_types = 0; ///< output types that year already read
    Eigen::Index new_output_types = 0;
    Eigen::Index cumulative_recycled = 0;
    double p_narrow = 0;
    double p_neo = 0;
    double recycle_rate = 0;
    double centroid_distance = 0; ///< NaN when no input type that year has an embedding
    bool degenerate = false;      ///< no input tokens that year or no cumulative input
};

struct PatternTableOptions {
    DistanceMetric distance = DistanceMetric::euclidean;
};

/// One row per (pattern, output year); output years are the union over all
/// patterns. Rows are ordered by pattern (as given) then year.
std::vector<PatternYearStats> pattern_year_table(const std::vector<WordEntry>& input,
                                                 const std::vector<WordEntry>& output,
                                                 const std::vector<PatternRule>& patterns,
                                                 const EmbeddingTable& embeddings,
                                                 const PatternTableOptions& opts = {});

/// Pattern statistics pooled over the whole period.
struct PatternTotals {
    std::string pattern;
    Eigen::Index input_types = 0;
    std::int64_t input_tokens = 0;
    Eigen::Index input_hapaxes = 0;
    Eigen::Index output_types = 0;
    std::int64_t output_tokens = 0;
    Eigen::Index new_output_types = 0;
    std::optional<Eigen::Index> recycled; ///< distinct output types that were read before

    double p_narrow() const;
    std::optional<double> recycle_rate() const;
};

std::vector<PatternTotals> pattern_totals(const std::vector<WordEntry>& input, const std::vector<WordEntry>& output,
                                          const std::vector<PatternRule>& patterns);

/// TSV with header pattern, input_types, input_tokens, input_hapaxes,
/// output_types, output_tokens, new_output_types and optionally recycled
/// ("NA" for unknown). Thousands separators are accepted.
std::vector<PatternTotals> load_pattern_totals(const std::filesystem::path& path);

/// Two-column "label,value" file with a header; returns values in file order
/// keyed by label.
std::vector<std::pair<std::string, double>> load_labeled_series(const std::filesystem::path& path);

struct SpearmanResult {
    std::optional<double> rho; ///< empty for a constant series
    double p_value = std::numeric_limits<double>::quiet_NaN(); ///< two-sided, t approximation
    Eigen::Index n = 0;
};

SpearmanResult spearman_test(std::span<const double> xs, std::span<const double> ys);

} // namespace dlm
