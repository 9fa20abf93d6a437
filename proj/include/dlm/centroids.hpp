#pragma once

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dlm/corpus.hpp"
#include "dlm/form_space.hpp"
#include "dlm/linear_mapping.hpp"

namespace dlm {

/// Mean embedding of the words sharing one tag-value combination.
struct Centroid {
    std::string tag;   ///< values joined with '+', e.g. "ess+sg"
    Eigen::VectorXd vector;
    Eigen::Index members = 0;
};

enum class CentroidWeighting { type, token };

/// Category label of `e` for the given tag keys; throws naming the word when
/// a key is missing.
std::string category_of(const WordEntry& e, const std::vector<std::string>& tag_keys);

/// One centroid per distinct category, ordered by label.
std::vector<Centroid> compute_centroids(const Dataset& dataset, const std::vector<std::string>& tag_keys,
                                        CentroidWeighting weighting = CentroidWeighting::type);

enum class CueSide { rows, columns };

/// Correlations of every centroid with every cue vector. Undefined entries
/// (zero-variance cue or centroid) are NaN.
struct CueCentroidMatrix {
    std::vector<std::string> tags;
    std::vector<std::string> cues;
    Eigen::MatrixXd r;   ///< tags x cues

    Eigen::Index tag_row(const std::string& tag) const;
    Eigen::Index undefined_count() const;
};

/// Comprehension mappings contribute F's rows (side = rows), production
/// mappings G's columns (side = columns).
CueCentroidMatrix cue_centroid_correlations(const LinearMapping& mapping, const CueIndex& cues,
                                            const std::vector<Centroid>& centroids, CueSide side);

struct RankedCue {
    std::string cue;
    double r = 0;
    Eigen::Index global_rank = 0;     ///< position among all defined cues
    Eigen::Index restricted_rank = 0; ///< position among cues passing the predicate
};

/// Cues for `tag` by descending r (ties: lexicographic cue). When `restrict`
/// is set only passing cues are listed, carrying both their global and
/// restricted ranks.
std::vector<RankedCue> rank_cues(const CueCentroidMatrix& matrix, const std::string& tag,
                                 const std::function<bool(const std::string&)>& restrict = {});

enum class CuePosition { final, initial };

/// Position-extreme n-grams of each category's members with member counts.
std::map<std::string, std::map<std::string, Eigen::Index>>
exponent_inventory(const Dataset& dataset, const std::vector<std::string>& tag_keys, CuePosition position,
                   int n = 4, std::string_view boundary = "#");

/// Per-category summary of how a category's own exponent cues rank against
/// its centroid.
struct ExponentSummary {
    std::string tag;
    Eigen::Index exponent_cues = 0;
    double max_r = 0;
    double mean_top5_r = 0;
    Eigen::Index in_top10_global = 0;   ///< own exponent cues among the 10 best of all cues
    Eigen::Index in_top10_position = 0; ///< ... among the 10 best position-extreme cues
    Eigen::Index best_global_rank = 0;
};

std::vector<ExponentSummary>
exponent_summary(const CueCentroidMatrix& matrix,
                 const std::map<std::string, std::map<std::string, Eigen::Index>>& inventory,
                 const std::function<bool(const std::string&)>& position_filter);

struct Transparency {
    std::string word;
    std::string tag;
    double r = 0;
    bool degenerate = false; ///< singleton category
};

std::vector<Transparency> word_transparency(const Dataset& dataset, const std::vector<Centroid>& centroids,
                                            const std::vector<std::string>& tag_keys);

} // namespace dlm
