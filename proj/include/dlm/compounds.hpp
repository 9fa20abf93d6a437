#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dlm/corpus.hpp"
#include "dlm/form_space.hpp"
#include "dlm/linear_mapping.hpp"

namespace dlm {

/// A two-constituent compound and its cues grouped by where they fall
/// relative to the constituent seam.
struct CompoundParse {
    std::string compound;
    std::string left;
    std::string right;
    std::int64_t frequency = 0;
    std::vector<std::string> left_cues;     ///< entirely before the seam
    std::vector<std::string> boundary_cues; ///< cover a letter on each side
    std::vector<std::string> right_cues;    ///< entirely after the seam
};

/// Checks that left + right spells the compound (hyphens ignored when
/// `ignore_hyphens`) and groups its n-grams. Throws ArgumentError otherwise.
CompoundParse parse_compound(const std::string& compound, const std::string& left, const std::string& right,
                             int n = 3, std::string_view boundary = "#", bool ignore_hyphens = true);

/// TSV with header and columns compound, left, right (optional frequency).
std::vector<CompoundParse> load_parses(const std::filesystem::path& path, int n = 3,
                                       std::string_view boundary = "#", bool lowercase = true);

struct BoundaryProportions {
    std::string compound;
    /// Share of the group's cues whose correlation with the compound exceeds
    /// their correlation with both constituents; empty for an empty group.
    std::optional<double> boundary, left, right;
    Eigen::Index boundary_count = 0, left_count = 0, right_count = 0;
};

struct SkippedCompound {
    std::string compound;
    std::string reason;
};

struct BoundaryAnalysis {
    std::vector<BoundaryProportions> compounds;
    std::vector<SkippedCompound> skipped;
};

/// r(cue, word) is the correlation of the cue's row of the comprehension
/// mapping with the word's embedding.
BoundaryAnalysis boundary_cue_proportions(const std::vector<CompoundParse>& parses, const LinearMapping& F,
                                          const CueIndex& cues, const EmbeddingTable& embeddings);

/// Predicts compound embeddings as L M_L + R M_R.
struct CaossMapping {
    Eigen::MatrixXd left;  ///< M_L, d x d
    Eigen::MatrixXd right; ///< M_R, d x d
    double lambda = 0;
};

CaossMapping caoss_fit(const Eigen::Ref<const Eigen::MatrixXd>& L, const Eigen::Ref<const Eigen::MatrixXd>& R,
                       const Eigen::Ref<const Eigen::MatrixXd>& C, double lambda = 0.0);

enum class CaossMode { caoss, additive };

Eigen::MatrixXd caoss_predict(const CaossMapping& m, const Eigen::Ref<const Eigen::MatrixXd>& L,
                              const Eigen::Ref<const Eigen::MatrixXd>& R, CaossMode mode = CaossMode::caoss);

enum class PivotPosition { left, right };
enum class IntervalMethod { percentile, normal };

struct PivotIsland {
    std::string pivot;
    PivotPosition position = PivotPosition::left;
    Eigen::VectorXd centroid;
    double lower = 0, upper = 0;
    std::vector<std::string> compounds; ///< pivot compounds with embeddings
    std::vector<double> correlations;   ///< aligned with `compounds`
    std::vector<std::string> members;
    std::vector<std::string> intruders;
    Eigen::Index candidates = 0;
    Eigen::Index types = 0;       ///< V: compound types with the pivot
    std::int64_t tokens = 0;      ///< N
    Eigen::Index hapaxes = 0;     ///< V1
    double productivity = 0;      ///< V1 / N
    bool degenerate = false;      ///< single compound or undefined correlations
};

/// Compounds that share a non-pivot partner of `pivot` but do not have the
/// pivot in the given position.
std::vector<std::string> intruder_candidates(const std::string& pivot, PivotPosition position,
                                             const std::vector<CompoundParse>& parses);

PivotIsland pivot_island(const std::string& pivot, PivotPosition position, const std::vector<CompoundParse>& parses,
                         const EmbeddingTable& embeddings, const std::vector<std::string>& candidates,
                         IntervalMethod method = IntervalMethod::percentile);

} // namespace dlm
