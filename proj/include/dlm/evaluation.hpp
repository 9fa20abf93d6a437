#pragma once

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dlm/corpus.hpp"
#include "dlm/form_space.hpp"
#include "dlm/stats.hpp"

namespace dlm {

struct TargetRank {
    Eigen::Index rank = 0;
    double r_target = 0; ///< NaN when undefined (zero variance)
    bool degenerate = false;
};

/// Rank of `target` among all candidates by similarity to `predicted`:
/// 1 + the number of candidates more similar than the target, where equal
/// similarity is resolved in favour of the lexicographically smaller word.
/// Zero-variance vectors have similarity -inf and never outrank anything.
TargetRank rank_target(const Eigen::Ref<const Eigen::RowVectorXd>& predicted, const std::string& target,
                       const EmbeddingTable& candidates, Similarity metric = Similarity::pearson);

struct WordRecord {
    std::string word;
    std::string cls;
    std::int64_t frequency = 0;
    Eigen::Index rank = 0;
    double r_target = 0;
    bool degenerate = false;
};

struct ClassAccuracy {
    Eigen::Index words = 0;
    std::int64_t tokens = 0;
    std::vector<double> type_accuracy;  ///< one per k
    std::vector<double> token_accuracy; ///< one per k
};

struct AccuracyReport {
    std::vector<Eigen::Index> ks;
    std::vector<double> type_accuracy;
    std::vector<double> token_accuracy;
    std::map<std::string, ClassAccuracy> by_class;
    std::vector<WordRecord> words;
    Eigen::Index degenerate_predictions = 0;

    /// Type accuracy at `k`; throws if `k` was not evaluated.
    double at(Eigen::Index k) const;
    double tokens_at(Eigen::Index k) const;
};

struct EvalOptions {
    std::string class_tag;  ///< tag used for the per-class breakdown; empty = none
    Similarity metric = Similarity::pearson;
};

/// Accuracy@k (type and token weighted, overall and per class) from
/// per-word ranks. Every k must lie in [1, candidate_count].
AccuracyReport summarize(const std::vector<Eigen::Index>& ks, Eigen::Index candidate_count,
                         std::vector<WordRecord> records);

/// Row i of `predictions` is the predicted vector for gold entry i, scored
/// against every word of `candidates`.
AccuracyReport accuracy_report(const Eigen::Ref<const Eigen::MatrixXd>& predictions, const Dataset& gold,
                               const EmbeddingTable& candidates, std::vector<Eigen::Index> ks,
                               const EvalOptions& opts = {});

/// Production counterpart: row i of `predictions` targets row i of `gold`,
/// candidates are all rows of `gold`. `frequencies` and `classes` may be empty.
AccuracyReport production_accuracy(const Eigen::Ref<const Eigen::MatrixXd>& predictions,
                                   const FormMatrix& gold, std::vector<Eigen::Index> ks,
                                   const std::vector<std::int64_t>& frequencies = {},
                                   const std::vector<std::string>& classes = {},
                                   Similarity metric = Similarity::pearson);

/// Ranks for many predictions against dense candidates (row i targets
/// candidate targets[i]). Exposed for analyses that bring their own candidate set.
std::vector<TargetRank> rank_targets(const Eigen::Ref<const Eigen::MatrixXd>& predictions,
                                     const Eigen::Ref<const Eigen::MatrixXd>& candidates,
                                     const std::vector<std::string>& labels,
                                     const std::vector<Eigen::Index>& targets,
                                     Similarity metric = Similarity::pearson);

} // namespace dlm
