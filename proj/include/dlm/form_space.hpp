#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dlm/corpus.hpp"

namespace dlm {

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Boundary-padded letter n-grams of `word` in order, duplicates kept. A word
/// whose padded form is shorter than `n` yields the padded form itself.
std::vector<std::string> extract_ngrams(std::string_view word, int n, std::string_view boundary = "#");

/// Dense, insertion-ordered bijection between cue strings and column ids.
class CueIndex {
public:
    CueIndex(int n = 4, std::string boundary = "#");

    int n() const noexcept { return n_; }
    const std::string& boundary() const noexcept { return boundary_; }
    Eigen::Index size() const noexcept { return Eigen::Index(cues_.size()); }

    /// Id of `cue`, inserting it at the end when new.
    Eigen::Index add(const std::string& cue);
    std::optional<Eigen::Index> id(const std::string& cue) const;
    const std::string& cue(Eigen::Index id) const { return cues_.at(std::size_t(id)); }
    const std::vector<std::string>& cues() const noexcept { return cues_; }

    bool is_final(Eigen::Index id) const;
    bool is_initial(Eigen::Index id) const;

    friend bool operator==(const CueIndex& a, const CueIndex& b)
    {
        return a.n_ == b.n_ && a.boundary_ == b.boundary_ && a.cues_ == b.cues_;
    }

private:
    int n_;
    std::string boundary_;
    std::vector<std::string> cues_;
    std::unordered_map<std::string, Eigen::Index> ids_;
};

/// Binary words x cues incidence matrix, one sorted list of active columns per row.
class FormMatrix {
public:
    FormMatrix() = default;
    FormMatrix(Eigen::Index cols, std::vector<std::string> words,
               std::vector<std::vector<Eigen::Index>> rows);

    Eigen::Index rows() const noexcept { return Eigen::Index(rows_.size()); }
    Eigen::Index cols() const noexcept { return cols_; }
    const std::vector<Eigen::Index>& active(Eigen::Index row) const { return rows_.at(std::size_t(row)); }
    const std::vector<std::string>& words() const noexcept { return words_; }

    double operator()(Eigen::Index r, Eigen::Index c) const;

    SparseRowMatrix sparse() const;
    Eigen::MatrixXd dense() const;
    FormMatrix select_rows(const std::vector<Eigen::Index>& rows) const;

    friend bool operator==(const FormMatrix&, const FormMatrix&) = default;

private:
    Eigen::Index cols_ = 0;
    std::vector<std::string> words_;
    std::vector<std::vector<Eigen::Index>> rows_;
};

struct FormSpace {
    CueIndex index;
    FormMatrix matrix;
    /// Words whose padded form was shorter than n (single whole-word cue).
    std::vector<std::string> short_words;
};

FormSpace build_form_matrix(const std::vector<std::string>& words, int n = 4,
                            std::string_view boundary = "#");
FormSpace build_form_matrix(const Dataset& dataset, int n = 4, std::string_view boundary = "#");

/// Rows for `words` against a fixed index; cues unknown to the index are
/// skipped and reported through `unknown` when given.
FormMatrix encode_words(const std::vector<std::string>& words, const CueIndex& index,
                        std::vector<std::string>* unknown = nullptr);

struct SplitPolicy {
    enum class Mode { threshold, random };
    Mode mode = Mode::threshold;
    std::int64_t threshold = 5;   ///< test = words with frequency <= threshold
    double fraction = 0.1;        ///< random mode: share of words drawn for test
    std::uint64_t seed = 0;
    std::vector<std::string> coverage_tags; ///< tag keys whose values test must share with train
};

struct SplitResult {
    std::vector<Eigen::Index> train_rows;
    std::vector<Eigen::Index> test_rows;
    std::vector<std::string> moved;
    bool test_empty = false;

    Dataset train(const Dataset& d) const { return d.subset(train_rows); }
    Dataset test(const Dataset& d) const { return d.subset(test_rows); }
};

/// Moves test rows whose cues or coverage-tag values are missing from train
/// until no test row needs moving. Rows keep dataset order on both sides.
SplitResult repair_coverage(const Dataset& dataset, std::vector<Eigen::Index> train_rows,
                            std::vector<Eigen::Index> test_rows, int n, std::string_view boundary,
                            const std::vector<std::string>& coverage_tags);

SplitResult coverage_split(const Dataset& dataset, const SplitPolicy& policy, int n = 4,
                           std::string_view boundary = "#");

enum class FormSpaceFormat { json, text };

void save_form_space(const std::filesystem::path& path, const CueIndex& index,
                     const FormMatrix& matrix, FormSpaceFormat format = FormSpaceFormat::json);
FormSpace load_form_space(const std::filesystem::path& path);

} // namespace dlm
