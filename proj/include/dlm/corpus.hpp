#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace dlm {

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Role { input, output };

/// One lexical record.
struct WordEntry {
    std::string form;
    std::string lemma;
    std::int64_t frequency = 0;
    std::map<std::string, std::string> tags;
    std::optional<int> period;
    Role role = Role::input;

    /// Tag value or empty string when absent.
    const std::string& tag(const std::string& key) const;
    bool has_tag(const std::string& key) const { return tags.count(key) != 0; }
};

/// Column mapping for tab-separated lexicon files. Only `form_column` and
/// `frequency_column` are required to exist in the header. When
/// `tag_columns` is empty every column that is not one of the named ones is
/// read as a tag.
struct LexiconSchema {
    std::string form_column = "form";
    std::string frequency_column = "frequency";
    std::string lemma_column = "lemma";
    std::string period_column = "year";
    std::string role_column = "role";
    std::vector<std::string> tag_columns;
    bool lowercase = true;
};

/// Reads a UTF-8 TSV lexicon with a header row. Rows repeating the same
/// (form, period, role) are merged by summing frequencies; their tags must agree.
std::vector<WordEntry> load_lexicon(const std::filesystem::path& path,
                                    const LexiconSchema& schema = {});

/// Word to dense vector store, insertion ordered.
class EmbeddingTable {
public:
    explicit EmbeddingTable(Eigen::Index dim = 0);

    Eigen::Index dim() const noexcept { return dim_; }
    Eigen::Index size() const noexcept { return Eigen::Index(words_.size()); }
    bool empty() const noexcept { return words_.empty(); }

    /// Adds `word`; returns false (and keeps the old vector) if already present.
    bool add(const std::string& word, const Eigen::Ref<const Eigen::VectorXd>& v);

    bool contains(const std::string& word) const { return index_.count(word) != 0; }
    std::optional<Eigen::Index> index_of(const std::string& word) const;
    const std::vector<std::string>& words() const noexcept { return words_; }

    Eigen::Map<const Eigen::RowVectorXd> row(Eigen::Index i) const;
    Eigen::Map<const Eigen::RowVectorXd> at(const std::string& word) const;
    Eigen::Map<const RowMatrixXd> matrix() const;

    /// Words that appeared more than once in the source (later copies ignored).
    const std::vector<std::string>& duplicates() const noexcept { return duplicates_; }
    void note_duplicate(const std::string& w) { duplicates_.push_back(w); }

private:
    Eigen::Index dim_;
    std::vector<std::string> words_;
    std::unordered_map<std::string, Eigen::Index> index_;
    std::vector<double> values_;
    std::vector<std::string> duplicates_;
};

struct EmbeddingLoadOptions {
    bool lowercase = false;
};

/// Reads the word2vec text format: a "count dim" header then "word v1 ... vd".
EmbeddingTable load_embeddings(const std::filesystem::path& path,
                               const EmbeddingLoadOptions& opts = {});
void write_embeddings(const std::filesystem::path& path, const EmbeddingTable& table,
                      int significant_digits = 9);

enum class JoinKey { form, lemma };

struct DroppedWord {
    std::string word;
    std::string reason;
};

/// Lexicon rows joined with their semantic vectors. Row i of `semantics`
/// belongs to `entries[i]`, and `keys[i]` is the word it was looked up by.
struct Dataset {
    std::vector<WordEntry> entries;
    std::vector<std::string> keys;
    Eigen::MatrixXd semantics;
    Eigen::Index dim = 0;
    std::vector<DroppedWord> dropped;

    Eigen::Index size() const noexcept { return Eigen::Index(entries.size()); }
    bool empty() const noexcept { return entries.empty(); }

    /// Rows in the given order; `dropped` is not carried over.
    Dataset subset(const std::vector<Eigen::Index>& rows) const;
    /// Per-row token frequencies as doubles.
    Eigen::VectorXd frequencies() const;
    /// Candidate table built from the dataset's own keys (first row wins).
    EmbeddingTable as_table() const;
};

Dataset assemble_dataset(const std::vector<WordEntry>& lexicon, const EmbeddingTable& table,
                         JoinKey join = JoinKey::form);

} // namespace dlm
