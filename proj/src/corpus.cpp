#include "dlm/corpus.hpp"

#include "dlm/error.hpp"
#include "dlm/text.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <tuple>

namespace dlm {

namespace {

const std::string kEmpty;

std::int64_t parse_int(std::string_view s, const std::string& file, std::size_t line,
                       const std::string& what)
{
    s = trim(s);
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
        throw ParseError(file, line, what + " '" + std::string(s) + "' is not an integer");
    return v;
}

Role parse_role(std::string_view s, const std::string& file, std::size_t line)
{
    s = trim(s);
    if (s.empty() || s == "input")
        return Role::input;
    if (s == "output")
        return Role::output;
    throw ParseError(file, line, "role must be 'input' or 'output', got '" + std::string(s) + "'");
}

} // namespace

const std::string& WordEntry::tag(const std::string& key) const
{
    const auto it = tags.find(key);
    return it == tags.end() ? kEmpty : it->second;
}

std::vector<WordEntry> load_lexicon(const std::filesystem::path& path, const LexiconSchema& schema)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open lexicon '" + path.string() + "'");
    const std::string file = path.string();

    std::string line;
    if (!std::getline(in, line))
        throw SchemaError(file + ": missing header row");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    const auto header = split(line, '\t');

    auto find_col = [&](const std::string& name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (trim(header[i]) == name)
                return i;
        return std::nullopt;
    };
    const auto form_col = find_col(schema.form_column);
    const auto freq_col = find_col(schema.frequency_column);
    if (!form_col)
        throw SchemaError(file + ": required column '" + schema.form_column + "' not in header");
    if (!freq_col)
        throw SchemaError(file + ": required column '" + schema.frequency_column + "' not in header");
    const std::size_t none = header.size();
    auto optional_col = [&](const std::string& name) { return name.empty() ? none : find_col(name).value_or(none); };
    const std::size_t lemma_idx = optional_col(schema.lemma_column);
    const std::size_t period_idx = optional_col(schema.period_column);
    const std::size_t role_idx = optional_col(schema.role_column);

    std::vector<std::pair<std::string, std::size_t>> tag_cols;
    if (schema.tag_columns.empty()) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i == *form_col || i == *freq_col || i == lemma_idx ||
                i == period_idx || i == role_idx)
                continue;
            tag_cols.emplace_back(std::string(trim(header[i])), i);
        }
    } else {
        for (const auto& name : schema.tag_columns) {
            const auto c = find_col(name);
            if (!c)
                throw SchemaError(file + ": tag column '" + name + "' not in header");
            tag_cols.emplace_back(name, *c);
        }
    }

    std::vector<WordEntry> out;
    std::map<std::tuple<std::string, int, int>, std::size_t> seen;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (trim(line).empty())
            continue;
        const auto cells = split(line, '\t');
        if (cells.size() != header.size())
            throw ParseError(file, lineno,
                             "expected " + std::to_string(header.size()) + " columns, got " +
                                 std::to_string(cells.size()));
        WordEntry e;
        e.form = std::string(trim(cells[*form_col]));
        if (e.form.empty())
            throw ParseError(file, lineno, "empty form");
        if (schema.lowercase)
            e.form = to_lower(e.form);
        e.frequency = parse_int(cells[*freq_col], file, lineno, "frequency");
        if (e.frequency < 0)
            throw ParseError(file, lineno, "negative frequency");
        if (lemma_idx != none && !trim(cells[lemma_idx]).empty()) {
            e.lemma = std::string(trim(cells[lemma_idx]));
            if (schema.lowercase)
                e.lemma = to_lower(e.lemma);
        } else {
            e.lemma = e.form;
        }
        if (period_idx != none && !trim(cells[period_idx]).empty())
            e.period = static_cast<int>(parse_int(cells[period_idx], file, lineno, "period"));
        if (role_idx != none)
            e.role = parse_role(cells[role_idx], file, lineno);
        for (const auto& [name, col] : tag_cols) {
            const auto v = trim(cells[col]);
            if (!v.empty())
                e.tags.emplace(name, std::string(v));
        }

        const auto key = std::make_tuple(e.form, e.period.value_or(INT32_MIN), int(e.role));
        const auto it = seen.find(key);
        if (it == seen.end()) {
            seen.emplace(key, out.size());
            out.push_back(std::move(e));
        } else {
            auto& prev = out[it->second];
            if (prev.tags != e.tags || prev.lemma != e.lemma)
                throw ParseError(file, lineno,
                                 "duplicate row for '" + e.form + "' disagrees on lemma or tags");
            prev.frequency += e.frequency;
        }
    }
    return out;
}

EmbeddingTable::EmbeddingTable(Eigen::Index dim) : dim_(dim)
{
    if (dim < 0)
        throw ArgumentError("embedding dimension must be non-negative");
}

bool EmbeddingTable::add(const std::string& word, const Eigen::Ref<const Eigen::VectorXd>& v)
{
    if (v.size() != dim_)
        throw ArgumentError("vector for '" + word + "' has " + std::to_string(v.size()) +
                            " components, table dim is " + std::to_string(dim_));
    if (!v.allFinite())
        throw ArgumentError("vector for '" + word + "' has non-finite components");
    if (contains(word))
        return false;
    index_.emplace(word, size());
    words_.push_back(word);
    values_.insert(values_.end(), v.data(), v.data() + v.size());
    return true;
}

std::optional<Eigen::Index> EmbeddingTable::index_of(const std::string& word) const
{
    const auto it = index_.find(word);
    if (it == index_.end())
        return std::nullopt;
    return it->second;
}

Eigen::Map<const Eigen::RowVectorXd> EmbeddingTable::row(Eigen::Index i) const
{
    return Eigen::Map<const Eigen::RowVectorXd>(values_.data() + i * dim_, dim_);
}

Eigen::Map<const Eigen::RowVectorXd> EmbeddingTable::at(const std::string& word) const
{
    const auto i = index_of(word);
    if (!i)
        throw ArgumentError("no embedding for '" + word + "'");
    return row(*i);
}

Eigen::Map<const RowMatrixXd> EmbeddingTable::matrix() const
{
    return Eigen::Map<const RowMatrixXd>(values_.data(), size(), dim_);
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, const EmbeddingLoadOptions& opts)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open embeddings '" + path.string() + "'");
    const std::string file = path.string();

    std::string line;
    if (!std::getline(in, line))
        throw ParseError(file, 1, "missing 'count dim' header");
    std::istringstream hs(line);
    long long count = -1, dim = -1;
    if (!(hs >> count >> dim) || count < 0 || dim <= 0)
        throw ParseError(file, 1, "header must be 'count dim' with positive dim");

    EmbeddingTable table(dim);
    Eigen::VectorXd v(dim);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (trim(line).empty())
            continue;
        std::vector<std::string> fields;
        for (auto& f : split(line, ' '))
            if (!f.empty())
                fields.push_back(std::move(f));
        if (fields.size() != std::size_t(dim) + 1)
            throw ParseError(file, lineno,
                             "expected " + std::to_string(dim) + " components, got " +
                                 std::to_string(fields.size() - 1));
        for (long long k = 0; k < dim; ++k) {
            const auto& f = fields[std::size_t(k) + 1];
            double x = 0;
            const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), x);
            if (ec != std::errc{} || ptr != f.data() + f.size())
                throw ParseError(file, lineno, "component '" + f + "' is not a number");
            if (!std::isfinite(x))
                throw ParseError(file, lineno, "non-finite component");
            v(k) = x;
        }
        const std::string word = opts.lowercase ? to_lower(fields[0]) : fields[0];
        if (!table.add(word, v)) {
            table.note_duplicate(word);
            std::clog << "embeddings: duplicate word '" << word << "' at " << file << ":"
                      << lineno << " ignored\n";
        }
    }
    return table;
}

void write_embeddings(const std::filesystem::path& path, const EmbeddingTable& table,
                      int significant_digits)
{
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write embeddings '" + path.string() + "'");
    out << table.size() << ' ' << table.dim() << '\n';
    out << std::setprecision(significant_digits);
    for (Eigen::Index i = 0; i < table.size(); ++i) {
        out << table.words()[std::size_t(i)];
        const auto r = table.row(i);
        for (Eigen::Index k = 0; k < r.size(); ++k)
            out << ' ' << r(k);
        out << '\n';
    }
    if (!out)
        throw IoError("write failed for '" + path.string() + "'");
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& rows) const
{
    Dataset d;
    d.dim = dim;
    d.semantics.resize(Eigen::Index(rows.size()), dim);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto r = rows[i];
        if (r < 0 || r >= size())
            throw ArgumentError("dataset subset: row out of range");
        d.entries.push_back(entries[std::size_t(r)]);
        d.keys.push_back(keys[std::size_t(r)]);
        d.semantics.row(Eigen::Index(i)) = semantics.row(r);
    }
    return d;
}

Eigen::VectorXd Dataset::frequencies() const
{
    Eigen::VectorXd f(size());
    for (Eigen::Index i = 0; i < size(); ++i)
        f(i) = double(entries[std::size_t(i)].frequency);
    return f;
}

EmbeddingTable Dataset::as_table() const
{
    EmbeddingTable t(dim);
    for (Eigen::Index i = 0; i < size(); ++i)
        t.add(keys[std::size_t(i)], semantics.row(i).transpose());
    return t;
}

Dataset assemble_dataset(const std::vector<WordEntry>& lexicon, const EmbeddingTable& table,
                         JoinKey join)
{
    Dataset d;
    d.dim = table.dim();
    std::vector<Eigen::Index> rows;
    for (const auto& e : lexicon) {
        const std::string& key = join == JoinKey::form ? e.form : e.lemma;
        const auto idx = table.index_of(key);
        if (!idx) {
            d.dropped.push_back({e.form, "no embedding"});
            continue;
        }
        d.entries.push_back(e);
        d.keys.push_back(key);
        rows.push_back(*idx);
    }
    if (d.entries.empty())
        throw EmptyDatasetError("no lexicon word has an embedding (" +
                                std::to_string(lexicon.size()) + " dropped)");
    d.semantics.resize(Eigen::Index(rows.size()), d.dim);
    for (std::size_t i = 0; i < rows.size(); ++i)
        d.semantics.row(Eigen::Index(i)) = table.row(rows[i]);
    return d;
}

} // namespace dlm
