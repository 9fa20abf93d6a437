#include "dlm/form_space.hpp"

#include "dlm/error.hpp"
#include "dlm/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

namespace dlm {

std::vector<std::string> extract_ngrams(std::string_view word, int n, std::string_view boundary)
{
    if (word.empty())
        throw ArgumentError("extract_ngrams: empty word");
    if (n < 2)
        throw ArgumentError("extract_ngrams: n must be at least 2");
    const std::u32string mark = utf8_decode(boundary);
    const std::u32string padded = mark + utf8_decode(word) + mark;
    const auto len = padded.size();
    const auto un = std::size_t(n);
    if (len < un)
        return {utf8_encode(padded)};
    std::vector<std::string> out;
    out.reserve(len - un + 1);
    for (std::size_t i = 0; i + un <= len; ++i)
        out.push_back(utf8_encode(std::u32string_view(padded).substr(i, un)));
    return out;
}

CueIndex::CueIndex(int n, std::string boundary) : n_(n), boundary_(std::move(boundary))
{
    if (n < 2)
        throw ArgumentError("cue index: n must be at least 2");
    if (utf8_decode(boundary_).size() != 1)
        throw ArgumentError("cue index: boundary must be a single character");
}

Eigen::Index CueIndex::add(const std::string& cue)
{
    const auto [it, inserted] = ids_.try_emplace(cue, size());
    if (inserted)
        cues_.push_back(cue);
    return it->second;
}

std::optional<Eigen::Index> CueIndex::id(const std::string& cue) const
{
    const auto it = ids_.find(cue);
    if (it == ids_.end())
        return std::nullopt;
    return it->second;
}

bool CueIndex::is_final(Eigen::Index id) const
{
    return cue(id).ends_with(boundary_);
}

bool CueIndex::is_initial(Eigen::Index id) const
{
    return cue(id).starts_with(boundary_);
}

FormMatrix::FormMatrix(Eigen::Index cols, std::vector<std::string> words,
                       std::vector<std::vector<Eigen::Index>> rows)
    : cols_(cols), words_(std::move(words)), rows_(std::move(rows))
{
    if (words_.size() != rows_.size())
        throw ArgumentError("form matrix: one word label per row required");
    for (auto& r : rows_) {
        std::sort(r.begin(), r.end());
        r.erase(std::unique(r.begin(), r.end()), r.end());
        if (!r.empty() && (r.front() < 0 || r.back() >= cols_))
            throw ArgumentError("form matrix: column id out of range");
    }
}

double FormMatrix::operator()(Eigen::Index r, Eigen::Index c) const
{
    const auto& row = active(r);
    return std::binary_search(row.begin(), row.end(), c) ? 1.0 : 0.0;
}

SparseRowMatrix FormMatrix::sparse() const
{
    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t i = 0; i < rows_.size(); ++i)
        for (auto c : rows_[i])
            trip.emplace_back(Eigen::Index(i), c, 1.0);
    SparseRowMatrix m(rows(), cols_);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

Eigen::MatrixXd FormMatrix::dense() const
{
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows(), cols_);
    for (std::size_t i = 0; i < rows_.size(); ++i)
        for (auto c : rows_[i])
            m(Eigen::Index(i), c) = 1.0;
    return m;
}

FormMatrix FormMatrix::select_rows(const std::vector<Eigen::Index>& rows) const
{
    std::vector<std::string> w;
    std::vector<std::vector<Eigen::Index>> r;
    for (auto i : rows) {
        w.push_back(words_.at(std::size_t(i)));
        r.push_back(rows_.at(std::size_t(i)));
    }
    return FormMatrix(cols_, std::move(w), std::move(r));
}

FormSpace build_form_matrix(const std::vector<std::string>& words, int n, std::string_view boundary)
{
    if (words.empty())
        throw EmptyDatasetError("build_form_matrix: no words");
    CueIndex index(n, std::string(boundary));
    std::vector<std::vector<Eigen::Index>> rows;
    rows.reserve(words.size());
    std::vector<std::string> short_words;
    const auto pad = utf8_decode(boundary).size() * 2;
    for (const auto& w : words) {
        if (utf8_decode(w).size() + pad < std::size_t(n))
            short_words.push_back(w);
        std::vector<Eigen::Index> row;
        for (const auto& g : extract_ngrams(w, n, boundary))
            row.push_back(index.add(g));
        rows.push_back(std::move(row));
    }
    for (const auto& w : short_words)
        std::clog << "form space: '" << w << "' shorter than n=" << n << ", using whole padded word\n";
    FormMatrix m(index.size(), words, std::move(rows));
    return {std::move(index), std::move(m), std::move(short_words)};
}

FormSpace build_form_matrix(const Dataset& dataset, int n, std::string_view boundary)
{
    std::vector<std::string> words;
    words.reserve(dataset.entries.size());
    for (const auto& e : dataset.entries)
        words.push_back(e.form);
    return build_form_matrix(words, n, boundary);
}

FormMatrix encode_words(const std::vector<std::string>& words, const CueIndex& index,
                        std::vector<std::string>* unknown)
{
    std::vector<std::vector<Eigen::Index>> rows;
    for (const auto& w : words) {
        std::vector<Eigen::Index> row;
        for (const auto& g : extract_ngrams(w, index.n(), index.boundary())) {
            if (const auto id = index.id(g))
                row.push_back(*id);
            else if (unknown)
                unknown->push_back(g);
        }
        rows.push_back(std::move(row));
    }
    return FormMatrix(index.size(), words, std::move(rows));
}

SplitResult repair_coverage(const Dataset& dataset, std::vector<Eigen::Index> train_rows,
                            std::vector<Eigen::Index> test_rows, int n, std::string_view boundary,
                            const std::vector<std::string>& coverage_tags)
{
    std::unordered_set<std::string> train_cues;
    std::set<std::pair<std::string, std::string>> train_tags;
    auto absorb = [&](Eigen::Index r) {
        const auto& e = dataset.entries[std::size_t(r)];
        for (auto& g : extract_ngrams(e.form, n, boundary))
            train_cues.insert(std::move(g));
        for (const auto& key : coverage_tags)
            if (e.has_tag(key))
                train_tags.emplace(key, e.tag(key));
    };
    auto covered = [&](Eigen::Index r) {
        const auto& e = dataset.entries[std::size_t(r)];
        for (const auto& g : extract_ngrams(e.form, n, boundary))
            if (!train_cues.count(g))
                return false;
        for (const auto& key : coverage_tags)
            if (e.has_tag(key) && !train_tags.count({key, e.tag(key)}))
                return false;
        return true;
    };
    for (auto r : train_rows)
        absorb(r);

    enum : char { none, train, test };
    SplitResult out;
    std::vector<char> side(std::size_t(dataset.size()), none);
    for (auto r : train_rows)
        side.at(std::size_t(r)) = train;
    for (auto r : test_rows)
        side.at(std::size_t(r)) = test;
    for (bool changed = true; changed;) {
        changed = false;
        for (Eigen::Index r = 0; r < dataset.size(); ++r) {
            if (side[std::size_t(r)] != test || covered(r))
                continue;
            side[std::size_t(r)] = train;
            absorb(r);
            out.moved.push_back(dataset.entries[std::size_t(r)].form);
            changed = true;
        }
    }
    for (Eigen::Index r = 0; r < dataset.size(); ++r) {
        if (side[std::size_t(r)] == train)
            out.train_rows.push_back(r);
        else if (side[std::size_t(r)] == test)
            out.test_rows.push_back(r);
    }
    out.test_empty = out.test_rows.empty();
    return out;
}

SplitResult coverage_split(const Dataset& dataset, const SplitPolicy& policy, int n,
                           std::string_view boundary)
{
    if (dataset.empty())
        throw EmptyDatasetError("coverage_split: empty dataset");
    std::vector<Eigen::Index> train, test;
    if (policy.mode == SplitPolicy::Mode::threshold) {
        for (Eigen::Index r = 0; r < dataset.size(); ++r)
            (dataset.entries[std::size_t(r)].frequency <= policy.threshold ? test : train).push_back(r);
    } else {
        if (policy.fraction < 0.0 || policy.fraction > 1.0)
            throw ArgumentError("coverage_split: fraction must lie in [0,1]");
        std::vector<Eigen::Index> order(std::size_t(dataset.size()));
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::mt19937_64 rng(policy.seed);
        std::shuffle(order.begin(), order.end(), rng);
        const auto k = std::size_t(std::llround(policy.fraction * double(order.size())));
        test.assign(order.begin(), order.begin() + std::ptrdiff_t(k));
        train.assign(order.begin() + std::ptrdiff_t(k), order.end());
        std::sort(test.begin(), test.end());
        std::sort(train.begin(), train.end());
    }
    auto result = repair_coverage(dataset, std::move(train), std::move(test), n, boundary,
                                  policy.coverage_tags);
    if (result.test_empty)
        std::clog << "coverage_split: warning: test set empty after coverage repair\n";
    return result;
}

void save_form_space(const std::filesystem::path& path, const CueIndex& index,
                     const FormMatrix& matrix, FormSpaceFormat format)
{
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write form space '" + path.string() + "'");
    if (format == FormSpaceFormat::json) {
        nlohmann::ordered_json j;
        j["n"] = index.n();
        j["boundary"] = index.boundary();
        j["cues"] = index.cues();
        auto rows = nlohmann::ordered_json::array();
        for (Eigen::Index i = 0; i < matrix.rows(); ++i)
            rows.push_back({{"word", matrix.words()[std::size_t(i)]}, {"cues", matrix.active(i)}});
        j["rows"] = std::move(rows);
        out << j.dump(1) << '\n';
    } else {
        out << "n\t" << index.n() << "\nboundary\t" << index.boundary() << "\ncues\t" << index.size()
            << '\n';
        for (const auto& c : index.cues())
            out << c << '\n';
        out << "rows\t" << matrix.rows() << '\n';
        for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
            out << matrix.words()[std::size_t(i)] << '\t';
            const auto& a = matrix.active(i);
            for (std::size_t k = 0; k < a.size(); ++k)
                out << (k ? " " : "") << a[k];
            out << '\n';
        }
    }
    if (!out)
        throw IoError("write failed for '" + path.string() + "'");
}

FormSpace load_form_space(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open form space '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string body = ss.str();
    const auto first = body.find_first_not_of(" \t\r\n");
    FormSpace fs;
    if (first != std::string::npos && body[first] == '{') {
        const auto j = nlohmann::json::parse(body);
        CueIndex index(j.at("n").get<int>(), j.at("boundary").get<std::string>());
        for (const auto& c : j.at("cues"))
            index.add(c.get<std::string>());
        std::vector<std::string> words;
        std::vector<std::vector<Eigen::Index>> rows;
        for (const auto& r : j.at("rows")) {
            words.push_back(r.at("word").get<std::string>());
            rows.push_back(r.at("cues").get<std::vector<Eigen::Index>>());
        }
        fs.matrix = FormMatrix(index.size(), std::move(words), std::move(rows));
        fs.index = std::move(index);
        return fs;
    }

    const std::string file = path.string();
    std::istringstream lines(body);
    std::string line;
    std::size_t lineno = 0;
    auto next = [&]() -> std::string {
        if (!std::getline(lines, line))
            throw ParseError(file, lineno + 1, "unexpected end of file");
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        return line;
    };
    auto field = [&](const std::string& key) {
        const auto parts = split(next(), '\t');
        if (parts.size() != 2 || parts[0] != key)
            throw ParseError(file, lineno, "expected '" + key + "\\t<value>'");
        return parts[1];
    };
    const int n = std::stoi(field("n"));
    CueIndex index(n, field("boundary"));
    const long long ncues = std::stoll(field("cues"));
    for (long long i = 0; i < ncues; ++i)
        index.add(next());
    const long long nrows = std::stoll(field("rows"));
    std::vector<std::string> words;
    std::vector<std::vector<Eigen::Index>> rows;
    for (long long i = 0; i < nrows; ++i) {
        const auto parts = split(next(), '\t');
        if (parts.size() != 2)
            throw ParseError(file, lineno, "row must be 'word\\tids'");
        words.push_back(parts[0]);
        std::vector<Eigen::Index> ids;
        std::istringstream is(parts[1]);
        for (Eigen::Index id; is >> id;)
            ids.push_back(id);
        rows.push_back(std::move(ids));
    }
    fs.matrix = FormMatrix(index.size(), std::move(words), std::move(rows));
    fs.index = std::move(index);
    return fs;
}

} // namespace dlm
