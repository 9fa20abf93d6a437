#include "dlm/report.hpp"

#include "dlm/error.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dlm {

namespace {

bool needs_quotes(const std::string& s)
{
    return s.find_first_of(",\"\n\r") != std::string::npos;
}

std::string quote(const std::string& s)
{
    if (!needs_quotes(s))
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + '"';
}

Cell opt(const std::optional<double>& v)
{
    return v ? Cell(*v) : Cell();
}

Cell idx(Eigen::Index v)
{
    return Cell(std::int64_t(v));
}

std::string join_words(const std::vector<std::string>& ws)
{
    std::string out;
    for (std::size_t i = 0; i < ws.size(); ++i) {
        if (i)
            out += ' ';
        out += ws[i];
    }
    return out;
}

} // namespace

void Table::add(std::vector<Cell> row)
{
    if (row.size() != columns.size())
        throw ArgumentError("report row has " + std::to_string(row.size()) + " cells, table has " +
                            std::to_string(columns.size()) + " columns");
    rows.push_back(std::move(row));
}

ReportFormat parse_report_format(const std::string& s)
{
    if (s == "csv")
        return ReportFormat::csv;
    if (s == "json")
        return ReportFormat::json;
    throw ArgumentError("unknown report format '" + s + "' (csv or json)");
}

std::string format_double(double v)
{
    if (std::isnan(v))
        return "NA";
    if (std::isinf(v))
        return v > 0 ? "Inf" : "-Inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v == 0.0 ? 0.0 : v);
    return buf;
}

std::string format_cell(const Cell& c)
{
    struct {
        std::string operator()(std::monostate) const { return "NA"; }
        std::string operator()(const std::string& s) const { return s; }
        std::string operator()(std::int64_t v) const { return std::to_string(v); }
        std::string operator()(double v) const { return format_double(v); }
        std::string operator()(bool v) const { return v ? "true" : "false"; }
    } visitor;
    return std::visit(visitor, c);
}

std::string to_csv(const Table& t)
{
    std::string out;
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        out += (i ? "," : "") + quote(t.columns[i]);
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out += (i ? "," : "") + quote(format_cell(row[i]));
        out += '\n';
    }
    return out;
}

std::string to_json(const Table& t)
{
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : t.rows) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < row.size(); ++i) {
            const auto& c = row[i];
            auto& slot = obj[t.columns[i]];
            if (std::holds_alternative<std::monostate>(c))
                slot = nullptr;
            else if (const auto* s = std::get_if<std::string>(&c))
                slot = *s;
            else if (const auto* n = std::get_if<std::int64_t>(&c))
                slot = *n;
            else if (const auto* b = std::get_if<bool>(&c))
                slot = *b;
            else {
                const double v = std::get<double>(c);
                if (std::isfinite(v))
                    slot = std::stod(format_double(v));
                else
                    slot = nullptr;
            }
        }
        rows.push_back(std::move(obj));
    }
    nlohmann::ordered_json doc;
    doc["columns"] = t.columns;
    doc["rows"] = std::move(rows);
    return doc.dump(2) + "\n";
}

void emit_report(const Table& t, ReportFormat format, const std::filesystem::path& path)
{
    std::error_code ec;
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write report '" + path.string() + "'");
    out << (format == ReportFormat::csv ? to_csv(t) : to_json(t));
    out.flush();
    if (!out)
        throw IoError("failed writing report '" + path.string() + "'");
}

Table parse_csv(const std::string& text)
{
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false, any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            record.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n')
                ++i;
            if (any || !field.empty()) {
                record.push_back(std::move(field));
                records.push_back(std::move(record));
            }
            record.clear();
            field.clear();
            any = false;
        } else {
            field += c;
            any = true;
        }
    }
    if (quoted)
        throw ArgumentError("csv: unterminated quoted field");
    if (any || !field.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
    }
    if (records.empty())
        throw ArgumentError("csv: no header row");
    Table t(records.front());
    for (std::size_t r = 1; r < records.size(); ++r) {
        std::vector<Cell> row(records[r].begin(), records[r].end());
        t.add(std::move(row));
    }
    return t;
}

Table read_csv(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_csv(ss.str());
    } catch (const ArgumentError& e) {
        throw ParseError(path.string(), 0, e.what());
    }
}

Table accuracy_words_table(const AccuracyReport& r)
{
    Table t({"word", "class", "frequency", "rank", "r_target", "degenerate"});
    for (const auto& w : r.words)
        t.add({w.word, w.cls, w.frequency, idx(w.rank), w.r_target, w.degenerate});
    return t;
}

Table accuracy_summary_table(const AccuracyReport& r)
{
    Table t({"class", "k", "words", "tokens", "type_accuracy", "token_accuracy"});
    Eigen::Index words = Eigen::Index(r.words.size());
    std::int64_t tokens = 0;
    for (const auto& w : r.words)
        tokens += w.frequency;
    for (std::size_t i = 0; i < r.ks.size(); ++i)
        t.add({std::string("all"), idx(r.ks[i]), idx(words), tokens, r.type_accuracy[i], r.token_accuracy[i]});
    for (const auto& [cls, acc] : r.by_class)
        for (std::size_t i = 0; i < r.ks.size(); ++i)
            t.add({cls, idx(r.ks[i]), idx(acc.words), acc.tokens, acc.type_accuracy[i], acc.token_accuracy[i]});
    return t;
}

Table cue_centroid_table(const CueCentroidMatrix& m)
{
    Table t({"tag", "cue", "r"});
    for (Eigen::Index i = 0; i < m.r.rows(); ++i)
        for (Eigen::Index j = 0; j < m.r.cols(); ++j)
            t.add({m.tags[std::size_t(i)], m.cues[std::size_t(j)], m.r(i, j)});
    return t;
}

Table ranked_cues_table(const CueCentroidMatrix& m, std::size_t top)
{
    Table t({"tag", "rank", "cue", "r"});
    for (const auto& tag : m.tags) {
        const auto ranked = rank_cues(m, tag);
        const auto n = top ? std::min(top, ranked.size()) : ranked.size();
        for (std::size_t i = 0; i < n; ++i)
            t.add({tag, idx(ranked[i].global_rank), ranked[i].cue, ranked[i].r});
    }
    return t;
}

Table exponent_summary_table(const std::vector<ExponentSummary>& s)
{
    Table t({"tag", "exponent_cues", "max_r", "mean_top5_r", "in_top10_global", "in_top10_position",
             "best_global_rank"});
    for (const auto& e : s)
        t.add({e.tag, idx(e.exponent_cues), e.max_r, e.mean_top5_r, idx(e.in_top10_global),
               idx(e.in_top10_position), e.best_global_rank ? idx(e.best_global_rank) : Cell()});
    return t;
}

Table transparency_table(const std::vector<Transparency>& ts)
{
    Table t({"word", "tag", "r", "degenerate"});
    for (const auto& e : ts)
        t.add({e.word, e.tag, e.r, e.degenerate});
    return t;
}

Table boundary_table(const BoundaryAnalysis& b)
{
    Table t({"compound", "boundary_cues", "boundary_share", "left_cues", "left_share", "right_cues",
             "right_share"});
    for (const auto& c : b.compounds)
        t.add({c.compound, idx(c.boundary_count), opt(c.boundary), idx(c.left_count), opt(c.left),
               idx(c.right_count), opt(c.right)});
    return t;
}

Table pivot_table(const std::vector<PivotIsland>& islands)
{
    Table t({"pivot", "position", "types", "tokens", "hapaxes", "productivity", "compounds", "lower", "upper",
             "members", "candidates", "intruders", "degenerate", "intruder_words"});
    for (const auto& p : islands)
        t.add({p.pivot, std::string(p.position == PivotPosition::left ? "left" : "right"), idx(p.types),
               p.tokens, idx(p.hapaxes), p.productivity, idx(Eigen::Index(p.compounds.size())), p.lower, p.upper,
               idx(Eigen::Index(p.members.size())), idx(p.candidates), idx(Eigen::Index(p.intruders.size())),
               p.degenerate, join_words(p.intruders)});
    return t;
}

Table pattern_year_csv_table(const std::vector<PatternYearStats>& rows)
{
    Table t({"pattern",
             "year",
             "log_input_types",
             "log_cumulative_input_types",
             "log_input_tokens",
             "input_hapaxes",
             "log_new_input_types",
             "log_known_output_types",
             "centroid_distance",
             "p_narrow",
             "p_neo",
             "recycle_rate",
             "new_output_types",
             "offset_log_known_types",
             "input_types",
             "cumulative_input_types",
             "input_tokens",
             "log_input_hapaxes",
             "new_input_types",
             "known_output_types",
             "output_types",
             "output_tokens",
             "cumulative_recycled",
             "degenerate"});
    for (const auto& r : rows) {
        auto lg = [](auto v) { return std::log1p(double(v)); };
        t.add({r.pattern,
               std::int64_t(r.year),
               lg(r.input_types),
               lg(r.cumulative_input_types),
               lg(r.input_tokens),
               idx(r.input_hapaxes),
               lg(r.new_input_types),
               lg(r.known_output_types),
               r.centroid_distance,
               r.p_narrow,
               r.p_neo,
               r.recycle_rate,
               idx(r.new_output_types),
               lg(r.known_output_types),
               idx(r.input_types),
               idx(r.cumulative_input_types),
               r.input_tokens,
               lg(r.input_hapaxes),
               idx(r.new_input_types),
               idx(r.known_output_types),
               idx(r.output_types),
               r.output_tokens,
               idx(r.cumulative_recycled),
               r.degenerate});
    }
    return t;
}

Table pattern_totals_table(const std::vector<PatternTotals>& rows)
{
    Table t({"pattern", "input_types", "input_tokens", "input_hapaxes", "output_types", "output_tokens",
             "new_output_types", "recycled", "p_narrow", "recycle_rate"});
    for (const auto& r : rows)
        t.add({r.pattern, idx(r.input_types), r.input_tokens, idx(r.input_hapaxes), idx(r.output_types),
               r.output_tokens, idx(r.new_output_types), r.recycled ? idx(*r.recycled) : Cell(), r.p_narrow(),
               opt(r.recycle_rate())});
    return t;
}

Table growth_table(const std::map<std::string, std::vector<GrowthPoint>>& curves, const std::string& corpus)
{
    Table t({"pattern", "corpus", "year", "types"});
    for (const auto& [pattern, points] : curves)
        for (const auto& p : points)
            t.add({pattern, corpus, std::int64_t(p.year), idx(p.types)});
    return t;
}

} // namespace dlm
