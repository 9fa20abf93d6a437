#include "dlm/productivity.hpp"

#include "dlm/error.hpp"
#include "dlm/stats.hpp"
#include "dlm/text.hpp"

#include <unsupported/Eigen/SpecialFunctions>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

namespace dlm {

namespace {

int year_of(const WordEntry& e)
{
    if (!e.period)
        throw ArgumentError("word '" + e.form + "' has no year");
    return *e.period;
}

using YearCounts = std::map<int, std::map<std::string, std::int64_t>>;

YearCounts by_year(const std::vector<WordEntry>& entries, const PatternRule* rule)
{
    YearCounts out;
    for (const auto& e : entries) {
        const int y = year_of(e);
        if (!rule || rule->matches(e))
            out[y][e.form] += e.frequency;
    }
    return out;
}

// Year-by-year sweep over one pattern; input of a year is seen before its output.
struct Sweep {
    std::vector<PatternYearStats> rows;
    std::set<std::string> input_seen;
    std::set<std::string> output_seen;
    std::set<std::string> recycled;
    Eigen::Index new_output_total = 0;
};

Sweep sweep_pattern(const PatternRule& rule, const std::vector<WordEntry>& input,
                    const std::vector<WordEntry>& output, const std::set<int>& report_years,
                    const EmbeddingTable* embeddings, DistanceMetric metric)
{
    const auto in = by_year(input, &rule);
    const auto out = by_year(output, &rule);
    std::set<int> years = report_years;
    for (const auto& [y, _] : in)
        years.insert(y);
    for (const auto& [y, _] : out)
        years.insert(y);

    Sweep s;
    const Eigen::Index dim = embeddings ? embeddings->dim() : 0;
    Eigen::VectorXd centroid_sum = Eigen::VectorXd::Zero(dim);
    Eigen::Index centroid_count = 0;
    static const std::map<std::string, std::int64_t> none;

    for (const int y : years) {
        const auto iy = in.find(y);
        const auto oy = out.find(y);
        const auto& read = iy == in.end() ? none : iy->second;
        const auto& written = oy == out.end() ? none : oy->second;

        PatternYearStats r;
        r.pattern = rule.name;
        r.year = y;
        r.input_types = Eigen::Index(read.size());
        for (const auto& [w, f] : read) {
            r.input_tokens += f;
            if (f == 1)
                ++r.input_hapaxes;
            if (s.input_seen.insert(w).second) {
                ++r.new_input_types;
                if (embeddings && embeddings->contains(w)) {
                    centroid_sum += embeddings->at(w).transpose();
                    ++centroid_count;
                }
            }
        }
        r.cumulative_input_types = Eigen::Index(s.input_seen.size());

        r.centroid_distance = std::numeric_limits<double>::quiet_NaN();
        if (embeddings && centroid_count > 0) {
            const Eigen::VectorXd c = centroid_sum / double(centroid_count);
            double total = 0;
            Eigen::Index used = 0;
            for (const auto& [w, f] : read) {
                if (!embeddings->contains(w))
                    continue;
                const auto v = embeddings->at(w).transpose();
                total += metric == DistanceMetric::euclidean ? (v - c).norm() : 1.0 - pearson(v, c);
                ++used;
            }
            if (used > 0)
                r.centroid_distance = total / double(used);
        }

        r.output_types = Eigen::Index(written.size());
        for (const auto& [w, f] : written) {
            r.output_tokens += f;
            if (s.input_seen.count(w)) {
                ++r.known_output_types;
                s.recycled.insert(w);
            } else if (!s.output_seen.count(w)) {
                ++r.new_output_types;
            }
        }
        for (const auto& [w, f] : written)
            s.output_seen.insert(w);
        s.new_output_total += r.new_output_types;
        r.cumulative_recycled = Eigen::Index(s.recycled.size());

        r.degenerate = r.input_tokens == 0 || r.cumulative_input_types == 0;
        r.p_narrow = r.input_tokens > 0 ? double(r.input_hapaxes) / double(r.input_tokens) : 0.0;
        r.p_neo = r.input_types > 0 ? double(r.new_input_types) / double(r.input_types) : 0.0;
        r.recycle_rate =
            r.cumulative_input_types > 0 ? double(r.cumulative_recycled) / double(r.cumulative_input_types) : 0.0;
        if (report_years.count(y))
            s.rows.push_back(std::move(r));
    }
    return s;
}

std::int64_t parse_count(std::string_view cell, const std::string& file, std::size_t line)
{
    std::string digits;
    for (char c : trim(cell))
        if (c != ',' && c != '_')
            digits += c;
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size() || v < 0)
        throw ParseError(file, line, "'" + std::string(cell) + "' is not a count");
    return v;
}

} // namespace

bool PatternRule::matches(const WordEntry& e) const
{
    if (!tag_key.empty())
        return e.has_tag(tag_key) && e.tag(tag_key) == tag_value;
    if (suffix.empty() || e.form.size() <= suffix.size())
        return false;
    if (e.form.compare(e.form.size() - suffix.size(), suffix.size(), suffix) != 0)
        return false;
    return !stoplist.count(e.form);
}

PatternRule PatternRule::parse(const std::string& text)
{
    const auto s = std::string(trim(text));
    if (s.empty())
        throw ArgumentError("empty pattern specification");
    PatternRule r;
    if (const auto eq = s.find('='); eq != std::string::npos) {
        r.tag_key = s.substr(0, eq);
        r.tag_value = s.substr(eq + 1);
        if (r.tag_key.empty() || r.tag_value.empty())
            throw ArgumentError("pattern '" + s + "': expected key=value");
        r.name = r.tag_value;
    } else {
        r.suffix = s.front() == '-' ? s.substr(1) : s;
        if (r.suffix.empty())
            throw ArgumentError("pattern '" + s + "': empty suffix");
        r.name = "-" + r.suffix;
    }
    return r;
}

std::vector<GrowthPoint> growth_curve(const std::vector<WordEntry>& entries,
                                      const std::function<bool(const WordEntry&)>& filter)
{
    std::map<int, std::vector<const std::string*>> years;
    for (const auto& e : entries)
        if (!filter || filter(e))
            years[year_of(e)].push_back(&e.form);
    std::set<std::string> seen;
    std::vector<GrowthPoint> out;
    for (const auto& [y, forms] : years) {
        for (const auto* f : forms)
            seen.insert(*f);
        out.push_back({y, Eigen::Index(seen.size())});
    }
    return out;
}

std::map<int, std::vector<std::string>> detect_new_types(const std::vector<WordEntry>& input,
                                                         const std::vector<WordEntry>& output)
{
    std::map<int, std::set<std::string>> read, written;
    for (const auto& e : input)
        read[year_of(e)].insert(e.form);
    for (const auto& e : output)
        written[year_of(e)].insert(e.form);

    std::map<int, std::vector<std::string>> out;
    std::set<std::string> known;
    auto next_read = read.begin();
    for (const auto& [y, forms] : written) {
        for (; next_read != read.end() && next_read->first <= y; ++next_read)
            known.insert(next_read->second.begin(), next_read->second.end());
        auto& fresh = out[y];
        for (const auto& w : forms)
            if (!known.count(w))
                fresh.push_back(w);
        known.insert(forms.begin(), forms.end());
    }
    return out;
}

std::vector<PatternYearStats> pattern_year_table(const std::vector<WordEntry>& input,
                                                 const std::vector<WordEntry>& output,
                                                 const std::vector<PatternRule>& patterns,
                                                 const EmbeddingTable& embeddings, const PatternTableOptions& opts)
{
    std::set<int> output_years;
    for (const auto& e : output)
        output_years.insert(year_of(e));
    for (const auto& e : input)
        year_of(e);

    std::vector<std::vector<PatternYearStats>> parts(patterns.size());
    const auto* emb = embeddings.empty() ? nullptr : &embeddings;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t p = 0; p < std::ptrdiff_t(patterns.size()); ++p)
        parts[std::size_t(p)] =
            sweep_pattern(patterns[std::size_t(p)], input, output, output_years, emb, opts.distance).rows;

    std::vector<PatternYearStats> rows;
    for (auto& part : parts)
        for (auto& r : part)
            rows.push_back(std::move(r));
    return rows;
}

double PatternTotals::p_narrow() const
{
    return input_tokens > 0 ? double(input_hapaxes) / double(input_tokens) : 0.0;
}

std::optional<double> PatternTotals::recycle_rate() const
{
    if (!recycled || input_types == 0)
        return std::nullopt;
    return double(*recycled) / double(input_types);
}

std::vector<PatternTotals> pattern_totals(const std::vector<WordEntry>& input, const std::vector<WordEntry>& output,
                                          const std::vector<PatternRule>& patterns)
{
    std::vector<PatternTotals> out;
    for (const auto& rule : patterns) {
        PatternTotals t;
        t.pattern = rule.name;
        std::map<std::string, std::int64_t> read, written;
        for (const auto& e : input)
            if (rule.matches(e))
                read[e.form] += e.frequency;
        for (const auto& e : output)
            if (rule.matches(e))
                written[e.form] += e.frequency;
        t.input_types = Eigen::Index(read.size());
        for (const auto& [w, f] : read) {
            t.input_tokens += f;
            if (f == 1)
                ++t.input_hapaxes;
        }
        t.output_types = Eigen::Index(written.size());
        for (const auto& [w, f] : written)
            t.output_tokens += f;
        const auto s = sweep_pattern(rule, input, output, {}, nullptr, DistanceMetric::euclidean);
        t.new_output_types = s.new_output_total;
        t.recycled = Eigen::Index(s.recycled.size());
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<PatternTotals> load_pattern_totals(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open pattern table '" + path.string() + "'");
    const std::string file = path.string();
    std::string line;
    if (!std::getline(in, line))
        throw SchemaError(file + ": missing header row");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    const auto header = split(line, '\t');
    auto col = [&](const std::string& name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (trim(header[i]) == name)
                return i;
        return std::nullopt;
    };
    const char* required[] = {"pattern",      "input_types",   "input_tokens",    "input_hapaxes",
                              "output_types", "output_tokens", "new_output_types"};
    std::size_t idx[7];
    for (int i = 0; i < 7; ++i) {
        const auto c = col(required[i]);
        if (!c)
            throw SchemaError(file + ": missing column '" + required[i] + "'");
        idx[i] = *c;
    }
    const auto recycled = col("recycled");

    std::vector<PatternTotals> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (trim(line).empty())
            continue;
        const auto cells = split(line, '\t');
        if (cells.size() != header.size())
            throw ParseError(file, lineno, "wrong number of columns");
        PatternTotals t;
        t.pattern = std::string(trim(cells[idx[0]]));
        t.input_types = parse_count(cells[idx[1]], file, lineno);
        t.input_tokens = parse_count(cells[idx[2]], file, lineno);
        t.input_hapaxes = parse_count(cells[idx[3]], file, lineno);
        t.output_types = parse_count(cells[idx[4]], file, lineno);
        t.output_tokens = parse_count(cells[idx[5]], file, lineno);
        t.new_output_types = parse_count(cells[idx[6]], file, lineno);
        if (recycled) {
            const auto v = trim(cells[*recycled]);
            if (!v.empty() && v != "NA")
                t.recycled = parse_count(v, file, lineno);
        }
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<std::pair<std::string, double>> load_labeled_series(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open series file '" + path.string() + "'");
    const std::string file = path.string();
    std::string line;
    if (!std::getline(in, line))
        throw SchemaError(file + ": missing header row");
    std::vector<std::pair<std::string, double>> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (trim(line).empty())
            continue;
        const auto cells = split(line, ',');
        if (cells.size() != 2)
            throw ParseError(file, lineno, "expected label,value");
        const auto v = trim(cells[1]);
        double x = 0;
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
        if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(x))
            throw ParseError(file, lineno, "'" + std::string(v) + "' is not a number");
        out.emplace_back(std::string(trim(cells[0])), x);
    }
    return out;
}

SpearmanResult spearman_test(std::span<const double> xs, std::span<const double> ys)
{
    SpearmanResult r;
    r.n = Eigen::Index(xs.size());
    r.rho = spearman(xs, ys);
    if (!r.rho)
        return r;
    const double rho = *r.rho;
    const double df = double(r.n - 2);
    if (df <= 0)
        return r;
    if (std::abs(rho) >= 1.0) {
        r.p_value = 0.0;
        return r;
    }
    const double t2 = rho * rho * df / (1.0 - rho * rho);
    Eigen::Array<double, 1, 1> a, b, x;
    a << df / 2;
    b << 0.5;
    x << df / (df + t2);
    r.p_value = Eigen::betainc(a, b, x)(0);
    return r;
}

} // namespace dlm
