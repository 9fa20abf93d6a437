#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "dlm/centroids.hpp"
#include "dlm/compounds.hpp"
#include "dlm/evaluation.hpp"
#include "dlm/productivity.hpp"

namespace dlm {

using Cell = std::variant<std::monostate, std::string, std::int64_t, double, bool>;

/// Column-ordered report. Missing values are std::monostate.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    explicit Table(std::vector<std::string> cols = {}) : columns(std::move(cols)) {}
    void add(std::vector<Cell> row);
    std::size_t size() const noexcept { return rows.size(); }
};

enum class ReportFormat { csv, json };

ReportFormat parse_report_format(const std::string& s);

/// Six significant digits; NaN prints as NA, infinities as Inf/-Inf.
std::string format_double(double v);
std::string format_cell(const Cell& c);

std::string to_csv(const Table& t);
std::string to_json(const Table& t);

/// Writes the table, creating parent directories. Throws IoError on failure.
void emit_report(const Table& t, ReportFormat format, const std::filesystem::path& path);

/// Parses a CSV written by to_csv (RFC 4180 quoting); cells stay strings.
Table read_csv(const std::filesystem::path& path);
Table parse_csv(const std::string& text);

Table accuracy_words_table(const AccuracyReport& r);
Table accuracy_summary_table(const AccuracyReport& r);
Table cue_centroid_table(const CueCentroidMatrix& m);
Table ranked_cues_table(const CueCentroidMatrix& m, std::size_t top = 0);
Table exponent_summary_table(const std::vector<ExponentSummary>& s);
Table transparency_table(const std::vector<Transparency>& t);
Table boundary_table(const BoundaryAnalysis& b);
Table pivot_table(const std::vector<PivotIsland>& islands);
Table pattern_year_csv_table(const std::vector<PatternYearStats>& rows);
Table pattern_totals_table(const std::vector<PatternTotals>& rows);
Table growth_table(const std::map<std::string, std::vector<GrowthPoint>>& curves, const std::string& corpus);

} // namespace dlm
