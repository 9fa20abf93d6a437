#include "dlm/compounds.hpp"

#include "dlm/error.hpp"
#include "dlm/stats.hpp"
#include "dlm/text.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

namespace dlm {

namespace {

std::string strip_hyphens(std::string s)
{
    s.erase(std::remove(s.begin(), s.end(), '-'), s.end());
    return s;
}

void push_unique(std::vector<std::string>& v, const std::string& s)
{
    if (std::find(v.begin(), v.end(), s) == v.end())
        v.push_back(s);
}

const std::string& pivot_of(const CompoundParse& p, PivotPosition pos)
{
    return pos == PivotPosition::left ? p.left : p.right;
}

const std::string& partner_of(const CompoundParse& p, PivotPosition pos)
{
    return pos == PivotPosition::left ? p.right : p.left;
}

} // namespace

CompoundParse parse_compound(const std::string& compound, const std::string& left, const std::string& right,
                             int n, std::string_view boundary, bool ignore_hyphens)
{
    if (left.empty() || right.empty())
        throw ArgumentError("compound '" + compound + "': empty constituent");
    const auto cps = utf8_decode(compound);
    const auto lcp = utf8_decode(left);
    const auto rcp = utf8_decode(right);
    const bool spelled = ignore_hyphens ? strip_hyphens(compound) == strip_hyphens(left) + strip_hyphens(right)
                                        : compound == left + right;
    const bool framed = cps.size() >= lcp.size() + rcp.size() && cps.compare(0, lcp.size(), lcp) == 0 &&
                        cps.compare(cps.size() - rcp.size(), rcp.size(), rcp) == 0;
    if (!spelled || !framed)
        throw ArgumentError("compound '" + compound + "' is not spelled '" + left + "' + '" + right + "'");

    CompoundParse p;
    p.compound = compound;
    p.left = left;
    p.right = right;
    const auto mark = utf8_decode(boundary).size();
    const auto padded = cps.size() + 2 * mark;
    const auto left_end = mark + lcp.size();            // first position after the left constituent
    const auto right_start = padded - mark - rcp.size(); // first position of the right constituent
    const auto grams = extract_ngrams(compound, n, boundary);
    const auto width = padded < std::size_t(n) ? padded : std::size_t(n);
    for (std::size_t s = 0; s < grams.size(); ++s) {
        const auto end = s + width;
        const bool covers_left = s < left_end && end > mark;
        const bool covers_right = end > right_start && s < padded - mark;
        if (covers_left && covers_right)
            push_unique(p.boundary_cues, grams[s]);
        else if (covers_left)
            push_unique(p.left_cues, grams[s]);
        else if (covers_right)
            push_unique(p.right_cues, grams[s]);
    }
    return p;
}

std::vector<CompoundParse> load_parses(const std::filesystem::path& path, int n, std::string_view boundary,
                                       bool lowercase)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open parse file '" + path.string() + "'");
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
    const auto c = col("compound"), l = col("left"), r = col("right"), f = col("frequency");
    if (!c || !l || !r)
        throw SchemaError(file + ": parse file needs columns compound, left, right");
    std::vector<CompoundParse> out;
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
        auto norm = [&](const std::string& s) {
            const std::string t(trim(s));
            return lowercase ? to_lower(t) : t;
        };
        try {
            auto p = parse_compound(norm(cells[*c]), norm(cells[*l]), norm(cells[*r]), n, boundary);
            if (f) {
                const auto v = trim(cells[*f]);
                std::int64_t freq = 0;
                const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), freq);
                if (ec != std::errc{} || ptr != v.data() + v.size() || freq < 0)
                    throw ParseError(file, lineno, "frequency '" + std::string(v) + "' is not a count");
                p.frequency = freq;
            }
            out.push_back(std::move(p));
        } catch (const ArgumentError& e) {
            throw ParseError(file, lineno, e.what());
        }
    }
    return out;
}

BoundaryAnalysis boundary_cue_proportions(const std::vector<CompoundParse>& parses, const LinearMapping& F,
                                          const CueIndex& cues, const EmbeddingTable& embeddings)
{
    if (F.in_dim() != cues.size())
        throw ArgumentError("boundary_cue_proportions: mapping rows do not match the cue index");
    if (F.out_dim() != embeddings.dim())
        throw ArgumentError("boundary_cue_proportions: mapping and embeddings differ in dimension");
    BoundaryAnalysis out;
    for (const auto& p : parses) {
        std::string missing;
        for (const auto* w : {&p.compound, &p.left, &p.right})
            if (!embeddings.contains(*w))
                missing = *w;
        if (!missing.empty()) {
            out.skipped.push_back({p.compound, "no embedding for '" + missing + "'"});
            continue;
        }
        const auto vc = embeddings.at(p.compound);
        const auto vl = embeddings.at(p.left);
        const auto vr = embeddings.at(p.right);

        bool unknown_cue = false;
        auto proportion = [&](const std::vector<std::string>& group, Eigen::Index& count) -> std::optional<double> {
            count = Eigen::Index(group.size());
            if (group.empty())
                return std::nullopt;
            Eigen::Index wins = 0;
            for (const auto& cue : group) {
                const auto id = cues.id(cue);
                if (!id) {
                    unknown_cue = true;
                    return std::nullopt;
                }
                const auto f = F.weights.row(*id);
                const double rc = pearson(f, vc), rl = pearson(f, vl), rr = pearson(f, vr);
                if (rc > rl && rc > rr)
                    ++wins;
            }
            return double(wins) / double(group.size());
        };
        BoundaryProportions bp;
        bp.compound = p.compound;
        bp.boundary = proportion(p.boundary_cues, bp.boundary_count);
        bp.left = proportion(p.left_cues, bp.left_count);
        bp.right = proportion(p.right_cues, bp.right_count);
        if (unknown_cue) {
            out.skipped.push_back({p.compound, "cue missing from the cue index"});
            continue;
        }
        out.compounds.push_back(std::move(bp));
    }
    for (const auto& s : out.skipped)
        std::clog << "boundary analysis: skipped '" << s.compound << "': " << s.reason << '\n';
    return out;
}

CaossMapping caoss_fit(const Eigen::Ref<const Eigen::MatrixXd>& L, const Eigen::Ref<const Eigen::MatrixXd>& R,
                       const Eigen::Ref<const Eigen::MatrixXd>& C, double lambda)
{
    if (L.rows() != R.rows() || L.rows() != C.rows())
        throw ArgumentError("caoss_fit: L, R and C need equal row counts");
    if (L.cols() != R.cols() || L.cols() != C.cols())
        throw ArgumentError("caoss_fit: L, R and C need equal embedding dimension");
    const Eigen::Index d = L.cols();
    Eigen::MatrixXd X(L.rows(), 2 * d);
    X << L, R;
    const auto W = solve_endstate(X, C, lambda).weights;
    CaossMapping m;
    m.left = W.topRows(d);
    m.right = W.bottomRows(d);
    m.lambda = lambda;
    return m;
}

Eigen::MatrixXd caoss_predict(const CaossMapping& m, const Eigen::Ref<const Eigen::MatrixXd>& L,
                              const Eigen::Ref<const Eigen::MatrixXd>& R, CaossMode mode)
{
    if (L.rows() != R.rows() || L.cols() != R.cols())
        throw ArgumentError("caoss_predict: L and R shapes differ");
    if (mode == CaossMode::additive)
        return L + R;
    if (L.cols() != m.left.rows() || R.cols() != m.right.rows())
        throw ArgumentError("caoss_predict: embedding dimension does not match the mapping");
    return L * m.left + R * m.right;
}

std::vector<std::string> intruder_candidates(const std::string& pivot, PivotPosition position,
                                             const std::vector<CompoundParse>& parses)
{
    std::set<std::string> partners;
    for (const auto& p : parses)
        if (pivot_of(p, position) == pivot)
            partners.insert(partner_of(p, position));
    std::vector<std::string> out;
    for (const auto& p : parses) {
        if (pivot_of(p, position) == pivot)
            continue;
        if (partners.count(p.left) || partners.count(p.right))
            push_unique(out, p.compound);
    }
    return out;
}

PivotIsland pivot_island(const std::string& pivot, PivotPosition position, const std::vector<CompoundParse>& parses,
                         const EmbeddingTable& embeddings, const std::vector<std::string>& candidates,
                         IntervalMethod method)
{
    PivotIsland island;
    island.pivot = pivot;
    island.position = position;
    std::map<std::string, std::int64_t> freq;
    for (const auto& p : parses)
        if (pivot_of(p, position) == pivot)
            freq[p.compound] += p.frequency;
    if (freq.empty())
        throw ArgumentError("pivot '" + pivot + "' occurs in no compound at that position");

    island.types = Eigen::Index(freq.size());
    for (const auto& [word, f] : freq) {
        island.tokens += f;
        if (f == 1)
            ++island.hapaxes;
        if (embeddings.contains(word))
            island.compounds.push_back(word);
    }
    island.productivity = island.tokens > 0 ? double(island.hapaxes) / double(island.tokens) : 0.0;
    if (island.compounds.empty())
        throw ArgumentError("pivot '" + pivot + "': no compound has an embedding");

    island.centroid = Eigen::VectorXd::Zero(embeddings.dim());
    for (const auto& w : island.compounds)
        island.centroid += embeddings.at(w).transpose();
    island.centroid /= double(island.compounds.size());

    bool undefined = false;
    for (const auto& w : island.compounds) {
        const double r = pearson(embeddings.at(w).transpose(), island.centroid);
        undefined = undefined || std::isnan(r);
        island.correlations.push_back(r);
    }
    island.degenerate = island.compounds.size() == 1 || undefined;
    if (undefined) {
        island.lower = island.upper = std::numeric_limits<double>::quiet_NaN();
        island.members = island.compounds;
        island.candidates = Eigen::Index(candidates.size());
        return island;
    }
    if (method == IntervalMethod::percentile || island.correlations.size() == 1) {
        island.lower = quantile(island.correlations, 0.025);
        island.upper = quantile(island.correlations, 0.975);
    } else {
        const Eigen::Map<const Eigen::VectorXd> r(island.correlations.data(), Eigen::Index(island.correlations.size()));
        const double mean = r.mean();
        const double sd = std::sqrt((r.array() - mean).square().sum() / double(r.size() - 1));
        island.lower = mean - 1.96 * sd;
        island.upper = mean + 1.96 * sd;
    }
    for (std::size_t i = 0; i < island.compounds.size(); ++i)
        if (island.correlations[i] >= island.lower && island.correlations[i] <= island.upper)
            island.members.push_back(island.compounds[i]);
    island.candidates = Eigen::Index(candidates.size());
    for (const auto& c : candidates) {
        if (freq.count(c) || !embeddings.contains(c))
            continue;
        const double r = pearson(embeddings.at(c).transpose(), island.centroid);
        if (r >= island.lower && r <= island.upper)
            island.intruders.push_back(c);
    }
    return island;
}

} // namespace dlm
